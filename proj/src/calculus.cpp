#include "alab/calculus.hpp"

#include "alab/error.hpp"

namespace alab {

namespace {

std::size_t checked_size(const Chart& chart, const std::vector<Expr>& comps, const char* what) {
  if (static_cast<int>(comps.size()) != chart->dim()) {
    fail(ErrorKind::InvalidArgument, std::string(what) + " has " + std::to_string(comps.size()) +
                                         " components on a chart of dimension " + std::to_string(chart->dim()));
  }
  return comps.size();
}

std::vector<Expr> parse_all(const Chart& chart, const std::vector<std::string>& comps) {
  std::vector<Expr> out;
  for (const auto& c : comps) out.push_back(parse_expression(c, chart->coordinates()));
  return out;
}

AntisymmetricTable parse_table(const Chart& chart, const std::vector<std::tuple<int, int, std::string>>& entries) {
  AntisymmetricTable t(chart->dim());
  for (const auto& [i, j, text] : entries) t.set(i, j, t.get(i, j) + parse_expression(text, chart->coordinates()));
  return t;
}

}  // namespace

// AntisymmetricTable --------------------------------------------------------

AntisymmetricTable::AntisymmetricTable(int n) : n_(n), upper_(static_cast<std::size_t>(n * (n - 1) / 2)) {}

std::size_t AntisymmetricTable::index(int i, int j) const {
  // i < j; row-major strict upper triangle.
  return static_cast<std::size_t>(i * n_ - i * (i + 1) / 2 + (j - i - 1));
}

Expr AntisymmetricTable::get(int i, int j) const {
  if (i < 0 || j < 0 || i >= n_ || j >= n_) fail(ErrorKind::InvalidArgument, "antisymmetric index out of range");
  if (i == j) return Expr();
  return i < j ? upper_[index(i, j)] : -upper_[index(j, i)];
}

void AntisymmetricTable::set(int i, int j, const Expr& value) {
  if (i < 0 || j < 0 || i >= n_ || j >= n_) fail(ErrorKind::InvalidArgument, "antisymmetric index out of range");
  if (i == j) {
    if (!value.is_zero()) fail(ErrorKind::InvalidArgument, "diagonal of an antisymmetric table must vanish");
    return;
  }
  if (i < j) {
    upper_[index(i, j)] = value;
  } else {
    upper_[index(j, i)] = -value;
  }
}

Expr ThreeForm::get(int i, int j, int k) const {
  if (i == j || j == k || i == k) return Expr();
  int idx[3] = {i, j, k};
  int sign = 1;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 2 - a; ++b) {
      if (idx[b] > idx[b + 1]) {
        std::swap(idx[b], idx[b + 1]);
        sign = -sign;
      }
    }
  }
  std::size_t pos = 0;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      for (int c = b + 1; c < n; ++c, ++pos) {
        if (a == idx[0] && b == idx[1] && c == idx[2]) return sign > 0 ? upper[pos] : -upper[pos];
      }
    }
  }
  return Expr();
}

Eigen::MatrixXd ExprMatrix::eval(std::span<const double> point) const {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = (*this)(i, j).eval(point);
  }
  return m;
}

// Constructors --------------------------------------------------------------

ScalarField scalar(const Chart& chart, std::string_view text) {
  return {chart, parse_expression(text, chart->coordinates())};
}

VectorField vector_field(const Chart& chart, const std::vector<std::string>& comps) {
  VectorField v{chart, parse_all(chart, comps)};
  checked_size(chart, v.comp, "vector field");
  return v;
}

OneForm one_form(const Chart& chart, const std::vector<std::string>& comps) {
  OneForm a{chart, parse_all(chart, comps)};
  checked_size(chart, a.comp, "one-form");
  return a;
}

TwoForm two_form(const Chart& chart, const std::vector<std::tuple<int, int, std::string>>& entries) {
  return {chart, parse_table(chart, entries)};
}

Bivector bivector(const Chart& chart, const std::vector<std::tuple<int, int, std::string>>& entries) {
  return {chart, parse_table(chart, entries)};
}

SmoothMap smooth_map(const Chart& source, const Chart& target, const std::vector<std::string>& comps) {
  SmoothMap f{source, target, parse_all(source, comps)};
  if (static_cast<int>(f.comp.size()) != target->dim()) {
    fail(ErrorKind::InvalidArgument, "map into '" + target->name() + "' needs " + std::to_string(target->dim()) +
                                         " components, got " + std::to_string(f.comp.size()));
  }
  return f;
}

VectorField coordinate_field(const Chart& chart, int i) {
  VectorField v = zero_vector_field(chart);
  v.comp.at(static_cast<std::size_t>(i)) = Expr(1);
  return v;
}

OneForm coordinate_differential(const Chart& chart, int i) {
  OneForm a = zero_one_form(chart);
  a.comp.at(static_cast<std::size_t>(i)) = Expr(1);
  return a;
}

VectorField zero_vector_field(const Chart& chart) {
  return {chart, std::vector<Expr>(static_cast<std::size_t>(chart->dim()))};
}

OneForm zero_one_form(const Chart& chart) { return {chart, std::vector<Expr>(static_cast<std::size_t>(chart->dim()))}; }

TwoForm zero_two_form(const Chart& chart) { return {chart, AntisymmetricTable(chart->dim())}; }

SmoothMap identity_map(const Chart& chart) {
  SmoothMap f{chart, chart, {}};
  for (int i = 0; i < chart->dim(); ++i) f.comp.push_back(Expr::variable(i));
  return f;
}

// Algebra --------------------------------------------------------------------

namespace {

std::vector<Expr> combine(const std::vector<Expr>& a, const std::vector<Expr>& b, int sign) {
  std::vector<Expr> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = sign > 0 ? a[i] + b[i] : a[i] - b[i];
  return out;
}

std::vector<Expr> scale(const Expr& f, const std::vector<Expr>& a) {
  std::vector<Expr> out;
  out.reserve(a.size());
  for (const auto& e : a) out.push_back(f * e);
  return out;
}

}  // namespace

VectorField operator+(const VectorField& a, const VectorField& b) {
  require_same_chart(a.chart, b.chart, "vector field sum");
  return {a.chart, combine(a.comp, b.comp, 1)};
}

VectorField operator-(const VectorField& a, const VectorField& b) {
  require_same_chart(a.chart, b.chart, "vector field difference");
  return {a.chart, combine(a.comp, b.comp, -1)};
}

VectorField operator*(const Expr& f, const VectorField& a) { return {a.chart, scale(f, a.comp)}; }

OneForm operator+(const OneForm& a, const OneForm& b) {
  require_same_chart(a.chart, b.chart, "one-form sum");
  return {a.chart, combine(a.comp, b.comp, 1)};
}

OneForm operator-(const OneForm& a, const OneForm& b) {
  require_same_chart(a.chart, b.chart, "one-form difference");
  return {a.chart, combine(a.comp, b.comp, -1)};
}

OneForm operator*(const Expr& f, const OneForm& a) { return {a.chart, scale(f, a.comp)}; }

TwoForm operator+(const TwoForm& a, const TwoForm& b) {
  require_same_chart(a.chart, b.chart, "two-form sum");
  TwoForm out = zero_two_form(a.chart);
  int n = a.chart->dim();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) out.comp.set(i, j, a.comp.get(i, j) + b.comp.get(i, j));
  }
  return out;
}

TwoForm operator*(const Expr& f, const TwoForm& a) {
  TwoForm out = zero_two_form(a.chart);
  int n = a.chart->dim();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) out.comp.set(i, j, f * a.comp.get(i, j));
  }
  return out;
}

bool operator==(const VectorField& a, const VectorField& b) { return same_chart(a.chart, b.chart) && a.comp == b.comp; }
bool operator==(const OneForm& a, const OneForm& b) { return same_chart(a.chart, b.chart) && a.comp == b.comp; }
bool operator==(const TwoForm& a, const TwoForm& b) {
  if (!same_chart(a.chart, b.chart)) return false;
  int n = a.chart->dim();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!(a.comp.get(i, j) == b.comp.get(i, j))) return false;
    }
  }
  return true;
}

// Evaluation -----------------------------------------------------------------

double eval_and_derive(const ScalarField& f, std::span<const double> point, std::span<const int> order) {
  if (static_cast<int>(order.size()) != f.chart->dim()) {
    fail(ErrorKind::InvalidArgument, "multi-index length differs from chart dimension");
  }
  if (!f.chart->contains(point)) fail(ErrorKind::PointOutsideChart, "point is outside chart '" + f.chart->name() + "'");
  Expr e = f.expr;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] < 0) fail(ErrorKind::InvalidArgument, "negative derivative order");
    for (int k = 0; k < order[i]; ++k) e = e.diff(static_cast<int>(i));
  }
  return e.eval(point);
}

Eigen::VectorXd eval(const std::vector<Expr>& comps, std::span<const double> point) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(comps.size()));
  for (std::size_t i = 0; i < comps.size(); ++i) v(static_cast<Eigen::Index>(i)) = comps[i].eval(point);
  return v;
}

Eigen::MatrixXd eval(const AntisymmetricTable& table, std::span<const double> point) {
  int n = table.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      m(i, j) = table.get(i, j).eval(point);
      m(j, i) = -m(i, j);
    }
  }
  return m;
}

// Cartan calculus --------------------------------------------------------------

Expr apply(const VectorField& x, const Expr& f) {
  Expr out;
  for (std::size_t i = 0; i < x.comp.size(); ++i) {
    if (!x.comp[i].is_zero()) out += x.comp[i] * f.diff(static_cast<int>(i));
  }
  return out;
}

VectorField lie_bracket(const VectorField& x, const VectorField& y) {
  require_same_chart(x.chart, y.chart, "Lie bracket");
  VectorField out = zero_vector_field(x.chart);
  for (std::size_t i = 0; i < out.comp.size(); ++i) out.comp[i] = apply(x, y.comp[i]) - apply(y, x.comp[i]);
  return out;
}

OneForm exterior_d(const ScalarField& f) {
  OneForm a = zero_one_form(f.chart);
  for (int i = 0; i < f.chart->dim(); ++i) a.comp[static_cast<std::size_t>(i)] = f.expr.diff(i);
  return a;
}

TwoForm exterior_d(const OneForm& a) {
  int n = a.chart->dim();
  TwoForm b = zero_two_form(a.chart);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      b.comp.set(i, j, a.comp[static_cast<std::size_t>(j)].diff(i) - a.comp[static_cast<std::size_t>(i)].diff(j));
    }
  }
  return b;
}

ThreeForm exterior_d(const TwoForm& b) {
  int n = b.chart->dim();
  ThreeForm c{b.chart, n, {}};
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int k = j + 1; k < n; ++k) {
        c.upper.push_back(b.comp.get(j, k).diff(i) - b.comp.get(i, k).diff(j) + b.comp.get(i, j).diff(k));
      }
    }
  }
  return c;
}

ScalarField interior(const VectorField& x, const OneForm& a) {
  require_same_chart(x.chart, a.chart, "interior product");
  Expr out;
  for (std::size_t i = 0; i < a.comp.size(); ++i) out += x.comp[i] * a.comp[i];
  return {a.chart, out};
}

OneForm interior(const VectorField& x, const TwoForm& b) {
  require_same_chart(x.chart, b.chart, "interior product");
  int n = b.chart->dim();
  OneForm out = zero_one_form(b.chart);
  for (int j = 0; j < n; ++j) {
    Expr s;
    for (int i = 0; i < n; ++i) {
      if (!x.comp[static_cast<std::size_t>(i)].is_zero()) s += x.comp[static_cast<std::size_t>(i)] * b.comp.get(i, j);
    }
    out.comp[static_cast<std::size_t>(j)] = s;
  }
  return out;
}

TwoForm interior(const VectorField& x, const ThreeForm& c) {
  require_same_chart(x.chart, c.chart, "interior product");
  int n = c.n;
  TwoForm out = zero_two_form(c.chart);
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      Expr s;
      for (int i = 0; i < n; ++i) {
        if (!x.comp[static_cast<std::size_t>(i)].is_zero()) s += x.comp[static_cast<std::size_t>(i)] * c.get(i, j, k);
      }
      out.comp.set(j, k, s);
    }
  }
  return out;
}

ScalarField lie_derivative(const VectorField& x, const ScalarField& f) {
  require_same_chart(x.chart, f.chart, "Lie derivative");
  return {f.chart, apply(x, f.expr)};
}

OneForm lie_derivative(const VectorField& x, const OneForm& a) {
  return exterior_d(interior(x, a)) + interior(x, exterior_d(a));
}

TwoForm lie_derivative(const VectorField& x, const TwoForm& b) {
  return exterior_d(interior(x, b)) + interior(x, exterior_d(b));
}

Form cartan(CartanOp op, const Form& form, const VectorField* x) {
  if (op == CartanOp::ExteriorD) {
    if (auto f = std::get_if<ScalarField>(&form)) return exterior_d(*f);
    if (auto a = std::get_if<OneForm>(&form)) return exterior_d(*a);
    if (auto b = std::get_if<TwoForm>(&form)) return exterior_d(*b);
    fail(ErrorKind::DegreeMismatch, "exterior derivative of a 3-form is not supported");
  }
  if (x == nullptr) fail(ErrorKind::DegreeMismatch, "operation needs a vector field argument");
  if (op == CartanOp::Interior) {
    if (auto a = std::get_if<OneForm>(&form)) return interior(*x, *a);
    if (auto b = std::get_if<TwoForm>(&form)) return interior(*x, *b);
    if (auto c = std::get_if<ThreeForm>(&form)) return interior(*x, *c);
    fail(ErrorKind::DegreeMismatch, "interior product of a function");
  }
  if (auto f = std::get_if<ScalarField>(&form)) return lie_derivative(*x, *f);
  if (auto a = std::get_if<OneForm>(&form)) return lie_derivative(*x, *a);
  if (auto b = std::get_if<TwoForm>(&form)) return lie_derivative(*x, *b);
  fail(ErrorKind::DegreeMismatch, "Lie derivative of a 3-form is not supported");
}

VectorField sharp(const Bivector& pi, const OneForm& a) {
  require_same_chart(pi.chart, a.chart, "sharp");
  int n = pi.chart->dim();
  VectorField v = zero_vector_field(pi.chart);
  for (int j = 0; j < n; ++j) {
    Expr s;
    for (int i = 0; i < n; ++i) {
      if (!a.comp[static_cast<std::size_t>(i)].is_zero()) s += pi.comp.get(j, i) * a.comp[static_cast<std::size_t>(i)];
    }
    v.comp[static_cast<std::size_t>(j)] = s;
  }
  return v;
}

Expr evaluate(const Bivector& pi, const OneForm& a, const OneForm& b) {
  int n = pi.chart->dim();
  Expr s;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) s += pi.comp.get(i, j) * a.comp[static_cast<std::size_t>(i)] * b.comp[static_cast<std::size_t>(j)];
    }
  }
  return s;
}

// Maps -----------------------------------------------------------------------

ExprMatrix jacobian(const SmoothMap& f) {
  int m = f.target->dim();
  int n = f.source->dim();
  ExprMatrix jac(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) jac(i, j) = f.comp[static_cast<std::size_t>(i)].diff(j);
  }
  return jac;
}

Eigen::MatrixXd jacobian_at(const SmoothMap& f, std::span<const double> point) { return jacobian(f).eval(point); }

Eigen::VectorXd apply_map(const SmoothMap& f, std::span<const double> point) { return eval(f.comp, point); }

SmoothMap compose(const SmoothMap& g, const SmoothMap& f) {
  require_same_chart(f.target, g.source, "composition");
  SmoothMap out{f.source, g.target, {}};
  for (const auto& c : g.comp) out.comp.push_back(c.substitute(f.comp));
  return out;
}

Expr pullback(const SmoothMap& f, const Expr& e) { return e.substitute(f.comp); }

ScalarField pullback(const SmoothMap& f, const ScalarField& g) {
  require_same_chart(f.target, g.chart, "pullback");
  return {f.source, pullback(f, g.expr)};
}

OneForm pullback(const SmoothMap& f, const OneForm& a) {
  require_same_chart(f.target, a.chart, "pullback");
  ExprMatrix jac = jacobian(f);
  OneForm out = zero_one_form(f.source);
  std::vector<Expr> pulled;
  for (const auto& c : a.comp) pulled.push_back(pullback(f, c));
  for (int j = 0; j < f.source->dim(); ++j) {
    Expr s;
    for (int i = 0; i < f.target->dim(); ++i) s += pulled[static_cast<std::size_t>(i)] * jac(i, j);
    out.comp[static_cast<std::size_t>(j)] = s;
  }
  return out;
}

TwoForm pullback(const SmoothMap& f, const TwoForm& b) {
  require_same_chart(f.target, b.chart, "pullback");
  ExprMatrix jac = jacobian(f);
  int m = f.target->dim();
  int n = f.source->dim();
  AntisymmetricTable pulled(m);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) pulled.set(i, j, pullback(f, b.comp.get(i, j)));
  }
  TwoForm out = zero_two_form(f.source);
  for (int k = 0; k < n; ++k) {
    for (int l = k + 1; l < n; ++l) {
      Expr s;
      for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
          // dF^i ^ dF^j restricted to (k,l).
          Expr minor = jac(i, k) * jac(j, l) - jac(i, l) * jac(j, k);
          if (!minor.is_zero()) s += pulled.get(i, j) * minor;
        }
      }
      out.comp.set(k, l, s);
    }
  }
  return out;
}

Eigen::VectorXd pushforward(const SmoothMap& f, std::span<const double> point, const Eigen::VectorXd& v) {
  if (v.size() != f.source->dim()) fail(ErrorKind::InvalidArgument, "tangent vector has the wrong dimension");
  return jacobian_at(f, point) * v;
}

}  // namespace alab
