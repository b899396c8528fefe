#include "alab/algebroid.hpp"

#include <cmath>

#include "alab/error.hpp"
#include "alab/linalg.hpp"

namespace alab {

ExprMatrix LieAlgebroidModel::anchor_matrix() const {
  ExprMatrix m(base->dim(), rank);
  for (int i = 0; i < rank; ++i) {
    for (int j = 0; j < base->dim(); ++j) m(j, i) = anchor[static_cast<std::size_t>(i)].comp[static_cast<std::size_t>(j)];
  }
  return m;
}

Algebroid make_algebroid(std::string label, Chart base, std::vector<VectorField> anchor,
                         std::vector<AntisymmetricTable> structure, bool opposite) {
  int r = static_cast<int>(anchor.size());
  if (static_cast<int>(structure.size()) != r) {
    fail(ErrorKind::InvalidArgument, "algebroid '" + label + "': need one structure table per frame element");
  }
  for (const auto& v : anchor) {
    require_same_chart(v.chart, base, "algebroid '" + label + "' anchor");
    if (static_cast<int>(v.comp.size()) != base->dim()) fail(ErrorKind::InvalidArgument, "anchor column has wrong size");
  }
  for (const auto& t : structure) {
    if (t.size() != r) fail(ErrorKind::InvalidArgument, "algebroid '" + label + "': structure table has wrong size");
  }
  auto a = std::make_shared<LieAlgebroidModel>();
  a->label = std::move(label);
  a->base = std::move(base);
  a->rank = r;
  a->anchor = std::move(anchor);
  a->structure = std::move(structure);
  a->opposite = opposite;
  return a;
}

// Sections ---------------------------------------------------------------------

AlgebroidSection frame_section(const Algebroid& a, int i) {
  std::vector<Expr> coef(static_cast<std::size_t>(a->rank));
  coef.at(static_cast<std::size_t>(i)) = Expr(1);
  return {a, std::move(coef)};
}

AlgebroidSection section(const Algebroid& a, std::vector<Expr> coef) {
  if (static_cast<int>(coef.size()) != a->rank) fail(ErrorKind::InvalidArgument, "section has the wrong rank");
  return {a, std::move(coef)};
}

VectorField anchor_of(const AlgebroidSection& s) {
  VectorField v = zero_vector_field(s.algebroid->base);
  for (int i = 0; i < s.algebroid->rank; ++i) {
    const Expr& f = s.coef[static_cast<std::size_t>(i)];
    if (f.is_zero()) continue;
    v = v + f * s.algebroid->anchor[static_cast<std::size_t>(i)];
  }
  return v;
}

namespace {

void require_same_algebroid(const Algebroid& a, const Algebroid& b) {
  if (a != b) {
    fail(ErrorKind::AlgebroidMismatch, "sections of '" + a->label + "' and '" + b->label + "'");
  }
}

double norm_at(const std::vector<Expr>& comps, const Point& p) {
  double s = 0.0;
  for (const auto& e : comps) {
    if (e.is_zero()) continue;
    double v = e.eval(p);
    s += v * v;
  }
  return std::sqrt(s);
}

}  // namespace

AlgebroidSection operator+(const AlgebroidSection& a, const AlgebroidSection& b) {
  require_same_algebroid(a.algebroid, b.algebroid);
  AlgebroidSection s = a;
  for (std::size_t i = 0; i < s.coef.size(); ++i) s.coef[i] += b.coef[i];
  return s;
}

AlgebroidSection operator*(const Expr& f, const AlgebroidSection& a) {
  AlgebroidSection s = a;
  for (auto& c : s.coef) c = f * c;
  return s;
}

AlgebroidSection bracket(const AlgebroidSection& a, const AlgebroidSection& b) {
  require_same_algebroid(a.algebroid, b.algebroid);
  const auto& A = *a.algebroid;
  const int r = A.rank;
  std::vector<Expr> out(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) {
    const Expr& f = a.coef[static_cast<std::size_t>(i)];
    if (f.is_zero()) continue;
    for (int j = 0; j < r; ++j) {
      if (i == j) continue;
      const Expr& g = b.coef[static_cast<std::size_t>(j)];
      if (g.is_zero()) continue;
      Expr fg = f * g;
      for (int k = 0; k < r; ++k) {
        Expr c = A.c(k, i, j);
        if (!c.is_zero()) out[static_cast<std::size_t>(k)] += fg * c;
      }
    }
  }
  VectorField ra = anchor_of(a);
  VectorField rb = anchor_of(b);
  for (int j = 0; j < r; ++j) {
    out[static_cast<std::size_t>(j)] += apply(ra, b.coef[static_cast<std::size_t>(j)]);
    out[static_cast<std::size_t>(j)] -= apply(rb, a.coef[static_cast<std::size_t>(j)]);
  }
  return {a.algebroid, std::move(out)};
}

CheckReport check_algebroid_axioms(const LieAlgebroidModel& model, const CheckOptions& opt) {
  // Non-owning alias so sections can refer to the model.
  Algebroid a(std::shared_ptr<const LieAlgebroidModel>{}, &model);
  const int r = model.rank;
  std::vector<std::vector<Expr>> anchor_defects;
  std::vector<std::vector<Expr>> jacobi_defects;
  std::vector<std::vector<AlgebroidSection>> br(static_cast<std::size_t>(r),
                                                std::vector<AlgebroidSection>(static_cast<std::size_t>(r)));
  for (int i = 0; i < r; ++i) {
    for (int j = i + 1; j < r; ++j) {
      auto ij = bracket(frame_section(a, i), frame_section(a, j));
      br[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = ij;
      VectorField defect = anchor_of(ij) - lie_bracket(model.anchor[static_cast<std::size_t>(i)],
                                                       model.anchor[static_cast<std::size_t>(j)]);
      anchor_defects.push_back(defect.comp);
    }
  }
  auto pair = [&](int i, int j) {
    return i < j ? br[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
                 : (Expr(-1) * br[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]);
  };
  for (int i = 0; i < r; ++i) {
    for (int j = i + 1; j < r; ++j) {
      for (int k = j + 1; k < r; ++k) {
        auto s = bracket(pair(i, j), frame_section(a, k)) + bracket(pair(j, k), frame_section(a, i)) +
                 bracket(pair(k, i), frame_section(a, j));
        jacobi_defects.push_back(s.coef);
      }
    }
  }

  CheckReport rep;
  rep.kind = "algebroid_axioms";
  rep.id = model.label;
  ResidualTracker t;
  t.declare("anchor");
  t.declare("jacobi");
  for (const auto& p : sample_points(model.base, opt.samples, opt.seed)) {
    for (const auto& d : anchor_defects) t.add("anchor", norm_at(d, p), p);
    for (const auto& d : jacobi_defects) t.add("jacobi", norm_at(d, p), p);
  }
  t.finish(rep, opt.tolerance);
  rep.notes["rank"] = std::to_string(r);
  return rep;
}

// Constructors --------------------------------------------------------------------

Algebroid make_tangent(const Chart& chart, std::string label) {
  std::vector<VectorField> anchor;
  for (int i = 0; i < chart->dim(); ++i) anchor.push_back(coordinate_field(chart, i));
  std::vector<AntisymmetricTable> structure(static_cast<std::size_t>(chart->dim()), AntisymmetricTable(chart->dim()));
  return make_algebroid(std::move(label), chart, std::move(anchor), std::move(structure));
}

Algebroid make_zero(const Chart& chart, std::string label) { return make_algebroid(std::move(label), chart, {}, {}); }

Algebroid cotangent_model(const Bivector& pi, std::string label) {
  const Chart& chart = pi.chart;
  const int n = chart->dim();
  std::vector<VectorField> anchor;
  for (int i = 0; i < n; ++i) anchor.push_back(sharp(pi, coordinate_differential(chart, i)));
  std::vector<AntisymmetricTable> structure(static_cast<std::size_t>(n), AntisymmetricTable(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      OneForm dxi = coordinate_differential(chart, i);
      OneForm dxj = coordinate_differential(chart, j);
      OneForm b = lie_derivative(anchor[static_cast<std::size_t>(i)], dxj) -
                  lie_derivative(anchor[static_cast<std::size_t>(j)], dxi) +
                  exterior_d(ScalarField{chart, evaluate(pi, dxi, dxj)});
      for (int k = 0; k < n; ++k) structure[static_cast<std::size_t>(k)].set(i, j, b.comp[static_cast<std::size_t>(k)]);
    }
  }
  return make_algebroid(std::move(label), chart, std::move(anchor), std::move(structure));
}

Algebroid make_cotangent(const Bivector& pi, std::string label, const CheckOptions& opt) {
  auto a = cotangent_model(pi, std::move(label));
  auto rep = check_algebroid_axioms(*a, opt);
  if (!rep.passed()) {
    fail(ErrorKind::PoissonConditionFailed,
         "bivector for '" + a->label + "' is not Poisson (axiom residual " + std::to_string(rep.residual) + ")");
  }
  return a;
}

Algebroid make_transformation(const Chart& chart, const std::vector<AntisymmetricTable>& constants,
                              const std::vector<VectorField>& action, std::string label, const CheckOptions& opt) {
  for (const auto& t : constants) {
    for (int i = 0; i < t.size(); ++i) {
      for (int j = i + 1; j < t.size(); ++j) {
        if (!t.get(i, j).is_constant()) {
          fail(ErrorKind::InvalidArgument, "Lie algebra structure constants must be constant");
        }
      }
    }
  }
  auto a = make_algebroid(std::move(label), chart, action, constants);
  auto rep = check_algebroid_axioms(*a, opt);
  if (!rep.passed()) {
    fail(ErrorKind::ActionNotHomomorphism, "vector fields of '" + a->label + "' do not represent the Lie algebra " +
                                               "(residual " + std::to_string(rep.residual) + ")");
  }
  return a;
}

Algebroid make_opposite(const Algebroid& a) {
  std::vector<VectorField> anchor;
  for (const auto& v : a->anchor) anchor.push_back(Expr(-1) * v);
  std::vector<AntisymmetricTable> structure;
  for (const auto& t : a->structure) {
    AntisymmetricTable s(t.size());
    for (int i = 0; i < t.size(); ++i) {
      for (int j = i + 1; j < t.size(); ++j) s.set(i, j, -t.get(i, j));
    }
    structure.push_back(std::move(s));
  }
  std::string label = a->opposite && a->label.size() > 1 && a->label.back() == '-' ? a->label.substr(0, a->label.size() - 1)
                                                                                    : a->label + "-";
  return make_algebroid(std::move(label), a->base, std::move(anchor), std::move(structure), !a->opposite);
}

Algebroid change_frame(const Algebroid& a, const ExprMatrix& g, const std::vector<Point>& samples) {
  const int r = a->rank;
  if (g.rows != r || g.cols != r) fail(ErrorKind::RankMismatch, "frame change must be rank x rank");
  ExprMatrix identity(r, r);
  for (int i = 0; i < r; ++i) identity(i, i) = Expr(1);
  ExprMatrix ginv = solve_symbolic(g, identity, samples);
  std::vector<AlgebroidSection> frame;
  std::vector<VectorField> anchor;
  for (int i = 0; i < r; ++i) {
    std::vector<Expr> coef(static_cast<std::size_t>(r));
    for (int j = 0; j < r; ++j) coef[static_cast<std::size_t>(j)] = g(j, i);
    frame.push_back(section(a, coef));
    anchor.push_back(anchor_of(frame.back()));
  }
  std::vector<AntisymmetricTable> structure(static_cast<std::size_t>(r), AntisymmetricTable(r));
  for (int i = 0; i < r; ++i) {
    for (int j = i + 1; j < r; ++j) {
      auto b = bracket(frame[static_cast<std::size_t>(i)], frame[static_cast<std::size_t>(j)]);
      for (int k = 0; k < r; ++k) {
        Expr s;
        for (int l = 0; l < r; ++l) s += ginv(k, l) * b.coef[static_cast<std::size_t>(l)];
        structure[static_cast<std::size_t>(k)].set(i, j, s);
      }
    }
  }
  return make_algebroid(a->label + "'", a->base, std::move(anchor), std::move(structure), a->opposite);
}

Expr shift_variables(const Expr& e, int offset, int dim) {
  if (offset == 0) return e;
  std::vector<Expr> vars;
  for (int j = 0; j < dim; ++j) vars.push_back(Expr::variable(offset + j));
  return e.substitute(vars);
}

Algebroid product_algebroid(const Algebroid& a1, const Algebroid& a2) {
  Chart chart = product_chart(a1->base, a2->base);
  const int n1 = a1->base->dim();
  const int n2 = a2->base->dim();
  const int r1 = a1->rank;
  const int r = r1 + a2->rank;
  std::vector<VectorField> anchor;
  for (const auto& v : a1->anchor) {
    VectorField w = zero_vector_field(chart);
    for (int j = 0; j < n1; ++j) w.comp[static_cast<std::size_t>(j)] = v.comp[static_cast<std::size_t>(j)];
    anchor.push_back(w);
  }
  for (const auto& v : a2->anchor) {
    VectorField w = zero_vector_field(chart);
    for (int j = 0; j < n2; ++j) {
      w.comp[static_cast<std::size_t>(n1 + j)] = shift_variables(v.comp[static_cast<std::size_t>(j)], n1, n2);
    }
    anchor.push_back(w);
  }
  std::vector<AntisymmetricTable> structure(static_cast<std::size_t>(r), AntisymmetricTable(r));
  for (int k = 0; k < r1; ++k) {
    for (int i = 0; i < r1; ++i) {
      for (int j = i + 1; j < r1; ++j) structure[static_cast<std::size_t>(k)].set(i, j, a1->c(k, i, j));
    }
  }
  for (int k = 0; k < a2->rank; ++k) {
    for (int i = 0; i < a2->rank; ++i) {
      for (int j = i + 1; j < a2->rank; ++j) {
        structure[static_cast<std::size_t>(r1 + k)].set(r1 + i, r1 + j, shift_variables(a2->c(k, i, j), n1, n2));
      }
    }
  }
  return make_algebroid(a1->label + "x" + a2->label, chart, std::move(anchor), std::move(structure));
}

// Morphisms ---------------------------------------------------------------------------

namespace {

void check_shapes(const MorphismData& m) {
  if (m.matrix.rows != m.target->rank || m.matrix.cols != m.source->rank) {
    fail(ErrorKind::RankMismatch, "morphism matrix is " + std::to_string(m.matrix.rows) + "x" +
                                      std::to_string(m.matrix.cols) + ", expected " + std::to_string(m.target->rank) +
                                      "x" + std::to_string(m.source->rank));
  }
  require_same_chart(m.base_map.source, m.source->base, "morphism base map source");
  require_same_chart(m.base_map.target, m.target->base, "morphism base map target");
}

}  // namespace

CheckReport check_morphism(const MorphismData& m, const CheckOptions& opt) {
  check_shapes(m);
  const auto& A1 = *m.source;
  const auto& A2 = *m.target;
  const int r1 = A1.rank;
  const int r2 = A2.rank;
  const int n2 = A2.base->dim();
  const ExprMatrix& phi = m.matrix;

  // Anchor compatibility: rho2(Phi e_i) o f - df(rho1 e_i).
  ExprMatrix jac = jacobian(m.base_map);
  std::vector<std::vector<Expr>> anchor_defects;
  std::vector<VectorField> rho2_pulled;
  for (const auto& v : A2.anchor) {
    VectorField w = zero_vector_field(A1.base);
    for (int j = 0; j < n2; ++j) w.comp[static_cast<std::size_t>(j)] = pullback(m.base_map, v.comp[static_cast<std::size_t>(j)]);
    rho2_pulled.push_back(w);
  }
  for (int i = 0; i < r1; ++i) {
    std::vector<Expr> d(static_cast<std::size_t>(n2));
    for (int j = 0; j < n2; ++j) {
      Expr s;
      for (int a = 0; a < r2; ++a) s += phi(a, i) * rho2_pulled[static_cast<std::size_t>(a)].comp[static_cast<std::size_t>(j)];
      for (int l = 0; l < A1.base->dim(); ++l) s -= jac(j, l) * A1.anchor[static_cast<std::size_t>(i)].comp[static_cast<std::size_t>(l)];
      d[static_cast<std::size_t>(j)] = s;
    }
    anchor_defects.push_back(std::move(d));
  }

  // Bracket compatibility in the canonical decomposition.
  std::vector<AntisymmetricTable> c2(static_cast<std::size_t>(r2), AntisymmetricTable(r2));
  for (int c = 0; c < r2; ++c) {
    for (int a = 0; a < r2; ++a) {
      for (int b = a + 1; b < r2; ++b) c2[static_cast<std::size_t>(c)].set(a, b, pullback(m.base_map, A2.c(c, a, b)));
    }
  }
  std::vector<std::vector<Expr>> bracket_defects;
  for (int i = 0; i < r1; ++i) {
    for (int j = i + 1; j < r1; ++j) {
      std::vector<Expr> d(static_cast<std::size_t>(r2));
      for (int c = 0; c < r2; ++c) {
        Expr lhs;
        for (int k = 0; k < r1; ++k) lhs += A1.c(k, i, j) * phi(c, k);
        Expr rhs;
        for (int a = 0; a < r2; ++a) {
          for (int b = 0; b < r2; ++b) {
            if (a == b) continue;
            Expr cc = c2[static_cast<std::size_t>(c)].get(a, b);
            if (!cc.is_zero()) rhs += phi(a, i) * phi(b, j) * cc;
          }
        }
        rhs += apply(A1.anchor[static_cast<std::size_t>(i)], phi(c, j));
        rhs -= apply(A1.anchor[static_cast<std::size_t>(j)], phi(c, i));
        d[static_cast<std::size_t>(c)] = lhs - rhs;
      }
      bracket_defects.push_back(std::move(d));
    }
  }

  // Closure of the graph subbundle under the product bracket, evaluated on
  // the graph of the base map.
  auto prod = product_algebroid(m.source, m.target);
  std::vector<AlgebroidSection> lifted;
  for (int i = 0; i < r1; ++i) {
    std::vector<Expr> coef(static_cast<std::size_t>(r1 + r2));
    coef[static_cast<std::size_t>(i)] = Expr(1);
    for (int a = 0; a < r2; ++a) coef[static_cast<std::size_t>(r1 + a)] = phi(a, i);
    lifted.push_back(section(prod, coef));
  }
  std::vector<AlgebroidSection> closure;
  for (int i = 0; i < r1; ++i) {
    for (int j = i + 1; j < r1; ++j) closure.push_back(bracket(lifted[static_cast<std::size_t>(i)], lifted[static_cast<std::size_t>(j)]));
  }

  CheckReport rep;
  rep.kind = "morphism";
  rep.id = A1.label + "->" + A2.label;
  ResidualTracker t;
  t.declare("anchor");
  t.declare("bracket");
  t.declare("graph_closure");
  for (const auto& p : sample_points(A1.base, opt.samples, opt.seed)) {
    for (const auto& d : anchor_defects) t.add("anchor", norm_at(d, p), p);
    for (const auto& d : bracket_defects) t.add("bracket", norm_at(d, p), p);
    if (!closure.empty()) {
      Point z = p;
      Eigen::VectorXd fp = apply_map(m.base_map, p);
      z.insert(z.end(), fp.data(), fp.data() + fp.size());
      Eigen::MatrixXd span(r1 + r2, r1);
      for (int i = 0; i < r1; ++i) span.col(i) = eval(lifted[static_cast<std::size_t>(i)].coef, z);
      for (const auto& s : closure) t.add("graph_closure", span_residual(span, eval(s.coef, z)), p);
    }
  }
  t.finish(rep, opt.tolerance);
  bool anchor_ok = rep.component("anchor") < opt.tolerance;
  bool bracket_ok = rep.component("bracket") < opt.tolerance;
  rep.notes["graph_anchor_tangency"] = anchor_ok ? "implied" : "not established";
  rep.notes["graph_bracket_closure"] = anchor_ok && bracket_ok ? "implied" : "not established";
  return rep;
}

MorphismData identity_morphism(const Algebroid& a) {
  ExprMatrix m(a->rank, a->rank);
  for (int i = 0; i < a->rank; ++i) m(i, i) = Expr(1);
  return {a, a, identity_map(a->base), m};
}

MorphismData anchor_morphism(const Algebroid& a) {
  return {a, make_tangent(a->base, "T" + a->base->name()), identity_map(a->base), a->anchor_matrix()};
}

Eigen::MatrixXd pullback_fiber(const LieAlgebroidModel& a, const SmoothMap& f, std::span<const double> x) {
  require_same_chart(f.target, a.base, "pullback fiber");
  if (!f.source->contains(x)) fail(ErrorKind::PointOutsideChart, "point is outside chart '" + f.source->name() + "'");
  const int n = a.base->dim();
  const int np = f.source->dim();
  Eigen::VectorXd fx = apply_map(f, x);
  Eigen::MatrixXd df = jacobian_at(f, x);
  Eigen::MatrixXd rho = a.anchor_matrix().eval(std::span<const double>(fx.data(), static_cast<std::size_t>(fx.size())));
  Eigen::MatrixXd both(n, np + a.rank);
  if (np) both.leftCols(np) = df;
  if (a.rank) both.rightCols(a.rank) = rho;
  if (numeric_rank(both) != n) {
    fail(ErrorKind::TransversalityFailed, "image of the anchor plus image of df does not span the tangent space of '" +
                                              a.base->name() + "'");
  }
  if (a.rank) both.rightCols(a.rank) = -rho;
  return null_space(both);
}

Eigen::MatrixXd fibered_product_fiber(const MorphismData& m1, const MorphismData& m2, std::span<const double> p,
                                      std::span<const double> q, double tol) {
  check_shapes(m1);
  check_shapes(m2);
  if (m1.target != m2.target && !same_chart(m1.target->base, m2.target->base)) {
    fail(ErrorKind::AlgebroidMismatch, "fibered product needs a common target");
  }
  Eigen::VectorXd fp = apply_map(m1.base_map, p);
  Eigen::VectorXd fq = apply_map(m2.base_map, q);
  if ((fp - fq).norm() > tol) fail(ErrorKind::BasePointMismatch, "base points do not map to the same point");
  Eigen::MatrixXd a = m1.matrix.eval(p);
  Eigen::MatrixXd b = m2.matrix.eval(q);
  const int r = m1.target->rank;
  Eigen::MatrixXd both(r, a.cols() + b.cols());
  if (a.cols()) both.leftCols(a.cols()) = a;
  if (b.cols()) both.rightCols(b.cols()) = b;
  if (numeric_rank(both) != r) fail(ErrorKind::SurjectivityFailed, "images of the two morphisms do not span the target fiber");
  Eigen::MatrixXd d1 = jacobian_at(m1.base_map, p);
  Eigen::MatrixXd d2 = jacobian_at(m2.base_map, q);
  Eigen::MatrixXd dd(d1.rows(), d1.cols() + d2.cols());
  if (d1.cols()) dd.leftCols(d1.cols()) = d1;
  if (d2.cols()) dd.rightCols(d2.cols()) = d2;
  if (numeric_rank(dd) != m1.target->base->dim()) {
    fail(ErrorKind::TransversalityFailed, "base maps are not transversal");
  }
  if (b.cols()) both.rightCols(b.cols()) = -b;
  return null_space(both);
}

}  // namespace alab
