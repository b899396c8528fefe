#include "alab/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

#include "alab/error.hpp"

namespace alab {

// ---------------------------------------------------------------------------
// Number

namespace {

using i128 = __int128;

bool fits(i128 v) {
  return v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max();
}

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

Number make_exact_or_real(i128 num, i128 den) {
  if (den == 0) fail(ErrorKind::EvaluationPole, "division by zero constant");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (fits(num) && fits(den)) {
    return Number::rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
  }
  return Number::real(static_cast<double>(num) / static_cast<double>(den));
}

}  // namespace

Number Number::rational(std::int64_t num, std::int64_t den) {
  if (den == 0) fail(ErrorKind::EvaluationPole, "division by zero constant");
  Number n;
  i128 a = num;
  i128 b = den;
  if (b < 0) {
    a = -a;
    b = -b;
  }
  i128 g = gcd128(a, b);
  if (g > 1) {
    a /= g;
    b /= g;
  }
  if (!fits(a) || !fits(b)) return real(static_cast<double>(num) / static_cast<double>(den));
  n.num_ = static_cast<std::int64_t>(a);
  n.den_ = static_cast<std::int64_t>(b);
  return n;
}

Number Number::real(double value) {
  if (std::isfinite(value) && value == std::floor(value) && std::abs(value) < 9.0e15) {
    return Number(static_cast<std::int64_t>(value));
  }
  Number n;
  n.exact_ = false;
  n.real_ = value;
  return n;
}

bool Number::is_zero() const noexcept { return exact_ ? num_ == 0 : real_ == 0.0; }
bool Number::is_one() const noexcept { return exact_ ? (num_ == 1 && den_ == 1) : real_ == 1.0; }
bool Number::is_negative() const noexcept { return exact_ ? num_ < 0 : real_ < 0.0; }
bool Number::is_integer() const noexcept { return exact_ && den_ == 1; }
double Number::value() const noexcept {
  return exact_ ? static_cast<double>(num_) / static_cast<double>(den_) : real_;
}

std::string Number::to_string() const {
  if (exact_) {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", real_);
  std::string s(buf);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

Number operator+(const Number& a, const Number& b) {
  if (a.exact_ && b.exact_) {
    return make_exact_or_real(i128(a.num_) * b.den_ + i128(b.num_) * a.den_, i128(a.den_) * b.den_);
  }
  return Number::real(a.value() + b.value());
}

Number operator-(const Number& a, const Number& b) { return a + (-b); }

Number operator*(const Number& a, const Number& b) {
  if (a.exact_ && b.exact_) {
    return make_exact_or_real(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
  }
  return Number::real(a.value() * b.value());
}

Number operator/(const Number& a, const Number& b) {
  if (b.is_zero()) fail(ErrorKind::EvaluationPole, "division by zero constant");
  if (a.exact_ && b.exact_) {
    return make_exact_or_real(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
  }
  return Number::real(a.value() / b.value());
}

Number Number::operator-() const {
  if (exact_) {
    if (num_ == std::numeric_limits<std::int64_t>::min()) return real(-value());
    return rational(-num_, den_);
  }
  return real(-real_);
}

bool operator==(const Number& a, const Number& b) {
  if (a.exact_ != b.exact_) return false;
  if (a.exact_) return a.num_ == b.num_ && a.den_ == b.den_;
  return a.real_ == b.real_;
}

// ---------------------------------------------------------------------------
// Normal-form internals

namespace detail {

enum class AtomKind : std::uint8_t { Var, Sin, Cos, Exp, Inv };

struct Atom {
  AtomKind kind = AtomKind::Var;
  int var = -1;
  Expr arg;
  std::uint64_t vars = 0;
  std::string key;
};
using AtomPtr = std::shared_ptr<const Atom>;

struct Factor {
  AtomPtr atom;
  int power = 0;
};

struct Monomial {
  std::vector<Factor> factors;
  std::uint64_t vars = 0;
  std::string key;
};

struct Term {
  Monomial mono;
  Number coef;
};

struct Poly {
  std::vector<Term> terms;
  std::uint64_t vars = 0;
  std::string key;
};

}  // namespace detail

namespace {

using detail::Atom;
using detail::AtomKind;
using detail::AtomPtr;
using detail::Factor;
using detail::Monomial;
using detail::Poly;
using detail::Term;

constexpr std::size_t kMaxTerms = 200000;
constexpr int kMaxPower = 256;

void finalize_monomial(Monomial& m) {
  m.vars = 0;
  m.key.clear();
  for (std::size_t i = 0; i < m.factors.size(); ++i) {
    if (i) m.key += '*';
    m.key += m.factors[i].atom->key;
    m.key += '^';
    m.key += std::to_string(m.factors[i].power);
    m.vars |= m.factors[i].atom->vars;
  }
}

Monomial monomial_of(const AtomPtr& atom, int power) {
  Monomial m;
  if (power != 0) m.factors.push_back({atom, power});
  finalize_monomial(m);
  return m;
}

Monomial multiply(const Monomial& a, const Monomial& b) {
  Monomial out;
  out.factors.reserve(a.factors.size() + b.factors.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.factors.size() || j < b.factors.size()) {
    if (j == b.factors.size() || (i < a.factors.size() && a.factors[i].atom->key < b.factors[j].atom->key)) {
      out.factors.push_back(a.factors[i++]);
    } else if (i == a.factors.size() || b.factors[j].atom->key < a.factors[i].atom->key) {
      out.factors.push_back(b.factors[j++]);
    } else {
      int p = a.factors[i].power + b.factors[j].power;
      if (p != 0) out.factors.push_back({a.factors[i].atom, p});
      ++i;
      ++j;
    }
  }
  finalize_monomial(out);
  return out;
}

class Accumulator {
 public:
  void add(const Monomial& m, const Number& c) {
    if (c.is_zero()) return;
    auto it = terms_.find(m.key);
    if (it == terms_.end()) {
      if (terms_.size() >= kMaxTerms) {
        fail(ErrorKind::ExpressionTooLarge, "expression exceeds " + std::to_string(kMaxTerms) + " terms");
      }
      terms_.emplace(m.key, Term{m, c});
    } else {
      it->second.coef = it->second.coef + c;
    }
  }

  void add(const Poly& p, const Number& scale = Number(1)) {
    for (const auto& t : p.terms) add(t.mono, t.coef * scale);
  }

  std::shared_ptr<const Poly> finish() {
    auto p = std::make_shared<Poly>();
    p->terms.reserve(terms_.size());
    for (auto& [key, term] : terms_) {
      if (term.coef.is_zero()) continue;
      p->vars |= term.mono.vars;
      if (!p->key.empty()) p->key += '|';
      p->key += term.coef.is_exact() ? term.coef.to_string() : "r" + term.coef.to_string();
      p->key += '#';
      p->key += term.mono.key;
      p->terms.push_back(std::move(term));
    }
    return p;
  }

 private:
  std::map<std::string, Term> terms_;
};

std::shared_ptr<const Poly> zero_poly() {
  static const auto z = std::make_shared<const Poly>();
  return z;
}

Expr from_atom(const AtomPtr& atom, int power, const Number& coef = Number(1)) {
  Accumulator acc;
  acc.add(monomial_of(atom, power), coef);
  return Expr(acc.finish());
}

AtomPtr make_atom(AtomKind kind, int var, const Expr& arg) {
  auto a = std::make_shared<Atom>();
  a->kind = kind;
  a->var = var;
  a->arg = arg;
  switch (kind) {
    case AtomKind::Var:
      if (var < 0 || var >= 64) fail(ErrorKind::InvalidArgument, "variable index out of range");
      a->vars = std::uint64_t{1} << var;
      a->key = "x" + std::to_string(var);
      break;
    case AtomKind::Sin: a->key = "S(" + arg.key() + ")"; break;
    case AtomKind::Cos: a->key = "C(" + arg.key() + ")"; break;
    case AtomKind::Exp: a->key = "E(" + arg.key() + ")"; break;
    case AtomKind::Inv: a->key = "I(" + arg.key() + ")"; break;
  }
  if (kind != AtomKind::Var) a->vars = arg.poly().vars;
  return a;
}

double ipow(double base, int p) {
  if (p < 0) {
    if (base == 0.0) fail(ErrorKind::EvaluationPole, "negative power of zero");
    return 1.0 / ipow(base, -p);
  }
  double r = 1.0;
  while (p) {
    if (p & 1) r *= base;
    base *= base;
    p >>= 1;
  }
  return r;
}

double eval_poly(const Poly& p, std::span<const double> x);

double eval_atom(const Atom& a, std::span<const double> x) {
  switch (a.kind) {
    case AtomKind::Var:
      if (static_cast<std::size_t>(a.var) >= x.size()) {
        fail(ErrorKind::InvalidArgument, "point has no coordinate x" + std::to_string(a.var + 1));
      }
      return x[static_cast<std::size_t>(a.var)];
    case AtomKind::Sin: return std::sin(eval_poly(a.arg.poly(), x));
    case AtomKind::Cos: return std::cos(eval_poly(a.arg.poly(), x));
    case AtomKind::Exp: return std::exp(eval_poly(a.arg.poly(), x));
    case AtomKind::Inv: {
      double v = eval_poly(a.arg.poly(), x);
      if (v == 0.0) fail(ErrorKind::EvaluationPole, "division by zero evaluating 1/(" + a.arg.to_string() + ")");
      return 1.0 / v;
    }
  }
  return 0.0;
}

double eval_poly(const Poly& p, std::span<const double> x) {
  double sum = 0.0;
  for (const auto& t : p.terms) {
    double v = t.coef.value();
    for (const auto& f : t.mono.factors) v *= ipow(eval_atom(*f.atom, x), f.power);
    sum += v;
  }
  return sum;
}

Expr atom_derivative(const Atom& a, int index) {
  if (!(a.vars >> index & 1U)) return Expr();
  switch (a.kind) {
    case AtomKind::Var: return Expr(1);
    case AtomKind::Sin: return cos(a.arg) * a.arg.diff(index);
    case AtomKind::Cos: return -(sin(a.arg) * a.arg.diff(index));
    case AtomKind::Exp: return exp(a.arg) * a.arg.diff(index);
    case AtomKind::Inv: {
      auto self = make_atom(AtomKind::Inv, -1, a.arg);
      return from_atom(self, 2, Number(-1)) * a.arg.diff(index);
    }
  }
  return Expr();
}

std::string atom_text(const Atom& a, std::span<const std::string> names) {
  switch (a.kind) {
    case AtomKind::Var:
      if (static_cast<std::size_t>(a.var) < names.size()) return names[static_cast<std::size_t>(a.var)];
      return "x" + std::to_string(a.var + 1);
    case AtomKind::Sin: return "sin(" + a.arg.to_string(names) + ")";
    case AtomKind::Cos: return "cos(" + a.arg.to_string(names) + ")";
    case AtomKind::Exp: return "exp(" + a.arg.to_string(names) + ")";
    case AtomKind::Inv: return "(" + a.arg.to_string(names) + ")";
  }
  return {};
}

std::string monomial_text(const Monomial& m, std::span<const std::string> names) {
  std::string s;
  for (std::size_t i = 0; i < m.factors.size(); ++i) {
    if (i) s += '*';
    const auto& f = m.factors[i];
    int power = f.atom->kind == AtomKind::Inv ? -f.power : f.power;
    s += atom_text(*f.atom, names);
    if (power != 1) s += "^" + std::to_string(power);
  }
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Expr

Expr::Expr() : poly_(zero_poly()) {}

Expr::Expr(int value) : Expr(Number(value)) {}

Expr::Expr(const Number& value) {
  Accumulator acc;
  acc.add(Monomial{}, value);
  poly_ = acc.finish();
}

Expr Expr::constant(const Number& value) { return Expr(value); }

Expr Expr::variable(int index) { return from_atom(make_atom(AtomKind::Var, index, Expr()), 1); }

Expr operator+(const Expr& a, const Expr& b) {
  if (a.poly_->terms.empty()) return b;
  if (b.poly_->terms.empty()) return a;
  Accumulator acc;
  acc.add(*a.poly_);
  acc.add(*b.poly_);
  return Expr(acc.finish());
}

Expr operator-(const Expr& a, const Expr& b) {
  if (b.poly_->terms.empty()) return a;
  Accumulator acc;
  acc.add(*a.poly_);
  acc.add(*b.poly_, Number(-1));
  return Expr(acc.finish());
}

Expr Expr::operator-() const {
  Accumulator acc;
  acc.add(*poly_, Number(-1));
  return Expr(acc.finish());
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.poly_->terms.empty() || b.poly_->terms.empty()) return Expr();
  if (a.poly_->terms.size() * b.poly_->terms.size() > 4 * kMaxTerms) {
    fail(ErrorKind::ExpressionTooLarge, "product expansion too large");
  }
  Accumulator acc;
  for (const auto& s : a.poly_->terms) {
    for (const auto& t : b.poly_->terms) acc.add(multiply(s.mono, t.mono), s.coef * t.coef);
  }
  return Expr(acc.finish());
}

Expr operator/(const Expr& a, const Expr& b) {
  // Catch the common u/(c*u) case that the normal form cannot cancel.
  if (!a.is_zero() && a.poly_->terms.size() == b.poly_->terms.size() && a.poly_->terms.size() > 1) {
    Number ratio = a.poly_->terms.front().coef / b.poly_->terms.front().coef;
    Accumulator acc;
    acc.add(*b.poly_, ratio);
    if (acc.finish()->key == a.key()) return Expr(ratio);
  }
  return a * b.pow(-1);
}

Expr Expr::pow(int exponent) const {
  if (std::abs(exponent) > kMaxPower) fail(ErrorKind::ExpressionTooLarge, "exponent too large");
  if (exponent == 0) return Expr(1);
  if (exponent == 1) return *this;
  const auto& terms = poly_->terms;
  if (exponent > 0) {
    Expr result(1);
    Expr base = *this;
    int e = exponent;
    while (e) {
      if (e & 1) result = result * base;
      e >>= 1;
      if (e) base = base * base;
    }
    return result;
  }
  if (terms.empty()) fail(ErrorKind::EvaluationPole, "negative power of zero");
  int n = -exponent;
  if (terms.size() == 1) {
    const auto& t = terms.front();
    Monomial inv = t.mono;
    for (auto& f : inv.factors) f.power = -f.power;
    finalize_monomial(inv);
    Monomial m;
    finalize_monomial(m);
    for (int i = 0; i < n; ++i) m = multiply(m, inv);
    Number c(1);
    for (int i = 0; i < n; ++i) c = c / t.coef;
    Accumulator acc;
    acc.add(m, c);
    return Expr(acc.finish());
  }
  // Factor out the leading coefficient so 1/(2u) and (1/2)/u share one atom.
  Number lead = terms.front().coef;
  Accumulator normalized;
  normalized.add(*poly_, Number(1) / lead);
  Expr base(normalized.finish());
  Number c(1);
  for (int i = 0; i < n; ++i) c = c / lead;
  return from_atom(make_atom(AtomKind::Inv, -1, base), n, c);
}

namespace {

Expr apply_function(AtomKind kind, const Expr& arg) {
  if (auto c = arg.constant_value()) {
    if (c->is_zero()) return kind == AtomKind::Sin ? Expr() : Expr(1);
    double v = c->value();
    switch (kind) {
      case AtomKind::Sin: return Expr(Number::real(std::sin(v)));
      case AtomKind::Cos: return Expr(Number::real(std::cos(v)));
      default: return Expr(Number::real(std::exp(v)));
    }
  }
  return from_atom(make_atom(kind, -1, arg), 1);
}

}  // namespace

Expr sin(const Expr& arg) { return apply_function(AtomKind::Sin, arg); }
Expr cos(const Expr& arg) { return apply_function(AtomKind::Cos, arg); }
Expr exp(const Expr& arg) { return apply_function(AtomKind::Exp, arg); }

Expr Expr::diff(int index) const {
  if (index < 0 || index >= 64 || !(poly_->vars >> index & 1U)) return Expr();
  Expr result;
  for (const auto& t : poly_->terms) {
    if (!(t.mono.vars >> index & 1U)) continue;
    for (std::size_t k = 0; k < t.mono.factors.size(); ++k) {
      const auto& f = t.mono.factors[k];
      if (!(f.atom->vars >> index & 1U)) continue;
      Monomial rest;
      rest.factors = t.mono.factors;
      if (f.power == 1) {
        rest.factors.erase(rest.factors.begin() + static_cast<std::ptrdiff_t>(k));
      } else {
        rest.factors[k].power -= 1;
      }
      finalize_monomial(rest);
      Accumulator acc;
      acc.add(rest, t.coef * Number(f.power));
      result += Expr(acc.finish()) * atom_derivative(*f.atom, index);
    }
  }
  return result;
}

double Expr::eval(std::span<const double> point) const { return eval_poly(*poly_, point); }

Expr Expr::substitute(std::span<const Expr> values) const {
  std::unordered_map<const Atom*, Expr> cache;
  auto atom_value = [&](const Atom& a) -> Expr {
    auto it = cache.find(&a);
    if (it != cache.end()) return it->second;
    Expr v;
    switch (a.kind) {
      case AtomKind::Var:
        if (static_cast<std::size_t>(a.var) >= values.size()) {
          fail(ErrorKind::InvalidArgument, "no substitution for x" + std::to_string(a.var + 1));
        }
        v = values[static_cast<std::size_t>(a.var)];
        break;
      case AtomKind::Sin: v = sin(a.arg.substitute(values)); break;
      case AtomKind::Cos: v = cos(a.arg.substitute(values)); break;
      case AtomKind::Exp: v = exp(a.arg.substitute(values)); break;
      case AtomKind::Inv: v = a.arg.substitute(values).pow(-1); break;
    }
    cache.emplace(&a, v);
    return v;
  };
  Expr result;
  for (const auto& t : poly_->terms) {
    Expr term(t.coef);
    for (const auto& f : t.mono.factors) {
      term *= atom_value(*f.atom).pow(f.power);
    }
    result += term;
  }
  return result;
}

bool Expr::is_zero() const { return poly_->terms.empty(); }

bool Expr::is_constant() const { return poly_->vars == 0; }

std::optional<Number> Expr::constant_value() const {
  if (poly_->terms.empty()) return Number(0);
  if (poly_->terms.size() == 1 && poly_->terms.front().mono.factors.empty()) return poly_->terms.front().coef;
  return std::nullopt;
}

int Expr::max_variable() const {
  if (poly_->vars == 0) return -1;
  return 63 - __builtin_clzll(poly_->vars);
}

std::size_t Expr::term_count() const { return poly_->terms.size(); }

std::string Expr::to_string(std::span<const std::string> names) const {
  const auto& terms = poly_->terms;
  if (terms.empty()) return "0";
  // Constant term last reads more naturally: "x1^2 - 1/2".
  std::vector<const Term*> order;
  order.reserve(terms.size());
  for (const auto& t : terms) {
    if (!t.mono.factors.empty()) order.push_back(&t);
  }
  for (const auto& t : terms) {
    if (t.mono.factors.empty()) order.push_back(&t);
  }
  std::string s;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Term& t = *order[i];
    Number c = t.coef;
    bool negative = c.is_negative();
    if (i == 0) {
      if (negative) s += '-';
    } else {
      s += negative ? " - " : " + ";
    }
    Number mag = negative ? -c : c;
    std::string mono = monomial_text(t.mono, names);
    if (mono.empty()) {
      s += mag.to_string();
    } else if (mag.is_one()) {
      s += mono;
    } else {
      s += mag.to_string() + "*" + mono;
    }
  }
  return s;
}

const std::string& Expr::key() const { return poly_->key; }

std::vector<std::string> coordinate_names(int dim) {
  std::vector<std::string> names;
  for (int i = 0; i < dim; ++i) names.push_back("x" + std::to_string(i + 1));
  return names;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  Parser(std::string_view text, std::span<const std::string> names) : text_(text), names_(names) {}

  Expr parse() {
    Expr e = parse_sum();
    skip_space();
    if (pos_ != text_.size()) throw ParseError(pos_, std::string("unexpected '") + text_[pos_] + "'");
    return e;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_sum() {
    Expr e = parse_product();
    for (;;) {
      if (accept('+')) {
        e = e + parse_product();
      } else if (accept('-')) {
        e = e - parse_product();
      } else {
        return e;
      }
    }
  }

  Expr parse_product() {
    Expr e = parse_unary();
    for (;;) {
      if (accept('*')) {
        e = e * parse_unary();
      } else if (accept('/')) {
        std::size_t at = pos_;
        Expr d = parse_unary();
        if (d.is_zero()) throw ParseError(at, "division by literal zero");
        e = e / d;
      } else {
        return e;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return -parse_unary();
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept('^')) {
      std::size_t at = pos_;
      Expr e = parse_exponent();
      auto c = e.constant_value();
      if (!c || !c->is_integer()) throw ParseError(at, "exponent must be an integer constant");
      if (std::abs(c->numerator()) > kMaxPower) throw ParseError(at, "exponent too large");
      if (c->numerator() < 0 && base.is_zero()) throw ParseError(at, "negative power of zero");
      return base.pow(static_cast<int>(c->numerator()));
    }
    return base;
  }

  // Right-associative, and a sign is allowed directly after '^'.
  Expr parse_exponent() {
    if (accept('-')) return -parse_exponent();
    if (accept('+')) return parse_exponent();
    return parse_power();
  }

  Expr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError(pos_, "unexpected end of expression");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      if (!accept(')')) throw ParseError(pos_, "expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      std::string ident(text_.substr(start, pos_ - start));
      if (ident == "sin" || ident == "cos" || ident == "exp") {
        if (!accept('(')) throw ParseError(pos_, "expected '(' after " + ident);
        Expr arg = parse_sum();
        if (!accept(')')) throw ParseError(pos_, "expected ')'");
        if (ident == "sin") return sin(arg);
        if (ident == "cos") return cos(arg);
        return exp(arg);
      }
      for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == ident) return Expr::variable(static_cast<int>(i));
      }
      throw ParseError(start, "unknown identifier '" + ident + "'");
    }
    throw ParseError(pos_, std::string("unexpected '") + c + "'");
  }

  Expr parse_number() {
    std::size_t start = pos_;
    std::string digits;
    int scale = 0;
    bool seen_point = false;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        digits += c;
        if (seen_point) ++scale;
      } else if (c == '.' && !seen_point) {
        seen_point = true;
      } else {
        break;
      }
      ++pos_;
    }
    if (digits.empty()) throw ParseError(start, "malformed number");
    int exponent = 0;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      int sign = 1;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
        if (text_[pos_] == '-') sign = -1;
        ++pos_;
      }
      std::string exp_digits;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) exp_digits += text_[pos_++];
      if (exp_digits.empty() || exp_digits.size() > 4) {
        pos_ = save;
        throw ParseError(save, "malformed exponent");
      }
      exponent = sign * std::stoi(exp_digits);
    }
    std::string literal(text_.substr(start, pos_ - start));
    // Exact decimal when it fits in int64, otherwise a double.
    digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
    int pow10 = exponent - scale;
    if (digits.size() <= 18 && std::abs(pow10) <= 18) {
      i128 num = std::stoll(digits);
      i128 den = 1;
      for (int i = 0; i < std::abs(pow10); ++i) (pow10 > 0 ? num : den) *= 10;
      if (fits(num) && fits(den)) return Expr(make_exact_or_real(num, den));
    }
    return Expr(Number::real(std::strtod(literal.c_str(), nullptr)));
  }

  std::string_view text_;
  std::span<const std::string> names_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expression(std::string_view text, std::span<const std::string> names) {
  return Parser(text, names).parse();
}

Expr parse_expression(std::string_view text, int dim) {
  auto names = coordinate_names(dim);
  return Parser(text, names).parse();
}

}  // namespace alab
