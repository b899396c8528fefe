#pragma once

// Symbolic scalar expressions over chart coordinates.
//
// An Expr is kept in a normal form: a sum of monomials with rational (or,
// when a rational would overflow, double) coefficients. A monomial is a
// product of integer powers of atoms, and an atom is either a coordinate
// variable or one of sin(p), cos(p), exp(p), 1/p for a normalized
// sub-expression p. Normalizing on construction means identities that hold
// in the formal differential algebra (product rule, commuting partials,
// d∘d = 0) come out as exact zeros rather than as floating residues.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace alab {

/// Exact int64 rational with a double fallback when an operation overflows.
class Number {
 public:
  Number() = default;
  Number(int value) : num_(value) {}  // NOLINT(google-explicit-constructor)
  Number(std::int64_t value) : num_(value) {}  // NOLINT(google-explicit-constructor)

  static Number rational(std::int64_t num, std::int64_t den);
  static Number real(double value);

  bool is_exact() const noexcept { return exact_; }
  bool is_zero() const noexcept;
  bool is_one() const noexcept;
  bool is_negative() const noexcept;
  bool is_integer() const noexcept;
  std::int64_t numerator() const noexcept { return num_; }
  std::int64_t denominator() const noexcept { return den_; }
  double value() const noexcept;

  /// Parseable text: "3", "-1/2", or a round-trippable decimal for reals.
  std::string to_string() const;

  friend Number operator+(const Number& a, const Number& b);
  friend Number operator-(const Number& a, const Number& b);
  friend Number operator*(const Number& a, const Number& b);
  friend Number operator/(const Number& a, const Number& b);
  Number operator-() const;
  friend bool operator==(const Number& a, const Number& b);

 private:
  bool exact_ = true;
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
  double real_ = 0.0;
};

namespace detail {
struct Poly;
}

class Expr {
 public:
  Expr();  // zero
  Expr(int value);  // NOLINT(google-explicit-constructor)
  Expr(const Number& value);  // NOLINT(google-explicit-constructor)

  static Expr constant(const Number& value);
  static Expr variable(int index);

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  Expr operator-() const;
  Expr& operator+=(const Expr& other) { return *this = *this + other; }
  Expr& operator-=(const Expr& other) { return *this = *this - other; }
  Expr& operator*=(const Expr& other) { return *this = *this * other; }

  Expr pow(int exponent) const;
  friend Expr sin(const Expr& arg);
  friend Expr cos(const Expr& arg);
  friend Expr exp(const Expr& arg);

  /// Exact partial derivative with respect to variable `index` (0-based).
  Expr diff(int index) const;

  /// Throws Error(EvaluationPole) on division by zero.
  double eval(std::span<const double> point) const;

  /// Replace variable i by values[i] for every variable occurring in the
  /// expression.
  Expr substitute(std::span<const Expr> values) const;

  bool is_zero() const;
  bool is_constant() const;
  std::optional<Number> constant_value() const;
  /// Largest variable index that occurs, or -1 for constants.
  int max_variable() const;
  std::size_t term_count() const;

  /// Parseable rendering. Variables print as names[i] when given, x{i+1}
  /// otherwise.
  std::string to_string(std::span<const std::string> names = {}) const;

  /// Canonical key; equal keys mean structurally equal normal forms.
  const std::string& key() const;

  friend bool operator==(const Expr& a, const Expr& b) { return a.key() == b.key(); }

  explicit Expr(std::shared_ptr<const detail::Poly> poly) : poly_(std::move(poly)) {}
  const detail::Poly& poly() const { return *poly_; }

 private:
  std::shared_ptr<const detail::Poly> poly_;
};

/// Parse infix text. Precedence: ^ above unary minus above * / above + -.
/// Functions: sin, cos, exp. Exponents must be integer constants.
/// Variables are looked up in `names` (index = position).
Expr parse_expression(std::string_view text, std::span<const std::string> names);

/// Parse with variables x1..x{dim}.
Expr parse_expression(std::string_view text, int dim);

std::vector<std::string> coordinate_names(int dim);

}  // namespace alab
