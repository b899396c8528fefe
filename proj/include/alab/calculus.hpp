#pragma once

// Fields and forms on a chart, with the Cartan operations.
//
// Components are expressions in the chart coordinates. Two-forms and
// bivectors store only the strict upper triangle, so antisymmetry holds by
// construction.

#include <Eigen/Dense>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include "alab/chart.hpp"
#include "alab/expr.hpp"

namespace alab {

struct ScalarField {
  Chart chart;
  Expr expr;
};

struct VectorField {
  Chart chart;
  std::vector<Expr> comp;
};

struct OneForm {
  Chart chart;
  std::vector<Expr> comp;
};

class AntisymmetricTable {
 public:
  AntisymmetricTable() = default;
  explicit AntisymmetricTable(int n);

  int size() const { return n_; }
  Expr get(int i, int j) const;
  /// Sets entry (i,j) and implicitly (j,i) = -value. Diagonal entries must be zero.
  void set(int i, int j, const Expr& value);

 private:
  std::size_t index(int i, int j) const;
  int n_ = 0;
  std::vector<Expr> upper_;
};

struct TwoForm {
  Chart chart;
  AntisymmetricTable comp;  // B = sum_{i<j} B_ij dx_i ^ dx_j
};

struct Bivector {
  Chart chart;
  AntisymmetricTable comp;  // Pi = sum_{i<j} Pi^ij d_i ^ d_j, Pi^ij = Pi(dx_i, dx_j)
};

struct ThreeForm {
  Chart chart;
  int n = 0;
  std::vector<Expr> upper;  // i<j<k, lexicographic
  Expr get(int i, int j, int k) const;
};

struct SmoothMap {
  Chart source;
  Chart target;
  std::vector<Expr> comp;  // one per target coordinate, in source variables
};

/// Row-major matrix of expressions.
struct ExprMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<Expr> data;

  ExprMatrix() = default;
  ExprMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r * c)) {}
  Expr& operator()(int i, int j) { return data[static_cast<std::size_t>(i * cols + j)]; }
  const Expr& operator()(int i, int j) const { return data[static_cast<std::size_t>(i * cols + j)]; }
  Eigen::MatrixXd eval(std::span<const double> point) const;
};

// Constructors -------------------------------------------------------------

ScalarField scalar(const Chart& chart, std::string_view text);
VectorField vector_field(const Chart& chart, const std::vector<std::string>& comps);
OneForm one_form(const Chart& chart, const std::vector<std::string>& comps);
/// Entries listed as (i, j, text) with i<j, 0-based.
TwoForm two_form(const Chart& chart, const std::vector<std::tuple<int, int, std::string>>& entries);
Bivector bivector(const Chart& chart, const std::vector<std::tuple<int, int, std::string>>& entries);
SmoothMap smooth_map(const Chart& source, const Chart& target, const std::vector<std::string>& comps);

VectorField coordinate_field(const Chart& chart, int i);
OneForm coordinate_differential(const Chart& chart, int i);
VectorField zero_vector_field(const Chart& chart);
OneForm zero_one_form(const Chart& chart);
TwoForm zero_two_form(const Chart& chart);
SmoothMap identity_map(const Chart& chart);

// Algebra -------------------------------------------------------------------

VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator-(const VectorField& a, const VectorField& b);
VectorField operator*(const Expr& f, const VectorField& a);
OneForm operator+(const OneForm& a, const OneForm& b);
OneForm operator-(const OneForm& a, const OneForm& b);
OneForm operator*(const Expr& f, const OneForm& a);
TwoForm operator+(const TwoForm& a, const TwoForm& b);
TwoForm operator*(const Expr& f, const TwoForm& a);
bool operator==(const VectorField& a, const VectorField& b);
bool operator==(const OneForm& a, const OneForm& b);
bool operator==(const TwoForm& a, const TwoForm& b);

// Evaluation ----------------------------------------------------------------

/// Value of the partial derivative given by `order` (one count per
/// coordinate) at `point`. Throws PointOutsideChart or EvaluationPole.
double eval_and_derive(const ScalarField& f, std::span<const double> point, std::span<const int> order);

Eigen::VectorXd eval(const std::vector<Expr>& comps, std::span<const double> point);
Eigen::MatrixXd eval(const AntisymmetricTable& table, std::span<const double> point);

// Cartan calculus -----------------------------------------------------------

/// X(f) = sum_i X^i d_i f.
Expr apply(const VectorField& x, const Expr& f);
VectorField lie_bracket(const VectorField& x, const VectorField& y);

OneForm exterior_d(const ScalarField& f);
TwoForm exterior_d(const OneForm& a);
ThreeForm exterior_d(const TwoForm& b);

ScalarField interior(const VectorField& x, const OneForm& a);
OneForm interior(const VectorField& x, const TwoForm& b);
TwoForm interior(const VectorField& x, const ThreeForm& c);

ScalarField lie_derivative(const VectorField& x, const ScalarField& f);
/// Via Cartan's identity L_X a = d(i_X a) + i_X da.
OneForm lie_derivative(const VectorField& x, const OneForm& a);
TwoForm lie_derivative(const VectorField& x, const TwoForm& b);

enum class CartanOp { ExteriorD, Interior, LieDerivative };
using Form = std::variant<ScalarField, OneForm, TwoForm, ThreeForm>;

/// Uniform entry point; throws DegreeMismatch for unsupported combinations
/// (interior/Lie derivative need `x`, interior of a function, d of a 3-form).
Form cartan(CartanOp op, const Form& form, const VectorField* x = nullptr);

/// Pi#(a) with <b, Pi# a> = Pi(b, a), i.e. (Pi# a)^j = sum_i Pi^{ji} a_i.
VectorField sharp(const Bivector& pi, const OneForm& a);
/// Pi(a, b) = sum_{ij} Pi^{ij} a_i b_j.
Expr evaluate(const Bivector& pi, const OneForm& a, const OneForm& b);

// Maps ----------------------------------------------------------------------

ExprMatrix jacobian(const SmoothMap& f);
Eigen::MatrixXd jacobian_at(const SmoothMap& f, std::span<const double> point);
Eigen::VectorXd apply_map(const SmoothMap& f, std::span<const double> point);
/// g o f.
SmoothMap compose(const SmoothMap& g, const SmoothMap& f);
/// Expressions on the target pulled back to the source by substitution.
Expr pullback(const SmoothMap& f, const Expr& e);
ScalarField pullback(const SmoothMap& f, const ScalarField& g);
OneForm pullback(const SmoothMap& f, const OneForm& a);
TwoForm pullback(const SmoothMap& f, const TwoForm& b);
/// (dF)_p v.
Eigen::VectorXd pushforward(const SmoothMap& f, std::span<const double> point, const Eigen::VectorXd& v);

}  // namespace alab
