#pragma once

// Infinitesimal actions, modules, and Morita witnesses.
//
// Side convention: a right action satisfies dmu(X_i) = rho(e_i) o mu and
// [X_i, X_j] = sum_k (mu* c^k_ij) X_k. A left action of A is a right action
// of the opposite algebroid, so both signs flip. The transport ODE moves
// along zeta = +X for right actions and -X for left ones; either way mu o u
// follows the base path.

#include <optional>
#include <string>
#include <vector>

#include "alab/algebroid.hpp"

namespace alab {

enum class Side { Left, Right };

std::string_view to_string(Side s);
inline double side_sign(Side s) { return s == Side::Right ? 1.0 : -1.0; }

struct ActionModel {
  std::string label;
  Algebroid algebroid;
  Chart total;
  SmoothMap momentum;               // total -> algebroid->base
  std::vector<VectorField> fields;  // fields[i] = xi(e_i)
  Side side = Side::Right;
  double horizon = 10.0;
};

/// Validates charts and field count.
ActionModel make_action(std::string label, Algebroid a, SmoothMap momentum, std::vector<VectorField> fields, Side side,
                        double horizon = 10.0);

/// xi(sum f_i e_i) = sum (mu* f_i) X_i.
VectorField act(const ActionModel& a, const AlgebroidSection& s);

/// Components "compatibility" and "homomorphism".
CheckReport check_action(const ActionModel& a, const CheckOptions& opt = {});

struct CompletenessResult {
  Status status = Status::Pass;
  double max_norm = 0.0;
  std::string detail;
};

/// Integrates each field forward and backward over [0, horizon] from up to
/// 16 sampled starts. Leaving the chart box is not blow-up: a trajectory
/// fails only when it exceeds a bound far beyond linear growth or becomes
/// non-finite. Disagreement between step sizes, or hitting a pole, is
/// inconclusive.
CompletenessResult probe_completeness(const std::vector<VectorField>& fields, const Chart& chart, double horizon,
                                      const CheckOptions& opt = {});

/// check_action plus a full-rank momentum map plus completeness.
CheckReport check_module(const ActionModel& a, const CheckOptions& opt = {});

/// Right action u_i = (dJ)^{-1} rho(e_i) o J for a local diffeomorphism J.
/// Throws IntersectionNontrivial or TransversalityFailed.
ActionModel unique_lift_action(const Algebroid& a, const SmoothMap& j, const CheckOptions& opt = {});

struct QuotientChartModel {
  Chart total;
  Chart leaf;
  SmoothMap projection;  // total -> leaf
  SmoothMap section;     // leaf -> total
};

/// pi o sigma = id and full-rank d(pi) at samples; returns the worst residual.
CheckReport check_quotient(const QuotientChartModel& q, const CheckOptions& opt = {});

/// Verifies that each d(pi) X_i descends and that the projected action with
/// momentum J o sigma passes check_action. Throws ProjectionIllDefined.
CheckReport leaf_action_check(const ActionModel& a, const QuotientChartModel& q, const CheckOptions& opt = {});

struct MoritaWitness {
  std::string label;
  Chart total;
  SmoothMap j1;
  SmoothMap j2;
  ActionModel left;   // A1, momentum j1
  ActionModel right;  // A2, momentum j2
  double horizon = 10.0;
};

CheckReport check_quasi_equivalence(const MoritaWitness& w, const CheckOptions& opt = {});
CheckReport check_strong_morita(const MoritaWitness& w, const CheckOptions& opt = {});

/// X_i = -Pi_X#(J* dx_i) for a cotangent algebroid on the target of J.
ActionModel poisson_map_action(std::string label, const Algebroid& cotangent, const Bivector& pi_x, const SmoothMap& j,
                               Side side, double horizon = 10.0);
/// Left action of A1 via J1 and right action of A2 via J2, both from Pi_X.
MoritaWitness make_dual_pair_witness(std::string label, const Bivector& pi_x, const Algebroid& a1, const SmoothMap& j1,
                                     const Algebroid& a2, const SmoothMap& j2, double horizon = 10.0);
/// A left A-action is a right action of the opposite algebroid and vice versa.
ActionModel reverse_side(const ActionModel& a);
/// Re-expresses the action in the frame e'_i = sum_j g(j,i) e_j.
ActionModel change_frame(const ActionModel& a, const ExprMatrix& g, const std::vector<Point>& samples);

struct TensorData {
  ActionModel right;  // A2 acting on X from the right
  ActionModel left;   // A2 acting on Y from the left
  // Optional data for the quotient kernel checks.
  std::optional<ActionModel> outer_left;   // A1 on X from the left
  std::optional<ActionModel> outer_right;  // A3 on Y from the right
  std::optional<QuotientChartModel> quotient;  // total must be the product chart X x Y
};

struct TensorResult {
  Eigen::MatrixXd basis;  // columns span D at (x, y)
  CheckReport report;
};

/// D spanned by (xi(e_i)_x, -eta(e_i)_y). Reports involutivity and, when the
/// quotient data is present, ker dJ1^ = span eta3^ and ker dK3^ = span xi1^.
/// Throws BasePointMismatch.
TensorResult tensor_distribution(const TensorData& d, std::span<const double> x, std::span<const double> y,
                                 const CheckOptions& opt = {});

}  // namespace alab
