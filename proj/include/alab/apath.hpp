#pragma once

// A-paths and transport of points along them through an action.
//
// A path is a list of segments. Each segment is written in its own parameter
// s in [0, 1] (variable "t" in expressions) and occupies a share of the global
// time interval [0, 1]; coefficients are rescaled accordingly when sampled in
// global time.

#include <optional>
#include <string>
#include <vector>

#include "alab/action.hpp"

namespace alab {

struct APathSegment {
  std::vector<Expr> coef;  // a_i(s)
  std::vector<Expr> base;  // c(s), one per base coordinate
  double duration = 1.0;   // share of global time
};

struct APath {
  std::string label;
  Algebroid algebroid;
  std::vector<APathSegment> segments;
};

/// Time chart [0, 1] with coordinate "t".
Chart time_chart();
/// Parses a_i and c_k as expressions in t. Throws ParseError, RankMismatch.
APath make_apath(std::string label, const Algebroid& a, const std::vector<std::string>& coef,
                 const std::vector<std::string>& base);
/// `first` then `second`, each squeezed into its proportional share of [0, 1].
APath concatenate(const APath& first, const APath& second);
/// Same path traversed with s -> s^2 on every segment.
APath reparametrize_square(const APath& p);

/// Coefficients and base point at global time t.
std::vector<double> coefficients_at(const APath& p, double t);
Eigen::VectorXd base_at(const APath& p, double t);

/// Component "anchor": |sum a_i rho(e_i)(c) - c'| over `time_samples`
/// uniformly spaced times per segment; component "junction": jumps of c
/// between segments.
CheckReport validate_apath(const APath& p, const CheckOptions& opt = {}, int time_samples = 65);

struct IntegratorConfig {
  double h = 1e-3;
  double max_error = 1e-6;  // per-step estimate |y_half - y_full| / 15
  int output_stride = 10;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  double base_tracking = 0.0;  // max |mu(u(t)) - c(t)| at output times
  int subdivisions = 0;

  const Eigen::VectorXd& end() const { return states.back(); }
  /// Lines "t,u_1,...,u_n".
  std::string csv() const;
};

/// du/dt = zeta_u(a(t)), u(0) = x0, with zeta = X for right actions and -X
/// for left ones. Fixed-step RK4; steps whose step-halving estimate exceeds
/// max_error are subdivided. Throws AlgebroidMismatch, InitialFiberMismatch,
/// StepCollapse.
Trajectory integrate_apath(const APath& p, const ActionModel& act, std::span<const double> x0,
                           const IntegratorConfig& cfg = {});

/// Components "base_tracking" and "reparametrization" always. With a
/// witness whose left or right action is `act`, also "fiber_drift" (the
/// other momentum map along u) and "flow_commutation" (frame flows of the
/// two actions on a 5 x 5 grid of times in [0, 1]).
CheckReport check_transport_invariances(const APath& p, const ActionModel& act, std::span<const double> x0,
                                        const IntegratorConfig& cfg = {}, const MoritaWitness* w = nullptr,
                                        const CheckOptions& opt = {1e-6, 64, 0});

struct ModuleMorphism {
  SmoothMap map;        // N -> N'
  ActionModel target;   // N' over the same algebroid
};

struct PsiResult {
  Eigen::VectorXd point;
  Trajectory trajectory;
  CheckReport report;  // components "base_tracking" and, with a morphism, "square"
};

/// Transports n0 along a path from J1(x') to J1(x) through the module N.
/// Throws BasePointMismatch (J2(x') != J2(x)), NoConnectingPath,
/// InitialFiberMismatch, AlgebroidMismatch.
PsiResult psi_transport(const MoritaWitness& w, std::span<const double> x_prime, std::span<const double> x,
                        const ActionModel& module, std::span<const double> n0, const APath& path,
                        const IntegratorConfig& cfg = {}, const std::optional<ModuleMorphism>& morphism = std::nullopt,
                        const CheckOptions& opt = {1e-6, 64, 0});

}  // namespace alab
