#pragma once

// Dirac structures in TM + T*M over a chart.
//
// The pairing is <(X, a), (Y, b)> = b(X) + a(Y), with no factor 1/2. A Dirac
// structure is stored as a frame of n generalized sections.

#include <optional>
#include <string>
#include <vector>

#include "alab/action.hpp"

namespace alab {

struct GeneralizedSection {
  VectorField vec;
  OneForm form;
};

GeneralizedSection generalized(const VectorField& x, const OneForm& a);
GeneralizedSection operator+(const GeneralizedSection& a, const GeneralizedSection& b);
GeneralizedSection operator*(const Expr& f, const GeneralizedSection& a);
bool operator==(const GeneralizedSection& a, const GeneralizedSection& b);

/// b(X) + a(Y). Throws ChartMismatch.
ScalarField pairing(const GeneralizedSection& s1, const GeneralizedSection& s2);

/// ([X, Y], L_X b - i_Y da). Not skew: swapping the arguments changes the
/// form part by d<s1, s2>.
GeneralizedSection dorfman_bracket(const GeneralizedSection& s1, const GeneralizedSection& s2);

/// Skew-symmetric bracket ([X, Y], L_X b - L_Y a - 1/2 d(b(X) - a(Y))).
/// It equals the Dorfman bracket minus 1/2 d<s1, s2>, so the two agree on
/// every pair with constant pairing, in particular inside a Dirac structure.
GeneralizedSection courant_bracket(const GeneralizedSection& s1, const GeneralizedSection& s2);

struct DiracStructureModel {
  std::string label;
  Chart chart;
  std::vector<GeneralizedSection> frame;
  std::optional<CheckReport> certificate;

  bool certified() const { return certificate && certificate->passed(); }
  /// 2n x n matrix, vector parts on top.
  Eigen::MatrixXd frame_matrix(std::span<const double> p) const;
};

/// Validates charts and that the frame has exactly dim(chart) sections.
DiracStructureModel make_dirac(std::string label, const Chart& chart, std::vector<GeneralizedSection> frame);
/// Frame (Pi# dx_i, dx_i).
DiracStructureModel graph_of_bivector(const Bivector& pi, std::string label = "graph(Pi)");
/// Frame (d_i, i_{d_i} B).
DiracStructureModel graph_of_two_form(const TwoForm& b, std::string label = "graph(B)");

/// Components "isotropy", "rank_deficit" and "involutivity".
CheckReport check_dirac(const DiracStructureModel& d, const CheckOptions& opt = {});
/// Copy of d carrying the check report.
DiracStructureModel certify(const DiracStructureModel& d, const CheckOptions& opt = {});

struct GaugeResult {
  DiracStructureModel structure;
  double closedness_residual = 0.0;  // max |dB| at samples
  bool closed = true;
};

/// (Y, b) -> (Y, b + i_Y B). A non-closed B is accepted and flagged. The
/// result is re-certified when the input was certified and B is closed.
GaugeResult gauge_transform(const DiracStructureModel& d, const TwoForm& b, const CheckOptions& opt = {});

/// Largest subspace_distance between the two frames over the samples.
double frame_span_distance(const DiracStructureModel& a, const DiracStructureModel& b, const CheckOptions& opt = {});

struct DiracMapData {
  DiracStructureModel source;  // D_N
  DiracStructureModel target;  // D_M
  SmoothMap map;               // F: N -> M
};

enum class DiracMapMode { Forward, Strong };

/// Component "forward" compares {(dF U, b) : (U, dF* b) in D_N} with D_M at
/// F(m); strong mode adds "kernel_intersection", dim(ker dF cap ker D_N).
CheckReport check_dirac_map(const DiracMapData& dm, DiracMapMode mode, const CheckOptions& opt = {});

/// Lie algebroid of a Dirac structure: anchor = vector parts, structure
/// functions from the Courant bracket of the frame. Certifies d if needed and
/// throws InvalidArgument when it is not a Dirac structure.
Algebroid make_dirac_algebroid(const DiracStructureModel& d, const CheckOptions& opt = {});

/// The right action of D_M on N: Z_a with dF Z_a = V_a o F and
/// (Z_a, F* b_a) in D_N. Throws NotCertifiedStrong, UniquenessFailure.
ActionModel induced_dirac_action(const DiracMapData& dm, const CheckOptions& opt = {});

/// Gauge both ends: tau_B on D_M and tau_{F* B} on D_N, same map.
DiracMapData gauge_dirac_map(const DiracMapData& dm, const TwoForm& b, const CheckOptions& opt = {});

}  // namespace alab
