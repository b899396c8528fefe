#pragma once

// Lie algebroids on a trivialized bundle over a chart.
//
// A model stores the frame data only: anchor columns rho(e_i) and structure
// functions [[e_i, e_j]] = sum_k c^k_ij e_k. Brackets of general sections
// follow from the Leibniz rule, so that axiom holds by construction and the
// remaining axioms reduce to finite frame identities.

#include <memory>
#include <string>
#include <vector>

#include "alab/calculus.hpp"
#include "alab/report.hpp"

namespace alab {

struct LieAlgebroidModel {
  std::string label;
  Chart base;
  int rank = 0;
  std::vector<VectorField> anchor;             // anchor[i] = rho(e_i)
  std::vector<AntisymmetricTable> structure;   // structure[k].get(i, j) = c^k_ij
  bool opposite = false;

  Expr c(int k, int i, int j) const { return structure[static_cast<std::size_t>(k)].get(i, j); }
  /// dim(base) x rank matrix with columns rho(e_i).
  ExprMatrix anchor_matrix() const;
};

using Algebroid = std::shared_ptr<const LieAlgebroidModel>;

/// Validates shapes and charts.
Algebroid make_algebroid(std::string label, Chart base, std::vector<VectorField> anchor,
                         std::vector<AntisymmetricTable> structure, bool opposite = false);

struct AlgebroidSection {
  Algebroid algebroid;
  std::vector<Expr> coef;  // section = sum_i coef[i] e_i
};

AlgebroidSection frame_section(const Algebroid& a, int i);
AlgebroidSection section(const Algebroid& a, std::vector<Expr> coef);
VectorField anchor_of(const AlgebroidSection& s);
AlgebroidSection operator+(const AlgebroidSection& a, const AlgebroidSection& b);
AlgebroidSection operator*(const Expr& f, const AlgebroidSection& a);

/// Leibniz extension of the frame brackets. Throws AlgebroidMismatch.
AlgebroidSection bracket(const AlgebroidSection& a, const AlgebroidSection& b);

/// Anchor-homomorphism and frame-Jacobi residuals (components "anchor" and
/// "jacobi"), each the Euclidean norm of the defect at a sample.
CheckReport check_algebroid_axioms(const LieAlgebroidModel& a, const CheckOptions& opt = {});

// Constructors -----------------------------------------------------------------

Algebroid make_tangent(const Chart& chart, std::string label = "T");
/// Rank-0 algebroid.
Algebroid make_zero(const Chart& chart, std::string label = "0");
/// Cotangent model of a bivector without checking the Poisson condition.
Algebroid cotangent_model(const Bivector& pi, std::string label = "T*");
/// Same, but throws PoissonConditionFailed unless the axioms pass.
Algebroid make_cotangent(const Bivector& pi, std::string label = "T*", const CheckOptions& opt = {});
/// Action algebroid of a Lie algebra with constants[k].get(i,j) = C^k_ij acting
/// by `action[i]`. Throws ActionNotHomomorphism unless the axioms pass.
Algebroid make_transformation(const Chart& chart, const std::vector<AntisymmetricTable>& constants,
                              const std::vector<VectorField>& action, std::string label = "g|x|M",
                              const CheckOptions& opt = {});
/// Opposite bracket. The anchor is negated as well, which is what keeps the
/// Leibniz rule (and hence the algebroid axioms) intact.
Algebroid make_opposite(const Algebroid& a);
/// New frame e'_i = sum_j g(j, i) e_j for g invertible at every sample.
Algebroid change_frame(const Algebroid& a, const ExprMatrix& g, const std::vector<Point>& samples);
/// A1 x A2 over the product chart.
Algebroid product_algebroid(const Algebroid& a1, const Algebroid& a2);

/// Substitutes x_j -> x_{offset + j}.
Expr shift_variables(const Expr& e, int offset, int dim);

// Morphisms ----------------------------------------------------------------------

struct MorphismData {
  Algebroid source;
  Algebroid target;
  SmoothMap base_map;
  ExprMatrix matrix;  // target.rank x source.rank, Phi(e_i) = sum_a matrix(a,i) f_a
};

/// Components "anchor", "bracket" and "graph_closure". Throws RankMismatch on
/// inconsistent shapes.
CheckReport check_morphism(const MorphismData& m, const CheckOptions& opt = {});
MorphismData identity_morphism(const Algebroid& a);
/// The anchor as a morphism into the tangent algebroid of the base.
MorphismData anchor_morphism(const Algebroid& a);

/// Orthonormal basis (columns (V, alpha)) of the pullback fiber at x.
/// Throws PointOutsideChart, TransversalityFailed.
Eigen::MatrixXd pullback_fiber(const LieAlgebroidModel& a, const SmoothMap& f, std::span<const double> x);

/// Basis (columns (a, b)) of {Phi1(a) = Phi2(b)} at (p, q). Throws
/// BasePointMismatch, SurjectivityFailed, TransversalityFailed.
Eigen::MatrixXd fibered_product_fiber(const MorphismData& m1, const MorphismData& m2, std::span<const double> p,
                                      std::span<const double> q, double tol = 1e-8);

}  // namespace alab
