#pragma once

// Numeric rank policy and subspace tests shared by every check.

#include <Eigen/Dense>
#include <vector>

#include "alab/calculus.hpp"

namespace alab {

/// Singular values at or below this times max(sigma_max, 1) count as zero.
inline constexpr double kRankTolerance = 1e-9;

int numeric_rank(const Eigen::MatrixXd& m);
/// Orthonormal basis (as columns) of the kernel of m.
Eigen::MatrixXd null_space(const Eigen::MatrixXd& m);
/// Orthonormal basis (as columns) of the column span of m.
Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& m);
/// Distance from v to the column span of `span` (minimum-norm least squares).
double span_residual(const Eigen::MatrixXd& span, const Eigen::VectorXd& v);

struct SubspaceComparison {
  int rank_a = 0;
  int rank_b = 0;
  int rank_union = 0;
  bool equal() const { return rank_a == rank_b && rank_a == rank_union; }
};

/// rank(A) = rank(B) = rank([A B]) on column spans.
SubspaceComparison compare_subspaces(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
/// Largest distance of a unit vector of either span from the other span; 0
/// iff equal. Continuous stand-in for the rank test when a residual is needed.
double subspace_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
int intersection_dim(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Solves A X = B symbolically for a full-column-rank A (m >= n rows).
/// Rows are chosen greedily (constant rows first) so that the selected
/// square block is invertible at every sample; the block is inverted by
/// Cramer's rule. Throws RankMismatch if no such block is found.
ExprMatrix solve_symbolic(const ExprMatrix& a, const ExprMatrix& b, const std::vector<Point>& samples);

}  // namespace alab
