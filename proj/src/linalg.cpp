#include "alab/linalg.hpp"

#include <algorithm>
#include <map>

#include "alab/error.hpp"

namespace alab {

namespace {

double rank_threshold(const Eigen::VectorXd& sv) {
  double top = sv.size() ? sv.maxCoeff() : 0.0;
  return kRankTolerance * std::max(top, 1.0);
}

}  // namespace

int numeric_rank(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  double thr = rank_threshold(sv);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) r += sv(i) > thr ? 1 : 0;
  return r;
}

Eigen::MatrixXd null_space(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.cols();
  if (n == 0) return Eigen::MatrixXd(0, 0);
  if (m.rows() == 0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  int r = numeric_rank(m);
  return svd.matrixV().rightCols(n - r);
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return Eigen::MatrixXd(m.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
  int r = numeric_rank(m);
  return svd.matrixU().leftCols(r);
}

double span_residual(const Eigen::MatrixXd& span, const Eigen::VectorXd& v) {
  Eigen::MatrixXd q = orthonormal_basis(span);
  if (q.cols() == 0) return v.norm();
  return (v - q * (q.transpose() * v)).norm();
}

SubspaceComparison compare_subspaces(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() && a.cols() > 0 && b.cols() > 0) {
    fail(ErrorKind::InvalidArgument, "subspaces live in different ambient spaces");
  }
  SubspaceComparison c;
  c.rank_a = numeric_rank(a);
  c.rank_b = numeric_rank(b);
  Eigen::MatrixXd both(std::max(a.rows(), b.rows()), a.cols() + b.cols());
  if (a.cols()) both.leftCols(a.cols()) = a;
  if (b.cols()) both.rightCols(b.cols()) = b;
  c.rank_union = numeric_rank(both);
  return c;
}

double subspace_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd qa = orthonormal_basis(a);
  Eigen::MatrixXd qb = orthonormal_basis(b);
  if (qa.cols() != qb.cols()) return 1.0;
  double d = 0.0;
  for (Eigen::Index i = 0; i < qa.cols(); ++i) d = std::max(d, span_residual(qb, qa.col(i)));
  for (Eigen::Index i = 0; i < qb.cols(); ++i) d = std::max(d, span_residual(qa, qb.col(i)));
  return d;
}

int intersection_dim(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  auto c = compare_subspaces(a, b);
  return c.rank_a + c.rank_b - c.rank_union;
}

namespace {

// Laplace expansion along rows, memoized on (first row, remaining column set).
class Determinant {
 public:
  Determinant(const ExprMatrix& m, const std::vector<int>& rows) : m_(m), rows_(rows) {}

  Expr of_columns(const std::vector<int>& cols) {
    cols_ = cols;
    memo_.clear();
    return minor(0, (1U << cols.size()) - 1);
  }

 private:
  Expr minor(std::size_t depth, unsigned mask) {
    if (mask == 0) return Expr(1);
    auto it = memo_.find(mask);
    if (it != memo_.end()) return it->second;
    Expr sum;
    int sign = 1;
    for (std::size_t c = 0; c < cols_.size(); ++c) {
      if (!(mask >> c & 1U)) continue;
      const Expr& entry = m_(rows_[depth], cols_[c]);
      if (!entry.is_zero()) {
        Expr sub = minor(depth + 1, mask & ~(1U << c));
        if (!sub.is_zero()) sum += sign > 0 ? entry * sub : -(entry * sub);
      }
      sign = -sign;
    }
    memo_.emplace(mask, sum);
    return sum;
  }

  const ExprMatrix& m_;
  std::vector<int> rows_;
  std::vector<int> cols_;
  std::map<unsigned, Expr> memo_;
};

}  // namespace

ExprMatrix solve_symbolic(const ExprMatrix& a, const ExprMatrix& b, const std::vector<Point>& samples) {
  const int n = a.cols;
  if (b.rows != a.rows) fail(ErrorKind::InvalidArgument, "right-hand side has the wrong number of rows");
  if (n == 0) return ExprMatrix(0, b.cols);
  std::vector<Eigen::MatrixXd> numeric;
  for (const auto& p : samples) numeric.push_back(a.eval(p));

  std::vector<int> order(static_cast<std::size_t>(a.rows));
  for (int i = 0; i < a.rows; ++i) order[static_cast<std::size_t>(i)] = i;
  auto constant_row = [&](int r) {
    for (int j = 0; j < n; ++j) {
      if (!a(r, j).is_constant()) return false;
    }
    return true;
  };
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return constant_row(x) && !constant_row(y); });

  std::vector<int> chosen;
  for (int r : order) {
    if (static_cast<int>(chosen.size()) == n) break;
    bool ok = true;
    for (const auto& m : numeric) {
      Eigen::MatrixXd block(chosen.size() + 1, n);
      for (std::size_t k = 0; k < chosen.size(); ++k) block.row(static_cast<Eigen::Index>(k)) = m.row(chosen[k]);
      block.row(static_cast<Eigen::Index>(chosen.size())) = m.row(r);
      if (numeric_rank(block) != static_cast<int>(chosen.size()) + 1) {
        ok = false;
        break;
      }
    }
    if (ok) chosen.push_back(r);
  }
  if (static_cast<int>(chosen.size()) < n) {
    fail(ErrorKind::RankMismatch, "no square block of the system is invertible at every sample");
  }

  // Work on the augmented matrix [A_sel | B_sel] so replaced columns are cheap.
  ExprMatrix aug(n, n + b.cols);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) aug(i, j) = a(chosen[static_cast<std::size_t>(i)], j);
    for (int j = 0; j < b.cols; ++j) aug(i, n + j) = b(chosen[static_cast<std::size_t>(i)], j);
  }
  std::vector<int> rows(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
  Determinant det(aug, rows);
  std::vector<int> cols(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) cols[static_cast<std::size_t>(j)] = j;
  Expr d = det.of_columns(cols);
  if (d.is_zero()) fail(ErrorKind::RankMismatch, "selected block is singular");

  ExprMatrix x(n, b.cols);
  for (int k = 0; k < b.cols; ++k) {
    for (int j = 0; j < n; ++j) {
      std::vector<int> replaced = cols;
      replaced[static_cast<std::size_t>(j)] = n + k;
      Expr num = det.of_columns(replaced);
      x(j, k) = num.is_zero() ? Expr() : num / d;
    }
  }
  return x;
}

}  // namespace alab
