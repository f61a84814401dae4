// Kronecker-block Markov operators I_{|Z|} (x) M acting on z-major stacked
// vectors, their pseudo-inverses, and the softmax / log-sum-exp kernels.
//
// A z-major vector stores the pair (z, c) at index z * n_cols + c, which is
// exactly a row-major |Z| x n_cols matrix; row z is the z-th block.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "pf/error.hpp"
#include "pf/prob.hpp"

namespace pf {

class ZMajorVector {
 public:
  using Blocks = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  ZMajorVector() = default;
  ZMajorVector(Index n_z, Index n_cols) : b_(Blocks::Zero(n_z, n_cols)) {}
  explicit ZMajorVector(Blocks blocks) : b_(std::move(blocks)) {}

  /// Reinterprets a flat vector; its length must be a multiple of n_z.
  static ZMajorVector from_flat(const Vector& values, Index n_z) {
    if (n_z <= 0 || values.size() % n_z != 0)
      throw DimensionMismatch("z-major vector of length " + std::to_string(values.size()) +
                              " is not divisible by n_z = " + std::to_string(n_z));
    Blocks b(n_z, values.size() / n_z);
    std::copy(values.data(), values.data() + values.size(), b.data());
    return ZMajorVector(std::move(b));
  }

  /// From a |Z| x n_cols matrix such as P(Z|X).
  template <typename Derived>
  static ZMajorVector from_matrix(const Eigen::MatrixBase<Derived>& m) {
    return ZMajorVector(Blocks(m));
  }

  Index n_z() const noexcept { return b_.rows(); }
  Index n_cols() const noexcept { return b_.cols(); }
  Index size() const noexcept { return b_.size(); }

  double& operator()(Index z, Index c) { return b_(z, c); }
  double operator()(Index z, Index c) const { return b_(z, c); }

  Blocks& blocks() noexcept { return b_; }
  const Blocks& blocks() const noexcept { return b_; }

  Eigen::Map<const Vector> flat() const { return {b_.data(), b_.size()}; }
  Eigen::Map<Vector> flat() { return {b_.data(), b_.size()}; }

  Matrix to_matrix() const { return Matrix(b_); }

 private:
  Blocks b_;
};

/// I_{n_z} (x) block, applied block-wise. The SVD pseudo-inverse of the
/// block is computed once at construction.
class MarkovOperator {
 public:
  MarkovOperator(Matrix block, Index n_z, double rcond = 1e-12)
      : block_(std::move(block)), n_z_(n_z) {
    if (n_z_ < 1) throw DimensionMismatch("MarkovOperator: n_z must be >= 1");
    Eigen::JacobiSVD<Matrix> svd(block_, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    sigma_max_ = s.size() > 0 ? s[0] : 0.0;
    const double cutoff = rcond * sigma_max_;
    Vector inv_s = Vector::Zero(s.size());
    rank_ = 0;
    for (Index i = 0; i < s.size(); ++i) {
      if (s[i] > cutoff && s[i] > 0.0) {
        inv_s[i] = 1.0 / s[i];
        ++rank_;
      }
    }
    pinv_ = svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().transpose();
  }

  const Matrix& block() const noexcept { return block_; }
  const Matrix& pinv_block() const noexcept { return pinv_; }
  Index n_z() const noexcept { return n_z_; }
  Index rows() const noexcept { return block_.rows(); }
  Index cols() const noexcept { return block_.cols(); }
  Index rank() const noexcept { return rank_; }
  /// Spectral norm; equal to that of the full Kronecker operator.
  double operator_norm() const noexcept { return sigma_max_; }

  ZMajorVector apply(const ZMajorVector& v) const {
    check_input(v, cols(), "apply");
    return ZMajorVector(ZMajorVector::Blocks(v.blocks() * block_.transpose()));
  }

  ZMajorVector apply_pinv(const ZMajorVector& v) const {
    check_input(v, rows(), "pinv_apply");
    return ZMajorVector(ZMajorVector::Blocks(v.blocks() * pinv_.transpose()));
  }

 private:
  void check_input(const ZMajorVector& v, Index width, const char* what) const {
    if (v.n_z() != n_z_ || v.n_cols() != width)
      throw DimensionMismatch(std::string(what) + ": expected " + std::to_string(n_z_) + " blocks of " +
                              std::to_string(width) + ", got " + std::to_string(v.n_z()) + " x " +
                              std::to_string(v.n_cols()));
  }

  Matrix block_;
  Index n_z_;
  Matrix pinv_;
  Index rank_ = 0;
  double sigma_max_ = 0.0;
};

/// Block (x, y) = P(y|x): maps a (z, y) vector to sum_y P(y|x) v(z, y).
inline MarkovOperator make_b_operator(const JointXY& j, Index n_z, double rcond = 1e-12) {
  return MarkovOperator(j.y_given_x().matrix().transpose(), n_z, rcond);
}

/// Block (y, x) = P(x|y): maps vec P(Z|X) to vec P(Z|Y).
inline MarkovOperator make_a_operator(const JointXY& j, Index n_z, double rcond = 1e-12) {
  return MarkovOperator(j.x_given_y().matrix().transpose(), n_z, rcond);
}

/// Pseudo-inverse applied block-wise. Throws RankDeficient when the block's
/// numerical rank is below `min_rank`.
inline ZMajorVector pinv_apply(const MarkovOperator& op, const ZMajorVector& v, Index min_rank = 0) {
  if (op.rank() < min_rank) throw RankDeficient(op.rank(), min_rank);
  return op.apply_pinv(v);
}

inline double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw DimensionMismatch("log_sum_exp: empty input");
  const double m = *std::max_element(values.begin(), values.end());
  if (values.size() == 1 || !std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

/// Column-wise softmax over the z index, with max subtraction.
inline ZMajorVector softmax_over_z(const ZMajorVector& v) {
  ZMajorVector out(v.n_z(), v.n_cols());
  for (Index c = 0; c < v.n_cols(); ++c) {
    const double m = v.blocks().col(c).maxCoeff();
    double s = 0.0;
    for (Index z = 0; z < v.n_z(); ++z) {
      out(z, c) = std::exp(v(z, c) - m);
      s += out(z, c);
    }
    out.blocks().col(c) /= s;
  }
  return out;
}

}  // namespace pf
