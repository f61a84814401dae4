// Discrete distributions and the information measures built on them.
//
// Conventions:
//   * CondDist stores P(out | cond) with rows = output symbol and
//     columns = conditioning symbol; every column is a probability vector.
//   * All information quantities are in nats; to_bits() converts at the
//     reporting boundary.
//   * 0 log 0 := 0 in entropies. Optimization code clamps before logs
//     instead (see dca.hpp).
#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "pf/error.hpp"

namespace pf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Accepted deviation of a probability vector from the simplex.
inline constexpr double kStochasticTol = 1e-12;
/// Inputs within this distance of the simplex are repaired, worse ones rejected.
inline constexpr double kRepairTol = 1e-9;

inline double to_bits(double nats) { return nats / std::numbers::ln2; }

namespace detail {

/// Validates one probability vector in place; renormalizes near misses.
template <typename Col>
void repair_probability_vector(Col&& p, const std::string& what) {
  double sum = 0.0;
  double most_negative = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i])) throw InvalidDistribution(what + ": non-finite entry");
    most_negative = std::min(most_negative, p[i]);
    sum += p[i];
  }
  if (p.size() == 0) throw InvalidDistribution(what + ": empty");
  if (most_negative < -kRepairTol || std::abs(sum - 1.0) > kRepairTol) {
    throw InvalidDistribution(what + ": not a probability vector (sum " +
                              std::to_string(sum) + ")");
  }
  if (most_negative >= 0.0 && std::abs(sum - 1.0) <= kStochasticTol) return;
  sum = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    p[i] = std::max(p[i], 0.0);
    sum += p[i];
  }
  p /= sum;
}

/// -sum p log p with the 0 log 0 = 0 convention.
template <typename Vec>
double entropy_of(const Vec& p) {
  double h = 0.0;
  for (Index i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  return h;
}

}  // namespace detail

class DiscreteDist {
 public:
  explicit DiscreteDist(Vector probs) : p_(std::move(probs)) {
    detail::repair_probability_vector(p_, "distribution");
  }

  static DiscreteDist uniform(Index n) { return DiscreteDist(Vector::Constant(n, 1.0 / n)); }

  const Vector& probs() const noexcept { return p_; }
  Index size() const noexcept { return p_.size(); }
  double operator[](Index i) const { return p_[i]; }

 private:
  Vector p_;
};

class CondDist {
 public:
  explicit CondDist(Matrix m) : m_(std::move(m)) {
    if (m_.rows() == 0 || m_.cols() == 0) throw InvalidDistribution("conditional: empty matrix");
    for (Index c = 0; c < m_.cols(); ++c)
      detail::repair_probability_vector(m_.col(c), "conditional column " + std::to_string(c));
  }

  static CondDist identity(Index n) { return CondDist(Matrix::Identity(n, n)); }

  const Matrix& matrix() const noexcept { return m_; }
  Index n_out() const noexcept { return m_.rows(); }
  Index n_cond() const noexcept { return m_.cols(); }
  double operator()(Index out, Index cond) const { return m_(out, cond); }

 private:
  Matrix m_;
};

/// P(x|y) from P(y|x) and p_X by Bayes' rule.
inline CondDist bayes_invert(const DiscreteDist& p_x, const CondDist& y_given_x) {
  if (y_given_x.n_cond() != p_x.size())
    throw DimensionMismatch("P(Y|X) has " + std::to_string(y_given_x.n_cond()) +
                            " columns but p_X has " + std::to_string(p_x.size()) + " entries");
  const Matrix& q = y_given_x.matrix();
  const Vector p_y = q * p_x.probs();
  Matrix inv(q.cols(), q.rows());
  for (Index y = 0; y < q.rows(); ++y) {
    if (!(p_y[y] > 0.0))
      throw DegenerateDistribution("p_Y has zero mass on y" + std::to_string(y));
    for (Index x = 0; x < q.cols(); ++x) inv(x, y) = q(y, x) * p_x[x] / p_y[y];
  }
  return CondDist(std::move(inv));
}

/// Known joint P(X,Y), stored as p_X and P(Y|X). p_Y must be strictly positive.
class JointXY {
 public:
  JointXY(DiscreteDist p_x, CondDist y_given_x)
      : p_x_(std::move(p_x)),
        y_given_x_(std::move(y_given_x)),
        x_given_y_(bayes_invert(p_x_, y_given_x_)),
        p_y_(y_given_x_.matrix() * p_x_.probs()) {}

  const DiscreteDist& p_x() const noexcept { return p_x_; }
  const CondDist& y_given_x() const noexcept { return y_given_x_; }
  const CondDist& x_given_y() const noexcept { return x_given_y_; }
  const DiscreteDist& p_y() const noexcept { return p_y_; }
  Index card_x() const noexcept { return p_x_.size(); }
  Index card_y() const noexcept { return y_given_x_.n_out(); }

  /// Joint mass with rows x and columns y.
  Matrix joint() const {
    return (y_given_x_.matrix() * p_x_.probs().asDiagonal()).transpose();
  }

 private:
  DiscreteDist p_x_;
  CondDist y_given_x_;
  CondDist x_given_y_;
  DiscreteDist p_y_;
};

/// The decision variable P(Z|X), column-stochastic |Z| x |X|.
class Encoder {
 public:
  explicit Encoder(CondDist z_given_x) : p_(std::move(z_given_x)) {}
  explicit Encoder(Matrix m) : p_(std::move(m)) {}

  static Encoder uniform(Index card_z, Index card_x) {
    return Encoder(Matrix::Constant(card_z, card_x, 1.0 / card_z));
  }
  static Encoder identity(Index n) { return Encoder(Matrix::Identity(n, n)); }

  const CondDist& z_given_x() const noexcept { return p_; }
  const Matrix& matrix() const noexcept { return p_.matrix(); }
  Index card_z() const noexcept { return p_.n_out(); }
  Index card_x() const noexcept { return p_.n_cond(); }

 private:
  CondDist p_;
};

inline double entropy(const DiscreteDist& d) { return detail::entropy_of(d.probs()); }

/// I(Out; Cond) for the channel `marginal_cond` driven by `cond_on`.
inline double mutual_information(const CondDist& marginal_cond, const DiscreteDist& cond_on) {
  if (marginal_cond.n_cond() != cond_on.size())
    throw DimensionMismatch("mutual_information: channel has " +
                            std::to_string(marginal_cond.n_cond()) + " inputs, distribution has " +
                            std::to_string(cond_on.size()));
  const Matrix& m = marginal_cond.matrix();
  const Vector out = m * cond_on.probs();
  double conditional = 0.0;
  for (Index c = 0; c < m.cols(); ++c) conditional += cond_on[c] * detail::entropy_of(m.col(c));
  return detail::entropy_of(out) - conditional;
}

/// P(Z|Y) = sum_x P(Z|x) P(x|Y) under the chain Y -> X -> Z.
inline CondDist markov_compose(const Encoder& enc, const CondDist& x_given_y) {
  if (enc.card_x() != x_given_y.n_out())
    throw DimensionMismatch("markov_compose: encoder over " + std::to_string(enc.card_x()) +
                            " symbols, P(X|Y) over " + std::to_string(x_given_y.n_out()));
  return CondDist(enc.matrix() * x_given_y.matrix());
}

inline CondDist bayes_invert(const JointXY& j) { return j.x_given_y(); }

inline double i_zx(const Encoder& enc, const JointXY& j) {
  return mutual_information(enc.z_given_x(), j.p_x());
}

inline double i_zy(const Encoder& enc, const JointXY& j) {
  return mutual_information(markov_compose(enc, j.x_given_y()), j.p_y());
}

/// Privacy funnel Lagrangian I(Z;Y) - beta I(Z;X), in nats.
inline double pf_lagrangian(const Encoder& enc, const JointXY& j, double beta) {
  if (!(beta > 0.0)) throw InvalidConfig("pf_lagrangian: beta must be positive");
  return i_zy(enc, j) - beta * i_zx(enc, j);
}

}  // namespace pf
