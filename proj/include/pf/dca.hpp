// Difference-of-convex solver for the discrete privacy funnel.
//
// The Lagrangian I(Z;Y) - beta I(Z;X) is split as f - g with
//
//   f(P) = -H(Z|Y)                 (convex in P(Z|X) through P(Z|Y))
//   g(P) = -H(Z) + beta I(Z;X)     (convex in P(Z|X))
//
// Each outer step linearizes g at the current encoder P^k. The first-order
// condition of the convex surrogate
//
//   S_k(P) = f(P) - g(P^k) - <grad g(P^k), P - P^k>
//
// is the linear equation  sum_y P(y|x) log P(z|y) = c^k(z,x) (+ per-x
// constant), which is solved for log P(z|y) with the pseudo-inverse of the
// P(Y|X) block and normalized with a softmax over z. The resulting target
// q^k(z|y) is then matched by P(Z|X) through a relaxed inner problem:
//
//   Ridge:      1/2 ||A P - q^k||^2 + alpha ||P||_2^2        over the simplex
//   SparseLog:  1/2 ||lse_x(l_{x|y} + l_{z|x}) - log q^k||^2 + alpha ||L||_1
//               over box-constrained log-likelihoods L, l_{z|x} = log softmax_z L
//
// S_k majorizes the Lagrangian and touches it at P^k, so any point that
// decreases S_k decreases the Lagrangian by at least 1/2 ||p_z - p_z^k||^2.
// The relaxed candidate is accepted along the segment from P^k with an
// Armijo test on S_k; when it is not a descent direction for S_k, the step
// falls back to minimizing S_k directly with entropic mirror descent.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pf/linops.hpp"
#include "pf/prob.hpp"
#include "pf/rng.hpp"
#include "pf/simplex.hpp"

namespace pf {

enum class InnerKind { Ridge, SparseLog };

inline const char* to_string(InnerKind k) { return k == InnerKind::Ridge ? "ridge" : "sparse"; }

/// q in the Lp penalty: 2 for ridge, 1 for the log-domain sparse variant.
inline int penalty_order(InnerKind k) { return k == InnerKind::Ridge ? 2 : 1; }

struct DcaConfig {
  double beta = 1.0;
  double alpha = 1.0;
  InnerKind inner_kind = InnerKind::Ridge;
  double outer_tol = 1e-6;
  int outer_max_iter = 10000;
  double inner_tol = 1e-9;
  int inner_max_iter = 5000;
  double box_m = 1e-6;
  double box_M = 30.0;
  double log_clamp = 1e-12;
  std::uint64_t seed = 0;
  /// Singular values below rcond * sigma_max are treated as zero.
  double rcond = 1e-12;
  /// Require the P(Y|X) block to have full numerical rank min(|X|, |Y|).
  bool require_full_rank = true;
  /// Accept relaxed steps only when they decrease the DC surrogate; otherwise
  /// take a direct surrogate step. When false, every relaxed step is taken
  /// as-is and increases are only reported.
  bool descent_safeguard = true;

  void validate() const {
    if (!(beta > 0.0)) throw InvalidConfig("beta must be positive");
    if (!(alpha > 0.0)) throw InvalidConfig("alpha must be positive");
    if (!(outer_tol > 0.0) || !(inner_tol > 0.0)) throw InvalidConfig("tolerances must be positive");
    if (outer_max_iter < 1 || inner_max_iter < 1) throw InvalidConfig("iteration limits must be >= 1");
    if (!(box_m > 0.0 && box_m < box_M)) throw InvalidConfig("need 0 < box_m < box_M");
    if (!(log_clamp > 0.0)) throw InvalidConfig("log_clamp must be positive");
    if (!(rcond > 0.0)) throw InvalidConfig("rcond must be positive");
  }
};

struct DcaResult {
  Encoder encoder;
  std::vector<double> loss_trace;  ///< nats; entry 0 is the initial encoder
  bool converged = false;
  int iterations = 0;
  double stationarity_gap = 0.0;
  double i_zx_bits = 0.0;
  double i_zy_bits = 0.0;
  /// Largest single-step loss increase (<= 0 for a monotone trace).
  double max_loss_increase = 0.0;
  /// Some step increased the loss by more than 1e-6.
  bool defect = false;
  /// min_k (L^k - L^{k+1}) - 1/2 ||p_z^k - p_z^{k+1}||^2; >= 0 certifies
  /// the sufficient-decrease bound on every step.
  double certificate_slack = 0.0;
  int relaxed_steps = 0;   ///< steps taken from the inner relaxed solver
  int surrogate_steps = 0; ///< steps taken by direct surrogate minimization

  double final_loss() const { return loss_trace.back(); }
};

namespace detail {

inline double clamped_log(double p, double clamp) { return std::log(std::max(p, clamp)); }

/// Everything about (P(X,Y), |Z|) that stays fixed during a run.
struct Problem {
  Index nz = 0, nx = 0, ny = 0;
  Vector px, py;
  Matrix q_yx;     ///< P(y|x), |Y| x |X|
  Matrix pxy;      ///< P(x|y), |X| x |Y|; also the transposed A block
  Matrix log_pxy;  ///< clamped log P(x|y)
  Matrix b_pinv_t; ///< transpose of pinv(B block), |X| x |Y|
  double a_norm = 0.0;
  double clamp = 1e-12;

  Problem(const JointXY& j, Index card_z, double log_clamp = 1e-12, double rcond = 1e-12,
          bool require_full_rank = true)
      : nz(card_z), nx(j.card_x()), ny(j.card_y()), px(j.p_x().probs()), py(j.p_y().probs()),
        q_yx(j.y_given_x().matrix()), pxy(j.x_given_y().matrix()), clamp(log_clamp) {
    if (card_z < 1) throw InvalidConfig("card_z must be >= 1");
    log_pxy = pxy.unaryExpr([&](double v) { return clamped_log(v, clamp); });
    const MarkovOperator b = make_b_operator(j, 1, rcond);
    const Index needed = require_full_rank ? std::min(b.rows(), b.cols()) : 0;
    if (b.rank() < needed) throw RankDeficient(b.rank(), needed);
    b_pinv_t = b.pinv_block().transpose();
    a_norm = make_a_operator(j, 1, rcond).operator_norm();
  }

  Problem(const JointXY& j, Index card_z, const DcaConfig& cfg)
      : Problem(j, card_z, cfg.log_clamp, cfg.rcond, cfg.require_full_rank) {}

  Vector marginal_z(const Matrix& e) const { return e * px; }
  Matrix compose(const Matrix& e) const { return e * pxy; }

  /// -H(Z|Y)
  double f_value(const Matrix& e) const {
    const Matrix pzy = compose(e);
    double v = 0.0;
    for (Index y = 0; y < ny; ++y) v -= py[y] * entropy_of(pzy.col(y));
    return v;
  }

  /// -H(Z) + beta I(Z;X)
  double g_value(const Matrix& e, double beta) const {
    const Vector pz = marginal_z(e);
    const double hz = entropy_of(pz);
    double hzx = 0.0;
    for (Index x = 0; x < nx; ++x) hzx += px[x] * entropy_of(e.col(x));
    return -hz + beta * (hz - hzx);
  }

  double loss(const Matrix& e, double beta) const { return f_value(e) - g_value(e, beta); }

  Matrix grad_f(const Matrix& e) const {
    const Matrix pzy = compose(e);
    const Matrix logs = pzy.unaryExpr([&](double v) { return clamped_log(v, clamp) + 1.0; });
    // (z,x): P(x) sum_y P(y|x) (log P(z|y) + 1)
    return (logs * q_yx) * px.asDiagonal();
  }

  Matrix grad_g(const Matrix& e, double beta) const {
    const Vector pz = marginal_z(e);
    Matrix g(e.rows(), e.cols());
    for (Index z = 0; z < e.rows(); ++z) {
      const double lz = clamped_log(pz[z], clamp);
      for (Index x = 0; x < e.cols(); ++x)
        g(z, x) = px[x] * (lz + 1.0 + beta * (clamped_log(e(z, x), clamp) - lz));
    }
    return g;
  }

  Matrix c_vector(const Matrix& e, double beta) const {
    const Vector pz = marginal_z(e);
    Matrix c(e.rows(), e.cols());
    for (Index z = 0; z < e.rows(); ++z) {
      const double lz = clamped_log(pz[z], clamp);
      for (Index x = 0; x < e.cols(); ++x) c(z, x) = lz + beta * (clamped_log(e(z, x), clamp) - lz);
    }
    return c;
  }

  /// softmax_z(pinv(B) c^k), |Z| x |Y|.
  Matrix target(const Matrix& e, double beta) const {
    Matrix v = c_vector(e, beta) * b_pinv_t;
    for (Index y = 0; y < v.cols(); ++y) {
      const double m = v.col(y).maxCoeff();
      v.col(y) = (v.col(y).array() - m).exp();
      v.col(y) /= v.col(y).sum();
    }
    return v;
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Gradients and the closed-form target

/// d g / d P(z|x) = P(x) { log P(z) + 1 + beta log(P(z|x) / P(z)) }
inline ZMajorVector grad_g(const Encoder& enc, const JointXY& j, double beta, double log_clamp = 1e-12) {
  const detail::Problem pb(j, enc.card_z(), log_clamp, 1e-12, false);
  return ZMajorVector::from_matrix(pb.grad_g(enc.matrix(), beta));
}

/// d(-H(Z|Y)) / d P(z|x) = P(x) sum_y P(y|x) (log P(z|y) + 1)
inline ZMajorVector grad_f(const Encoder& enc, const JointXY& j, double log_clamp = 1e-12) {
  const detail::Problem pb(j, enc.card_z(), log_clamp, 1e-12, false);
  return ZMajorVector::from_matrix(pb.grad_f(enc.matrix()));
}

/// c^k(z,x) = log p_z + beta log(P(z|x) / p_z)
inline ZMajorVector compute_c(const Encoder& enc, const JointXY& j, double beta, double log_clamp = 1e-12) {
  const detail::Problem pb(j, enc.card_z(), log_clamp, 1e-12, false);
  return ZMajorVector::from_matrix(pb.c_vector(enc.matrix(), beta));
}

/// q^k(z|y) = softmax_z(B^+ c^k). Throws RankDeficient if the P(Y|X) block
/// has rank below min(|X|, |Y|) and `require_full_rank` is set.
inline CondDist compute_target(const Encoder& enc, const JointXY& j, double beta,
                               const DcaConfig& cfg = {}) {
  const detail::Problem pb(j, enc.card_z(), cfg);
  return CondDist(pb.target(enc.matrix(), beta));
}

// ---------------------------------------------------------------------------
// Inner solvers

/// 1/2 ||A v - t||^2 + alpha ||v||^2 for an encoder matrix v.
inline double ridge_objective(const Matrix& v, const Matrix& target, const JointXY& j, double alpha) {
  const Matrix r = v * j.x_given_y().matrix() - target;
  return 0.5 * r.squaredNorm() + alpha * v.squaredNorm();
}

namespace detail {

inline Matrix ridge_solve(const Problem& pb, const Matrix& target, double alpha, const DcaConfig& cfg,
                          const Matrix& warm) {
  const double lipschitz = pb.a_norm * pb.a_norm + 2.0 * alpha;
  const double step = 1.0 / lipschitz;
  Matrix v = warm;
  Matrix resid(v.rows(), pb.ny), grad(v.rows(), v.cols());
  std::vector<double> scratch;
  resid.noalias() = v * pb.pxy;
  resid -= target;
  double obj = 0.5 * resid.squaredNorm() + alpha * v.squaredNorm();
  for (int it = 0; it < cfg.inner_max_iter; ++it) {
    grad.noalias() = resid * pb.pxy.transpose();
    grad += 2.0 * alpha * v;
    v -= step * grad;
    project_columns_in_place(v, scratch);
    resid.noalias() = v * pb.pxy;
    resid -= target;
    const double next = 0.5 * resid.squaredNorm() + alpha * v.squaredNorm();
    const bool done = std::abs(obj - next) <= cfg.inner_tol * std::max(1.0, std::abs(obj));
    obj = next;
    if (done) break;
  }
  return v;
}

}  // namespace detail

/// Projected gradient (step 1/L, L = sigma_max(A)^2 + 2 alpha) on the ridge
/// relaxation, warm-started at `warm`.
inline Encoder inner_ridge_solve(const CondDist& target, const JointXY& j, double alpha, const DcaConfig& cfg,
                                 const Encoder& warm) {
  const detail::Problem pb(j, warm.card_z(), cfg);
  if (target.n_out() != warm.card_z() || target.n_cond() != j.card_y())
    throw DimensionMismatch("inner_ridge_solve: target must be |Z| x |Y|");
  return Encoder(detail::ridge_solve(pb, target.matrix(), alpha, cfg, warm.matrix()));
}

/// Objective and gradient of the log-domain relaxation in the box variable L.
///
/// The fit term uses the column-normalized log-likelihoods
/// l(z,x) = L(z,x) - lse_z L(., x), so that exp(l) is an encoder and
/// lse_x(l_{x|y} + l_{z|x}) = log P(z|y). The penalty alpha ||L||_1 equals
/// -alpha sum L on the box and contributes the constant gradient -alpha.
class SparseObjective {
 public:
  SparseObjective(const JointXY& j, const Matrix& target, double alpha, double log_clamp = 1e-12)
      : log_pxy_(j.x_given_y().matrix().unaryExpr(
            [&](double v) { return detail::clamped_log(v, log_clamp); })),
        log_t_(target.array().log().matrix()),
        alpha_(alpha) {}

  Index card_y() const noexcept { return log_pxy_.cols(); }

  /// Fills the residual r(z,y) and returns the objective.
  double value(const Matrix& L, Matrix* residual = nullptr) const {
    const Matrix l = normalized(L);
    Matrix r(L.rows(), card_y());
    double fit = 0.0;
    for (Index z = 0; z < L.rows(); ++z) {
      for (Index y = 0; y < card_y(); ++y) {
        double m = -std::numeric_limits<double>::infinity();
        for (Index x = 0; x < L.cols(); ++x) m = std::max(m, log_pxy_(x, y) + l(z, x));
        double s = 0.0;
        for (Index x = 0; x < L.cols(); ++x) s += std::exp(log_pxy_(x, y) + l(z, x) - m);
        r(z, y) = m + std::log(s) - log_t_(z, y);
        fit += r(z, y) * r(z, y);
      }
    }
    if (residual) *residual = std::move(r);
    return 0.5 * fit - alpha_ * L.sum();
  }

  /// dObj/dL(z,x) = G(z,x) - p(z|x) sum_z' G(z',x) - alpha, where
  /// G(z,x) = sum_y r(z,y) w(x|z,y) and w are the lse softmax weights.
  Matrix gradient(const Matrix& L) const {
    Matrix r;
    value(L, &r);
    const Matrix l = normalized(L);
    Matrix g = Matrix::Zero(L.rows(), L.cols());
    for (Index z = 0; z < L.rows(); ++z) {
      for (Index y = 0; y < card_y(); ++y) {
        const double s = r(z, y) + log_t_(z, y);  // lse value
        for (Index x = 0; x < L.cols(); ++x) g(z, x) += r(z, y) * std::exp(log_pxy_(x, y) + l(z, x) - s);
      }
    }
    for (Index x = 0; x < L.cols(); ++x) {
      const double total = g.col(x).sum();
      for (Index z = 0; z < L.rows(); ++z) g(z, x) -= std::exp(l(z, x)) * total;
    }
    return g.array() - alpha_;
  }

  static Matrix normalized(const Matrix& L) {
    Matrix l = L;
    for (Index x = 0; x < L.cols(); ++x) {
      const double m = L.col(x).maxCoeff();
      const double lse = m + std::log((L.col(x).array() - m).exp().sum());
      l.col(x).array() -= lse;
    }
    return l;
  }

 private:
  Matrix log_pxy_;  // |X| x |Y|
  Matrix log_t_;    // |Z| x |Y|
  double alpha_;
};

namespace detail {

inline Matrix box_project(Matrix L, double lo, double hi) { return L.cwiseMax(lo).cwiseMin(hi); }

/// Box-projected Armijo gradient descent from `L`; returns the final L.
inline Matrix sparse_solve_log(const JointXY& j, const Matrix& target, double alpha, const DcaConfig& cfg,
                               Matrix L) {
  const SparseObjective obj(j, target, alpha, cfg.log_clamp);
  const double lo = -cfg.box_M, hi = -cfg.box_m;
  L = box_project(std::move(L), lo, hi);
  double value = obj.value(L);
  for (int it = 0; it < cfg.inner_max_iter; ++it) {
    const Matrix g = obj.gradient(L);
    double step = 1.0;
    Matrix next;
    double next_value = value;
    bool moved = false;
    while (step >= 1e-20) {
      next = box_project(L - step * g, lo, hi);
      next_value = obj.value(next);
      if (next_value <= value + 1e-4 * (g.array() * (next - L).array()).sum()) {
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
    const bool done = std::abs(value - next_value) <= cfg.inner_tol * std::max(1.0, std::abs(value));
    L = std::move(next);
    value = next_value;
    if (done) break;
  }
  return L;
}

inline Matrix sparse_solve(const JointXY& j, const Matrix& target, double alpha, const DcaConfig& cfg,
                           const Matrix& warm) {
  Matrix L0 = warm.unaryExpr([&](double v) { return clamped_log(v, cfg.log_clamp); });
  return SparseObjective::normalized(sparse_solve_log(j, target, alpha, cfg, std::move(L0))).array().exp();
}

}  // namespace detail

/// Projected gradient with Armijo backtracking (initial step 1, factor 1/2,
/// sufficient decrease 1e-4) on the box [-box_M, -box_m]; returns
/// softmax_z(L) per column.
inline Encoder inner_sparse_solve(const CondDist& target, const JointXY& j, double alpha, const DcaConfig& cfg,
                                  const Encoder& warm) {
  if (target.n_out() != warm.card_z() || target.n_cond() != j.card_y())
    throw DimensionMismatch("inner_sparse_solve: target must be |Z| x |Y|");
  if ((target.matrix().array() <= 0.0).any())
    throw InvalidDistribution("inner_sparse_solve: target must be strictly positive");
  return Encoder(detail::sparse_solve(j, target.matrix(), alpha, cfg, warm.matrix()));
}

/// Same iteration, started from and returning the raw log-domain variable L.
inline Matrix inner_sparse_solve_log(const CondDist& target, const JointXY& j, double alpha, const DcaConfig& cfg,
                                     Matrix L) {
  if (target.n_cond() != j.card_y() || L.rows() != target.n_out() || L.cols() != j.card_x())
    throw DimensionMismatch("inner_sparse_solve_log: shapes do not match");
  return detail::sparse_solve_log(j, target.matrix(), alpha, cfg, std::move(L));
}

// ---------------------------------------------------------------------------
// Stationarity

/// Max-abs of grad f - grad g after removing, per column x, the mean over the
/// support {z : P(z|x) > 1e-8}; coordinates outside the support are ignored.
inline double stationarity_gap(const Encoder& enc, const JointXY& j, double beta, double log_clamp = 1e-12) {
  const detail::Problem pb(j, enc.card_z(), log_clamp, 1e-12, false);
  const Matrix& e = enc.matrix();
  const Matrix d = pb.grad_f(e) - pb.grad_g(e, beta);
  double gap = 0.0;
  for (Index x = 0; x < e.cols(); ++x) {
    double sum = 0.0;
    int active = 0;
    for (Index z = 0; z < e.rows(); ++z)
      if (e(z, x) > 1e-8) {
        sum += d(z, x);
        ++active;
      }
    if (active == 0) continue;
    const double mean = sum / active;
    for (Index z = 0; z < e.rows(); ++z)
      if (e(z, x) > 1e-8) gap = std::max(gap, std::abs(d(z, x) - mean));
  }
  return gap;
}

// ---------------------------------------------------------------------------
// Outer loop

namespace detail {

/// S_k(P) - S_k(P^k) for the surrogate linearized at P^k with gradient gk.
inline double surrogate_delta(const Problem& pb, const Matrix& p, const Matrix& pk, double f_pk,
                              const Matrix& gk) {
  return pb.f_value(p) - f_pk - (gk.array() * (p - pk).array()).sum();
}

/// Entropic mirror descent on S_k over the product of simplices, started at P^k.
inline Matrix surrogate_minimize(const Problem& pb, const Matrix& pk, const Matrix& gk, const DcaConfig& cfg) {
  Matrix p = pk;
  double f_p = pb.f_value(p);
  double s = f_p - (gk.array() * p.array()).sum();
  double eta = 1.0;
  Matrix next(p.rows(), p.cols());
  for (int it = 0; it < cfg.inner_max_iter; ++it) {
    const Matrix grad = pb.grad_f(p) - gk;
    bool moved = false;
    double s_next = s;
    eta = std::min(eta * 2.0, 1e6);
    while (eta >= 1e-16) {
      for (Index x = 0; x < p.cols(); ++x) {
        const double m = grad.col(x).minCoeff();
        double total = 0.0;
        for (Index z = 0; z < p.rows(); ++z) {
          next(z, x) = p(z, x) * std::exp(-eta * (grad(z, x) - m));
          total += next(z, x);
        }
        next.col(x) /= total;
      }
      s_next = pb.f_value(next) - (gk.array() * next.array()).sum();
      if (s_next <= s + 1e-4 * (grad.array() * (next - p).array()).sum()) {
        moved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!moved) break;
    const double change = s - s_next;
    p = next;
    s = s_next;
    if (change <= 1e-3 * cfg.inner_tol * std::max(1.0, std::abs(s))) break;
  }
  return p;
}

inline Matrix random_encoder(Index card_z, Index card_x, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m = rng.uniform_matrix(card_z, card_x);
  for (Index x = 0; x < card_x; ++x) {
    const double s = m.col(x).sum();
    if (s > 0.0)
      m.col(x) /= s;
    else
      m.col(x).setConstant(1.0 / card_z);
  }
  return m;
}

}  // namespace detail

/// Runs the DC iteration from `init` (or a seeded uniform-random encoder).
/// Stops once consecutive losses differ by at most outer_tol, or after
/// outer_max_iter updates.
inline DcaResult dca_run(const JointXY& j, Index card_z, const DcaConfig& cfg,
                         const std::optional<Encoder>& init = std::nullopt) {
  cfg.validate();
  if (card_z < 1) throw InvalidConfig("card_z must be >= 1");
  if (init && (init->card_z() != card_z || init->card_x() != j.card_x()))
    throw DimensionMismatch("dca_run: initial encoder has the wrong shape");

  const detail::Problem pb(j, card_z, cfg);
  const double beta = cfg.beta;
  Matrix p = init ? init->matrix() : detail::random_encoder(card_z, j.card_x(), cfg.seed);

  DcaResult res{Encoder(p), {}, false, 0, 0.0, 0.0, 0.0, 0.0, false, 0.0, 0, 0};
  double loss = pb.loss(p, beta);
  res.loss_trace.push_back(loss);
  double min_slack = std::numeric_limits<double>::infinity();
  double max_increase = -std::numeric_limits<double>::infinity();

  for (int k = 0; k < cfg.outer_max_iter; ++k) {
    const Matrix gk = pb.grad_g(p, beta);
    const Matrix target = pb.target(p, beta);
    const Matrix candidate = cfg.inner_kind == InnerKind::Ridge
                                 ? detail::ridge_solve(pb, target, cfg.alpha, cfg, p)
                                 : detail::sparse_solve(j, target, cfg.alpha, cfg, p);

    Matrix next;
    double next_loss = 0.0;
    bool have_step = false;
    if (!cfg.descent_safeguard) {
      next = candidate;
      next_loss = pb.loss(next, beta);
      have_step = true;
      ++res.relaxed_steps;
    } else {
      const Matrix dir = candidate - p;
      const double slope = ((pb.grad_f(p) - gk).array() * dir.array()).sum();
      if (slope < 0.0) {
        const double f_p = pb.f_value(p);
        for (double t = 1.0; t >= 1.0 / (1 << 30); t *= 0.5) {
          Matrix trial = p + t * dir;
          if (detail::surrogate_delta(pb, trial, p, f_p, gk) <= 1e-4 * t * slope) {
            const double trial_loss = pb.loss(trial, beta);
            // a relaxed step that barely moves cannot certify convergence
            if (trial_loss < loss - cfg.outer_tol) {
              next = std::move(trial);
              next_loss = trial_loss;
              have_step = true;
              ++res.relaxed_steps;
            }
            break;
          }
        }
      }
      if (!have_step) {
        next = detail::surrogate_minimize(pb, p, gk, cfg);
        next_loss = pb.loss(next, beta);
        ++res.surrogate_steps;
      }
    }

    const double decrease = loss - next_loss;
    const double dz = 0.5 * (pb.marginal_z(p) - pb.marginal_z(next)).squaredNorm();
    min_slack = std::min(min_slack, decrease - dz);
    max_increase = std::max(max_increase, -decrease);
    if (-decrease > 1e-6) res.defect = true;

    p = std::move(next);
    loss = next_loss;
    res.loss_trace.push_back(loss);
    res.iterations = k + 1;
    if (std::abs(decrease) <= cfg.outer_tol) {
      res.converged = true;
      break;
    }
  }

  res.encoder = Encoder(p);
  res.stationarity_gap = stationarity_gap(res.encoder, j, beta, cfg.log_clamp);
  res.i_zx_bits = to_bits(i_zx(res.encoder, j));
  res.i_zy_bits = to_bits(i_zy(res.encoder, j));
  res.certificate_slack = res.iterations > 0 ? min_slack : 0.0;
  res.max_loss_increase = res.iterations > 0 ? max_increase : 0.0;
  return res;
}

/// Lagrangian pieces exposed for diagnostics.
inline double f_value(const Encoder& enc, const JointXY& j) {
  return detail::Problem(j, enc.card_z(), 1e-12, 1e-12, false).f_value(enc.matrix());
}

inline double g_value(const Encoder& enc, const JointXY& j, double beta) {
  return detail::Problem(j, enc.card_z(), 1e-12, 1e-12, false).g_value(enc.matrix(), beta);
}

}  // namespace pf
