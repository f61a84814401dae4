// Numerical checks of the solver's derivations: gradient formulas against
// finite differences, the expectation identities behind the linear update,
// restricted convexity of g, and descent of a loss trace.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pf/dca.hpp"
#include "pf/rng.hpp"
#include "pf/tradeoff.hpp"

namespace pf {

struct CheckReport {
  std::string name;
  int samples = 0;
  double max_violation = 0.0;
  double tolerance = 0.0;
  bool passed = false;

  static CheckReport make(std::string name, int samples, double violation, double tol) {
    return {std::move(name), samples, violation, tol, violation <= tol};
  }
};

inline nlohmann::json to_json(const CheckReport& r) {
  return {{"name", r.name},
          {"samples", r.samples},
          {"max_violation", r.max_violation},
          {"tolerance", r.tolerance},
          {"passed", r.passed}};
}

inline void write_json_lines(std::ostream& out, const std::vector<CheckReport>& reports) {
  for (const auto& r : reports) out << to_json(r).dump() << '\n';
}

/// Column-normalized uniform [lo, 1] entries; lo > 0 keeps it interior.
inline Encoder random_encoder(Rng& rng, Index card_z, Index card_x, double lo = 0.05) {
  Matrix m = rng.uniform_matrix(card_z, card_x, lo, 1.0);
  for (Index x = 0; x < card_x; ++x) m.col(x) /= m.col(x).sum();
  return Encoder(std::move(m));
}

namespace detail {

/// max_z,x |fd - analytic| / max |analytic|, over one encoder.
template <typename Value>
double fd_relative_error(const Matrix& e, const Matrix& analytic, Value&& value, double h) {
  Matrix fd(e.rows(), e.cols());
  Matrix probe = e;
  for (Index x = 0; x < e.cols(); ++x)
    for (Index z = 0; z < e.rows(); ++z) {
      probe(z, x) = e(z, x) + h;
      const double up = value(probe);
      probe(z, x) = e(z, x) - h;
      const double down = value(probe);
      probe(z, x) = e(z, x);
      fd(z, x) = (up - down) / (2.0 * h);
    }
  const double scale = std::max(analytic.cwiseAbs().maxCoeff(), 1e-12);
  return (fd - analytic).cwiseAbs().maxCoeff() / scale;
}

}  // namespace detail

/// grad_g against central differences (step 1e-6) of g at n random interior
/// encoders. beta = 0 checks the -H(Z) part alone.
inline CheckReport check_grad_g_fd(const JointXY& j, double beta, int n, std::uint64_t seed, Index card_z = 3,
                                   double tolerance = 1e-6) {
  if (n < 1) throw InvalidConfig("check_grad_g_fd: n must be >= 1");
  if (beta < 0.0) throw InvalidConfig("check_grad_g_fd: beta must be >= 0");
  const detail::Problem pb(j, card_z, 1e-12, 1e-12, false);
  Rng rng(hash_seed({seed, 1}));
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const Matrix e = random_encoder(rng, card_z, j.card_x()).matrix();
    worst = std::max(worst, detail::fd_relative_error(
                                e, pb.grad_g(e, beta), [&](const Matrix& p) { return pb.g_value(p, beta); }, 1e-6));
  }
  return CheckReport::make("grad_g_fd", n, worst, tolerance);
}

inline CheckReport check_grad_f_fd(const JointXY& j, int n, std::uint64_t seed, Index card_z = 3,
                                   double tolerance = 1e-6) {
  if (n < 1) throw InvalidConfig("check_grad_f_fd: n must be >= 1");
  const detail::Problem pb(j, card_z, 1e-12, 1e-12, false);
  Rng rng(hash_seed({seed, 2}));
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const Matrix e = random_encoder(rng, card_z, j.card_x()).matrix();
    worst = std::max(worst, detail::fd_relative_error(e, pb.grad_f(e), [&](const Matrix& p) { return pb.f_value(p); },
                                                      1e-6));
  }
  return CheckReport::make("grad_f_fd", n, worst, tolerance);
}

// ---------------------------------------------------------------------------
// Expectation identities

/// |E_{z,x}[sum_y P(y|x) log P(z|y)] + H(Z|Y)|, expectation under P(z,x).
inline double conditional_entropy_identity_gap(const Encoder& enc, const JointXY& j) {
  const Matrix& e = enc.matrix();
  const Matrix& q = j.y_given_x().matrix();
  const Matrix pzy = markov_compose(enc, j.x_given_y()).matrix();
  double lhs = 0.0;
  for (Index z = 0; z < e.rows(); ++z)
    for (Index x = 0; x < e.cols(); ++x) {
      double inner = 0.0;
      for (Index y = 0; y < q.rows(); ++y)
        if (q(y, x) > 0.0) inner += q(y, x) * std::log(pzy(z, y));
      if (e(z, x) > 0.0) lhs += j.p_x()[x] * e(z, x) * inner;
    }
  double h_zy = 0.0;
  for (Index y = 0; y < pzy.cols(); ++y) h_zy += j.p_y()[y] * detail::entropy_of(pzy.col(y));
  return std::abs(lhs + h_zy);
}

inline double kl_divergence(const Vector& p, const Vector& q) {
  double d = 0.0;
  for (Index i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) d += p[i] * std::log(p[i] / q[i]);
  return d;
}

/// |E_z[log P^k(z)] + H(Z) + KL(P_z || P^k_z)|, expectation under P_z of `enc`.
inline double cross_entropy_identity_gap(const Encoder& enc, const Encoder& enc_k, const JointXY& j) {
  const Vector pz = enc.matrix() * j.p_x().probs();
  const Vector pk = enc_k.matrix() * j.p_x().probs();
  double lhs = 0.0;
  for (Index z = 0; z < pz.size(); ++z)
    if (pz[z] > 0.0) lhs += pz[z] * std::log(pk[z]);
  return std::abs(lhs + detail::entropy_of(pz) + kl_divergence(pz, pk));
}

/// Residual of the expected first-order condition at an encoder `enc` that
/// solves the linear update from `enc_k` exactly (A enc = target):
///
///   I(Z;Y) + KL(P_z || P^k_z) - beta E_{z,x}[log P^k(x|z)] - beta H(X)
///          + sum_x P(x) lambda_x,
///
/// where lambda_x = sum_y P(y|x) lse_z (B^+ c^k)(., y) comes from the softmax
/// normalization. Zero whenever the update is exact.
inline double linear_update_residual(const Encoder& enc, const Encoder& enc_k, const JointXY& j, double beta) {
  const detail::Problem pb(j, enc.card_z(), 1e-300, 1e-12, true);
  const Matrix& e = enc.matrix();
  const Matrix& ek = enc_k.matrix();
  const Vector& px = j.p_x().probs();
  const Vector pz = e * px;
  const Vector pk = ek * px;

  const Matrix v = pb.c_vector(ek, beta) * pb.b_pinv_t;
  double lambda = 0.0;
  for (Index x = 0; x < e.cols(); ++x) {
    double lx = 0.0;
    for (Index y = 0; y < v.cols(); ++y) {
      const Vector col = v.col(y);
      lx += pb.q_yx(y, x) * log_sum_exp(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())));
    }
    lambda += px[x] * lx;
  }

  double e_log_post = 0.0;
  for (Index z = 0; z < e.rows(); ++z)
    for (Index x = 0; x < e.cols(); ++x)
      if (e(z, x) != 0.0) e_log_post += px[x] * e(z, x) * std::log(ek(z, x) * px[x] / pk[z]);

  return i_zy(enc, j) + kl_divergence(pz, pk) - beta * e_log_post - beta * entropy(j.p_x()) + lambda;
}

/// Random square 2x2 joint with a dominant diagonal, so P(Y|X) is invertible.
inline JointXY random_invertible_2x2(Rng& rng) {
  const double a = rng.uniform(0.2, 0.8);
  Vector px(2);
  px << a, 1.0 - a;
  const double d0 = rng.uniform(0.7, 0.97), d1 = rng.uniform(0.7, 0.97);
  Matrix q(2, 2);
  q << d0, 1.0 - d1, 1.0 - d0, d1;
  return JointXY(DiscreteDist(px), CondDist(q));
}

/// Solves A enc = target(enc_k) exactly on a square invertible instance.
/// Returns nothing when the solution leaves the simplex.
inline std::optional<Encoder> exact_linear_update(const Encoder& enc_k, const JointXY& j, double beta) {
  if (j.card_x() != j.card_y()) throw DimensionMismatch("exact_linear_update: needs |X| = |Y|");
  const Matrix t = compute_target(enc_k, j, beta).matrix();
  const Matrix e = t * j.x_given_y().matrix().inverse();
  if ((e.array() < 0.0).any()) return std::nullopt;
  Matrix fixed = e;
  for (Index x = 0; x < fixed.cols(); ++x) fixed.col(x) /= fixed.col(x).sum();
  return Encoder(std::move(fixed));
}

struct IdentityCheckReport {
  CheckReport identities;
  CheckReport residual;
};

/// Both expectation identities over n random (enc, enc_k) pairs on `j`, and
/// the linear-update residual on n constructed invertible 2x2 instances.
inline IdentityCheckReport check_identities_and_residual(const JointXY& j, int n, std::uint64_t seed, Index card_z = 3,
                                              double identity_tol = 1e-10, double residual_tol = 1e-8) {
  if (n < 1) throw InvalidConfig("check_identities_and_residual: n must be >= 1");
  Rng rng(hash_seed({seed, 3}));
  double worst_identity = 0.0;
  for (int i = 0; i < n; ++i) {
    const Encoder enc = random_encoder(rng, card_z, j.card_x());
    const Encoder enc_k = random_encoder(rng, card_z, j.card_x());
    worst_identity = std::max({worst_identity, conditional_entropy_identity_gap(enc, j),
                               cross_entropy_identity_gap(enc, enc_k, j)});
  }
  double worst_residual = 0.0;
  int solved = 0;
  for (int attempt = 0; solved < n && attempt < 1000 * n; ++attempt) {
    const JointXY small = random_invertible_2x2(rng);
    const double beta = rng.uniform(0.2, 5.0);
    const Encoder enc_k = random_encoder(rng, 2, 2);
    const auto enc = exact_linear_update(enc_k, small, beta);
    if (!enc) continue;
    worst_residual = std::max(worst_residual, std::abs(linear_update_residual(*enc, enc_k, small, beta)));
    ++solved;
  }
  if (solved < n) worst_residual = std::numeric_limits<double>::infinity();
  return {CheckReport::make("expectation_identities", n, worst_identity, identity_tol),
          CheckReport::make("linear_update_residual", solved, worst_residual, residual_tol)};
}

inline CheckReport check_appendix_c(const JointXY& j, int n, std::uint64_t seed, double tolerance = 1e-8) {
  const auto parts = check_identities_and_residual(j, n, seed, 3, tolerance, tolerance);
  return CheckReport::make("identities_and_residual", n,
                           std::max(parts.identities.max_violation, parts.residual.max_violation), tolerance);
}

// ---------------------------------------------------------------------------
// Restricted convexity and descent

/// g(p) - g(q) - <grad g(q), p - q> - 1/2 ||p_z - q_z||^2.
inline double convexity_slack(const Encoder& p, const Encoder& q, const JointXY& j, double beta) {
  const detail::Problem pb(j, p.card_z(), 1e-12, 1e-12, false);
  const Matrix& a = p.matrix();
  const Matrix& b = q.matrix();
  const double bregman = pb.g_value(a, beta) - pb.g_value(b, beta) -
                         (pb.grad_g(b, beta).array() * (a - b).array()).sum();
  return bregman - 0.5 * (pb.marginal_z(a) - pb.marginal_z(b)).squaredNorm();
}

/// Minimum restricted-convexity slack over random encoder pairs, reported as
/// max_violation = -min slack (passes when the slack stays >= -tolerance).
inline CheckReport check_lemma1(const JointXY& j, int n_pairs, std::uint64_t seed, double beta = 1.0,
                                Index card_z = 3, double tolerance = 1e-9) {
  if (n_pairs < 1) throw InvalidConfig("check_lemma1: n_pairs must be >= 1");
  Rng rng(hash_seed({seed, 4}));
  double min_slack = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_pairs; ++i) {
    const Encoder p = random_encoder(rng, card_z, j.card_x(), 0.0);
    const Encoder q = random_encoder(rng, card_z, j.card_x(), 0.0);
    min_slack = std::min(min_slack, convexity_slack(p, q, j, beta));
  }
  return CheckReport::make("convexity_beta_" + detail::fmt12(beta), n_pairs, -min_slack, tolerance);
}

inline CheckReport audit_descent(const DcaResult& result, double tolerance = 1e-6) {
  const auto& t = result.loss_trace;
  if (t.empty()) throw InvalidConfig("audit_descent: empty loss trace");
  double worst = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) worst = std::max(worst, t[k] - t[k - 1]);
  return CheckReport::make("descent", static_cast<int>(t.size()), worst, tolerance);
}

struct VerifyOptions {
  double beta = 1.0;
  double alpha = 1.0;
  Index card_z = 3;
  std::uint64_t seed = 0;
  int n_gradient = 100;
  int n_identity = 200;
  int n_pairs = 1000;
  /// Replaces every check's own tolerance when set.
  std::optional<double> tolerance;
};

inline std::vector<CheckReport> run_all_checks(const JointXY& j, const VerifyOptions& o) {
  auto tol = [&](double own) { return o.tolerance.value_or(own); };
  std::vector<CheckReport> out;
  out.push_back(check_grad_g_fd(j, o.beta, o.n_gradient, o.seed, o.card_z, tol(1e-6)));
  out.push_back(check_grad_g_fd(j, 0.0, o.n_gradient, o.seed, o.card_z, tol(1e-6)));
  out.back().name = "grad_g_fd_beta_0";
  out.push_back(check_grad_f_fd(j, o.n_gradient, o.seed, o.card_z, tol(1e-6)));
  const auto c = check_identities_and_residual(j, o.n_identity, o.seed, o.card_z, tol(1e-10), tol(1e-8));
  out.push_back(c.identities);
  out.push_back(c.residual);
  for (double b : {0.1, 1.0, 10.0}) out.push_back(check_lemma1(j, o.n_pairs, o.seed, b, o.card_z, tol(1e-9)));
  for (InnerKind kind : {InnerKind::Ridge, InnerKind::SparseLog}) {
    DcaConfig cfg;
    cfg.beta = o.beta;
    cfg.alpha = o.alpha;
    cfg.inner_kind = kind;
    cfg.seed = o.seed;
    const DcaResult r = dca_run(j, o.card_z, cfg);
    out.push_back(audit_descent(r, tol(1e-6)));
    out.back().name = std::string("descent_") + to_string(kind);
  }
  return out;
}

}  // namespace pf
