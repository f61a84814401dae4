// Brute-force oracles for the inner solvers on 2x2x2 instances.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "pf/dca.hpp"

namespace brute {

using namespace pf;

inline JointXY small_joint() {
  Vector px(2);
  px << 0.4, 0.6;
  Matrix q(2, 2);
  q << 0.8, 0.3, 0.2, 0.7;
  return JointXY(DiscreteDist(px), CondDist(q));
}

inline Matrix small_target() {
  Matrix t(2, 2);
  t << 0.7, 0.25, 0.3, 0.75;
  return t;
}

/// Ridge objective written out from P(x|y) entries.
inline double ridge_oracle(double a, double b, const Matrix& pxy, const Matrix& t, double alpha) {
  const double v[2][2] = {{a, b}, {1 - a, 1 - b}};
  double fit = 0.0, pen = 0.0;
  for (int z = 0; z < 2; ++z) {
    for (int y = 0; y < 2; ++y) {
      const double r = v[z][0] * pxy(0, y) + v[z][1] * pxy(1, y) - t(z, y);
      fit += r * r;
    }
    pen += v[z][0] * v[z][0] + v[z][1] * v[z][1];
  }
  return 0.5 * fit + alpha * pen;
}

/// Grid at `step`, then repeated local grids shrinking by 10x around the best.
inline double grid_min_2d(const std::function<double(double, double)>& f, double lo, double hi, double step) {
  double best = std::numeric_limits<double>::infinity(), ba = lo, bb = lo;
  const int n = static_cast<int>(std::round((hi - lo) / step));
  for (int i = 0; i <= n; ++i)
    for (int k = 0; k <= n; ++k) {
      const double a = lo + i * step, b = lo + k * step, v = f(a, b);
      if (v < best) best = v, ba = a, bb = b;
    }
  for (int round = 0; round < 6; ++round) {
    const double ca = ba, cb = bb;
    for (int i = -10; i <= 10; ++i)
      for (int k = -10; k <= 10; ++k) {
        const double a = std::clamp(ca + i * step / 10, lo, hi), b = std::clamp(cb + k * step / 10, lo, hi);
        const double v = f(a, b);
        if (v < best) best = v, ba = a, bb = b;
      }
    step /= 10;
  }
  return best;
}

/// Sparse objective from its definition, with L normalized per column.
inline double sparse_oracle(const Matrix& L, const Matrix& pxy, const Matrix& t, double alpha) {
  double fit = 0.0;
  for (int z = 0; z < L.rows(); ++z)
    for (int y = 0; y < t.cols(); ++y) {
      double pzy = 0.0;
      for (int x = 0; x < L.cols(); ++x) {
        double norm = 0.0;
        for (int w = 0; w < L.rows(); ++w) norm += std::exp(L(w, x));
        pzy += pxy(x, y) * std::exp(L(z, x)) / norm;
      }
      const double r = std::log(pzy) - std::log(t(z, y));
      fit += r * r;
    }
  return 0.5 * fit - alpha * L.sum();
}

/// Sparse objective minimized over the box [lo, hi]^4: 4-D grid at 0.05, then
/// coordinate refinement with halving steps.
inline double sparse_min(const Matrix& pxy, const Matrix& t, double alpha, double lo, double hi) {
  const int n = static_cast<int>(std::round((hi - lo) / 0.05));
  auto at = [&](int i) { return std::min(lo + 0.05 * i, hi); };
  double best = std::numeric_limits<double>::infinity();
  Matrix arg(2, 2);
  Matrix probe(2, 2);
  for (int a = 0; a <= n; ++a)
    for (int b = 0; b <= n; ++b)
      for (int c = 0; c <= n; ++c)
        for (int d = 0; d <= n; ++d) {
          probe << at(a), at(b), at(c), at(d);
          const double v = sparse_oracle(probe, pxy, t, alpha);
          if (v < best) best = v, arg = probe;
        }
  for (double step = 0.025; step > 1e-9; step /= 2)
    for (bool moved = true; moved;) {
      moved = false;
      for (int k = 0; k < 4; ++k)
        for (double s : {-step, step}) {
          probe = arg;
          probe.data()[k] = std::clamp(probe.data()[k] + s, lo, hi);
          const double v = sparse_oracle(probe, pxy, t, alpha);
          if (v < best - 1e-15) best = v, arg = probe, moved = true;
        }
    }
  return best;
}

}  // namespace brute
