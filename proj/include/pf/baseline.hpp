// Deterministic clustering baselines: greedy pairwise merging and exhaustive
// enumeration of every set partition of X.
#pragma once

#include <algorithm>
#include <vector>

#include "pf/dca.hpp"
#include "pf/prob.hpp"
#include "pf/tradeoff.hpp"

namespace pf {

/// assignment[x] = cluster id; ids cover 0..n_clusters-1 without gaps.
class HardClustering {
 public:
  explicit HardClustering(std::vector<int> assignment) : a_(std::move(assignment)) {
    if (a_.empty()) throw InvalidConfig("clustering: empty assignment");
    const int top = *std::max_element(a_.begin(), a_.end());
    std::vector<bool> seen(static_cast<std::size_t>(std::max(top, 0) + 1), false);
    for (int c : a_) {
      if (c < 0) throw InvalidConfig("clustering: negative cluster id");
      seen[static_cast<std::size_t>(c)] = true;
    }
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
      throw InvalidConfig("clustering: cluster ids are not contiguous");
    n_ = top + 1;
  }

  static HardClustering singletons(int n) {
    std::vector<int> a(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] = i;
    return HardClustering(std::move(a));
  }

  const std::vector<int>& assignment() const noexcept { return a_; }
  int n_clusters() const noexcept { return n_; }
  int size() const noexcept { return static_cast<int>(a_.size()); }

  /// Merges cluster hi into lo (lo < hi) and closes the gap in the ids.
  HardClustering merged(int lo, int hi) const {
    std::vector<int> a = a_;
    for (int& c : a) {
      if (c == hi)
        c = lo;
      else if (c > hi)
        --c;
    }
    return HardClustering(std::move(a));
  }

 private:
  std::vector<int> a_;
  int n_ = 0;
};

inline Encoder clustering_to_encoder(const HardClustering& c) {
  Matrix m = Matrix::Zero(c.n_clusters(), c.size());
  for (int x = 0; x < c.size(); ++x) m(c.assignment()[static_cast<std::size_t>(x)], x) = 1.0;
  return Encoder(std::move(m));
}

inline TradeoffPoint evaluate_clustering(const HardClustering& c, const JointXY& j, double beta, Solver solver) {
  const Encoder enc = clustering_to_encoder(c);
  TradeoffPoint p;
  p.solver = solver;
  p.beta = beta;
  p.card_z = c.n_clusters();
  const double ix = i_zx(enc, j), iy = i_zy(enc, j);
  p.i_zx_bits = to_bits(ix);
  p.i_zy_bits = to_bits(iy);
  p.loss_nats = iy - beta * ix;
  p.stationarity_gap = stationarity_gap(enc, j, beta);
  return p;
}

/// Starts from singletons and repeatedly applies the merge with the lowest
/// Lagrangian (ties: lexicographically smallest pair). Returns |X| points,
/// from |X| clusters down to one.
inline std::vector<TradeoffPoint> greedy_merge_run(const JointXY& j, double beta) {
  if (!(beta > 0.0)) throw InvalidConfig("greedy_merge_run: beta must be positive");
  HardClustering c = HardClustering::singletons(static_cast<int>(j.card_x()));
  std::vector<TradeoffPoint> out{evaluate_clustering(c, j, beta, Solver::Greedy)};
  while (c.n_clusters() > 1) {
    std::optional<HardClustering> best;
    double best_loss = 0.0;
    for (int lo = 0; lo < c.n_clusters(); ++lo)
      for (int hi = lo + 1; hi < c.n_clusters(); ++hi) {
        HardClustering m = c.merged(lo, hi);
        const double loss = pf_lagrangian(clustering_to_encoder(m), j, beta);
        if (!best || loss < best_loss) {
          best = std::move(m);
          best_loss = loss;
        }
      }
    c = std::move(*best);
    out.push_back(evaluate_clustering(c, j, beta, Solver::Greedy));
  }
  return out;
}

inline constexpr Index kMaxExhaustiveX = 12;

/// Calls fn(HardClustering) for every set partition, in restricted-growth
/// string order.
template <typename Fn>
void for_each_partition(int n, Fn&& fn) {
  if (n < 1) return;
  std::vector<int> a(static_cast<std::size_t>(n), 0);
  std::vector<int> max_prefix(static_cast<std::size_t>(n), 0);  // max of a[0..i]
  while (true) {
    fn(HardClustering(a));
    int i = n - 1;
    while (i > 0 && a[static_cast<std::size_t>(i)] > max_prefix[static_cast<std::size_t>(i - 1)]) --i;
    if (i == 0) return;
    ++a[static_cast<std::size_t>(i)];
    max_prefix[static_cast<std::size_t>(i)] =
        std::max(max_prefix[static_cast<std::size_t>(i - 1)], a[static_cast<std::size_t>(i)]);
    for (int k = i + 1; k < n; ++k) {
      a[static_cast<std::size_t>(k)] = 0;
      max_prefix[static_cast<std::size_t>(k)] = max_prefix[static_cast<std::size_t>(i)];
    }
  }
}

/// Metrics of every set partition of X. Throws LimitExceeded above |X| = 12.
inline std::vector<TradeoffPoint> exhaustive_partitions(const JointXY& j, double beta = 1.0) {
  if (j.card_x() > kMaxExhaustiveX)
    throw LimitExceeded("exhaustive_partitions: |X| = " + std::to_string(j.card_x()) + " exceeds " +
                        std::to_string(kMaxExhaustiveX));
  std::vector<TradeoffPoint> out;
  for_each_partition(static_cast<int>(j.card_x()), [&](const HardClustering& c) {
    out.push_back(evaluate_clustering(c, j, beta, Solver::Exhaustive));
  });
  return out;
}

}  // namespace pf
