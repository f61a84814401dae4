// Hyperparameter sweep over (beta, alpha, |Z|, restart) and Pareto frontier
// extraction on the information plane.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "pf/dca.hpp"
#include "pf/rng.hpp"
#include "pf/tradeoff.hpp"

namespace pf {

inline std::vector<double> geomspace(double lo, double hi, int n) {
  if (!(lo > 0.0 && lo < hi) || n < 2) throw InvalidConfig("geomspace: need 0 < lo < hi and n >= 2");
  std::vector<double> v(static_cast<std::size_t>(n));
  const double step = std::log(hi / lo) / (n - 1);
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
  v.front() = lo;
  v.back() = hi;
  return v;
}

struct SweepConfig {
  std::vector<double> beta_grid = geomspace(0.1, 10.0, 16);
  std::vector<double> alpha_grid = geomspace(0.1, 10.0, 16);
  /// Empty means 2 .. max(|X|, |Y|) + 1.
  std::vector<int> card_z_values;
  int restarts = 10;
  InnerKind inner_kind = InnerKind::Ridge;
  std::uint64_t base_seed = 0;
  /// Tolerances and limits for every run; beta, alpha, kind and seed are overwritten.
  DcaConfig dca;
  /// 0: PF_THREADS if set, otherwise the hardware concurrency.
  int threads = 0;

  std::vector<int> resolved_card_z(const JointXY& j) const {
    if (!card_z_values.empty()) return card_z_values;
    std::vector<int> v;
    const int top = static_cast<int>(std::max(j.card_x(), j.card_y())) + 1;
    for (int z = 2; z <= top; ++z) v.push_back(z);
    return v;
  }

  void validate() const {
    for (const auto* grid : {&beta_grid, &alpha_grid}) {
      if (grid->empty()) throw InvalidConfig("sweep grids must be non-empty");
      for (std::size_t i = 0; i < grid->size(); ++i) {
        if (!((*grid)[i] > 0.0)) throw InvalidConfig("sweep grids must be strictly positive");
        if (i > 0 && !((*grid)[i] > (*grid)[i - 1])) throw InvalidConfig("sweep grids must be ascending");
      }
    }
    for (int z : card_z_values)
      if (z < 1) throw InvalidConfig("card_z values must be >= 1");
    if (restarts < 1) throw InvalidConfig("restarts must be >= 1");
  }
};

/// Per-run diagnostics that do not belong in the CSV schema, parallel to `points`.
struct RunAudit {
  double max_loss_increase = 0.0;
  double certificate_slack = 0.0;
  bool defect = false;
  int surrogate_steps = 0;
};

struct SweepResult {
  std::vector<TradeoffPoint> points;
  std::vector<RunAudit> audits;

  int defects() const {
    return static_cast<int>(std::count_if(audits.begin(), audits.end(), [](const RunAudit& a) { return a.defect; }));
  }
};

inline int sweep_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PF_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<int>(std::min(n, 256L));
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

inline TradeoffPoint to_point(const DcaResult& r, const DcaConfig& cfg, int card_z, int restart) {
  TradeoffPoint p;
  p.solver = cfg.inner_kind == InnerKind::Ridge ? Solver::DcaRidge : Solver::DcaSparse;
  p.q = penalty_order(cfg.inner_kind);
  p.beta = cfg.beta;
  p.alpha = cfg.alpha;
  p.card_z = card_z;
  p.restart = restart;
  p.seed = cfg.seed;
  p.i_zx_bits = r.i_zx_bits;
  p.i_zy_bits = r.i_zy_bits;
  p.loss_nats = r.final_loss();
  p.converged = r.converged;
  p.iterations = r.iterations;
  p.stationarity_gap = r.stationarity_gap;
  return p;
}

/// One run per (beta, alpha, |Z|, restart), in that nesting order. Output
/// order and content do not depend on the number of threads.
inline SweepResult run_sweep(const JointXY& j, const SweepConfig& cfg) {
  cfg.validate();
  const auto card_z = cfg.resolved_card_z(j);

  struct Job {
    DcaConfig dca;
    int card_z, restart;
  };
  std::vector<Job> jobs;
  for (std::size_t bi = 0; bi < cfg.beta_grid.size(); ++bi)
    for (std::size_t ai = 0; ai < cfg.alpha_grid.size(); ++ai)
      for (int z : card_z)
        for (int r = 0; r < cfg.restarts; ++r) {
          DcaConfig d = cfg.dca;
          d.beta = cfg.beta_grid[bi];
          d.alpha = cfg.alpha_grid[ai];
          d.inner_kind = cfg.inner_kind;
          d.seed = hash_seed({cfg.base_seed, bi, ai, static_cast<std::uint64_t>(z), static_cast<std::uint64_t>(r)});
          jobs.push_back({d, z, r});
        }
  if (!jobs.empty()) jobs.front().dca.validate();
  // configuration-level failures (rank, shapes) surface once, before any work
  for (int z : card_z) detail::Problem(j, z, cfg.dca);

  SweepResult out;
  out.points.resize(jobs.size());
  out.audits.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        const Job& job = jobs[i];
        const DcaResult r = dca_run(j, job.card_z, job.dca);
        out.points[i] = to_point(r, job.dca, job.card_z, job.restart);
        out.audits[i] = {r.max_loss_increase, r.certificate_slack, r.defect, r.surrogate_steps};
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };

  const int n_threads = std::min<int>(sweep_threads(cfg.threads), static_cast<int>(std::max<std::size_t>(jobs.size(), 1)));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Lowest i_zy per i_zx bin, then drops every point for which another point
/// has higher i_zx and no higher i_zy. Sorted by i_zx ascending; i_zy then
/// increases strictly along the result.
inline std::vector<TradeoffPoint> pareto_frontier(const std::vector<TradeoffPoint>& points,
                                                  double bin_width_bits = 0.02) {
  if (!(bin_width_bits > 0.0)) throw InvalidConfig("pareto_frontier: bin width must be positive");
  std::vector<std::pair<long long, const TradeoffPoint*>> best;
  {
    std::vector<std::pair<long long, const TradeoffPoint*>> keyed;
    keyed.reserve(points.size());
    for (const auto& p : points)
      keyed.emplace_back(static_cast<long long>(std::floor(p.i_zx_bits / bin_width_bits)), &p);
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
      return a.first < b.first || (a.first == b.first && a.second->i_zy_bits < b.second->i_zy_bits);
    });
    for (const auto& k : keyed)
      if (best.empty() || best.back().first != k.first) best.push_back(k);
  }
  std::vector<TradeoffPoint> frontier;
  double lowest = std::numeric_limits<double>::infinity();
  std::stable_sort(best.begin(), best.end(),
                   [](const auto& a, const auto& b) { return a.second->i_zx_bits > b.second->i_zx_bits; });
  for (const auto& [bin, p] : best) {
    if (p->i_zy_bits < lowest) frontier.push_back(*p);
    lowest = std::min(lowest, p->i_zy_bits);
  }
  std::reverse(frontier.begin(), frontier.end());
  return frontier;
}

}  // namespace pf
