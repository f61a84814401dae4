// Command-line front end: solve, sweep, baseline, verify, report.
//
// Exit codes: 0 ok, 1 malformed input, 2 bad flags, 3 solve hit the
// iteration limit, 4 exhaustive guard exceeded, 5 a verification check failed.
#pragma once

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pf/baseline.hpp"
#include "pf/dca.hpp"
#include "pf/diagnostics.hpp"
#include "pf/prob_io.hpp"
#include "pf/sweep.hpp"
#include "pf/tradeoff.hpp"

namespace pf::cli {

enum Exit : int { kOk = 0, kBadInput = 1, kBadFlags = 2, kMaxIter = 3, kGuard = 4, kCheckFailed = 5 };

/// Raised for anything the user could fix by changing flags.
class FlagError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw FlagError(key + ": '" + v + "' is not a number");
  return d;
}

inline long long parse_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long n = 0;
  try {
    n = std::stoll(v, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw FlagError(key + ": '" + v + "' is not an integer");
  return n;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw FlagError(key + ": '" + v + "' is not a boolean");
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& key, const std::string& v, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(v);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(static_cast<T>(parse(key, item)));
  if (out.empty()) throw FlagError(key + ": empty list");
  return out;
}

inline InnerKind parse_q(const std::string& key, long long q) {
  if (q == 1) return InnerKind::SparseLog;
  if (q == 2) return InnerKind::Ridge;
  throw FlagError(key + ": q must be 1 or 2");
}

}  // namespace detail

/// Everything a subcommand may read; flags fill it, then --set overrides.
struct Settings {
  DcaConfig dca;
  SweepConfig sweep;
  int card_z = 3;
  double bin_width = 0.02;
  double dominance_tol = 0.01;
  std::string baseline_mode = "both";
  VerifyOptions verify;
};

/// Applies one key=value override. Unknown keys are flag errors.
inline void apply_override(Settings& s, const std::string& kv) {
  using namespace detail;
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw FlagError("--set expects key=value, got '" + kv + "'");
  const std::string key = kv.substr(0, eq), v = kv.substr(eq + 1);
  DcaConfig& d = s.dca;
  if (key == "beta") d.beta = parse_double(key, v);
  else if (key == "alpha") d.alpha = parse_double(key, v);
  else if (key == "q") d.inner_kind = parse_q(key, parse_int(key, v));
  else if (key == "outer_tol") d.outer_tol = parse_double(key, v);
  else if (key == "outer_max_iter") d.outer_max_iter = static_cast<int>(parse_int(key, v));
  else if (key == "inner_tol") d.inner_tol = parse_double(key, v);
  else if (key == "inner_max_iter") d.inner_max_iter = static_cast<int>(parse_int(key, v));
  else if (key == "box_m") d.box_m = parse_double(key, v);
  else if (key == "box_M") d.box_M = parse_double(key, v);
  else if (key == "log_clamp") d.log_clamp = parse_double(key, v);
  else if (key == "seed") d.seed = static_cast<std::uint64_t>(parse_int(key, v));
  else if (key == "rcond") d.rcond = parse_double(key, v);
  else if (key == "require_full_rank") d.require_full_rank = parse_bool(key, v);
  else if (key == "descent_safeguard") d.descent_safeguard = parse_bool(key, v);
  else if (key == "card_z") s.card_z = static_cast<int>(parse_int(key, v));
  else if (key == "beta_grid") s.sweep.beta_grid = parse_list<double>(key, v, parse_double);
  else if (key == "alpha_grid") s.sweep.alpha_grid = parse_list<double>(key, v, parse_double);
  else if (key == "card_z_values") s.sweep.card_z_values = parse_list<int>(key, v, parse_int);
  else if (key == "restarts") s.sweep.restarts = static_cast<int>(parse_int(key, v));
  else if (key == "base_seed") s.sweep.base_seed = static_cast<std::uint64_t>(parse_int(key, v));
  else if (key == "threads") s.sweep.threads = static_cast<int>(parse_int(key, v));
  else if (key == "bin_width") s.bin_width = parse_double(key, v);
  else if (key == "dominance_tol") s.dominance_tol = parse_double(key, v);
  else if (key == "mode") s.baseline_mode = v;
  else if (key == "n_gradient") s.verify.n_gradient = static_cast<int>(parse_int(key, v));
  else if (key == "n_identity") s.verify.n_identity = static_cast<int>(parse_int(key, v));
  else if (key == "n_pairs") s.verify.n_pairs = static_cast<int>(parse_int(key, v));
  else if (key == "tolerance") s.verify.tolerance = parse_double(key, v);
  else throw FlagError("unknown override key '" + key + "'");
}

namespace detail {

inline void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty() || path == "-") {
    fallback << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path + "'");
  f << text;
}

/// Serializes and re-parses before anything touches the disk.
inline std::string checked_csv(const std::vector<TradeoffPoint>& points) {
  std::ostringstream os;
  write_csv(os, points);
  std::istringstream back(os.str());
  if (read_csv(back).size() != points.size()) throw Error("CSV round trip lost rows");
  return os.str();
}

inline nlohmann::json config_json(const DcaConfig& c) {
  return {{"beta", c.beta},
          {"alpha", c.alpha},
          {"q", penalty_order(c.inner_kind)},
          {"outer_tol", c.outer_tol},
          {"outer_max_iter", c.outer_max_iter},
          {"inner_tol", c.inner_tol},
          {"inner_max_iter", c.inner_max_iter},
          {"box_m", c.box_m},
          {"box_M", c.box_M},
          {"log_clamp", c.log_clamp},
          {"seed", c.seed},
          {"descent_safeguard", c.descent_safeguard}};
}

}  // namespace detail

inline nlohmann::json result_json(const DcaResult& r, const DcaConfig& cfg) {
  return {{"config", detail::config_json(cfg)},
          {"card_z", r.encoder.card_z()},
          {"encoder", matrix_to_json(r.encoder.matrix())},
          {"loss_trace", r.loss_trace},
          {"loss_nats", r.final_loss()},
          {"converged", r.converged},
          {"iterations", r.iterations},
          {"stationarity_gap", r.stationarity_gap},
          {"i_zx_bits", r.i_zx_bits},
          {"i_zy_bits", r.i_zy_bits},
          {"audit",
           {{"defect", r.defect},
            {"max_loss_increase", r.max_loss_increase},
            {"certificate_slack", r.certificate_slack},
            {"relaxed_steps", r.relaxed_steps},
            {"surrogate_steps", r.surrogate_steps}}}};
}

inline int cmd_solve(const JointXY& j, const Settings& s, const std::string& out_path, std::ostream& out) {
  const DcaResult r = dca_run(j, s.card_z, s.dca);
  const nlohmann::json doc = result_json(r, s.dca);
  const Vector sums = r.encoder.matrix().colwise().sum().transpose();
  if ((sums.array() - 1.0).abs().maxCoeff() > 1e-9) throw Error("solve: encoder columns do not sum to 1");
  detail::write_text(out_path, doc.dump(2) + "\n", out);
  return r.converged ? kOk : kMaxIter;
}

inline int cmd_sweep(const JointXY& j, const Settings& s, const std::string& out_path, std::ostream& err) {
  SweepConfig cfg = s.sweep;
  cfg.dca = s.dca;
  cfg.inner_kind = s.dca.inner_kind;
  const SweepResult r = run_sweep(j, cfg);
  const auto frontier = pareto_frontier(r.points, s.bin_width);
  detail::write_text(out_path, detail::checked_csv(r.points), err);
  detail::write_text(out_path + ".frontier.csv", detail::checked_csv(frontier), err);
  detail::write_text(out_path + ".json", to_json(r.points).dump(1) + "\n", err);
  int unconverged = 0;
  for (const auto& p : r.points) unconverged += !p.converged;
  err << "sweep: " << r.points.size() << " runs, " << unconverged << " unconverged, " << r.defects()
      << " non-monotone, frontier " << frontier.size() << " points\n";
  return kOk;
}

inline int cmd_baseline(const JointXY& j, const Settings& s, const std::string& out_path, std::ostream& out) {
  const std::string& mode = s.baseline_mode;
  if (mode != "greedy" && mode != "exhaustive" && mode != "both")
    throw FlagError("baseline mode must be greedy, exhaustive or both");
  std::vector<TradeoffPoint> points;
  if (mode != "exhaustive") points = greedy_merge_run(j, s.dca.beta);
  if (mode != "greedy") {
    auto ex = exhaustive_partitions(j, s.dca.beta);
    points.insert(points.end(), ex.begin(), ex.end());
  }
  detail::write_text(out_path, detail::checked_csv(points), out);
  return kOk;
}

inline int cmd_verify(const JointXY& j, const Settings& s, const std::string& out_path, std::ostream& out,
                      std::ostream& err) {
  VerifyOptions o = s.verify;
  o.beta = s.dca.beta;
  o.alpha = s.dca.alpha;
  o.card_z = s.card_z;
  o.seed = s.dca.seed;
  const auto reports = run_all_checks(j, o);
  std::ostringstream os;
  write_json_lines(os, reports);
  detail::write_text(out_path, os.str(), out);
  bool ok = true;
  for (const auto& r : reports) {
    if (!r.passed) err << "verify: " << r.name << " failed (" << r.max_violation << " > " << r.tolerance << ")\n";
    ok = ok && r.passed;
  }
  return ok ? kOk : kCheckFailed;
}

struct Dominance {
  TradeoffPoint baseline;
  bool dominated = false;
  std::optional<TradeoffPoint> witness;
};

/// For each baseline point, the lowest-i_zy DCA point with i_zx >= b - tol
/// and i_zy <= b + tol, if any.
inline std::vector<Dominance> dominance_summary(const std::vector<TradeoffPoint>& points, double tol) {
  std::vector<Dominance> out;
  for (const auto& b : points) {
    if (is_dca(b.solver)) continue;
    Dominance d{b, false, std::nullopt};
    for (const auto& p : points) {
      if (!is_dca(p.solver)) continue;
      if (p.i_zx_bits >= b.i_zx_bits - tol && p.i_zy_bits <= b.i_zy_bits + tol &&
          (!d.witness || p.i_zy_bits < d.witness->i_zy_bits))
        d.witness = p;
    }
    d.dominated = d.witness.has_value();
    out.push_back(std::move(d));
  }
  return out;
}

inline std::string dominance_csv(const std::vector<Dominance>& rows) {
  using pf::detail::fmt12;
  std::string s = "solver,card_z,i_zx_bits,i_zy_bits,dominated,dca_solver,dca_beta,dca_alpha,dca_i_zx_bits,dca_i_zy_bits\n";
  for (const auto& d : rows) {
    s += std::string(to_string(d.baseline.solver)) + ',' + std::to_string(d.baseline.card_z) + ',' +
         fmt12(d.baseline.i_zx_bits) + ',' + fmt12(d.baseline.i_zy_bits) + ',' + (d.dominated ? "1" : "0");
    if (d.witness)
      s += std::string(",") + to_string(d.witness->solver) + ',' + fmt12(d.witness->beta) + ',' +
           fmt12(d.witness->alpha) + ',' + fmt12(d.witness->i_zx_bits) + ',' + fmt12(d.witness->i_zy_bits);
    else
      s += ",,,,,";
    s += '\n';
  }
  return s;
}

inline int cmd_report(const std::vector<std::string>& inputs, const Settings& s, const std::string& out_path,
                      std::ostream& out, std::ostream& err) {
  if (inputs.empty()) {
    err << "report: no input files\n";
    return kBadInput;
  }
  std::vector<TradeoffPoint> all;
  for (const auto& path : inputs) {
    auto pts = read_csv(path);
    all.insert(all.end(), pts.begin(), pts.end());
  }
  if (all.empty()) {
    err << "report: inputs contain no rows\n";
    return kBadInput;
  }
  const auto frontier = pareto_frontier(all, s.bin_width);
  detail::write_text(out_path, detail::checked_csv(frontier), out);
  const auto dom = dominance_summary(all, s.dominance_tol);
  if (!dom.empty()) {
    const std::string text = dominance_csv(dom);
    if (out_path.empty() || out_path == "-")
      out << text;
    else
      detail::write_text(out_path + ".dominance.csv", text, out);
    int covered = 0;
    for (const auto& d : dom) covered += d.dominated;
    err << "report: " << covered << " of " << dom.size() << " baseline points dominated within "
        << s.dominance_tol << " bits\n";
  }
  return kOk;
}

/// Parses argv and dispatches. Never throws; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Privacy funnel solver (difference-of-convex iterations with relaxed inner problems)", "pf_cli"};
  app.require_subcommand(1);

  std::string dist, out_path;
  double beta = 1.0, alpha = 1.0, tol = 0.0;
  int card_z = 3, q = 2, restarts = 10, max_iter = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> sets, inputs;

  auto add_common = [&](CLI::App* sub, bool needs_dist) {
    auto* d = sub->add_option("--dist", dist, "joint distribution JSON");
    if (needs_dist) d->required();
    sub->add_option("--out", out_path, "output path (stdout if omitted)");
    sub->add_option("--beta", beta, "trade-off multiplier");
    sub->add_option("--alpha", alpha, "inner relaxation coefficient");
    sub->add_option("--card-z", card_z, "|Z|");
    sub->add_option("--q", q, "inner penalty: 2 ridge, 1 log-domain sparse")->check(CLI::IsMember({1, 2}));
    sub->add_option("--restarts", restarts, "random restarts per grid cell");
    sub->add_option("--seed", seed, "base seed");
    sub->add_option("--max-iter", max_iter, "outer iteration limit");
    sub->add_option("--tol", tol, "outer loss-change tolerance (verify: check tolerance)");
    sub->add_option("--set", sets, "key=value override, repeatable");
  };
  auto* solve = app.add_subcommand("solve", "run one DCA solve and write its result as JSON");
  auto* sweep = app.add_subcommand("sweep", "run the (beta, alpha, |Z|, restart) grid; write CSV, frontier, JSON");
  auto* base = app.add_subcommand("baseline", "greedy merging and exhaustive partitions as CSV");
  auto* verify = app.add_subcommand("verify", "numerical checks as JSON lines");
  auto* report = app.add_subcommand("report", "combined frontier and baseline dominance from CSV files");
  for (auto* sub : {solve, sweep, base, verify}) add_common(sub, true);
  add_common(report, false);
  report->add_option("inputs", inputs, "sweep or baseline CSV files");
  sweep->get_option("--out")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kBadFlags;
  }

  Settings s;
  try {
    s.dca.beta = beta;
    s.dca.alpha = alpha;
    s.dca.inner_kind = detail::parse_q("--q", q);
    s.dca.seed = seed;
    s.card_z = card_z;
    s.sweep.restarts = restarts;
    s.sweep.base_seed = seed;
    if (max_iter > 0) s.dca.outer_max_iter = max_iter;
    if (tol > 0.0) {
      s.dca.outer_tol = tol;
      s.verify.tolerance = tol;
    }
    if (sweep->parsed()) {
      if (sweep->count("--beta")) s.sweep.beta_grid = {beta};
      if (sweep->count("--alpha")) s.sweep.alpha_grid = {alpha};
      if (sweep->count("--card-z")) s.sweep.card_z_values = {card_z};
    }
    for (const auto& kv : sets) apply_override(s, kv);
    if (!verify->parsed()) s.dca.validate();
    s.sweep.validate();
    if (s.card_z < 1) throw FlagError("card_z must be >= 1");
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kBadFlags;
  }

  if (report->parsed()) {
    try {
      return cmd_report(inputs, s, out_path, out, err);
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kBadInput;
    }
  }

  std::optional<JointXY> j;
  try {
    j.emplace(load_joint(dist));
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  }

  try {
    if (solve->parsed()) return cmd_solve(*j, s, out_path, out);
    if (sweep->parsed()) return cmd_sweep(*j, s, out_path, err);
    if (base->parsed()) return cmd_baseline(*j, s, out_path, out);
    return cmd_verify(*j, s, out_path, out, err);
  } catch (const LimitExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kGuard;
  } catch (const FlagError& e) {
    err << "error: " << e.what() << '\n';
    return kBadFlags;
  } catch (const InvalidConfig& e) {
    err << "error: " << e.what() << '\n';
    return kBadFlags;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  }
}

}  // namespace pf::cli
