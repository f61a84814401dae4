// Information-plane points and their CSV / JSON serialization.
#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pf/error.hpp"

namespace pf {

enum class Solver { DcaRidge, DcaSparse, Greedy, Exhaustive };

inline const char* to_string(Solver s) {
  switch (s) {
    case Solver::DcaRidge: return "dca_ridge";
    case Solver::DcaSparse: return "dca_sparse";
    case Solver::Greedy: return "greedy";
    case Solver::Exhaustive: return "exhaustive";
  }
  return "?";
}

inline Solver solver_from_string(const std::string& s) {
  if (s == "dca_ridge") return Solver::DcaRidge;
  if (s == "dca_sparse") return Solver::DcaSparse;
  if (s == "greedy") return Solver::Greedy;
  if (s == "exhaustive") return Solver::Exhaustive;
  throw Error("unknown solver '" + s + "'");
}

inline bool is_dca(Solver s) { return s == Solver::DcaRidge || s == Solver::DcaSparse; }

struct TradeoffPoint {
  double i_zx_bits = 0.0;
  double i_zy_bits = 0.0;
  Solver solver = Solver::DcaRidge;
  int q = 0;  // penalty order for DCA points, 0 for baselines
  double beta = 0.0;
  double alpha = 0.0;
  int card_z = 0;
  int restart = 0;
  std::uint64_t seed = 0;
  double loss_nats = 0.0;
  bool converged = true;
  int iterations = 0;
  double stationarity_gap = 0.0;

  friend bool operator==(const TradeoffPoint&, const TradeoffPoint&) = default;
};

inline constexpr const char* kCsvHeader =
    "solver,q,beta,alpha,card_z,restart,seed,i_zx_bits,i_zy_bits,loss_nats,converged,iterations,"
    "stationarity_gap";

namespace detail {

inline std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace detail

inline std::string to_csv_row(const TradeoffPoint& p) {
  using detail::fmt12;
  std::string row = to_string(p.solver);
  row += ',' + std::to_string(p.q) + ',' + fmt12(p.beta) + ',' + fmt12(p.alpha) + ',' +
         std::to_string(p.card_z) + ',' + std::to_string(p.restart) + ',' + std::to_string(p.seed) + ',' +
         fmt12(p.i_zx_bits) + ',' + fmt12(p.i_zy_bits) + ',' + fmt12(p.loss_nats) + ',' +
         (p.converged ? "1" : "0") + ',' + std::to_string(p.iterations) + ',' + fmt12(p.stationarity_gap);
  return row;
}

inline void write_csv(std::ostream& out, const std::vector<TradeoffPoint>& points) {
  out << kCsvHeader << '\n';
  for (const auto& p : points) out << to_csv_row(p) << '\n';
}

inline void write_csv(const std::string& path, const std::vector<TradeoffPoint>& points) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  write_csv(out, points);
}

class SchemaError : public Error {
 public:
  using Error::Error;
};

inline std::vector<TradeoffPoint> read_csv(std::istream& in, const std::string& name = "csv") {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw SchemaError(name + ": unexpected header");
  std::vector<TradeoffPoint> points;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 13) throw SchemaError(name + ":" + std::to_string(lineno) + ": expected 13 fields");
    try {
      TradeoffPoint p;
      p.solver = solver_from_string(f[0]);
      p.q = std::stoi(f[1]);
      p.beta = std::stod(f[2]);
      p.alpha = std::stod(f[3]);
      p.card_z = std::stoi(f[4]);
      p.restart = std::stoi(f[5]);
      p.seed = std::stoull(f[6]);
      p.i_zx_bits = std::stod(f[7]);
      p.i_zy_bits = std::stod(f[8]);
      p.loss_nats = std::stod(f[9]);
      if (f[10] != "0" && f[10] != "1") throw SchemaError("converged must be 0 or 1");
      p.converged = f[10] == "1";
      p.iterations = std::stoi(f[11]);
      p.stationarity_gap = std::stod(f[12]);
      points.push_back(p);
    } catch (const std::logic_error& e) {
      throw SchemaError(name + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw SchemaError(name + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return points;
}

inline std::vector<TradeoffPoint> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  return read_csv(in, path);
}

inline nlohmann::json to_json(const TradeoffPoint& p) {
  return {{"solver", to_string(p.solver)}, {"q", p.q},
          {"beta", p.beta},                {"alpha", p.alpha},
          {"card_z", p.card_z},            {"restart", p.restart},
          {"seed", p.seed},                {"i_zx_bits", p.i_zx_bits},
          {"i_zy_bits", p.i_zy_bits},      {"loss_nats", p.loss_nats},
          {"converged", p.converged},      {"iterations", p.iterations},
          {"stationarity_gap", p.stationarity_gap}};
}

inline nlohmann::json to_json(const std::vector<TradeoffPoint>& points) {
  auto arr = nlohmann::json::array();
  for (const auto& p : points) arr.push_back(to_json(p));
  return arr;
}

}  // namespace pf
