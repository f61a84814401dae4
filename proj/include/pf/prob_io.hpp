// JSON reading/writing of joint distributions.
//
// Layout: {"p_x": [..|X|..], "p_y_given_x": [[row y0, |X| entries], ...]}
// Row i, column j holds P(y_i | x_j).
#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "pf/prob.hpp"

namespace pf {

class ParseError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline double json_number(const nlohmann::json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  return v.get<double>();
}

}  // namespace detail

inline JointXY joint_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("joint distribution: expected a JSON object");
  for (const auto& [key, _] : doc.items())
    if (key != "p_x" && key != "p_y_given_x") throw ParseError("joint distribution: unknown key '" + key + "'");
  if (!doc.contains("p_x") || !doc.contains("p_y_given_x"))
    throw ParseError("joint distribution: requires keys 'p_x' and 'p_y_given_x'");

  const auto& px = doc["p_x"];
  if (!px.is_array() || px.empty()) throw ParseError("p_x: expected a non-empty array");
  Vector p(static_cast<Index>(px.size()));
  for (std::size_t i = 0; i < px.size(); ++i)
    p[static_cast<Index>(i)] = detail::json_number(px[i], "p_x[" + std::to_string(i) + "]");

  const auto& rows = doc["p_y_given_x"];
  if (!rows.is_array() || rows.empty()) throw ParseError("p_y_given_x: expected a non-empty array of rows");
  Matrix q(static_cast<Index>(rows.size()), p.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (!row.is_array() || row.size() != px.size())
      throw ParseError("p_y_given_x[" + std::to_string(r) + "]: expected " +
                       std::to_string(px.size()) + " entries");
    for (std::size_t c = 0; c < row.size(); ++c)
      q(static_cast<Index>(r), static_cast<Index>(c)) =
          detail::json_number(row[c], "p_y_given_x[" + std::to_string(r) + "][" + std::to_string(c) + "]");
  }
  return JointXY(DiscreteDist(std::move(p)), CondDist(std::move(q)));
}

inline JointXY load_joint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + path + "': " + e.what());
  }
  return joint_from_json(doc);
}

inline nlohmann::json to_json(const JointXY& j) {
  nlohmann::json doc;
  doc["p_x"] = std::vector<double>(j.p_x().probs().begin(), j.p_x().probs().end());
  auto rows = nlohmann::json::array();
  const Matrix& q = j.y_given_x().matrix();
  for (Index y = 0; y < q.rows(); ++y) {
    auto row = nlohmann::json::array();
    for (Index x = 0; x < q.cols(); ++x) row.push_back(q(y, x));
    rows.push_back(std::move(row));
  }
  doc["p_y_given_x"] = std::move(rows);
  return doc;
}

/// Matrix as an array of rows.
inline nlohmann::json matrix_to_json(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// The synthetic 3x3 test distribution used throughout the evaluation.
inline JointXY reference_joint() {
  Matrix q(3, 3);
  q << 0.90, 0.08, 0.40,
       0.025, 0.82, 0.05,
       0.075, 0.10, 0.55;
  return JointXY(DiscreteDist::uniform(3), CondDist(std::move(q)));
}

}  // namespace pf
