// Euclidean projection of matrix columns onto the probability simplex.
#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "pf/prob.hpp"

namespace pf {

namespace detail {

/// Sort-based projection of one column, in place. `scratch` is resized as needed.
template <typename Col>
void project_to_simplex(Col&& v, std::vector<double>& scratch) {
  const Index n = v.size();
  scratch.assign(v.data(), v.data() + n);
  std::sort(scratch.begin(), scratch.end(), std::greater<>());
  double running = -1.0;
  double theta = 0.0;
  for (Index k = 0; k < n; ++k) {
    running += scratch[static_cast<std::size_t>(k)];
    const double t = running / static_cast<double>(k + 1);
    if (scratch[static_cast<std::size_t>(k)] - t > 0.0) theta = t;
  }
  for (Index i = 0; i < n; ++i) v[i] = std::max(v[i] - theta, 0.0);
}

/// Projects every column of `m` in place (m need not be contiguous per column).
inline void project_columns_in_place(Matrix& m, std::vector<double>& scratch) {
  Vector col(m.rows());
  for (Index c = 0; c < m.cols(); ++c) {
    col = m.col(c);
    project_to_simplex(col, scratch);
    m.col(c) = col;
  }
}

}  // namespace detail

inline CondDist project_columns_to_simplex(Matrix m) {
  if (!m.allFinite()) throw InvalidDistribution("project_columns_to_simplex: non-finite entry");
  std::vector<double> scratch;
  detail::project_columns_in_place(m, scratch);
  return CondDist(std::move(m));
}

}  // namespace pf
