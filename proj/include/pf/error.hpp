// Error types shared by the privacy funnel solvers.
#pragma once

#include <stdexcept>
#include <string>

namespace pf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input does not describe a valid (conditional) distribution.
class InvalidDistribution : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Some output symbol has zero marginal mass, so P(x|y) is undefined.
class DegenerateDistribution : public Error {
 public:
  using Error::Error;
};

/// A Markov block has lower numerical rank than required.
class RankDeficient : public Error {
 public:
  RankDeficient(long rank, long required)
      : Error("block rank " + std::to_string(rank) + " below required " +
              std::to_string(required)),
        rank_(rank),
        required_(required) {}
  long rank() const noexcept { return rank_; }
  long required() const noexcept { return required_; }

 private:
  long rank_;
  long required_;
};

/// A combinatorial routine was asked for more work than its guard allows.
class LimitExceeded : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

}  // namespace pf
