#pragma once

#include <stdexcept>
#include <string>

namespace polybreak {

/// Invalid arguments or configuration (bad order, out-of-range index, alpha
/// outside (0,1), empty scan range, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A segment design whose orthogonal factor has a relative pivot below the
/// rank tolerance. Usually means the (n, p) combination is too extreme.
class RankDeficient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A residual sum of squares required by a statistic is zero: the data lie in
/// the polynomial span and the likelihood ratio is undefined.
class DegenerateFit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed external input (CSV series, config file syntax).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace detail
}  // namespace polybreak
