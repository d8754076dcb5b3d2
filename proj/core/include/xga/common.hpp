#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace xga {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Malformed configuration, dimension mismatch, bad CLI input. Exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Optimization or evaluation produced unusable numbers. Exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ConfigError(message);
}

// Below this, a vector is treated as exactly zero for cosine purposes.
inline constexpr double kTinyNorm = 1e-300;

// ||M_n z|| at or below this is a degenerate direction.
inline constexpr double kDegenerateNorm = 1e-12;

}  // namespace xga
