#pragma once

#include <Eigen/Dense>

#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace circsync {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Invalid argument to an operation (bad sizes, out-of-range vertices, bad parameters).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an algorithm does not hold for the given input.
/// `vertex()` is the 0-based offending vertex, or -1 when not vertex-specific.
class PreconditionError : public std::runtime_error {
public:
    explicit PreconditionError(const std::string& what, int vertex = -1)
        : std::runtime_error(what), vertex_(vertex) {}
    int vertex() const noexcept { return vertex_; }

private:
    int vertex_;
};

/// Requested enumeration exceeds the configured capacity.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-fatal findings collected by operations that only warn.
using Diagnostics = std::vector<std::string>;

}  // namespace circsync
