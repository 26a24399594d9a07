#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace isomech {

/// Invalid numeric content: NaN, infinity, or a value outside a required domain.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Mismatched lengths between objects that must agree.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Malformed combinatorial structure (not a permutation, blocks not a partition, ...).
struct StructureError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Scalar parameter outside its legal range.
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Invalid or inconsistent experiment configuration.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A majorization precondition failed. Carries the 1-based length of the first
/// prefix whose sums compare the wrong way.
struct OrderingError : std::invalid_argument {
    std::size_t prefix;

    OrderingError(const std::string& msg, std::size_t prefix_len)
        : std::invalid_argument(msg + " (prefix " + std::to_string(prefix_len) + ")"),
          prefix(prefix_len) {}
};

/// Failure inside a Monte Carlo run. Carries the offending draw index.
struct SimulationError : std::runtime_error {
    std::size_t draw;

    SimulationError(const std::string& msg, std::size_t draw_index)
        : std::runtime_error(msg + " (draw " + std::to_string(draw_index) + ")"),
          draw(draw_index) {}
};

}  // namespace isomech
