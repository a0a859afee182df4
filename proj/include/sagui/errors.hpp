#pragma once

#include <stdexcept>
#include <string>

namespace sagui {

/// Malformed argument: non-stochastic rows, out-of-range indices, bad specs.
struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Vector/observation dimensions do not line up.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Instance exceeds what an exhaustive routine is allowed to enumerate.
struct SizeError : std::length_error {
    using std::length_error::length_error;
};

struct EmptyBufferError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

/// A theorem or lemma was invoked outside the conditions under which it applies.
struct PreconditionError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Non-finite loss or parameter encountered during training.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace sagui
