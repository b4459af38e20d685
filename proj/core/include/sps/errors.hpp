#pragma once

#include <stdexcept>
#include <string>

namespace sps {

// Error taxonomy shared by all modules. Each maps to a distinct failure
// class so callers (and the CLI exit-code contract) can tell validation
// problems apart from runtime ones.

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when an operation receives input it cannot define a value for
// (empty sentence into an encoder, all-masked softmax, ...).
struct DegenerateInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TransferError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StatsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace sps
