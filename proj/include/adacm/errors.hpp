#pragma once

#include <stdexcept>
#include <string>

namespace adacm {

// Shape or alignment mismatch between tensors/arguments.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Non-finite or otherwise degenerate numeric input (e.g. zero-norm embedding).
struct NumericError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Autodiff graph misuse (loss not a scalar on this tape, invalid node id).
struct GraphError : std::logic_error {
    using std::logic_error::logic_error;
};

// Malformed file content; message carries the byte offset where known.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid run configuration or split specification.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem write/read failure.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Mixing runs with different configurations, or too few runs.
struct AggregationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Ground-truth bookkeeping missing an entry it must have.
struct AuditError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised by the trainer when a loss turns non-finite.
struct TrainingDiverged : std::runtime_error {
    int epoch = 0;
    int step = 0;

    TrainingDiverged(int epoch_, int step_, const std::string& detail)
        : std::runtime_error("training diverged at epoch " + std::to_string(epoch_) +
                             ", step " + std::to_string(step_) + ": " + detail),
          epoch(epoch_),
          step(step_) {}
};

}  // namespace adacm
