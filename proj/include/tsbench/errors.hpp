#ifndef TSBENCH_ERRORS_HPP
#define TSBENCH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tsbench {

// Base for everything this library throws on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid argument values (rates, counts, levels, ...).
struct ParamError : Error {
    explicit ParamError(const std::string& msg) : Error(msg) {}
};

// Shape / length mismatches and degenerate sizes.
struct SizingError : Error {
    explicit SizingError(const std::string& msg) : Error(msg) {}
};

// File ingestion problems; message names row and column where possible.
struct IngestError : Error {
    explicit IngestError(const std::string& msg) : Error(msg) {}
};

// Bad or inconsistent run configuration.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Operation called on an object in the wrong state (e.g. sampling an
// untrained model).
struct StateError : Error {
    explicit StateError(const std::string& msg) : Error(msg) {}
};

// API misuse, e.g. sampling with a condition mode the model was not
// trained with.
struct UsageError : Error {
    explicit UsageError(const std::string& msg) : Error(msg) {}
};

// Training produced a non-finite loss; carries the offending batch index.
struct DivergedError : Error {
    int batch_index;
    DivergedError(const std::string& msg, int batch)
        : Error(msg + " (batch " + std::to_string(batch) + ")"), batch_index(batch) {}
};

// Non-finite intermediate inside a numerical transform; carries layer index.
struct NumericalError : Error {
    int layer_index;
    NumericalError(const std::string& msg, int layer)
        : Error(msg + " (layer " + std::to_string(layer) + ")"), layer_index(layer) {}
};

// Too few samples to run a model-based evaluator.
struct InsufficientDataError : Error {
    explicit InsufficientDataError(const std::string& msg) : Error(msg) {}
};

// Results from different tasks mixed into one table.
struct AggregationError : Error {
    explicit AggregationError(const std::string& msg) : Error(msg) {}
};

} // namespace tsbench

#endif
