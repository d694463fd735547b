#pragma once

#include <stdexcept>
#include <string>

namespace pqrl {

// Shape/dimension violations (matmul mismatch, degenerate layer-norm width, ...).
struct ShapeError : std::invalid_argument {
  explicit ShapeError(const std::string& msg) : std::invalid_argument(msg) {}
};

// A token that is not present in the registered vocabulary.
struct VocabularyError : std::invalid_argument {
  explicit VocabularyError(const std::string& msg) : std::invalid_argument(msg) {}
};

// API contract violations (non-scalar grad-check root, missing pair gradients, ...).
struct ContractError : std::logic_error {
  explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

// Non-finite intermediate values (log-prob ratio overflow in the objective).
struct NumericRangeError : std::runtime_error {
  explicit NumericRangeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad or inconsistent run configuration; message names the offending field.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// The active sample set became empty; training cannot continue.
struct DataExhaustedError : std::runtime_error {
  explicit DataExhaustedError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pqrl
