// Exception types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace bdesn {

// Dimension / shape mismatch between operands.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid argument value (out-of-range density, scale <= 0, ...).
struct ParameterError : std::runtime_error {
    explicit ParameterError(const std::string& what) : std::runtime_error(what) {}
};

// Iterative method exhausted its budget; carries the last estimate.
struct ConvergenceError : std::runtime_error {
    ConvergenceError(const std::string& what, double last)
        : std::runtime_error(what), last_estimate(last) {}
    double last_estimate;
};

// Linear system not solvable at the requested regularization.
struct SingularityError : std::runtime_error {
    explicit SingularityError(const std::string& what) : std::runtime_error(what) {}
};

// Randomly drawn object unusable (e.g. zero spectral radius when rho > 0).
struct DegenerateDrawError : std::runtime_error {
    explicit DegenerateDrawError(const std::string& what) : std::runtime_error(what) {}
};

// Semantically invalid input (empty dataset, label outside alphabet, ...).
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed file contents; carries the 1-based offending line.
struct FormatError : std::runtime_error {
    FormatError(const std::string& what, std::size_t line_no)
        : std::runtime_error(what + " (line " + std::to_string(line_no) + ")"),
          line(line_no) {}
    std::size_t line;
};

// A variable has no observed training values to impute from.
struct ImputationError : std::runtime_error {
    explicit ImputationError(const std::string& what) : std::runtime_error(what) {}
};

// Training loss became non-finite; carries epoch and learning rate.
struct DivergenceError : std::runtime_error {
    DivergenceError(const std::string& what, std::size_t at_epoch, double lr)
        : std::runtime_error(what + " (epoch " + std::to_string(at_epoch) +
                             ", learning rate " + std::to_string(lr) + ")"),
          epoch(at_epoch), learning_rate(lr) {}
    std::size_t epoch;
    double learning_rate;
};

// A class cannot be represented on both sides of a stratified split.
struct StratificationError : std::runtime_error {
    explicit StratificationError(const std::string& what) : std::runtime_error(what) {}
};

// File could not be opened or written.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bdesn
