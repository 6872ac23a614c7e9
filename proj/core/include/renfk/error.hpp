#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace renfk {

/// Input violates a documented precondition (bad generator, bad measure, ...).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative or linear solve failed to reach its tolerance.
class NotConverged : public std::runtime_error {
public:
    NotConverged(const std::string& what, std::vector<double> trace = {})
        : std::runtime_error(what), trace_(std::move(trace)) {}

    const std::vector<double>& residual_trace() const noexcept { return trace_; }

private:
    std::vector<double> trace_;
};

/// A declared structural hypothesis (monotonicity, Lipschitz bound) was
/// contradicted by a spot check.
class HypothesisViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Unsupported : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace renfk
