#pragma once

#include <stdexcept>
#include <string>

namespace toda {

// Base for failures of a Backlund step (branch loss, Newton stall).
class BacklundError : public std::runtime_error {
public:
    explicit BacklundError(const std::string& msg) : std::runtime_error(msg) {}
};

// The real branch of the map does not exist through this point: some
// continued-fraction denominator g_k came out <= 0.
class NonPositiveBranchError : public BacklundError {
public:
    NonPositiveBranchError(int index_1based, double value, const std::string& context = {})
        : BacklundError(context + "non-positive branch denominator g_" +
                        std::to_string(index_1based) + " = " + std::to_string(value)),
          index(index_1based),
          value(value) {}

    int index;     // 1-based particle index where the branch failed
    double value;  // offending denominator
};

class NewtonDivergedError : public BacklundError {
public:
    NewtonDivergedError(double residual, int iters, const std::string& context = {})
        : BacklundError(context + "Newton did not reach tolerance after " +
                        std::to_string(iters) + " iterations (residual " +
                        std::to_string(residual) + ")"),
          residual(residual),
          iters(iters) {}

    double residual;
    int iters;
};

// Superposition formula ratio with a vanishing denominator.
class ZeroDenominatorError : public std::runtime_error {
public:
    explicit ZeroDenominatorError(int index_1based)
        : std::runtime_error("zero denominator in superposition formula at k = " +
                             std::to_string(index_1based)),
          index(index_1based) {}

    int index;  // 1-based
};

// Non-finite state encountered during time integration.
class FlowDivergedError : public std::runtime_error {
public:
    FlowDivergedError(int substep_1based, int total_substeps)
        : std::runtime_error("flow diverged: non-finite state at substep " +
                             std::to_string(substep_1based) + " of " +
                             std::to_string(total_substeps)),
          substep(substep_1based) {}

    int substep;
};

}  // namespace toda
