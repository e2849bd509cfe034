#pragma once

#include <stdexcept>
#include <string>

namespace tsc {

// Bad configuration detected at load/validation time.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An action was applied that the rule checker did not allow.
struct RuleViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Conflicting approaches were asked to display green simultaneously.
struct SafetyViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Loss became non-finite during training.
struct TrainingDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace tsc
