#pragma once

#include <stdexcept>
#include <string>

namespace stvs {

/// Malformed or physically inadmissible input. The CLI maps it to exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical stage could not produce a result for otherwise valid input.
/// The CLI maps it to exit code 2.
class ComputationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Wraps a failure with the name of the pipeline stage it came from.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& what, bool validation);

    const std::string& stage() const noexcept { return stage_; }
    bool is_validation() const noexcept { return validation_; }

private:
    std::string stage_;
    bool validation_;
};

}  // namespace stvs
