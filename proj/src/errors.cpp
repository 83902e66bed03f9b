#include "stvs/errors.hpp"

#include <utility>

namespace stvs {

StageError::StageError(std::string stage, const std::string& what, bool validation)
    : std::runtime_error("[" + stage + "] " + what), stage_(std::move(stage)), validation_(validation) {}

}  // namespace stvs
