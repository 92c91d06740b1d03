#pragma once

#include <stdexcept>
#include <string>

namespace trisim {

/// Thrown by every operation whose preconditions are violated; the message
/// names the failing constraint ("collision singularity", "rank deficient", ...).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace trisim
