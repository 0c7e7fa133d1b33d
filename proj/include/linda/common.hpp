#pragma once

#include <stdexcept>
#include <string>

namespace linda {

inline constexpr const char* version_string = "0.1.0";

// Bad user input: malformed files, inconsistent tables, unusable designs.
// The CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerically unusable state discovered mid-computation (ill-conditioned
// design, non-finite intermediates). The CLI maps this to exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace linda
