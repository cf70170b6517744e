#pragma once

#include <stdexcept>
#include <string>

namespace warpcurv {

enum class ErrorKind {
    parameter,
    domain,
    convexity_violation,
    slope_order,
    continuity,
    construction,
    no_solution,
    invalid_complex_structure,
    zero_vector,
    guard,
    profile_mismatch,
    io,
};

[[nodiscard]] const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` drives CLI exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace warpcurv
