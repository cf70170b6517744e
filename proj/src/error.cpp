#include "warpcurv/error.hpp"

namespace warpcurv {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::parameter: return "parameter error";
        case ErrorKind::domain: return "domain error";
        case ErrorKind::convexity_violation: return "convexity violation";
        case ErrorKind::slope_order: return "slope-order error";
        case ErrorKind::continuity: return "continuity error";
        case ErrorKind::construction: return "construction error";
        case ErrorKind::no_solution: return "no solution";
        case ErrorKind::invalid_complex_structure: return "invalid complex structure";
        case ErrorKind::zero_vector: return "zero vector";
        case ErrorKind::guard: return "guard error";
        case ErrorKind::profile_mismatch: return "profile mismatch";
        case ErrorKind::io: return "I/O error";
    }
    return "error";
}

}  // namespace warpcurv
