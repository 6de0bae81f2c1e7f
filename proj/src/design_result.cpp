#include "invqre/design_result.hpp"

namespace invqre {

std::string_view to_string(DesignStatus s) {
    switch (s) {
        case DesignStatus::Converged: return "Converged";
        case DesignStatus::MaxItersExceeded: return "MaxItersExceeded";
        case DesignStatus::InfeasibleDetected: return "InfeasibleDetected";
        case DesignStatus::InnerSolveFailure: return "InnerSolveFailure";
    }
    return "Unknown";
}

}  // namespace invqre
