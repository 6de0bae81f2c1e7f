#pragma once

#include <string_view>
#include <vector>

#include "invqre/game.hpp"

namespace invqre {

enum class DesignStatus {
    Converged,
    MaxItersExceeded,
    InfeasibleDetected,
    InnerSolveFailure,
};

std::string_view to_string(DesignStatus s);

struct HistoryEntry {
    int iteration = 0;
    double objective_value = 0.0;
    double step_norm = 0.0;  // ||C+ - C||_F
};

/// Outcome of either inverse design route.
struct DesignResult {
    MatrixXd C;
    JointStrategy x;  // equilibrium induced by C
    double objective_value = 0.0;
    double c_norm = 0.0;
    double equilibrium_residual_sq = 0.0;
    int iterations = 0;  // Dykstra sweeps or outer gradient iterations
    bool converged = false;
    DesignStatus status = DesignStatus::Converged;
    // Largest margin-constraint violation (min-norm route only).
    double max_violation = 0.0;
    std::vector<HistoryEntry> history;
};

}  // namespace invqre
