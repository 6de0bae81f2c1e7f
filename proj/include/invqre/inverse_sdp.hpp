#pragma once

#include <algorithm>
#include <vector>

#include "invqre/design_result.hpp"
#include "invqre/game.hpp"
#include "invqre/qre_solver.hpp"

namespace invqre {

/// Half-space <normal, C> <= beta under the Frobenius inner product. Encodes
/// "target action cost + epsilon <= cost of `action`" for `player`, with costs
/// evaluated at the pure target profile.
struct MarginConstraint {
    MatrixXd normal;
    double beta = 0.0;
    int player = 0;
    int action = 0;

    double value(const MatrixXd& c) const { return normal.cwiseProduct(c).sum(); }
    // Positive part of <normal, C> - beta.
    double violation(const MatrixXd& c) const { return std::max(0.0, value(c) - beta); }
};

struct SdpConfig {
    double epsilon = 3.0;  // cost-separation margin
    double dykstra_tol = 1e-8;
    int max_sweeps = 50'000;
    // Stall detection: a violation of at least infeasible_violation that has
    // not shrunk by 1% over infeasible_window sweeps is reported as infeasible.
    double infeasible_violation = 1e-4;
    int infeasible_window = 500;
    SolverConfig inner;

    void validate() const;
};

std::vector<MarginConstraint> build_margin_constraints(const Game& g, const PureTarget& t,
                                                       double epsilon);

/// Projection onto {C : C + C^T psd, diagonal blocks symmetric}: the symmetric
/// part is clamped to the psd cone, the skew part loses its diagonal blocks.
MatrixXd project_cone_sum(const MatrixXd& c, const PlayerDims& dims);

double max_constraint_violation(const std::vector<MarginConstraint>& cons, const MatrixXd& c);

struct DykstraOutcome {
    MatrixXd C;
    int sweeps = 0;
    bool converged = false;
    bool infeasible = false;
    double max_violation = 0.0;
};

/// Dykstra's alternating projections of the zero matrix onto the cone
/// intersected with every half-space. The cone is projected last in each sweep
/// so the returned matrix is always a member of it.
DykstraOutcome dykstra_min_norm(const PlayerDims& dims, const std::vector<MarginConstraint>& cons,
                                const SdpConfig& cfg);

/// Minimum Frobenius-norm C making the pure target the separated equilibrium.
/// Only dims, lambda and b of `g` are used; g.C is replaced by the design.
/// objective_value is 1/2 ||C||_F^2.
DesignResult solve_min_norm_design(const Game& g, const PureTarget& t, const SdpConfig& cfg = {});

}  // namespace invqre
