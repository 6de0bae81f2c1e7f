#pragma once

#include <cstdint>
#include <optional>

#include "invqre/game.hpp"

namespace invqre {

struct SolverConfig {
    double residual_tol = 1e-10;  // on the squared residual ||x - f(u(x))||^2
    int max_iters = 200;
    double armijo_c = 1e-4;
    double backtrack_factor = 0.5;
    int max_backtracks = 40;

    void validate() const;
};

struct SolveOutcome {
    JointStrategy x;
    double residual_sq = 0.0;
    int iterations = 0;
    bool converged = false;
    // False when the game fails the uniqueness certificate; the returned point
    // is then one equilibrium, not necessarily the only one.
    bool certified = false;
    int pinv_fallbacks = 0;
};

// u = -(b + C x) / lambda
VectorXd cost_argument(const Game& g, const JointStrategy& x);

// Blockwise softmax f(u), stabilised by subtracting each block's maximum.
JointStrategy softmax_blocks(const PlayerDims& dims, const VectorXd& u);

// Block-diagonal d f / d u evaluated at probabilities p = f(u):
// block i is diag(p_i) - p_i p_i^T.
MatrixXd softmax_jacobian(const PlayerDims& dims, const JointStrategy& p);

/// Logit quantal response f(-(b + C x) / lambda).
JointStrategy logit_response(const Game& g, const JointStrategy& x);

/// d f / d u at u = u(x). Callers compose I + (1/lambda) * D * C themselves.
MatrixXd response_jacobian(const Game& g, const JointStrategy& x);

/// Gauss-Newton with Armijo backtracking on 1/2 ||x - f(u(x))||^2.
///
/// Starts from the uniform strategy unless x0 is given (x0 is clamped positive
/// and renormalised). Iterates stay on the affine hull of the block simplices.
/// On convergence the point is polished by one response evaluation, which
/// restores positivity and relative accuracy in tiny probabilities, provided
/// the polished point still meets the tolerance.
SolveOutcome solve_equilibrium(const Game& g, const SolverConfig& cfg = {},
                               const std::optional<JointStrategy>& x0 = std::nullopt);

/// max_i (max - min) of b_i + sum_j C_ij x_j + lambda ln x_i. Zero exactly at
/// an equilibrium.
double stationarity_residual(const Game& g, const JointStrategy& x);

/// Empirical choice frequencies of argmin over perceived costs with Gumbel
/// perception noise of scale lambda. Deterministic given the seed.
VectorXd simulate_gumbel_choice(const VectorXd& cost, double lambda, std::int64_t samples,
                                std::uint64_t seed);

}  // namespace invqre
