#pragma once

#include <functional>
#include <string>

#include "invqre/design_result.hpp"
#include "invqre/game.hpp"
#include "invqre/qre_solver.hpp"

namespace invqre {

/// Differentiable performance function psi over joint strategies.
struct PerformanceObjective {
    std::string name;
    std::function<double(const JointStrategy&)> value;
    std::function<VectorXd(const JointStrategy&)> gradient;
};

inline constexpr double kDefaultKlSmoothing = 1e-3;

/// (1 - delta) * target + delta * uniform, per block.
JointStrategy smooth_target(const JointStrategy& target, const PlayerDims& dims, double delta);

/// sum_i x_i^T (ln x_i - ln y_i). Throws NonPositiveStrategy if x or y has a
/// nonpositive entry.
double kl_divergence(const JointStrategy& x, const JointStrategy& y);

/// KL divergence to the smoothed target. A pure target needs delta > 0 for
/// finite values.
PerformanceObjective kl_objective(const JointStrategy& target, const PlayerDims& dims,
                                  double smoothing_delta = kDefaultKlSmoothing);

/// sum over areas of 1 / (total service in the area). Every player must have
/// the same number of actions (areas).
PerformanceObjective potential_delay_objective(const PlayerDims& dims);

/// Gradient of psi(x(C)) w.r.t. every entry of C through the equilibrium
/// condition x = f(-(b + C x) / lambda):
///
///   -(1/lambda) D^T (J^+)^T grad_psi x^T,   J = I + (1/lambda) D C,
///
/// with D = df/du at the equilibrium and J^+ the SVD pseudoinverse (singular
/// values below 1e-12 * largest dropped). Exact when J is nonsingular.
MatrixXd implicit_gradient(const Game& g, const JointStrategy& x, const VectorXd& grad_psi_x);

struct FeasibleSetParams {
    double rho = 1.0;  // Frobenius-ball radius

    void validate() const;
};

/// Projection onto {C : C + C^T psd, C_ii symmetric, ||C||_F <= rho}: cone
/// projection followed by radial scaling into the ball.
MatrixXd project_feasible(const MatrixXd& c, const PlayerDims& dims, const FeasibleSetParams& p);

struct BilevelConfig {
    double step_alpha = 0.1;
    double stop_eps = 1e-6;
    int max_outer_iters = 5000;
    SolverConfig inner;

    void validate() const;
};

/// Approximate projected gradient on C. Starts from g0.C with the first
/// candidate Pi(g0.C + 2 stop_eps I) and iterates
///   C <- C+;  x <- equilibrium(C);  C+ <- Pi(C - alpha grad)
/// until ||C+ - C||_F <= stop_eps. On MaxItersExceeded the best iterate seen
/// is returned; on an unconverged inner solve the loop aborts.
DesignResult run_projected_gradient(const Game& g0, const PerformanceObjective& obj,
                                    const FeasibleSetParams& p, const BilevelConfig& cfg = {});

}  // namespace invqre
