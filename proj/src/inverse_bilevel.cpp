#include "invqre/inverse_bilevel.hpp"

#include <cmath>
#include <limits>

#include "invqre/inverse_sdp.hpp"

namespace invqre {

JointStrategy smooth_target(const JointStrategy& target, const PlayerDims& dims, double delta) {
    if (!(delta >= 0.0 && delta <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "smoothing delta must lie in [0, 1]");
    }
    check_block_simplex(target, dims);
    JointStrategy out = (1.0 - delta) * target;
    for (int i = 0; i < dims.players(); ++i) {
        dims.block(out, i).array() += delta / dims.size(i);
    }
    return out;
}

double kl_divergence(const JointStrategy& x, const JointStrategy& y) {
    if (x.size() != y.size()) throw Error(ErrorKind::DimensionMismatch, "KL length mismatch");
    if (!(x.minCoeff() > 0.0) || !(y.minCoeff() > 0.0)) {
        throw Error(ErrorKind::NonPositiveStrategy, "KL needs strictly positive strategies");
    }
    return (x.array() * (x.array().log() - y.array().log())).sum();
}

PerformanceObjective kl_objective(const JointStrategy& target, const PlayerDims& dims,
                                  double smoothing_delta) {
    const JointStrategy ref = smooth_target(target, dims, smoothing_delta);
    if (!(ref.minCoeff() > 0.0)) {
        throw Error(ErrorKind::NonPositiveStrategy,
                    "target has zero entries; use a positive smoothing delta");
    }
    const VectorXd log_ref = ref.array().log().matrix();

    PerformanceObjective obj;
    obj.name = "kl";
    obj.value = [ref](const JointStrategy& x) { return kl_divergence(x, ref); };
    obj.gradient = [log_ref](const JointStrategy& x) -> VectorXd {
        if (x.size() != log_ref.size()) {
            throw Error(ErrorKind::DimensionMismatch, "KL length mismatch");
        }
        if (!(x.minCoeff() > 0.0)) {
            throw Error(ErrorKind::NonPositiveStrategy, "KL needs strictly positive strategies");
        }
        return (x.array().log() - log_ref.array() + 1.0).matrix();
    };
    return obj;
}

namespace {

VectorXd checked_area_totals(const JointStrategy& x, const PlayerDims& dims) {
    if (x.size() != dims.total()) {
        throw Error(ErrorKind::DimensionMismatch, "strategy length does not match dims");
    }
    VectorXd totals = VectorXd::Zero(dims.size(0));
    for (int i = 0; i < dims.players(); ++i) totals += dims.block(x, i);
    if (!(totals.minCoeff() > 0.0)) {
        throw Error(ErrorKind::ZeroAreaTotal, "an area receives no service");
    }
    return totals;
}

}  // namespace

PerformanceObjective potential_delay_objective(const PlayerDims& dims) {
    for (int i = 1; i < dims.players(); ++i) {
        if (dims.size(i) != dims.size(0)) {
            throw Error(ErrorKind::DimensionMismatch,
                        "potential delay needs the same number of areas for every player");
        }
    }
    PerformanceObjective obj;
    obj.name = "potential_delay";
    obj.value = [dims](const JointStrategy& x) {
        return checked_area_totals(x, dims).cwiseInverse().sum();
    };
    obj.gradient = [dims](const JointStrategy& x) -> VectorXd {
        const VectorXd g = -checked_area_totals(x, dims).array().square().inverse().matrix();
        VectorXd out(dims.total());
        for (int i = 0; i < dims.players(); ++i) dims.block(out, i) = g;
        return out;
    };
    return obj;
}

MatrixXd implicit_gradient(const Game& g, const JointStrategy& x, const VectorXd& grad_psi_x) {
    validate_game(g);
    const int m = g.dims.total();
    if (x.size() != m || grad_psi_x.size() != m) {
        throw Error(ErrorKind::DimensionMismatch, "x and grad_psi must have length m");
    }
    const MatrixXd d = response_jacobian(g, x);
    const MatrixXd jac = MatrixXd::Identity(m, m) + d * g.C / g.lambda;

    Eigen::JacobiSVD<MatrixXd> svd(jac, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.info() != Eigen::Success) {
        throw Error(ErrorKind::DecompositionFailure, "SVD did not converge");
    }
    const VectorXd& s = svd.singularValues();
    const double cutoff = 1e-12 * s[0];
    VectorXd s_inv(s.size());
    for (Eigen::Index k = 0; k < s.size(); ++k) s_inv[k] = s[k] > cutoff ? 1.0 / s[k] : 0.0;

    // (J^+)^T = U S^+ V^T
    const VectorXd w =
        svd.matrixU() * (s_inv.asDiagonal() * (svd.matrixV().transpose() * grad_psi_x));
    const MatrixXd grad = -(d.transpose() * w) * x.transpose() / g.lambda;
    if (!grad.allFinite()) {
        throw Error(ErrorKind::DecompositionFailure, "implicit gradient is not finite");
    }
    return grad;
}

void FeasibleSetParams::validate() const {
    if (!(rho > 0.0) || !std::isfinite(rho)) {
        throw Error(ErrorKind::InvalidArgument, "rho must be a finite positive number");
    }
}

MatrixXd project_feasible(const MatrixXd& c, const PlayerDims& dims, const FeasibleSetParams& p) {
    p.validate();
    const MatrixXd a = project_cone_sum(c, dims);
    return (p.rho / std::max(p.rho, a.norm())) * a;
}

void BilevelConfig::validate() const {
    if (!(step_alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "step_alpha must be > 0");
    if (!(stop_eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "stop_eps must be > 0");
    if (max_outer_iters < 1) {
        throw Error(ErrorKind::InvalidArgument, "max_outer_iters must be >= 1");
    }
    inner.validate();
}

DesignResult run_projected_gradient(const Game& g0, const PerformanceObjective& obj,
                                    const FeasibleSetParams& p, const BilevelConfig& cfg) {
    validate_game(g0);
    p.validate();
    cfg.validate();
    const int m = g0.dims.total();

    Game game = g0;
    MatrixXd c_next =
        project_feasible(g0.C + 2.0 * cfg.stop_eps * MatrixXd::Identity(m, m), g0.dims, p);
    std::optional<JointStrategy> warm;

    DesignResult r;
    DesignResult best;
    best.objective_value = std::numeric_limits<double>::infinity();

    int iter = 0;
    double step = std::numeric_limits<double>::infinity();
    do {
        game.C = c_next;
        SolveOutcome eq = solve_equilibrium(game, cfg.inner, warm);
        if (!eq.converged && warm) eq = solve_equilibrium(game, cfg.inner);
        r.C = game.C;
        r.x = eq.x;
        r.equilibrium_residual_sq = eq.residual_sq;
        r.iterations = iter;
        if (!eq.converged) {
            r.objective_value = std::numeric_limits<double>::quiet_NaN();
            r.c_norm = r.C.norm();
            r.status = DesignStatus::InnerSolveFailure;
            r.converged = false;
            return r;
        }
        warm = eq.x;

        r.objective_value = obj.value(eq.x);
        const MatrixXd grad = implicit_gradient(game, eq.x, obj.gradient(eq.x));
        c_next = project_feasible(game.C - cfg.step_alpha * grad, game.dims, p);
        step = (c_next - game.C).norm();
        ++iter;
        r.history.push_back({iter, r.objective_value, step});

        if (r.objective_value < best.objective_value) {
            best.C = r.C;
            best.x = r.x;
            best.objective_value = r.objective_value;
            best.equilibrium_residual_sq = r.equilibrium_residual_sq;
        }
    } while (step > cfg.stop_eps && iter < cfg.max_outer_iters);

    r.iterations = iter;
    if (step <= cfg.stop_eps) {
        r.status = DesignStatus::Converged;
        r.converged = true;
    } else {
        r.C = best.C;
        r.x = best.x;
        r.objective_value = best.objective_value;
        r.equilibrium_residual_sq = best.equilibrium_residual_sq;
        r.status = DesignStatus::MaxItersExceeded;
        r.converged = false;
    }
    r.c_norm = r.C.norm();
    return r;
}

}  // namespace invqre
