#include "invqre/qre_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace invqre {

namespace {

constexpr double kProbFloor = 1e-300;

void keep_on_simplex(JointStrategy& x, const PlayerDims& dims) {
    x = x.cwiseMax(kProbFloor);
    for (int i = 0; i < dims.players(); ++i) {
        auto xi = dims.block(x, i);
        xi /= xi.sum();
    }
}

struct Residual {
    JointStrategy p;
    VectorXd r;
    double sq = 0.0;
};

Residual evaluate(const Game& g, const JointStrategy& x) {
    Residual out;
    out.p = logit_response(g, x);
    out.r = x - out.p;
    out.sq = out.r.squaredNorm();
    return out;
}

}  // namespace

void SolverConfig::validate() const {
    if (!(residual_tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "residual_tol must be > 0");
    if (max_iters < 1) throw Error(ErrorKind::InvalidArgument, "max_iters must be >= 1");
    if (!(armijo_c > 0.0 && armijo_c < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "armijo_c must lie in (0, 1)");
    }
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "backtrack_factor must lie in (0, 1)");
    }
    if (max_backtracks < 1) throw Error(ErrorKind::InvalidArgument, "max_backtracks must be >= 1");
}

VectorXd cost_argument(const Game& g, const JointStrategy& x) {
    return -(g.b + g.C * x) / g.lambda;
}

JointStrategy softmax_blocks(const PlayerDims& dims, const VectorXd& u) {
    if (u.size() != dims.total()) {
        throw Error(ErrorKind::DimensionMismatch, "softmax argument has the wrong length");
    }
    if (!u.allFinite()) throw Error(ErrorKind::NonFiniteInput, "cost argument contains NaN/Inf");
    JointStrategy p(u.size());
    for (int i = 0; i < dims.players(); ++i) {
        const auto ui = dims.block(u, i);
        auto pi = dims.block(p, i);
        pi = (ui.array() - ui.maxCoeff()).exp().matrix();
        pi /= pi.sum();
    }
    return p;
}

MatrixXd softmax_jacobian(const PlayerDims& dims, const JointStrategy& p) {
    const int m = dims.total();
    MatrixXd d = MatrixXd::Zero(m, m);
    for (int i = 0; i < dims.players(); ++i) {
        const auto pi = dims.block(p, i);
        auto di = dims.block(d, i, i);
        di = -pi * pi.transpose();
        di.diagonal() += pi;
    }
    return d;
}

JointStrategy logit_response(const Game& g, const JointStrategy& x) {
    if (x.size() != g.dims.total()) {
        throw Error(ErrorKind::DimensionMismatch, "strategy length does not match dims");
    }
    return softmax_blocks(g.dims, cost_argument(g, x));
}

MatrixXd response_jacobian(const Game& g, const JointStrategy& x) {
    return softmax_jacobian(g.dims, logit_response(g, x));
}

namespace {

// Gauss-Newton direction solving J^T J s = -J^T r, with a pseudoinverse step
// when the normal equations are numerically singular.
VectorXd gauss_newton_step(const MatrixXd& jac, const VectorXd& r, int& pinv_fallbacks) {
    const VectorXd grad = jac.transpose() * r;
    Eigen::LDLT<MatrixXd> ldlt(jac.transpose() * jac);
    const auto pivots = ldlt.vectorD().cwiseAbs();
    const bool singular = ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
                          pivots.minCoeff() <= 1e-14 * std::max(pivots.maxCoeff(), 1.0);
    if (!singular) {
        VectorXd step = ldlt.solve(-grad);
        if (step.allFinite()) return step;
    }
    ++pinv_fallbacks;
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(jac);
    return -(cod.pseudoInverse() * r);
}

}  // namespace

SolveOutcome solve_equilibrium(const Game& g, const SolverConfig& cfg,
                               const std::optional<JointStrategy>& x0) {
    validate_game(g);
    cfg.validate();
    const PlayerDims& dims = g.dims;
    const int m = dims.total();

    SolveOutcome out;
    out.certified = check_assumption(g).passed;

    JointStrategy x(m);
    if (x0) {
        check_block_simplex(*x0, dims);
        x = *x0;
        keep_on_simplex(x, dims);
    } else {
        for (int i = 0; i < dims.players(); ++i) {
            dims.block(x, i).setConstant(1.0 / dims.size(i));
        }
    }

    const MatrixXd identity = MatrixXd::Identity(m, m);
    auto jacobian = [&](const Residual& res) {
        return MatrixXd(identity + softmax_jacobian(dims, res.p) * g.C / g.lambda);
    };

    // The residual map is defined on all of R^m, so trial points are not
    // clamped: clamping at the simplex boundary can turn the Gauss-Newton
    // direction into a non-descent direction and stall the line search. The
    // step keeps every block sum at 1 because df/du has zero row and column
    // sums.
    Residual cur = evaluate(g, x);
    int iter = 0;
    for (; cur.sq > cfg.residual_tol && iter < cfg.max_iters; ++iter) {
        const MatrixXd jac = jacobian(cur);
        const VectorXd step = gauss_newton_step(jac, cur.r, out.pinv_fallbacks);
        const double slope = (jac.transpose() * cur.r).dot(step);

        const double phi = 0.5 * cur.sq;
        double t = 1.0;
        bool accepted = false;
        JointStrategy best_x;
        Residual best;
        best.sq = std::numeric_limits<double>::infinity();
        for (int k = 0; k < cfg.max_backtracks; ++k, t *= cfg.backtrack_factor) {
            JointStrategy trial = x + t * step;
            Residual res = evaluate(g, trial);
            if (res.sq < best.sq) {
                best = res;
                best_x = trial;
            }
            if (0.5 * res.sq <= phi + cfg.armijo_c * t * slope) {
                accepted = true;
                break;
            }
        }
        if (!accepted && !(best.sq < cur.sq)) break;  // no descent along the step
        x = std::move(best_x);
        cur = std::move(best);
    }

    if (cur.sq <= cfg.residual_tol) {
        // Newton converges quadratically here; a couple of full steps push the
        // residual to round-off before the final polish.
        for (int k = 0; k < 2; ++k) {
            const VectorXd step = gauss_newton_step(jacobian(cur), cur.r, out.pinv_fallbacks);
            JointStrategy trial = x + step;
            Residual res = evaluate(g, trial);
            if (!(res.sq < cur.sq)) break;
            x = std::move(trial);
            cur = std::move(res);
        }
        // f(u(x)) is strictly positive and carries full relative accuracy in
        // tiny probabilities.
        JointStrategy polished = cur.p;
        Residual pres = evaluate(g, polished);
        if (pres.sq <= cfg.residual_tol) {
            x = std::move(polished);
            cur = std::move(pres);
        } else {
            JointStrategy clamped = x;
            keep_on_simplex(clamped, dims);
            Residual cres = evaluate(g, clamped);
            if (cres.sq <= cfg.residual_tol) {
                x = std::move(clamped);
                cur = std::move(cres);
            }
        }
    }

    out.x = std::move(x);
    out.residual_sq = cur.sq;
    out.iterations = iter;
    out.converged = cur.sq <= cfg.residual_tol;
    return out;
}

double stationarity_residual(const Game& g, const JointStrategy& x) {
    validate_game(g);
    if (x.size() != g.dims.total()) {
        throw Error(ErrorKind::DimensionMismatch, "strategy length does not match dims");
    }
    if (!(x.minCoeff() > 0.0)) {
        throw Error(ErrorKind::NonPositiveStrategy, "stationarity needs a strictly positive x");
    }
    const VectorXd v = g.b + g.C * x + g.lambda * x.array().log().matrix();
    double worst = 0.0;
    for (int i = 0; i < g.dims.players(); ++i) {
        const auto vi = g.dims.block(v, i);
        worst = std::max(worst, vi.maxCoeff() - vi.minCoeff());
    }
    return worst;
}

VectorXd simulate_gumbel_choice(const VectorXd& cost, double lambda, std::int64_t samples,
                                std::uint64_t seed) {
    if (cost.size() == 0) throw Error(ErrorKind::DimensionMismatch, "empty cost vector");
    if (!cost.allFinite()) throw Error(ErrorKind::NonFiniteInput, "cost contains NaN/Inf");
    if (!(lambda > 0.0)) throw Error(ErrorKind::NonPositiveLambda, "lambda must be positive");
    if (samples < 1) throw Error(ErrorKind::InvalidArgument, "samples must be >= 1");

    std::mt19937_64 rng(seed);
    // Uniform on the open interval (0, 1) from the top 53 bits.
    auto uniform = [&rng]() { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };

    const Eigen::Index k = cost.size();
    std::vector<std::int64_t> counts(k, 0);
    for (std::int64_t s = 0; s < samples; ++s) {
        Eigen::Index best = 0;
        double best_val = -std::numeric_limits<double>::infinity();
        for (Eigen::Index a = 0; a < k; ++a) {
            const double gumbel = -lambda * std::log(-std::log(uniform()));
            const double val = -cost[a] + gumbel;
            if (val > best_val) {
                best_val = val;
                best = a;
            }
        }
        ++counts[best];
    }
    VectorXd freq(k);
    for (Eigen::Index a = 0; a < k; ++a) {
        freq[a] = static_cast<double>(counts[a]) / static_cast<double>(samples);
    }
    return freq;
}

}  // namespace invqre
