#include "invqre/inverse_sdp.hpp"

#include <cmath>
#include <string>

namespace invqre {

void SdpConfig::validate() const {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
        throw Error(ErrorKind::InvalidArgument, "epsilon must be a finite nonnegative number");
    }
    if (!(dykstra_tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "dykstra_tol must be > 0");
    if (max_sweeps < 1) throw Error(ErrorKind::InvalidArgument, "max_sweeps must be >= 1");
    if (infeasible_window < 1) {
        throw Error(ErrorKind::InvalidArgument, "infeasible_window must be >= 1");
    }
    inner.validate();
}

std::vector<MarginConstraint> build_margin_constraints(const Game& g, const PureTarget& t,
                                                       double epsilon) {
    validate_target(t, g.dims);
    if (g.b.size() != g.dims.total()) {
        throw Error(ErrorKind::DimensionMismatch, "b length does not match dims");
    }
    const PlayerDims& dims = g.dims;
    const int m = dims.total();

    std::vector<MarginConstraint> out;
    for (int i = 0; i < dims.players(); ++i) {
        const int best_row = dims.offset(i) + t.chosen[i];
        for (int k = 0; k < dims.size(i); ++k) {
            if (k == t.chosen[i]) continue;
            const int alt_row = dims.offset(i) + k;
            MarginConstraint c;
            c.normal = MatrixXd::Zero(m, m);
            for (int j = 0; j < dims.players(); ++j) {
                const int col = dims.offset(j) + t.chosen[j];
                c.normal(best_row, col) += 1.0;
                c.normal(alt_row, col) -= 1.0;
            }
            c.beta = g.b[alt_row] - g.b[best_row] - epsilon;
            c.player = i;
            c.action = k;
            out.push_back(std::move(c));
        }
    }
    return out;
}

MatrixXd project_cone_sum(const MatrixXd& c, const PlayerDims& dims) {
    if (c.rows() != dims.total() || c.cols() != dims.total()) {
        throw Error(ErrorKind::DimensionMismatch, "matrix size does not match dims");
    }
    const MatrixXd sym = 0.5 * (c + c.transpose());
    MatrixXd skew = 0.5 * (c - c.transpose());
    for (int i = 0; i < dims.players(); ++i) dims.block(skew, i, i).setZero();

    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sym);
    if (eig.info() != Eigen::Success) {
        throw Error(ErrorKind::EigendecompositionFailure, "symmetric eigensolver did not converge");
    }
    const VectorXd clamped = eig.eigenvalues().cwiseMax(0.0);
    const MatrixXd& u = eig.eigenvectors();
    MatrixXd psd = u * clamped.asDiagonal() * u.transpose();
    psd = 0.5 * (psd + psd.transpose());
    return psd + skew;
}

double max_constraint_violation(const std::vector<MarginConstraint>& cons, const MatrixXd& c) {
    double worst = 0.0;
    for (const auto& con : cons) worst = std::max(worst, con.violation(c));
    return worst;
}

DykstraOutcome dykstra_min_norm(const PlayerDims& dims, const std::vector<MarginConstraint>& cons,
                                const SdpConfig& cfg) {
    cfg.validate();
    const int m = dims.total();
    for (const auto& con : cons) {
        if (con.normal.rows() != m || con.normal.cols() != m) {
            throw Error(ErrorKind::DimensionMismatch, "constraint normal has the wrong size");
        }
    }

    std::vector<double> normal_sq(cons.size());
    for (std::size_t s = 0; s < cons.size(); ++s) {
        normal_sq[s] = cons[s].normal.squaredNorm();
    }

    DykstraOutcome out;
    MatrixXd x = MatrixXd::Zero(m, m);
    // One correction term per set; the cone's lives in the last slot.
    std::vector<MatrixXd> incr(cons.size() + 1, MatrixXd::Zero(m, m));

    double window_start = -1.0;
    bool window_all_violated = true;
    for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
        const MatrixXd prev = x;
        for (std::size_t s = 0; s < cons.size(); ++s) {
            MatrixXd y = x + incr[s];
            const double excess = cons[s].value(y) - cons[s].beta;
            if (excess > 0.0 && normal_sq[s] > 0.0) {
                x = y - (excess / normal_sq[s]) * cons[s].normal;
            } else {
                x = y;
            }
            incr[s] = y - x;
        }
        {
            MatrixXd y = x + incr.back();
            x = project_cone_sum(y, dims);
            incr.back() = y - x;
        }

        out.sweeps = sweep;
        const double change = (x - prev).norm();
        const double violation = max_constraint_violation(cons, x);
        if (change <= cfg.dykstra_tol) {
            // Disjoint sets make the iterates cycle with zero net change.
            if (violation >= cfg.infeasible_violation) {
                out.infeasible = true;
            } else {
                out.converged = true;
            }
            break;
        }

        if (window_start < 0.0) {
            window_start = violation;
            window_all_violated = true;
        }
        window_all_violated = window_all_violated && violation >= cfg.infeasible_violation;
        if (sweep % cfg.infeasible_window == 0) {
            if (window_all_violated && violation >= 0.99 * window_start) {
                out.infeasible = true;
                break;
            }
            window_start = -1.0;
        }
    }

    out.C = std::move(x);
    out.max_violation = max_constraint_violation(cons, out.C);
    return out;
}

DesignResult solve_min_norm_design(const Game& g, const PureTarget& t, const SdpConfig& cfg) {
    validate_game(g);
    cfg.validate();
    const auto cons = build_margin_constraints(g, t, cfg.epsilon);
    const DykstraOutcome dyk = dykstra_min_norm(g.dims, cons, cfg);

    Game designed = g;
    designed.C = dyk.C;
    const SolveOutcome eq = solve_equilibrium(designed, cfg.inner);

    DesignResult r;
    r.C = dyk.C;
    r.x = eq.x;
    r.c_norm = dyk.C.norm();
    r.objective_value = 0.5 * r.c_norm * r.c_norm;
    r.equilibrium_residual_sq = eq.residual_sq;
    r.iterations = dyk.sweeps;
    r.max_violation = dyk.max_violation;
    if (dyk.infeasible) {
        r.status = DesignStatus::InfeasibleDetected;
    } else if (!dyk.converged) {
        r.status = DesignStatus::MaxItersExceeded;
    } else if (!eq.converged) {
        r.status = DesignStatus::InnerSolveFailure;
    } else {
        r.status = DesignStatus::Converged;
    }
    r.converged = r.status == DesignStatus::Converged;
    return r;
}

}  // namespace invqre
