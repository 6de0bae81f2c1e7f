#include "invqre/game.hpp"

#include <cmath>
#include <string>

namespace invqre {

PlayerDims::PlayerDims(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.empty()) {
        throw Error(ErrorKind::DimensionMismatch, "a game needs at least one player");
    }
    offsets_.reserve(sizes_.size() + 1);
    offsets_.push_back(0);
    for (int s : sizes_) {
        if (s < 1) {
            throw Error(ErrorKind::DimensionMismatch,
                        "every player needs at least one action, got " + std::to_string(s));
        }
        offsets_.push_back(offsets_.back() + s);
    }
}

std::vector<VectorXd> PlayerDims::split(const VectorXd& v) const {
    if (v.size() != total()) {
        throw Error(ErrorKind::DimensionMismatch, "vector length does not match dims");
    }
    std::vector<VectorXd> out;
    out.reserve(sizes_.size());
    for (int i = 0; i < players(); ++i) out.emplace_back(block(v, i));
    return out;
}

VectorXd PlayerDims::concat(const std::vector<VectorXd>& blocks) const {
    if (static_cast<int>(blocks.size()) != players()) {
        throw Error(ErrorKind::DimensionMismatch, "block count does not match player count");
    }
    VectorXd v(total());
    for (int i = 0; i < players(); ++i) {
        if (blocks[i].size() != size(i)) {
            throw Error(ErrorKind::DimensionMismatch,
                        "block " + std::to_string(i) + " has the wrong length");
        }
        block(v, i) = blocks[i];
    }
    return v;
}

void validate_game(const Game& g) {
    const int m = g.dims.total();
    if (m == 0) throw Error(ErrorKind::DimensionMismatch, "empty player dims");
    if (g.b.size() != m) {
        throw Error(ErrorKind::DimensionMismatch,
                    "b has length " + std::to_string(g.b.size()) + ", expected " +
                        std::to_string(m));
    }
    if (g.C.rows() != m || g.C.cols() != m) {
        throw Error(ErrorKind::DimensionMismatch,
                    "C is " + std::to_string(g.C.rows()) + "x" + std::to_string(g.C.cols()) +
                        ", expected " + std::to_string(m) + "x" + std::to_string(m));
    }
    if (!std::isfinite(g.lambda)) throw Error(ErrorKind::NonFiniteInput, "lambda is not finite");
    if (!(g.lambda > 0.0)) throw Error(ErrorKind::NonPositiveLambda, "lambda must be positive");
    if (!g.b.allFinite() || !g.C.allFinite()) {
        throw Error(ErrorKind::NonFiniteInput, "b or C contains NaN/Inf");
    }
}

double min_eig_symmetric_part(const MatrixXd& c) {
    const MatrixXd sym = 0.5 * (c + c.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) {
        throw Error(ErrorKind::EigendecompositionFailure, "symmetric eigensolver did not converge");
    }
    return eig.eigenvalues().minCoeff();
}

double max_diag_block_asymmetry(const MatrixXd& c, const PlayerDims& dims) {
    double worst = 0.0;
    for (int i = 0; i < dims.players(); ++i) {
        const auto cii = dims.block(c, i, i);
        worst = std::max(worst, (cii - cii.transpose()).norm());
    }
    return worst;
}

AssumptionReport check_assumption(const Game& g, double tol) {
    AssumptionReport r;
    r.lambda_ok = g.lambda > 0.0;
    r.min_eig_sym = min_eig_symmetric_part(g.C);
    r.diag_block_asymmetry = max_diag_block_asymmetry(g.C, g.dims);
    r.passed = r.lambda_ok && r.min_eig_sym >= -tol && r.diag_block_asymmetry <= tol;
    return r;
}

void validate_target(const PureTarget& t, const PlayerDims& dims) {
    if (static_cast<int>(t.chosen.size()) != dims.players()) {
        throw Error(ErrorKind::DimensionMismatch, "target needs one action per player");
    }
    for (int i = 0; i < dims.players(); ++i) {
        if (t.chosen[i] < 0 || t.chosen[i] >= dims.size(i)) {
            throw Error(ErrorKind::IndexOutOfRange,
                        "player " + std::to_string(i) + " target action " +
                            std::to_string(t.chosen[i]) + " out of range");
        }
    }
}

JointStrategy pure_to_strategy(const PureTarget& t, const PlayerDims& dims) {
    validate_target(t, dims);
    JointStrategy x = JointStrategy::Zero(dims.total());
    for (int i = 0; i < dims.players(); ++i) x[dims.offset(i) + t.chosen[i]] = 1.0;
    return x;
}

void check_block_simplex(const JointStrategy& x, const PlayerDims& dims, double tol) {
    if (x.size() != dims.total()) {
        throw Error(ErrorKind::DimensionMismatch, "strategy length does not match dims");
    }
    if (!x.allFinite()) throw Error(ErrorKind::NonFiniteInput, "strategy contains NaN/Inf");
    for (int i = 0; i < dims.players(); ++i) {
        const auto xi = dims.block(x, i);
        if (xi.minCoeff() < -tol || std::abs(xi.sum() - 1.0) > tol) {
            throw Error(ErrorKind::InvalidArgument,
                        "block " + std::to_string(i) + " is not a probability vector");
        }
    }
}

}  // namespace invqre
