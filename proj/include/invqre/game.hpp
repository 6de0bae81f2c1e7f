#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

#include "invqre/error.hpp"

namespace invqre {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Block-stacked joint strategy x = [x_1; ...; x_n], one simplex block per player.
using JointStrategy = VectorXd;

/// Action counts m_1..m_n and the derived offset table.
class PlayerDims {
public:
    PlayerDims() = default;
    explicit PlayerDims(std::vector<int> sizes);

    int players() const { return static_cast<int>(sizes_.size()); }
    int size(int player) const { return sizes_.at(player); }
    int offset(int player) const { return offsets_.at(player); }
    int total() const { return offsets_.empty() ? 0 : offsets_.back(); }
    const std::vector<int>& sizes() const { return sizes_; }

    // Block views into a length-total() vector.
    auto block(VectorXd& v, int player) const { return v.segment(offset(player), size(player)); }
    auto block(const VectorXd& v, int player) const {
        return v.segment(offset(player), size(player));
    }
    // Block C_ij of a total()xtotal() matrix.
    auto block(MatrixXd& c, int i, int j) const {
        return c.block(offset(i), offset(j), size(i), size(j));
    }
    auto block(const MatrixXd& c, int i, int j) const {
        return c.block(offset(i), offset(j), size(i), size(j));
    }

    std::vector<VectorXd> split(const VectorXd& v) const;
    VectorXd concat(const std::vector<VectorXd>& blocks) const;

    bool operator==(const PlayerDims& other) const { return sizes_ == other.sizes_; }

private:
    std::vector<int> sizes_;
    // offsets_[i] is the first index of player i; offsets_.back() == m.
    std::vector<int> offsets_;
};

struct Game {
    PlayerDims dims;
    double lambda = 1.0;
    VectorXd b;
    MatrixXd C;
};

struct PureTarget {
    std::vector<int> chosen;  // zero-based action index per player
};

struct AssumptionReport {
    double min_eig_sym = 0.0;
    double diag_block_asymmetry = 0.0;
    bool lambda_ok = false;
    bool passed = false;
};

inline constexpr double kAssumptionTol = 1e-9;

/// Throws Error{DimensionMismatch} or Error{NonPositiveLambda}; also rejects
/// non-finite entries in b, C or lambda.
void validate_game(const Game& g);

/// Smallest eigenvalue of (C + C^T)/2, worst diagonal-block asymmetry and the
/// lambda check, combined into a certificate for uniqueness of the equilibrium.
AssumptionReport check_assumption(const Game& g, double tol = kAssumptionTol);

JointStrategy pure_to_strategy(const PureTarget& t, const PlayerDims& dims);

void validate_target(const PureTarget& t, const PlayerDims& dims);

// Throws DimensionMismatch on a length mismatch and InvalidArgument when a
// block is off the simplex by more than tol.
void check_block_simplex(const JointStrategy& x, const PlayerDims& dims, double tol = 1e-9);

/// Smallest eigenvalue of (c + c^T)/2.
double min_eig_symmetric_part(const MatrixXd& c);

/// Largest Frobenius norm of C_ii - C_ii^T over the diagonal blocks.
double max_diag_block_asymmetry(const MatrixXd& c, const PlayerDims& dims);

}  // namespace invqre
