#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "invqre/game.hpp"
#include "invqre/inverse_bilevel.hpp"
#include "invqre/inverse_sdp.hpp"

namespace invqre {

// Four rovers, three paths each: beeline (length 2) and two semicircles
// (length pi). The target is the counterclockwise semicircle for everyone.
struct CollisionScenario {
    Game game;
    PureTarget target;
};

CollisionScenario build_collision_game();

/// Undirected adjacency over named service areas.
struct AreaGraph {
    std::vector<std::string> names;
    std::vector<std::pair<int, int>> edges;

    int areas() const { return static_cast<int>(names.size()); }
    bool adjacent(int a, int b) const;
    int index_of(const std::string& name) const;
};

// 3x3 grid, row-major NW N NE / W C E / SW S SE, 4-neighbourhood.
AreaGraph default_area_graph();
// Companies based in SW, SE and E.
std::vector<int> default_homes();

/// Three delivery companies over nine areas. Operating cost is 1.0 at home,
/// 1.5 next to home and 1.8 elsewhere; C = 0.
Game build_fair_game(const AreaGraph& graph, const std::vector<int>& homes, double lambda = 0.1);

std::vector<double> default_epsilon_grid();
std::vector<double> default_rho_grid();

// Smoothing used for the reported D_KL(x, x*) column of both sweeps. It sits
// far below every equilibrium probability the sweeps produce, so the column
// orders designs by their off-target mass; with a larger delta the smoothed
// KL has a spurious minimum at the smoothed target itself.
inline constexpr double kReportKlSmoothing = 1e-100;

// Outer step sizes for the two scenarios. The allocation game has gradients
// two orders of magnitude larger than the collision game and oscillates at 0.1.
inline constexpr double kCollisionStepAlpha = 0.1;
inline constexpr double kFairStepAlpha = 1e-3;

struct SweepRow {
    double param = 0.0;
    double psi_value = 0.0;  // objective value of the design route
    double psi_min = 0.0;    // smallest objective recorded along the run
    double c_norm = 0.0;
    std::optional<double> kl_to_target;
    int iterations = 0;
    bool converged = false;
    std::string status;  // DesignStatus name, or "error:<kind>"
    std::optional<double> stationarity;
    MatrixXd C;
    JointStrategy x;
    std::optional<VectorXd> area_totals;
};

/// Min-norm design of the collision scenario for each margin. KL is reported
/// against the target smoothed with kl_delta. Rows are ordered by parameter.
std::vector<SweepRow> sweep_sdp_epsilon(const std::vector<double>& eps_values,
                                        const SdpConfig& base,
                                        double kl_delta = kReportKlSmoothing, int jobs = 1);

struct RhoSweepOptions {
    BilevelConfig cfg;
    // When set, rows carry D_KL(x, smoothed target).
    std::optional<JointStrategy> kl_target;
    double kl_delta = kReportKlSmoothing;
    bool area_totals = false;
    int jobs = 1;
};

std::vector<SweepRow> sweep_bilevel_rho(const std::vector<double>& rho_values,
                                        const PerformanceObjective& obj, const Game& g,
                                        const RhoSweepOptions& opts);

/// Per-area sum of every player's allocation.
VectorXd area_totals(const JointStrategy& x, const PlayerDims& dims);

/// Header: sweep_param,psi_value,psi_min,c_norm,kl_to_target,outer_iters,
/// converged,status,stationarity[,area_<name>...]. Missing values are empty.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows,
                     const std::vector<std::string>& area_names = {});

std::string tradeoff_svg(const std::vector<SweepRow>& rows, const std::string& title);
std::string allocation_svg(const std::vector<SweepRow>& rows,
                           const std::vector<std::string>& area_names, const std::string& title);

}  // namespace invqre
