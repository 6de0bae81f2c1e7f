#include "invqre/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace invqre {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Each index is owned by
// exactly one worker, so results can be written into a pre-sized vector.
template <typename Fn>
void parallel_for(int n, int jobs, Fn fn) {
    jobs = std::clamp(jobs, 1, std::max(n, 1));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int w = 0; w < jobs; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

void sort_by_param(std::vector<SweepRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const SweepRow& a, const SweepRow& b) { return a.param < b.param; });
}

std::optional<double> safe_stationarity(const Game& g, const JointStrategy& x) {
    if (x.size() != g.dims.total() || !(x.minCoeff() > 0.0)) return std::nullopt;
    return stationarity_residual(g, x);
}

}  // namespace

CollisionScenario build_collision_game() {
    CollisionScenario s;
    s.game.dims = PlayerDims({3, 3, 3, 3});
    s.game.lambda = 0.1;
    s.game.b.resize(12);
    for (int i = 0; i < 4; ++i) {
        s.game.b.segment(3 * i, 3) << 2.0, std::numbers::pi, std::numbers::pi;
    }
    s.game.C = MatrixXd::Zero(12, 12);
    s.target.chosen = {2, 2, 2, 2};
    return s;
}

bool AreaGraph::adjacent(int a, int b) const {
    for (const auto& [u, v] : edges) {
        if ((u == a && v == b) || (u == b && v == a)) return true;
    }
    return false;
}

int AreaGraph::index_of(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw Error(ErrorKind::InvalidGeometry, "unknown area " + name);
    return static_cast<int>(it - names.begin());
}

AreaGraph default_area_graph() {
    AreaGraph g;
    g.names = {"NW", "N", "NE", "W", "C", "E", "SW", "S", "SE"};
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            const int a = 3 * r + c;
            if (c + 1 < 3) g.edges.emplace_back(a, a + 1);
            if (r + 1 < 3) g.edges.emplace_back(a, a + 3);
        }
    }
    return g;
}

std::vector<int> default_homes() { return {6, 8, 5}; }

Game build_fair_game(const AreaGraph& graph, const std::vector<int>& homes, double lambda) {
    const int areas = graph.areas();
    if (areas != 9) {
        throw Error(ErrorKind::InvalidGeometry, "the allocation game needs exactly 9 areas");
    }
    if (homes.size() != 3) throw Error(ErrorKind::InvalidGeometry, "need 3 home areas");
    if (std::set<int>(homes.begin(), homes.end()).size() != homes.size()) {
        throw Error(ErrorKind::InvalidGeometry, "home areas must be distinct");
    }
    for (const auto& [u, v] : graph.edges) {
        if (u < 0 || v < 0 || u >= areas || v >= areas || u == v) {
            throw Error(ErrorKind::InvalidGeometry, "edge endpoints out of range");
        }
    }

    Game g;
    g.dims = PlayerDims(std::vector<int>(homes.size(), areas));
    g.lambda = lambda;
    g.b.resize(g.dims.total());
    for (int i = 0; i < g.dims.players(); ++i) {
        const int home = homes[i];
        if (home < 0 || home >= areas) {
            throw Error(ErrorKind::InvalidGeometry, "home area out of range");
        }
        for (int a = 0; a < areas; ++a) {
            double cost = 1.8;
            if (a == home) {
                cost = 1.0;
            } else if (graph.adjacent(a, home)) {
                cost = 1.5;
            }
            g.b[g.dims.offset(i) + a] = cost;
        }
    }
    g.C = MatrixXd::Zero(g.dims.total(), g.dims.total());
    return g;
}

std::vector<double> default_epsilon_grid() {
    return {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0};
}

std::vector<double> default_rho_grid() { return {0.01, 0.1, 0.5, 1.0, 2.0, 4.0, 7.0, 10.0}; }

VectorXd area_totals(const JointStrategy& x, const PlayerDims& dims) {
    VectorXd totals = VectorXd::Zero(dims.size(0));
    for (int i = 0; i < dims.players(); ++i) {
        if (dims.size(i) != dims.size(0)) {
            throw Error(ErrorKind::DimensionMismatch, "players have different area counts");
        }
        totals += dims.block(x, i);
    }
    return totals;
}

std::vector<SweepRow> sweep_sdp_epsilon(const std::vector<double>& eps_values,
                                        const SdpConfig& base, double kl_delta, int jobs) {
    if (eps_values.empty()) throw Error(ErrorKind::InvalidArgument, "empty epsilon grid");
    const CollisionScenario sc = build_collision_game();
    const JointStrategy target = pure_to_strategy(sc.target, sc.game.dims);
    const JointStrategy smoothed = smooth_target(target, sc.game.dims, kl_delta);

    std::vector<SweepRow> rows(eps_values.size());
    parallel_for(static_cast<int>(rows.size()), jobs, [&](int k) {
        SweepRow& row = rows[k];
        row.param = eps_values[k];
        try {
            SdpConfig cfg = base;
            cfg.epsilon = eps_values[k];
            const DesignResult r = solve_min_norm_design(sc.game, sc.target, cfg);
            Game designed = sc.game;
            designed.C = r.C;
            row.psi_value = r.objective_value;
            row.psi_min = r.objective_value;
            row.c_norm = r.c_norm;
            row.iterations = r.iterations;
            row.converged = r.converged;
            row.status = std::string(to_string(r.status));
            row.C = r.C;
            row.x = r.x;
            row.kl_to_target = kl_divergence(r.x, smoothed);
            row.stationarity = safe_stationarity(designed, r.x);
        } catch (const Error& e) {
            row.converged = false;
            row.status = "error:" + std::string(to_string(e.kind()));
        }
    });
    sort_by_param(rows);
    return rows;
}

std::vector<SweepRow> sweep_bilevel_rho(const std::vector<double>& rho_values,
                                        const PerformanceObjective& obj, const Game& g,
                                        const RhoSweepOptions& opts) {
    if (rho_values.empty()) throw Error(ErrorKind::InvalidArgument, "empty rho grid");
    std::optional<JointStrategy> smoothed;
    if (opts.kl_target) smoothed = smooth_target(*opts.kl_target, g.dims, opts.kl_delta);

    std::vector<SweepRow> rows(rho_values.size());
    parallel_for(static_cast<int>(rows.size()), opts.jobs, [&](int k) {
        SweepRow& row = rows[k];
        row.param = rho_values[k];
        try {
            const DesignResult r =
                run_projected_gradient(g, obj, FeasibleSetParams{rho_values[k]}, opts.cfg);
            Game designed = g;
            designed.C = r.C;
            row.psi_value = r.objective_value;
            row.psi_min = r.objective_value;
            for (const auto& h : r.history) row.psi_min = std::min(row.psi_min, h.objective_value);
            row.c_norm = r.c_norm;
            row.iterations = r.iterations;
            row.converged = r.converged;
            row.status = std::string(to_string(r.status));
            row.C = r.C;
            row.x = r.x;
            if (smoothed) row.kl_to_target = kl_divergence(r.x, *smoothed);
            if (opts.area_totals) row.area_totals = area_totals(r.x, g.dims);
            row.stationarity = safe_stationarity(designed, r.x);
        } catch (const Error& e) {
            row.converged = false;
            row.status = "error:" + std::string(to_string(e.kind()));
        }
    });
    sort_by_param(rows);
    return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows,
                     const std::vector<std::string>& area_names) {
    os << "sweep_param,psi_value,psi_min,c_norm,kl_to_target,outer_iters,converged,status,stationarity";
    for (const auto& n : area_names) os << ",area_" << n;
    os << '\n';
    for (const auto& r : rows) {
        const bool ok = r.status.rfind("error:", 0) != 0;
        os << fmt_double(r.param) << ',';
        if (ok) {
            os << fmt_double(r.psi_value) << ',' << fmt_double(r.psi_min) << ','
               << fmt_double(r.c_norm) << ',';
        } else {
            os << ",,,";
        }
        if (r.kl_to_target) os << fmt_double(*r.kl_to_target);
        os << ',' << r.iterations << ',' << (r.converged ? "true" : "false") << ',' << r.status
           << ',';
        if (r.stationarity) os << fmt_double(*r.stationarity);
        for (std::size_t a = 0; a < area_names.size(); ++a) {
            os << ',';
            if (r.area_totals && static_cast<std::size_t>(r.area_totals->size()) > a) {
                os << fmt_double((*r.area_totals)[static_cast<Eigen::Index>(a)]);
            }
        }
        os << '\n';
    }
}

namespace {

constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;

std::string svg_header(const std::string& title) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
       << title << "</text>\n"
       << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight
       << "\" y2=\"" << kH - kBottom << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
       << kH - kBottom << "\" stroke=\"black\"/>\n";
    return os.str();
}

}  // namespace

std::string tradeoff_svg(const std::vector<SweepRow>& rows, const std::string& title) {
    std::vector<std::pair<double, double>> pts;  // (||C||_F, KL)
    for (const auto& r : rows) {
        if (r.kl_to_target && std::isfinite(*r.kl_to_target)) {
            pts.emplace_back(r.c_norm, *r.kl_to_target);
        }
    }
    std::ostringstream os;
    os << svg_header(title);
    os << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 20
       << "\" text-anchor=\"middle\">||C||_F</text>\n"
       << "<text x=\"18\" y=\"" << kH / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
       << kH / 2 << ")\">D_KL(x, x*)</text>\n";
    if (!pts.empty()) {
        double xmax = 0, ymax = 0;
        for (const auto& [x, y] : pts) {
            xmax = std::max(xmax, x);
            ymax = std::max(ymax, y);
        }
        xmax = xmax > 0 ? xmax : 1;
        ymax = ymax > 0 ? ymax : 1;
        auto px = [&](double x) { return kLeft + x / xmax * (kW - kLeft - kRight); };
        auto py = [&](double y) { return kH - kBottom - y / ymax * (kH - kTop - kBottom); };
        os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
        for (const auto& [x, y] : pts) os << fmt_double(px(x)) << ',' << fmt_double(py(y)) << ' ';
        os << "\"/>\n";
        for (const auto& [x, y] : pts) {
            os << "<circle cx=\"" << fmt_double(px(x)) << "\" cy=\"" << fmt_double(py(y))
               << "\" r=\"3\" fill=\"steelblue\"/>\n";
        }
        os << "<text x=\"" << kW - kRight << "\" y=\"" << kH - kBottom + 15
           << "\" text-anchor=\"end\">" << fmt_double(xmax) << "</text>\n"
           << "<text x=\"" << kLeft - 5 << "\" y=\"" << kTop + 4 << "\" text-anchor=\"end\">"
           << fmt_double(ymax) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string allocation_svg(const std::vector<SweepRow>& rows,
                           const std::vector<std::string>& area_names, const std::string& title) {
    static const char* palette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};
    std::ostringstream os;
    os << svg_header(title);
    os << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 20 << "\" text-anchor=\"middle\">rho</text>\n";
    const double plot_w = kW - kLeft - kRight;
    const double plot_h = kH - kTop - kBottom;
    const double slot = rows.empty() ? plot_w : plot_w / static_cast<double>(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& r = rows[k];
        const double x0 = kLeft + slot * static_cast<double>(k) + 0.15 * slot;
        os << "<text x=\"" << fmt_double(x0 + 0.35 * slot) << "\" y=\"" << kH - kBottom + 15
           << "\" text-anchor=\"middle\">" << fmt_double(r.param) << "</text>\n";
        if (!r.area_totals) continue;
        const double total = r.area_totals->sum();
        double acc = 0.0;
        for (Eigen::Index a = 0; a < r.area_totals->size(); ++a) {
            const double share = total > 0 ? (*r.area_totals)[a] / total : 0.0;
            const double y = kH - kBottom - (acc + share) * plot_h;
            os << "<rect x=\"" << fmt_double(x0) << "\" y=\"" << fmt_double(y) << "\" width=\""
               << fmt_double(0.7 * slot) << "\" height=\"" << fmt_double(share * plot_h)
               << "\" fill=\"" << palette[a % 10] << "\"><title>"
               << (static_cast<std::size_t>(a) < area_names.size() ? area_names[a] : "") << ' '
               << fmt_double(share) << "</title></rect>\n";
            acc += share;
        }
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace invqre
