// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cli_support.hpp"
#include "invqre/experiments.hpp"
#include "invqre/game_io.hpp"
#include "invqre/inverse_bilevel.hpp"
#include "invqre/inverse_sdp.hpp"
#include "invqre/qre_solver.hpp"
#include "test_support.hpp"

using namespace invqre;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
    void note(const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

// Equilibria from criteria 1 and 2, re-checked by criterion 3.
std::vector<std::pair<Game, JointStrategy>> g_equilibria;

Outcome criterion_1() {
    Outcome o;
    const Game g = build_collision_game().game;
    const auto t0 = Clock::now();
    const SolveOutcome s = solve_equilibrium(g);
    const double secs = seconds_since(t0);
    double dev = 0.0;
    for (int i = 0; i < 4; ++i) {
        VectorXd beeline(3);
        beeline << 1.0, 0.0, 0.0;
        dev = std::max(dev, (s.x.segment(3 * i, 3) - beeline).cwiseAbs().maxCoeff());
    }
    o.require(s.converged, "solver did not converge");
    o.require(s.residual_sq <= 1e-10, "residual " + fmt(s.residual_sq));
    o.require(secs < 1.0, "runtime " + fmt(secs) + " s");
    o.require(dev <= 1e-3, "deviation from beeline " + fmt(dev));
    if (s.converged) g_equilibria.emplace_back(g, s.x);
    o.note("residual_sq=" + fmt(s.residual_sq) + " max_dev=" + fmt(dev) + " time=" + fmt(secs) +
           "s");
    return o;
}

Outcome criterion_2() {
    Outcome o;
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    int failures = 0;
    for (int k = 0; k < 50; ++k) {
        const PlayerDims d = testing::random_dims(rng, {2, 3}, {2, 3, 4});
        const Game g = testing::random_certified_game(rng, d, 1.0, 0.1, 1.0);
        if (!check_assumption(g).passed) {
            o.require(false, "generated game " + std::to_string(k) + " is not certified");
            continue;
        }
        std::vector<JointStrategy> sols;
        for (int r = 0; r < 10; ++r) {
            const SolveOutcome s = solve_equilibrium(g, {}, testing::random_simplex_point(rng, d));
            if (!s.converged) {
                ++failures;
                continue;
            }
            g_equilibria.emplace_back(g, s.x);
            sols.push_back(s.x);
        }
        for (std::size_t a = 1; a < sols.size(); ++a) {
            worst = std::max(worst, (sols[a] - sols[0]).cwiseAbs().maxCoeff());
        }
    }
    o.require(failures == 0, std::to_string(failures) + " solves did not converge");
    o.require(worst <= 1e-6, "max disagreement " + fmt(worst));
    o.note("500 solves, max inf-norm disagreement=" + fmt(worst));
    return o;
}

Outcome criterion_3() {
    Outcome o;
    double worst = 0.0;
    for (const auto& [g, x] : g_equilibria) worst = std::max(worst, stationarity_residual(g, x));
    o.require(!g_equilibria.empty(), "no equilibria recorded");
    o.require(worst <= 1e-6, "stationarity residual " + fmt(worst));
    o.note(std::to_string(g_equilibria.size()) + " equilibria, max residual=" + fmt(worst));
    return o;
}

Outcome criterion_4() {
    Outcome o;
    std::mt19937_64 rng(4044);

    double jac_err = 0.0;
    for (int k = 0; k < 20; ++k) {
        const PlayerDims d = testing::random_dims(rng, {2, 3}, {2, 3, 4});
        const VectorXd u = testing::random_vector(rng, d.total(), 2.0);
        const MatrixXd fd =
            testing::fd_jacobian([&](const VectorXd& v) { return softmax_blocks(d, v); }, u);
        jac_err = std::max(jac_err, (fd - softmax_jacobian(d, softmax_blocks(d, u))).cwiseAbs().maxCoeff());
    }
    o.require(jac_err <= 1e-6, "softmax jacobian error " + fmt(jac_err));

    SolverConfig tight;
    tight.residual_tol = 1e-26;
    const double h = 1e-5;
    double grad_err = 0.0;
    const PlayerDims d({3, 3});
    for (int k = 0; k < 20; ++k) {
        const Game g = testing::random_certified_game(rng, d);
        PureTarget t{{std::uniform_int_distribution<int>(0, 2)(rng),
                      std::uniform_int_distribution<int>(0, 2)(rng)}};
        const auto obj = kl_objective(pure_to_strategy(t, d), d);
        const SolveOutcome s = solve_equilibrium(g, tight);
        if (!s.converged) {
            o.require(false, "reference solve failed");
            continue;
        }
        const MatrixXd an = implicit_gradient(g, s.x, obj.gradient(s.x));
        MatrixXd fd(6, 6);
        for (int p = 0; p < 6; ++p) {
            for (int q = 0; q < 6; ++q) {
                Game hi = g, lo = g;
                hi.C(p, q) += h;
                lo.C(p, q) -= h;
                const SolveOutcome sh = solve_equilibrium(hi, tight);
                const SolveOutcome sl = solve_equilibrium(lo, tight);
                o.require(sh.converged && sl.converged, "perturbed solve failed");
                fd(p, q) = (obj.value(sh.x) - obj.value(sl.x)) / (2 * h);
            }
        }
        grad_err = std::max(grad_err, (an - fd).cwiseAbs().maxCoeff() / fd.cwiseAbs().maxCoeff());
    }
    o.require(grad_err <= 1e-4, "implicit gradient relative error " + fmt(grad_err));
    o.note("jacobian abs err=" + fmt(jac_err) + " gradient rel err=" + fmt(grad_err));
    return o;
}

Outcome criterion_5() {
    Outcome o;
    std::mt19937_64 rng(5055);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double idem = 0.0, min_eig = 0.0, excess = 0.0, asym = 0.0, opt_gap = 0.0;
    for (int k = 0; k < 100; ++k) {
        const PlayerDims d = testing::random_dims(rng, {1, 2, 3}, {2, 3});
        const int m = d.total();
        const FeasibleSetParams p{0.05 + 5.0 * unit(rng)};
        const MatrixXd c = testing::random_matrix(rng, m, m, 2.0);
        const MatrixXd pc = project_feasible(c, d, p);
        idem = std::max(idem, (project_feasible(pc, d, p) - pc).norm());
        min_eig = std::min(min_eig, min_eig_symmetric_part(pc));
        excess = std::max(excess, pc.norm() - p.rho);
        asym = std::max(asym, max_diag_block_asymmetry(pc, d));
        const double dist = (pc - c).norm();
        for (int s = 0; s < 10'000; ++s) {
            MatrixXd y;
            if (s % 2 == 0) {
                y = project_feasible(testing::random_matrix(rng, m, m, 3.0), d, p) * unit(rng);
            } else {
                y = project_feasible(pc + testing::random_matrix(rng, m, m, 0.05 * p.rho), d, p);
            }
            opt_gap = std::max(opt_gap, dist - (y - c).norm());
        }
    }
    o.require(idem <= 1e-10, "idempotence " + fmt(idem));
    o.require(min_eig >= -1e-9, "min eigenvalue " + fmt(min_eig));
    o.require(excess <= 1e-9, "norm excess " + fmt(excess));
    o.require(asym <= 1e-10, "diagonal block asymmetry " + fmt(asym));
    o.require(opt_gap <= 1e-8, "a feasible point is closer by " + fmt(opt_gap));
    o.note("idempotence=" + fmt(idem) + " min_eig=" + fmt(min_eig) + " worst_gap=" + fmt(opt_gap));
    return o;
}

// 1 player, 2 actions, b = [1, 0], target the first action, margin 0.5: the single
// constraint is C11 - C21 <= -1.5 and C must be symmetric psd. With the
// constraint active (c = a + 1.5) and C22 = c^2 / a the squared norm is
// f(a) = a^2 + 2 c^2 + c^4 / a^2, minimised by golden section.
MatrixXd analytic_two_action_design() {
    const double t = 1.5;
    auto f = [t](double a) {
        const double c = a + t;
        return a * a + 2 * c * c + std::pow(c, 4) / (a * a);
    };
    double lo = 1e-6, hi = 50.0;
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int k = 0; k < 300; ++k) {
        const double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
        if (f(x1) < f(x2)) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    const double a = 0.5 * (lo + hi), c = a + t;
    MatrixXd out(2, 2);
    out << a, c, c, c * c / a;
    return out;
}

Outcome criterion_6() {
    Outcome o;
    const auto sc = build_collision_game();
    SdpConfig cfg;
    cfg.epsilon = 3.0;
    const auto t0 = Clock::now();
    const DesignResult r = solve_min_norm_design(sc.game, sc.target, cfg);
    const double secs = seconds_since(t0);
    const auto cons = build_margin_constraints(sc.game, sc.target, cfg.epsilon);
    const double viol = max_constraint_violation(cons, r.C);
    const double min_eig = min_eig_symmetric_part(r.C);
    const double asym = max_diag_block_asymmetry(r.C, sc.game.dims);
    double min_target = 1.0;
    for (int i = 0; i < 4; ++i) min_target = std::min(min_target, r.x[3 * i + 2]);
    o.require(r.converged, std::string("status ") + std::string(to_string(r.status)));
    o.require(viol <= 1e-6, "constraint violation " + fmt(viol));
    o.require(min_eig >= -1e-9 && asym <= 1e-9, "cone membership");
    o.require(min_target >= 0.9, "target mass " + fmt(min_target));
    o.require(secs < 30.0, "runtime " + fmt(secs) + " s");

    Game tiny;
    tiny.dims = PlayerDims({2});
    tiny.b = VectorXd(2);
    tiny.b << 1.0, 0.0;
    SdpConfig tiny_cfg;
    tiny_cfg.epsilon = 0.5;
    tiny_cfg.dykstra_tol = 1e-12;
    const DykstraOutcome dk =
        dykstra_min_norm(tiny.dims, build_margin_constraints(tiny, PureTarget{{0}}, 0.5), tiny_cfg);
    const double tiny_err = (dk.C - analytic_two_action_design()).cwiseAbs().maxCoeff();
    o.require(tiny_err <= 1e-6, "analytic cross-check error " + fmt(tiny_err));
    o.note("||C||_F=" + fmt(r.c_norm) + " violation=" + fmt(viol) + " target_mass>=" +
           fmt(min_target) + " analytic_err=" + fmt(tiny_err) + " time=" + fmt(secs) + "s");
    return o;
}

Outcome criterion_7() {
    Outcome o;
    const auto rows = sweep_sdp_epsilon(default_epsilon_grid(), SdpConfig{});
    for (std::size_t k = 0; k < rows.size(); ++k) {
        o.require(rows[k].converged && rows[k].kl_to_target.has_value(),
                  "epsilon row " + fmt(rows[k].param) + " failed");
        if (k == 0 || !rows[k].kl_to_target || !rows[k - 1].kl_to_target) continue;
        o.require(*rows[k].kl_to_target <= *rows[k - 1].kl_to_target + 1e-8,
                  "KL increases at epsilon " + fmt(rows[k].param));
        o.require(rows[k].c_norm >= rows[k - 1].c_norm - 1e-8,
                  "||C|| decreases at epsilon " + fmt(rows[k].param));
    }

    const auto sc = build_collision_game();
    const JointStrategy target = pure_to_strategy(sc.target, sc.game.dims);
    RhoSweepOptions opts;
    opts.cfg.step_alpha = kCollisionStepAlpha;
    opts.kl_target = target;
    const auto rho_rows =
        sweep_bilevel_rho(default_rho_grid(), kl_objective(target, sc.game.dims), sc.game, opts);
    std::string minima;
    for (std::size_t k = 0; k < rho_rows.size(); ++k) {
        const auto& row = rho_rows[k];
        o.require(row.status.rfind("error:", 0) != 0, "rho row " + fmt(row.param) + " " + row.status);
        minima += (k ? "," : "") + fmt(row.psi_min);
        if (k > 0) {
            o.require(row.psi_min <= rho_rows[k - 1].psi_min + 1e-6,
                      "psi minimum increases at rho " + fmt(row.param));
        }
    }
    o.note("KL " + fmt(*rows.front().kl_to_target) + " -> " + fmt(*rows.back().kl_to_target) +
           ", ||C|| " + fmt(rows.front().c_norm) + " -> " + fmt(rows.back().c_norm) +
           ", psi minima over rho: " + minima);
    return o;
}

Outcome criterion_8() {
    Outcome o;
    const AreaGraph graph = default_area_graph();
    const std::vector<int> homes = default_homes();
    const Game g = build_fair_game(graph, homes);
    const auto obj = potential_delay_objective(g.dims);

    const VectorXd uniform = VectorXd::Constant(g.dims.total(), 1.0 / 9.0);
    const double psi_uniform = obj.value(uniform);
    o.require(psi_uniform == 27.0, "psi at uniform " + fmt(psi_uniform));

    RhoSweepOptions opts;
    opts.cfg.step_alpha = kFairStepAlpha;
    opts.area_totals = true;
    const auto t0 = Clock::now();
    const auto rows = sweep_bilevel_rho(default_rho_grid(), obj, g, opts);
    const double secs = seconds_since(t0);
    o.require(secs < 300.0, "sweep runtime " + fmt(secs) + " s");

    const SweepRow& small = rows.front();
    std::string home_mass;
    if (small.x.size() == g.dims.total()) {
        for (int i = 0; i < 3; ++i) {
            const double mass = small.x[g.dims.offset(i) + homes[i]];
            home_mass += (i ? "," : "") + graph.names[homes[i]] + "=" + std::to_string(mass);
            o.require(mass >= 0.99, "rho=0.01 home mass of " + graph.names[homes[i]] + " is " +
                                        std::to_string(mass));
        }
    } else {
        o.require(false, "rho=0.01 row failed: " + small.status);
    }

    const SweepRow& large = rows.back();
    double worst = 0.0;
    if (large.area_totals) {
        for (Eigen::Index a = 0; a < large.area_totals->size(); ++a) {
            worst = std::max(worst, std::abs((*large.area_totals)[a] * 3.0 - 1.0));
        }
    } else {
        o.require(false, "largest rho row failed: " + large.status);
    }
    o.require(worst <= 0.1, "area totals deviate by " + fmt(100 * worst) + "%");
    o.note("home mass at rho=0.01: " + home_mass + "; max area deviation at rho=" +
           fmt(large.param) + ": " + fmt(100 * worst) + "%; psi=" + fmt(large.psi_value) +
           "; time=" + fmt(secs) + "s");
    return o;
}

Outcome criterion_9() {
    Outcome o;
    std::mt19937_64 rng(9099);
    std::vector<std::pair<VectorXd, double>> cases;
    VectorXd collision(3);
    collision << 2.0, std::numbers::pi, std::numbers::pi;
    cases.emplace_back(collision, 0.1);
    while (cases.size() < 10) {
        const int k = std::uniform_int_distribution<int>(2, 6)(rng);
        const double lambda = std::uniform_real_distribution<double>(0.05, 2.0)(rng);
        cases.emplace_back(testing::random_vector(rng, k), lambda);
    }
    double worst = 0.0;
    for (std::size_t c = 0; c < cases.size(); ++c) {
        const auto& [cost, lambda] = cases[c];
        const VectorXd freq = simulate_gumbel_choice(cost, lambda, 1'000'000, 7 + c);
        const VectorXd p =
            softmax_blocks(PlayerDims({static_cast<int>(cost.size())}), -cost / lambda);
        worst = std::max(worst, 0.5 * (freq - p).cwiseAbs().sum());
    }
    o.require(worst <= 0.01, "TV distance " + fmt(worst));
    o.note("max TV distance=" + fmt(worst));
    return o;
}

Outcome criterion_10() {
    Outcome o;
    const auto dir = testing::scratch_dir("acceptance_determinism");
    const std::string game = (dir / "collision.json").string();
    const std::string fair = (dir / "fair.json").string();
    save_game(game, build_collision_game().game);
    save_game(fair, build_fair_game(default_area_graph(), default_homes()));

    const std::vector<std::vector<std::string>> invocations{
        {"solve", "--game", game},
        {"check", "--game", game},
        {"design-sdp", "--game", game, "--target", "3,3,3,3"},
        {"design-bilevel", "--game", game, "--target", "3,3,3,3", "--rho", "4"},
        {"design-bilevel", "--game", fair, "--objective", "potential-delay", "--rho", "2",
         "--alpha", "0.001"},
        {"simulate", "--cost", "2,3.141592653589793,3.141592653589793", "--lambda", "0.1",
         "--samples", "100000", "--seed", "11"},
        {"experiment", "collision-sdp"},
        {"experiment", "collision-bilevel", "--jobs", "4"},
        {"experiment", "fair", "--rho-grid", "0.01,2,10", "--jobs", "3"},
    };
    int idx = 0;
    for (const auto& args : invocations) {
        std::string bytes[2];
        for (int rep = 0; rep < 2; ++rep) {
            const auto out = dir / ("out_" + std::to_string(idx) + "_" + std::to_string(rep));
            auto full = args;
            full.insert(full.end(), {"--out", out.string()});
            const auto r = testing::run_cli(full);
            o.require(r.code == cli::kOk || r.code == cli::kNotConverged,
                      args[0] + " exited with " + std::to_string(r.code) + ": " + r.err);
            bytes[rep] = testing::read_file(out);
        }
        o.require(!bytes[0].empty() && bytes[0] == bytes[1], args[0] + " output differs");
        ++idx;
    }
    o.note(std::to_string(invocations.size()) + " invocations compared byte for byte");
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"forward solve of the collision game", criterion_1},
        {"uniqueness over random certified games", criterion_2},
        {"stationarity of computed equilibria", criterion_3},
        {"softmax jacobian and implicit gradient", criterion_4},
        {"feasible-set projection", criterion_5},
        {"min-norm design", criterion_6},
        {"trade-off trends", criterion_7},
        {"fair allocation", criterion_8},
        {"gumbel monte carlo", criterion_9},
        {"determinism", criterion_10},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        const auto t0 = Clock::now();
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failed += !o.pass;
        std::cout << "criterion " << k + 1 << ": " << (o.pass ? "PASS" : "FAIL") << " | "
                  << criteria[k].first << " | " << o.detail << " | " << fmt(seconds_since(t0))
                  << "s" << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed"
              << std::endl;
    return failed == 0 ? 0 : 1;
}
