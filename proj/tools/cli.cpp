#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "invqre/experiments.hpp"
#include "invqre/game_io.hpp"
#include "invqre/inverse_bilevel.hpp"
#include "invqre/inverse_sdp.hpp"
#include "invqre/qre_solver.hpp"

namespace invqre::cli {

namespace {

using nlohmann::json;

struct Options {
    std::string game_path;
    std::string out_path;
    std::string plot_path;
    std::optional<double> lambda;
    std::uint64_t seed = 0;
    int jobs = 1;

    // forward solver
    double residual_tol = SolverConfig{}.residual_tol;
    int max_iters = SolverConfig{}.max_iters;

    // check
    double assumption_tol = kAssumptionTol;

    // designs
    std::vector<int> target;
    double epsilon = SdpConfig{}.epsilon;
    double dykstra_tol = SdpConfig{}.dykstra_tol;
    int max_sweeps = SdpConfig{}.max_sweeps;
    std::string objective = "kl";
    double kl_delta = kDefaultKlSmoothing;
    double rho = 7.0;
    std::optional<double> alpha;
    double stop_eps = BilevelConfig{}.stop_eps;
    int max_outer_iters = BilevelConfig{}.max_outer_iters;

    // simulate
    std::vector<double> cost;
    double sim_lambda = 0.1;
    std::int64_t samples = 1'000'000;

    // experiment / scenario
    std::string scenario;
    std::vector<double> eps_grid;
    std::vector<double> rho_grid;
    std::vector<std::string> homes;
    std::string adjacency_path;
};

class OutputSink {
public:
    OutputSink(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw Error(ErrorKind::InvalidArgument, "cannot write " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : fallback_; }

private:
    std::ofstream file_;
    std::ostream& fallback_;
};

void write_json(const Options& o, std::ostream& out, const json& j) {
    OutputSink sink(o.out_path, out);
    sink.stream() << j.dump(2) << '\n';
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write " + path);
    f << text;
}

Game load_with_overrides(const Options& o) {
    Game g = load_game(o.game_path);
    if (o.lambda) {
        g.lambda = *o.lambda;
        validate_game(g);
    }
    return g;
}

SolverConfig solver_config(const Options& o) {
    SolverConfig cfg;
    cfg.residual_tol = o.residual_tol;
    cfg.max_iters = o.max_iters;
    return cfg;
}

PureTarget target_from(const Options& o, const PlayerDims& dims) {
    if (o.target.empty()) {
        throw Error(ErrorKind::InvalidArgument, "--target is required (one action per player)");
    }
    PureTarget t;
    // Actions on the command line are 1-based.
    for (int a : o.target) t.chosen.push_back(a - 1);
    validate_target(t, dims);
    return t;
}

int cmd_solve(const Options& o, std::ostream& out) {
    const Game g = load_with_overrides(o);
    const SolveOutcome s = solve_equilibrium(g, solver_config(o));
    json j = to_json(s);
    j["assumption"] = to_json(check_assumption(g));
    if (s.x.minCoeff() > 0.0) j["stationarity_residual"] = stationarity_residual(g, s.x);
    j["seed"] = o.seed;
    write_json(o, out, j);
    return s.converged ? kOk : kNotConverged;
}

int cmd_check(const Options& o, std::ostream& out) {
    const Game g = load_with_overrides(o);
    const AssumptionReport r = check_assumption(g, o.assumption_tol);
    json j = to_json(r);
    j["tol"] = o.assumption_tol;
    write_json(o, out, j);
    return r.passed ? kOk : kInputError;
}

int cmd_design_sdp(const Options& o, std::ostream& out) {
    const Game g = load_with_overrides(o);
    const PureTarget t = target_from(o, g.dims);
    SdpConfig cfg;
    cfg.epsilon = o.epsilon;
    cfg.dykstra_tol = o.dykstra_tol;
    cfg.max_sweeps = o.max_sweeps;
    cfg.inner = solver_config(o);
    const DesignResult r = solve_min_norm_design(g, t, cfg);

    json j = to_json(r);
    j["epsilon"] = o.epsilon;
    j["kl_delta"] = o.kl_delta;
    j["kl_to_target"] =
        kl_divergence(r.x, smooth_target(pure_to_strategy(t, g.dims), g.dims, o.kl_delta));
    j["target"] = o.target;
    j["seed"] = o.seed;
    write_json(o, out, j);
    return r.converged ? kOk : kNotConverged;
}

int cmd_design_bilevel(const Options& o, std::ostream& out) {
    const Game g = load_with_overrides(o);
    PerformanceObjective obj;
    std::optional<JointStrategy> target;
    if (o.objective == "kl") {
        target = pure_to_strategy(target_from(o, g.dims), g.dims);
        obj = kl_objective(*target, g.dims, o.kl_delta);
    } else if (o.objective == "potential-delay") {
        obj = potential_delay_objective(g.dims);
    } else {
        throw Error(ErrorKind::InvalidArgument, "unknown objective " + o.objective);
    }
    BilevelConfig cfg;
    cfg.step_alpha = o.alpha.value_or(BilevelConfig{}.step_alpha);
    cfg.stop_eps = o.stop_eps;
    cfg.max_outer_iters = o.max_outer_iters;
    cfg.inner = solver_config(o);
    const DesignResult r = run_projected_gradient(g, obj, FeasibleSetParams{o.rho}, cfg);

    json j = to_json(r);
    j["objective"] = obj.name;
    j["rho"] = o.rho;
    j["alpha"] = cfg.step_alpha;
    if (target && r.x.size() == target->size() && r.x.minCoeff() > 0.0) {
        j["kl_to_target"] = kl_divergence(r.x, smooth_target(*target, g.dims, o.kl_delta));
        j["target"] = o.target;
        j["kl_delta"] = o.kl_delta;
    }
    j["seed"] = o.seed;
    write_json(o, out, j);
    return r.converged ? kOk : kNotConverged;
}

int cmd_simulate(const Options& o, std::ostream& out) {
    if (o.cost.empty()) throw Error(ErrorKind::InvalidArgument, "--cost is required");
    const VectorXd cost = Eigen::Map<const VectorXd>(o.cost.data(), static_cast<Eigen::Index>(o.cost.size()));
    const VectorXd freq = simulate_gumbel_choice(cost, o.sim_lambda, o.samples, o.seed);
    const VectorXd logit =
        softmax_blocks(PlayerDims({static_cast<int>(cost.size())}), -cost / o.sim_lambda);
    json j{{"cost", vector_to_json(cost)},
           {"lambda", o.sim_lambda},
           {"samples", o.samples},
           {"seed", o.seed},
           {"frequencies", vector_to_json(freq)},
           {"logit_response", vector_to_json(logit)},
           {"tv_distance", 0.5 * (freq - logit).cwiseAbs().sum()}};
    write_json(o, out, j);
    return kOk;
}

AreaGraph load_area_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, path + ": " + e.what());
    }
    AreaGraph g;
    try {
        g.names = j.at("names").get<std::vector<std::string>>();
        for (const auto& e : j.at("edges")) {
            if (!e.is_array() || e.size() != 2) {
                throw Error(ErrorKind::ParseError, "edges must be pairs");
            }
            auto endpoint = [&](const json& v) {
                return v.is_string() ? g.index_of(v.get<std::string>()) : v.get<int>();
            };
            g.edges.emplace_back(endpoint(e[0]), endpoint(e[1]));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, path + ": " + e.what());
    }
    return g;
}

int finish_sweep(const Options& o, std::ostream& out, const std::vector<SweepRow>& rows,
                 const std::vector<std::string>& area_names, const std::string& svg) {
    {
        OutputSink sink(o.out_path, out);
        write_sweep_csv(sink.stream(), rows, area_names);
    }
    if (!o.plot_path.empty()) write_text_file(o.plot_path, svg);
    for (const auto& r : rows) {
        if (r.status.rfind("error:", 0) == 0) return kInternalError;
    }
    for (const auto& r : rows) {
        if (!r.converged) return kNotConverged;
    }
    return kOk;
}

int cmd_experiment(const Options& o, std::ostream& out) {
    if (o.scenario == "collision-sdp") {
        SdpConfig cfg;
        cfg.dykstra_tol = o.dykstra_tol;
        cfg.max_sweeps = o.max_sweeps;
        cfg.inner = solver_config(o);
        const auto grid = o.eps_grid.empty() ? default_epsilon_grid() : o.eps_grid;
        const auto rows = sweep_sdp_epsilon(grid, cfg, kReportKlSmoothing, o.jobs);
        return finish_sweep(o, out, rows, {},
                            tradeoff_svg(rows, "Min-norm design: KL vs ||C||_F over epsilon"));
    }
    if (o.scenario == "collision-bilevel") {
        const CollisionScenario sc = build_collision_game();
        const JointStrategy target = pure_to_strategy(sc.target, sc.game.dims);
        RhoSweepOptions opts;
        opts.cfg.step_alpha = o.alpha.value_or(kCollisionStepAlpha);
        opts.cfg.stop_eps = o.stop_eps;
        opts.cfg.max_outer_iters = o.max_outer_iters;
        opts.cfg.inner = solver_config(o);
        opts.kl_target = target;
        opts.jobs = o.jobs;
        const auto grid = o.rho_grid.empty() ? default_rho_grid() : o.rho_grid;
        const auto rows = sweep_bilevel_rho(grid, kl_objective(target, sc.game.dims, o.kl_delta),
                                            sc.game, opts);
        return finish_sweep(o, out, rows, {},
                            tradeoff_svg(rows, "Projected gradient: KL vs ||C||_F over rho"));
    }
    if (o.scenario == "fair") {
        const AreaGraph graph =
            o.adjacency_path.empty() ? default_area_graph() : load_area_graph(o.adjacency_path);
        std::vector<int> homes = default_homes();
        if (!o.homes.empty()) {
            homes.clear();
            for (const auto& h : o.homes) homes.push_back(graph.index_of(h));
        }
        Game g = build_fair_game(graph, homes, o.lambda.value_or(0.1));
        RhoSweepOptions opts;
        opts.cfg.step_alpha = o.alpha.value_or(kFairStepAlpha);
        opts.cfg.stop_eps = o.stop_eps;
        opts.cfg.max_outer_iters = o.max_outer_iters;
        opts.cfg.inner = solver_config(o);
        opts.area_totals = true;
        opts.jobs = o.jobs;
        const auto grid = o.rho_grid.empty() ? default_rho_grid() : o.rho_grid;
        const auto rows = sweep_bilevel_rho(grid, potential_delay_objective(g.dims), g, opts);
        return finish_sweep(o, out, rows, graph.names,
                            allocation_svg(rows, graph.names, "Service share per area over rho"));
    }
    throw Error(ErrorKind::InvalidArgument, "unknown experiment " + o.scenario);
}

int cmd_scenario(const Options& o, std::ostream& out) {
    json j;
    if (o.scenario == "collision") {
        const CollisionScenario sc = build_collision_game();
        j = game_to_json(sc.game);
    } else if (o.scenario == "fair") {
        j = game_to_json(build_fair_game(default_area_graph(), default_homes(),
                                         o.lambda.value_or(0.1)));
    } else if (o.scenario == "copy") {
        j = game_to_json(load_with_overrides(o));
    } else {
        throw Error(ErrorKind::InvalidArgument, "unknown scenario " + o.scenario);
    }
    write_json(o, out, j);
    return kOk;
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::EigendecompositionFailure:
        case ErrorKind::DecompositionFailure:
            return kInternalError;
        default:
            return kInputError;
    }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Quantal response equilibria and inverse design of matrix games", "invqre"};
    app.require_subcommand(1);

    auto add_common = [&o](CLI::App* sub) {
        sub->add_option("--out,-o", o.out_path, "Output file (default: stdout)");
        sub->add_option("--seed", o.seed, "Seed echoed into outputs")->capture_default_str();
        sub->add_option("--residual-tol", o.residual_tol, "Squared-residual tolerance")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        sub->add_option("--max-iters", o.max_iters, "Gauss-Newton iteration cap")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    };
    auto add_game = [&o](CLI::App* sub, bool required) {
        auto* opt = sub->add_option("--game,-g", o.game_path, "Game JSON file");
        if (required) opt->required();
        opt->check(CLI::ExistingFile);
        sub->add_option("--lambda", o.lambda, "Override the noise temperature")
            ->check(CLI::PositiveNumber);
    };
    auto add_bilevel = [&o](CLI::App* sub) {
        sub->add_option("--alpha", o.alpha, "Outer step size")->check(CLI::PositiveNumber);
        sub->add_option("--stop-eps", o.stop_eps, "Outer stopping tolerance")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        sub->add_option("--max-outer-iters", o.max_outer_iters, "Outer iteration cap")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        sub->add_option("--kl-delta", o.kl_delta, "Smoothing of a pure KL target")
            ->check(CLI::Range(0.0, 1.0))
            ->capture_default_str();
    };
    auto add_dykstra = [&o](CLI::App* sub) {
        sub->add_option("--dykstra-tol", o.dykstra_tol, "Sweep-to-sweep change tolerance")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        sub->add_option("--max-sweeps", o.max_sweeps, "Dykstra sweep cap")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    };

    auto* solve = app.add_subcommand("solve", "Compute the equilibrium of a game");
    add_game(solve, true);
    add_common(solve);

    auto* check = app.add_subcommand("check", "Check the uniqueness certificate of a game");
    add_game(check, true);
    add_common(check);
    check->add_option("--tol", o.assumption_tol, "Certificate tolerance")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();

    auto* sdp = app.add_subcommand("design-sdp", "Minimum-norm C for a pure target");
    add_game(sdp, true);
    add_common(sdp);
    add_dykstra(sdp);
    sdp->add_option("--target", o.target, "1-based target action per player")
        ->delimiter(',')
        ->required();
    sdp->add_option("--epsilon", o.epsilon, "Cost-separation margin")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sdp->add_option("--kl-delta", o.kl_delta, "Smoothing for the reported KL")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();

    auto* bilevel = app.add_subcommand("design-bilevel", "Projected-gradient design of C");
    add_game(bilevel, true);
    add_common(bilevel);
    add_bilevel(bilevel);
    bilevel->add_option("--objective", o.objective, "kl | potential-delay")
        ->check(CLI::IsMember({"kl", "potential-delay"}))
        ->capture_default_str();
    bilevel->add_option("--target", o.target, "1-based target action per player (kl)")
        ->delimiter(',');
    bilevel->add_option("--rho", o.rho, "Frobenius-ball radius")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    auto* sim = app.add_subcommand("simulate", "Monte Carlo choices under Gumbel noise");
    add_common(sim);
    sim->add_option("--cost", o.cost, "Action costs")->delimiter(',')->required();
    sim->add_option("--lambda", o.sim_lambda, "Noise scale")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sim->add_option("--samples", o.samples, "Number of draws")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    auto* exp = app.add_subcommand("experiment", "Parameter sweeps over the built-in scenarios");
    add_common(exp);
    add_bilevel(exp);
    add_dykstra(exp);
    exp->add_option("scenario", o.scenario, "collision-sdp | collision-bilevel | fair")
        ->required()
        ->check(CLI::IsMember({"collision-sdp", "collision-bilevel", "fair"}));
    exp->add_option("--eps-grid", o.eps_grid, "Margins for collision-sdp")
        ->delimiter(',')
        ->check(CLI::NonNegativeNumber);
    exp->add_option("--rho-grid", o.rho_grid, "Radii for the bilevel sweeps")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    exp->add_option("--homes", o.homes, "Home area names for fair")->delimiter(',');
    exp->add_option("--adjacency", o.adjacency_path, "Area graph JSON for fair")
        ->check(CLI::ExistingFile);
    exp->add_option("--lambda", o.lambda, "Noise temperature for fair")->check(CLI::PositiveNumber);
    exp->add_option("--plot", o.plot_path, "Write an SVG figure");
    exp->add_option("--jobs,-j", o.jobs, "Parallel sweep rows")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    auto* scen = app.add_subcommand("scenario", "Write a built-in game (or a copy) as JSON");
    add_common(scen);
    scen->add_option("name", o.scenario, "collision | fair | copy")
        ->required()
        ->check(CLI::IsMember({"collision", "fair", "copy"}));
    scen->add_option("--game,-g", o.game_path, "Game to copy")->check(CLI::ExistingFile);
    scen->add_option("--lambda", o.lambda, "Override the noise temperature")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error:ParseError: " << e.what() << '\n';
        return kInputError;
    }

    try {
        if (solve->parsed()) return cmd_solve(o, out);
        if (check->parsed()) return cmd_check(o, out);
        if (sdp->parsed()) return cmd_design_sdp(o, out);
        if (bilevel->parsed()) return cmd_design_bilevel(o, out);
        if (sim->parsed()) return cmd_simulate(o, out);
        if (exp->parsed()) return cmd_experiment(o, out);
        if (scen->parsed()) return cmd_scenario(o, out);
    } catch (const Error& e) {
        err << "error:" << to_string(e.kind()) << ": " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "error:Internal: " << e.what() << '\n';
        return kInternalError;
    }
    err << "error:Internal: no subcommand dispatched\n";
    return kInternalError;
}

}  // namespace invqre::cli
