#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "invqre/experiments.hpp"
#include "invqre/game_io.hpp"
#include "invqre/inverse_bilevel.hpp"
#include "invqre/inverse_sdp.hpp"
#include "invqre/qre_solver.hpp"

namespace py = pybind11;
using namespace invqre;

namespace {

Game make_game(const std::vector<int>& dims, double lambda, const VectorXd& b, const MatrixXd& c) {
    Game g{PlayerDims(dims), lambda, b, c};
    validate_game(g);
    return g;
}

PerformanceObjective make_objective(const std::string& name, const PlayerDims& dims,
                                    const std::optional<std::vector<int>>& target,
                                    double kl_delta) {
    if (name == "kl") {
        if (!target) throw Error(ErrorKind::InvalidArgument, "the kl objective needs a target");
        return kl_objective(pure_to_strategy(PureTarget{*target}, dims), dims, kl_delta);
    }
    if (name == "potential_delay") return potential_delay_objective(dims);
    throw Error(ErrorKind::InvalidArgument, "unknown objective " + name);
}

std::string rows_to_csv(const std::vector<SweepRow>& rows,
                        const std::vector<std::string>& area_names = {}) {
    std::ostringstream os;
    write_sweep_csv(os, rows, area_names);
    return os.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Logit quantal response equilibria and inverse game design";

    // Leaked on purpose: the type lives as long as the interpreter.
    static py::handle error_type =
        py::exception<Error>(m, "InvqreError", PyExc_ValueError).release();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const std::string msg = std::string(to_string(e.kind())) + ": " + e.what();
            PyErr_SetString(error_type.ptr(), msg.c_str());
        }
    });

    py::class_<Game>(m, "Game")
        .def(py::init(&make_game), py::arg("dims"), py::arg("lambda_"), py::arg("b"), py::arg("C"))
        .def_property_readonly("dims", [](const Game& g) { return g.dims.sizes(); })
        .def_readwrite("lambda_", &Game::lambda)
        .def_readwrite("b", &Game::b)
        .def_readwrite("C", &Game::C)
        .def("to_json", [](const Game& g) { return game_to_json(g).dump(); })
        .def_static("from_json",
                    [](const std::string& s) {
                        nlohmann::json j;
                        try {
                            j = nlohmann::json::parse(s);
                        } catch (const nlohmann::json::exception& e) {
                            throw Error(ErrorKind::ParseError, e.what());
                        }
                        return game_from_json(j);
                    })
        .def("__repr__", [](const Game& g) {
            std::ostringstream os;
            os << "Game(players=" << g.dims.players() << ", m=" << g.dims.total()
               << ", lambda=" << g.lambda << ")";
            return os.str();
        });

    py::class_<AssumptionReport>(m, "AssumptionReport")
        .def_readonly("min_eig_sym", &AssumptionReport::min_eig_sym)
        .def_readonly("diag_block_asymmetry", &AssumptionReport::diag_block_asymmetry)
        .def_readonly("lambda_ok", &AssumptionReport::lambda_ok)
        .def_readonly("passed", &AssumptionReport::passed);

    py::class_<SolveOutcome>(m, "SolveOutcome")
        .def_readonly("x", &SolveOutcome::x)
        .def_readonly("residual_sq", &SolveOutcome::residual_sq)
        .def_readonly("iterations", &SolveOutcome::iterations)
        .def_readonly("converged", &SolveOutcome::converged)
        .def_readonly("certified", &SolveOutcome::certified);

    py::class_<DesignResult>(m, "DesignResult")
        .def_readonly("C", &DesignResult::C)
        .def_readonly("x", &DesignResult::x)
        .def_readonly("objective_value", &DesignResult::objective_value)
        .def_readonly("c_norm", &DesignResult::c_norm)
        .def_readonly("iterations", &DesignResult::iterations)
        .def_readonly("converged", &DesignResult::converged)
        .def_readonly("max_violation", &DesignResult::max_violation)
        .def_property_readonly("status",
                               [](const DesignResult& r) { return std::string(to_string(r.status)); })
        .def_property_readonly("history", [](const DesignResult& r) {
            std::vector<double> out;
            for (const auto& h : r.history) out.push_back(h.objective_value);
            return out;
        });

    m.def("check_assumption", &check_assumption, py::arg("game"), py::arg("tol") = kAssumptionTol);

    m.def(
        "solve_equilibrium",
        [](const Game& g, double residual_tol, int max_iters, std::optional<VectorXd> x0) {
            SolverConfig cfg;
            cfg.residual_tol = residual_tol;
            cfg.max_iters = max_iters;
            return solve_equilibrium(g, cfg, x0);
        },
        py::arg("game"), py::arg("residual_tol") = SolverConfig{}.residual_tol,
        py::arg("max_iters") = SolverConfig{}.max_iters, py::arg("x0") = py::none());

    m.def("logit_response", &logit_response, py::arg("game"), py::arg("x"));
    m.def("stationarity_residual", &stationarity_residual, py::arg("game"), py::arg("x"));
    m.def("simulate_gumbel_choice", &simulate_gumbel_choice, py::arg("cost"), py::arg("lambda_"),
          py::arg("samples"), py::arg("seed") = 0);

    m.def(
        "margin_constraints",
        [](const Game& g, const std::vector<int>& target, double epsilon) {
            std::vector<std::pair<MatrixXd, double>> out;
            for (const auto& c : build_margin_constraints(g, PureTarget{target}, epsilon)) {
                out.emplace_back(c.normal, c.beta);
            }
            return out;
        },
        py::arg("game"), py::arg("target"), py::arg("epsilon"));

    m.def(
        "solve_min_norm_design",
        [](const Game& g, const std::vector<int>& target, double epsilon, double dykstra_tol,
           int max_sweeps) {
            SdpConfig cfg;
            cfg.epsilon = epsilon;
            cfg.dykstra_tol = dykstra_tol;
            cfg.max_sweeps = max_sweeps;
            return solve_min_norm_design(g, PureTarget{target}, cfg);
        },
        py::arg("game"), py::arg("target"), py::arg("epsilon") = SdpConfig{}.epsilon,
        py::arg("dykstra_tol") = SdpConfig{}.dykstra_tol,
        py::arg("max_sweeps") = SdpConfig{}.max_sweeps);

    m.def(
        "run_projected_gradient",
        [](const Game& g, const std::string& objective, double rho,
           std::optional<std::vector<int>> target, double alpha, double stop_eps,
           int max_outer_iters, double kl_delta) {
            BilevelConfig cfg;
            cfg.step_alpha = alpha;
            cfg.stop_eps = stop_eps;
            cfg.max_outer_iters = max_outer_iters;
            const auto obj = make_objective(objective, g.dims, target, kl_delta);
            return run_projected_gradient(g, obj, FeasibleSetParams{rho}, cfg);
        },
        py::arg("game"), py::arg("objective"), py::arg("rho"), py::arg("target") = py::none(),
        py::arg("alpha") = BilevelConfig{}.step_alpha,
        py::arg("stop_eps") = BilevelConfig{}.stop_eps,
        py::arg("max_outer_iters") = BilevelConfig{}.max_outer_iters,
        py::arg("kl_delta") = kDefaultKlSmoothing);

    m.def(
        "implicit_gradient",
        [](const Game& g, const VectorXd& x, const VectorXd& grad_psi) {
            return implicit_gradient(g, x, grad_psi);
        },
        py::arg("game"), py::arg("x"), py::arg("grad_psi"));

    m.def(
        "project_feasible",
        [](const MatrixXd& c, const std::vector<int>& dims, double rho) {
            return project_feasible(c, PlayerDims(dims), FeasibleSetParams{rho});
        },
        py::arg("C"), py::arg("dims"), py::arg("rho"));

    m.def(
        "objective",
        [](const std::string& name, const std::vector<int>& dims,
           std::optional<std::vector<int>> target, double kl_delta) {
            const auto obj = make_objective(name, PlayerDims(dims), target, kl_delta);
            return std::make_pair(obj.value, obj.gradient);
        },
        py::arg("name"), py::arg("dims"), py::arg("target") = py::none(),
        py::arg("kl_delta") = kDefaultKlSmoothing,
        "Returns (value, gradient) callables for 'kl' or 'potential_delay'.");

    m.def("collision_scenario", [] {
        const auto sc = build_collision_game();
        return std::make_pair(sc.game, sc.target.chosen);
    });

    m.def(
        "fair_game",
        [](const std::vector<std::string>& homes, double lambda) {
            const AreaGraph graph = default_area_graph();
            std::vector<int> idx;
            for (const auto& h : homes) idx.push_back(graph.index_of(h));
            return build_fair_game(graph, idx, lambda);
        },
        py::arg("homes") = std::vector<std::string>{"SW", "SE", "E"}, py::arg("lambda_") = 0.1);

    m.def(
        "sweep_epsilon_csv",
        [](const std::vector<double>& eps, int jobs) {
            return rows_to_csv(sweep_sdp_epsilon(eps, SdpConfig{}, kReportKlSmoothing, jobs));
        },
        py::arg("eps_values") = default_epsilon_grid(), py::arg("jobs") = 1);
}
