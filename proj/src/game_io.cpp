#include "invqre/game_io.hpp"

#include <cmath>
#include <fstream>

namespace invqre {

using nlohmann::json;

namespace {

double finite_number(const json& v, const std::string& field) {
    if (!v.is_number()) throw Error(ErrorKind::ParseError, field + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw Error(ErrorKind::NonFiniteInput, field + ": NaN/Inf not allowed");
    return d;
}

const json& require(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw Error(ErrorKind::ParseError, std::string("missing field \"") + key + "\"");
    }
    return j.at(key);
}

}  // namespace

json vector_to_json(const VectorXd& v) {
    json out = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
    return out;
}

json matrix_to_json(const MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_to_json(m.row(r).transpose()));
    return out;
}

VectorXd vector_from_json(const json& j, const std::string& field) {
    if (!j.is_array()) throw Error(ErrorKind::ParseError, field + ": expected an array");
    VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) {
        v[static_cast<Eigen::Index>(k)] = finite_number(j[k], field);
    }
    return v;
}

MatrixXd matrix_from_json(const json& j, const std::string& field) {
    if (!j.is_array()) throw Error(ErrorKind::ParseError, field + ": expected an array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j[0].size());
    MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw Error(ErrorKind::DimensionMismatch, field + ": ragged rows");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = finite_number(row[static_cast<std::size_t>(c)], field);
        }
    }
    return m;
}

json game_to_json(const Game& g) {
    return json{{"lambda", g.lambda},
                {"dims", g.dims.sizes()},
                {"b", vector_to_json(g.b)},
                {"C", matrix_to_json(g.C)}};
}

Game game_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorKind::ParseError, "game must be a JSON object");
    Game g;
    g.lambda = finite_number(require(j, "lambda"), "lambda");

    const json& dims = require(j, "dims");
    if (!dims.is_array() || dims.empty()) {
        throw Error(ErrorKind::ParseError, "dims: expected a nonempty array");
    }
    std::vector<int> sizes;
    for (const auto& d : dims) {
        if (!d.is_number_integer()) throw Error(ErrorKind::ParseError, "dims: expected integers");
        sizes.push_back(d.get<int>());
    }
    g.dims = PlayerDims(std::move(sizes));
    g.b = vector_from_json(require(j, "b"), "b");
    g.C = matrix_from_json(require(j, "C"), "C");
    validate_game(g);
    return g;
}

Game load_game(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, path + ": " + e.what());
    }
    return game_from_json(j);
}

void save_game(const std::string& path, const Game& g) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path);
    out << game_to_json(g).dump(2) << '\n';
}

json to_json(const AssumptionReport& r) {
    return json{{"min_eig_sym", r.min_eig_sym},
                {"diag_block_asymmetry", r.diag_block_asymmetry},
                {"lambda_ok", r.lambda_ok},
                {"passed", r.passed}};
}

json to_json(const SolveOutcome& s) {
    return json{{"x", vector_to_json(s.x)},
                {"residual_sq", s.residual_sq},
                {"iterations", s.iterations},
                {"converged", s.converged},
                {"certified", s.certified},
                {"pinv_fallbacks", s.pinv_fallbacks}};
}

json to_json(const DesignResult& r) {
    json history = json::array();
    for (const auto& h : r.history) {
        history.push_back({{"iteration", h.iteration},
                           {"objective_value", h.objective_value},
                           {"step_norm", h.step_norm}});
    }
    return json{{"C", matrix_to_json(r.C)},
                {"x", vector_to_json(r.x)},
                {"objective_value", r.objective_value},
                {"c_norm", r.c_norm},
                {"equilibrium_residual_sq", r.equilibrium_residual_sq},
                {"iterations", r.iterations},
                {"converged", r.converged},
                {"status", std::string(to_string(r.status))},
                {"max_violation", r.max_violation},
                {"history", std::move(history)}};
}

}  // namespace invqre
