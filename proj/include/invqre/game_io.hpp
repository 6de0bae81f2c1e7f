#pragma once

#include <string>

#include <json.hpp>

#include "invqre/design_result.hpp"
#include "invqre/game.hpp"
#include "invqre/qre_solver.hpp"

namespace invqre {

// Game schema: {"lambda": real, "dims": [int...], "b": [real...], "C": [[real...]...]}
// with C row-major. Lengths are checked strictly and NaN/Inf are rejected.
nlohmann::json game_to_json(const Game& g);
Game game_from_json(const nlohmann::json& j);

Game load_game(const std::string& path);
void save_game(const std::string& path, const Game& g);

nlohmann::json matrix_to_json(const MatrixXd& m);
nlohmann::json vector_to_json(const VectorXd& v);
MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& field);
VectorXd vector_from_json(const nlohmann::json& j, const std::string& field);

nlohmann::json to_json(const AssumptionReport& r);
nlohmann::json to_json(const SolveOutcome& s);
nlohmann::json to_json(const DesignResult& r);

}  // namespace invqre
