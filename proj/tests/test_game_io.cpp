#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest_helpers.hpp"
#include "invqre/experiments.hpp"
#include "invqre/game_io.hpp"
#include "test_support.hpp"

using namespace invqre;
using testing::kind_of;
using nlohmann::json;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("invqre_test_" + name);
}

}  // namespace

TEST_SUITE("game_io") {

TEST_CASE("json round trip is bitwise exact") {
    std::mt19937_64 rng(41);
    for (int k = 0; k < 20; ++k) {
        const PlayerDims d = testing::random_dims(rng, {1, 2, 3}, {2, 3, 4});
        Game g = testing::random_certified_game(rng, d);
        g.b *= M_PI * 1e-7;
        const Game back = game_from_json(json::parse(game_to_json(g).dump()));
        CHECK(back.dims == g.dims);
        CHECK(back.lambda == g.lambda);
        CHECK(back.b == g.b);
        CHECK(back.C == g.C);
    }
}

TEST_CASE("file round trip") {
    const Game g = build_collision_game().game;
    const auto path = temp_path("roundtrip.json");
    save_game(path.string(), g);
    const Game back = load_game(path.string());
    CHECK(back.b == g.b);
    CHECK(back.C == g.C);
    CHECK(back.lambda == g.lambda);
    std::filesystem::remove(path);
}

TEST_CASE("schema") {
    const json j = game_to_json(build_collision_game().game);
    CHECK(j.at("lambda").get<double>() == 0.1);
    CHECK(j.at("dims").get<std::vector<int>>() == std::vector<int>{3, 3, 3, 3});
    CHECK(j.at("b").size() == 12);
    CHECK(j.at("C").size() == 12);
    CHECK(j.at("C")[0].size() == 12);
}

TEST_CASE("strict parsing") {
    const json good = json::parse(R"({"lambda": 0.5, "dims": [2], "b": [0, 1], "C": [[1, 0], [0, 1]]})");
    CHECK_NOTHROW(game_from_json(good));

    json j = good;
    j.erase("b");
    CHECK(kind_of([&] { game_from_json(j); }) == ErrorKind::ParseError);

    j = good;
    j["b"] = json::array({0, 1, 2});
    CHECK(kind_of([&] { game_from_json(j); }) == ErrorKind::DimensionMismatch);

    j = good;
    j["C"] = json::parse("[[1, 0], [0]]");
    CHECK(kind_of([&] { game_from_json(j); }) == ErrorKind::DimensionMismatch);

    j = good;
    j["b"][0] = "x";
    CHECK(kind_of([&] { game_from_json(j); }) == ErrorKind::ParseError);

    j = good;
    j["dims"] = json::array({2.5});
    CHECK(kind_of([&] { game_from_json(j); }) == ErrorKind::ParseError);

    j = good;
    j["lambda"] = 0.0;
    CHECK(kind_of([&] { game_from_json(j); }) == ErrorKind::NonPositiveLambda);

    j = good;
    j["C"][0][0] = std::numeric_limits<double>::infinity();
    CHECK(kind_of([&] { game_from_json(j); }) == ErrorKind::NonFiniteInput);

    CHECK(kind_of([] { game_from_json(json::array()); }) == ErrorKind::ParseError);
}

TEST_CASE("load errors") {
    CHECK(kind_of([] { load_game("/nonexistent/game.json"); }) == ErrorKind::ParseError);
    const auto path = temp_path("broken.json");
    std::ofstream(path) << "{ not json";
    CHECK(kind_of([&] { load_game(path.string()); }) == ErrorKind::ParseError);
    std::filesystem::remove(path);
}

TEST_CASE("result serialisation") {
    const auto sc = build_collision_game();
    const SolveOutcome s = solve_equilibrium(sc.game);
    const json js = to_json(s);
    CHECK(js.at("converged").get<bool>());
    CHECK(js.at("x").size() == 12);

    const DesignResult r = solve_min_norm_design(sc.game, sc.target, {});
    const json jr = to_json(r);
    CHECK(jr.at("status").get<std::string>() == "Converged");
    CHECK(matrix_from_json(jr.at("C"), "C") == r.C);
    CHECK(vector_from_json(jr.at("x"), "x") == r.x);

    const json ja = to_json(check_assumption(sc.game));
    CHECK(ja.at("passed").get<bool>());
}

}  // TEST_SUITE
