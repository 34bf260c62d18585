#include <doctest.h>

#include <string>

#include "lmcurv/config.hpp"

using namespace lmcurv;

namespace {

const std::string kDesk = std::string(LMCURV_SOURCE_DIR) + "/configs/desk.cfg";

std::string minimal(const std::string& extra = "") {
    return "problem {\n N = 3\n R = 1.0\n lambda = 0.3\n q = 1.5\n"
           " nonlinearity { family = pure_power a = 1120 theta = 5 }\n" +
           extra + "}\n";
}

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("shipped desk config") {
    auto cfg = load_config(kDesk);
    CHECK(cfg.problem.N == 3);
    CHECK(cfg.problem.q == 1.5);
    CHECK(cfg.mesh.M == 400);
    const auto* f = std::get_if<PurePower>(&cfg.problem.nonlinearity);
    REQUIRE(f);
    CHECK(f->a == 1120.0);
    CHECK(cfg.problem.gradient_term.has_value());
    CHECK(cfg.tasks == std::vector<std::string>{"solve-all"});
}

TEST_CASE("text round trip is lossless") {
    auto cfg = load_config(kDesk);
    auto again = parse_config(to_config_text(cfg));
    CHECK(to_json(again) == to_json(cfg));
    CHECK(to_config_text(again) == to_config_text(cfg));
}

TEST_CASE("JSON input is accepted and equivalent") {
    auto cfg = load_config(kDesk);
    auto from_json = parse_config(to_json(cfg).dump());
    CHECK(to_json(from_json) == to_json(cfg));
}

TEST_CASE("defaults fill the optional blocks") {
    auto cfg = parse_config(minimal());
    CHECK(cfg.mesh.M == 400);
    CHECK(cfg.solver.tolerance == 1e-8);
    CHECK(cfg.problem.branch == Branch::positive);
    CHECK(cfg.problem.weight_b.kind == WeightSpec::Kind::constant);
}

TEST_CASE("errors name the offending key") {
    CHECK(error_of("problem { N = 3 R = 1 lambda = 0.3 nonlinearity { family = pure_power a = 1 theta = 5 } }")
              .rfind("problem.q", 0) == 0);
    CHECK(error_of(minimal("colour = blue\n")).rfind("problem.colour: unknown key", 0) == 0);
    CHECK(error_of(minimal() + "mesh { M = 1 }").rfind("mesh.M", 0) == 0);
    CHECK(error_of(minimal() + "mesh { grading = fancy }").rfind("mesh.grading", 0) == 0);
    CHECK(error_of(minimal("N = 4\n")).find("duplicate") != std::string::npos);
    CHECK(error_of(minimal() + "tasks = [dance]").rfind("tasks", 0) == 0);
    CHECK(error_of(minimal("branch = sideways\n")).find("sideways") != std::string::npos);
    CHECK(error_of(minimal() + "solver { tolerance = fast }").rfind("solver.tolerance", 0) == 0);
    CHECK(error_of("problem { N = 3").find("missing '}'") != std::string::npos);
    CHECK(error_of("{ \"problem\": ").find("JSON") != std::string::npos);
}

TEST_CASE("invalid problem values surface as configuration errors") {
    auto text = minimal();
    text.replace(text.find("q = 1.5"), 7, "q = 2.5");
    CHECK(error_of(text).find("problem.q") != std::string::npos);
}

TEST_CASE("comments, lists and linear weights") {
    auto cfg = parse_config(minimal("# a comment\n weight_b { kind = linear at_origin = 1 at_radius = 2 }\n") +
                            "solver { sweep_fractions = [0.5, 0.7] }  # trailing\n");
    CHECK(cfg.problem.weight_b.kind == WeightSpec::Kind::linear);
    CHECK(cfg.problem.weight_b.at_radius == 2.0);
    CHECK(cfg.solver.sweep_fractions == std::vector<double>{0.5, 0.7});
}
