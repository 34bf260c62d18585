#pragma once
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lmcurv/problem.hpp"
#include "lmcurv/radial_mesh.hpp"

namespace lmcurv {

// Bad or incomplete configuration; the message starts with the offending key.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MeshConfig {
    std::size_t M = 400;
    Grading grading = Grading::uniform;
    double gamma = 1.0;
};

struct SolverConfig {
    double tolerance = 1e-8;
    int max_iterations = 200000;
    int random_starts = 2;
    std::uint64_t seed = 1;
    int path_nodes = 32;
    int scan_points = 512;
    double match_tolerance = 1e-2;  // times R
    int iteration_max = 60;
    std::vector<double> sweep_fractions{0.80, 0.90, 0.95};  // of lambda**
};

struct RunConfig {
    ProblemSpec problem;
    MeshConfig mesh;
    SolverConfig solver;
    std::vector<std::string> tasks;
};

// Block text:   problem { N = 3  nonlinearity { family = pure_power  a = 1120 } }
// '#' starts a comment, lists are [a, b]. Input starting with '{' is read as JSON.
nlohmann::ordered_json parse_config_tree(const std::string& text);
RunConfig config_from_tree(const nlohmann::ordered_json& tree);
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

nlohmann::ordered_json to_json(const RunConfig& cfg);
nlohmann::ordered_json to_json(const ProblemSpec& p);
std::string to_config_text(const RunConfig& cfg);

const char* to_string(Grading g);

}  // namespace lmcurv
