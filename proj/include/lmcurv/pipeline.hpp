#pragma once
#include "lmcurv/report.hpp"

namespace lmcurv {

MeshPtr mesh_for(const RunConfig& cfg);
SolveOptions solve_options(const RunConfig& cfg);
PathOptions path_options(const RunConfig& cfg);

RunReport run_thresholds(const RunConfig& cfg);
// Global minimum and ball minimum on the configured branch.
RunReport run_minimize(const RunConfig& cfg);
RunReport run_mountain_pass(const RunConfig& cfg);
RunReport run_seventh(const RunConfig& cfg);
RunReport run_shoot(const RunConfig& cfg);
// thresholds -> u+- -> v+- -> w+- -> seventh -> oracle scan -> cross-validation
RunReport run_solve_all(const RunConfig& cfg);
RunReport run_grad_iter(const RunConfig& cfg);
// lambda = fraction * lambda** for each configured fraction, then bisection for the largest
// lambda with a certified seventh solution.
RunReport run_sweep_lambda(const RunConfig& cfg, int bisections = 6);
// Re-certifies profiles written by an earlier run (profiles/*.csv under dir) and
// matches them against a fresh oracle scan.
RunReport run_verify(const RunConfig& cfg, const std::string& dir);

}  // namespace lmcurv
