#pragma once
#include <optional>
#include <vector>

#include "lmcurv/mountain_pass.hpp"

namespace lmcurv {

enum class IterationMode { global_min, mountain_pass };

const char* to_string(IterationMode m);
IterationMode iteration_mode_from_string(const std::string& s);

struct FrozenOptions {
    SolveOptions solve;
    PathOptions path;
    double mp_floor = 0.0;
};

// f(r,s) = g(r, s, |omega'(r)|) with omega frozen; minimum or mountain pass of the branch functional.
// warm: previous iterate, used as the descent start (minimum) or the path endpoint's start.
CriticalPointCertificate solve_frozen(const ProblemSpec& p, MeshPtr mesh, std::span<const double> omega,
                                      Branch branch, IterationMode mode, const FrozenOptions& opt = {},
                                      const std::vector<double>* warm = nullptr);

struct IterationOptions {
    int max_iterations = 60;
    double tolerance = 1e-8;     // on ||u_{n+1} - u_n||_H
    double ratio_slack = 0.05;
    int burn_in = 2;             // ratios before this step are not part of the tail
    int non_contraction_run = 5; // consecutive ratios > 1 that abort the run
    double norm_floor = 0.0;     // 0: 1e-3 * rho_minus
    FrozenOptions frozen;        // inner tolerance defaults to tolerance / 10
};

struct IterationStep {
    double increment = 0.0;
    double ratio = 0.0;  // increment / previous increment, 0 on the first step
    CriticalPointCertificate cert;
};

struct IterationTrace {
    IterationMode mode = IterationMode::global_min;
    Branch branch = Branch::positive;
    std::vector<IterationStep> steps;
    double k_hat = 0.0;        // max tail ratio
    double k_predicted = 0.0;
    bool k_valid = false;
    bool converged = false;
    bool non_contraction = false;
    double norm_floor = 0.0;
    double min_norm = 0.0;
    double final_weak_residual = 0.0;  // against g(r, u, |u'|) of the final iterate
    CriticalPointCertificate final;
};

std::vector<double> default_omega0(const RadialMesh& mesh, Branch branch);

IterationTrace iterate(const ProblemSpec& p, MeshPtr mesh, Branch branch, IterationMode mode,
                       std::optional<std::vector<double>> omega0 = std::nullopt,
                       const IterationOptions& opt = {});

}  // namespace lmcurv
