#pragma once
#include <cstdint>
#include <array>
#include <optional>

#include "lmcurv/certificate.hpp"

namespace lmcurv {

struct SolveOptions {
    double tolerance = 1e-8;  // criticality residual, H-norm, tau = 1
    // Stop at tolerance * min(1, ||v||_H) so small solutions are resolved too.
    bool scale_tolerance = true;
    int max_iterations = 200000;
    bool backtracking = true;  // false: fixed step tau0
    double tau0 = 1.0;
    double tau_max = 1024.0;
    int random_starts = 2;
    std::optional<double> ball_radius;
    std::uint64_t seed = 1;
};

struct DescentResult {
    std::vector<double> v;
    EnergyBreakdown energy;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
    bool on_ball = false;
};

// Proximal-gradient descent in the H metric from v0 (clamped into K and the ball).
DescentResult descend(const EnergyModel& model, std::vector<double> v0, const SolveOptions& opt);

// Global minimum of the branch functional over K.
CriticalPointCertificate minimize(const EnergyModel& model, const SolveOptions& opt,
                                  const PointSource& source);
CriticalPointCertificate minimize(const ProblemSpec& p, MeshPtr mesh, Branch branch,
                                  const SolveOptions& opt);

// Minimum over the H-ball of radius rho.
CriticalPointCertificate minimize_in_ball(const EnergyModel& model, double rho,
                                          const SolveOptions& opt, const PointSource& source);
CriticalPointCertificate minimize_in_ball(const ProblemSpec& p, MeshPtr mesh, Branch branch,
                                          double rho, const SolveOptions& opt);

class NotApplicable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SignRepair {
    std::vector<double> v;
    int dips_repaired = 0;
    double energy_before = 0.0;  // full functional
    double energy_after = 0.0;
    double norm_sq_before = 0.0;
    double norm_sq_after = 0.0;
    // Per dip: (tau, r_bar, r3) node indices of the construction.
    std::vector<std::array<std::size_t, 3>> dips;
};

// Flatten-and-reflect surgery turning small negative dips into a nonnegative
// profile without increasing the H-norm. Throws NotApplicable when u(0) <= 0.
SignRepair repair_sign(const SlopeField& v, const ProblemSpec& p);

}  // namespace lmcurv
