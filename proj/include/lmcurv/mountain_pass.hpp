#pragma once
#include <optional>

#include "lmcurv/minimizers.hpp"

namespace lmcurv {

struct PathInState {
    std::vector<std::vector<double>> nodes;  // slope fields, endpoints fixed
    std::vector<double> energies;
    std::size_t max_index = 0;
    double max_energy() const { return energies[max_index]; }
};

struct PathOptions {
    int nodes = 32;            // P: path has P+1 samples
    int max_sweeps = 400;
    int descent_steps = 10;    // max node; neighbours get half
    double path_tau = 0.5;     // step for the path-transverse descent
    int stall_sweeps = 20;     // hand over when the max drops less than
    double stall_decrease = 1e-3;  // this fraction over stall_sweeps sweeps
    double switch_residual = 1e-3;  // hand over to the saddle refinement below this
    double tolerance = 1e-8;
    bool scale_tolerance = true;
    int refine_iterations = 20000;
    double refine_tau = 1.0;
    std::optional<double> ball_radius;
};

// Energies and max index recomputed for the model.
void evaluate_path(const EnergyModel& model, PathInState& path);
PathInState linear_path(const EnergyModel& model, std::span<const double> a, std::span<const double> b,
                        int P);
// Equal H-length spacing, endpoints kept.
PathInState reparametrize(const EnergyModel& model, const PathInState& path, int P);

struct SaddleResult {
    std::vector<double> v;
    std::vector<double> direction;  // unstable direction estimate
    double residual = 0.0;
    double curvature = 0.0;         // <J e, e>_H along the direction
    int iterations = 0;
    bool converged = false;
};

// Climbing iteration from x: descent on the complement of e, Newton step along e,
// e refreshed by power steps with finite-difference products of the gradient mapping.
SaddleResult refine_saddle(const EnergyModel& model, std::vector<double> x, std::vector<double> e,
                           const PathOptions& opt);

struct MountainPassTrace {
    double initial_max = 0.0;
    double final_path_max = 0.0;
    int sweeps = 0;
    bool monotone_max = true;  // path max never increased
    std::vector<double> max_history;
};

CriticalPointCertificate mountain_pass(const EnergyModel& model, std::span<const double> a,
                                       std::span<const double> b, const PathOptions& opt,
                                       const PointSource& source, double floor,
                                       Classification cls = Classification::mountain_pass,
                                       MountainPassTrace* trace = nullptr,
                                       PathInState* initial_path = nullptr);
// Endpoints 0 and the branch global minimum.
CriticalPointCertificate mountain_pass(const ProblemSpec& p, MeshPtr mesh, Branch branch,
                                       std::span<const double> endpoint_b, const PathOptions& opt,
                                       double floor);

struct LowEnergyPath {
    PathInState path;
    SolveStatus status = SolveStatus::converged;
    double eps2 = 0.0;
    double max_energy = 0.0;  // over the dense polyline
    double offending_t = -1.0;
    bool degenerate_plane = false;
};

// Rays t v+ and t v- joined by an arc of H-radius eps2 in span{v+, v-}.
// eps2 <= 0 selects it by halving from min(rho/2, min ||v+-|| / 2).
LowEnergyPath build_low_energy_path(const EnergyModel& full, std::span<const double> vp,
                                    std::span<const double> vm, double eps2, double rho, int P);

struct SeventhResult {
    CriticalPointCertificate cert;
    LowEnergyPath path;
    MountainPassTrace trace;
    bool distinct_from_endpoints = false;
    bool distinct_from_zero = false;
};

SeventhResult find_seventh(const EnergyModel& full, std::span<const double> vp,
                           std::span<const double> vm, double rho, const PathOptions& opt,
                           const PointSource& source);

}  // namespace lmcurv
