#pragma once
#include <stdexcept>
#include <vector>

#include "lmcurv/problem.hpp"
#include "lmcurv/radial_mesh.hpp"

namespace lmcurv {

struct ShootingOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double start_fraction = 1e-6;  // first node r0 = start_fraction * R, series before it
};

struct ShootingRecord {
    double s = 0.0;
    double terminal = 0.0;  // T(s) = u(R; s), extrapolated if the run was cut short
    std::vector<double> r, u, du, h;  // samples at the mesh nodes
    bool reached_R = false;
    bool exceeded_truncation = false;  // |u| > R + 1 somewhere
    bool step_failure = false;
    bool touched_zero = false;  // left the branch (u crossed 0) before R
    double touch_r = -1.0;
    double source_sup = 0.0;  // sup |r^{1-N} h'| along the run
    long steps = 0;
};

// -(r^{N-1} phi(u'))' = r^{N-1}(lambda b |u|^{q-2}u + f) in the variables (u, h = r^{N-1} phi(u')),
// u' = h / sqrt(r^{2(N-1)} + h^2). Branch truncation as in the energy.
ShootingRecord shoot(const ProblemSpec& p, Branch branch, double s, const RadialMesh& mesh,
                     const ShootingOptions& opt = {});

struct ScanOptions {
    int grid = 512;                // half log-spaced, half linear
    double log_floor = 1e-10;      // smallest |s| / R on the log part
    double root_tol = 1e-10;       // |T| target
    int max_bisections = 200;
    double distinct = 1e-6;        // |s_a - s_b| / R
    ShootingOptions shooting;
};

struct ShootingRoot {
    double s = 0.0;
    ShootingRecord record;
    bool bracket_touched = false;  // an endpoint of the bracket left the branch
    bool tolerance_met = false;
};

struct ScanResult {
    std::vector<double> s, T;
    std::vector<char> touched, failed;
    std::vector<ShootingRoot> roots;
    int skipped = 0;
};

std::vector<double> scan_grid(double R, Branch branch, const ScanOptions& opt);
ScanResult scan_and_count(const ProblemSpec& p, Branch branch, const RadialMesh& mesh,
                          const ScanOptions& opt = {});

}  // namespace lmcurv
