#pragma once
#include <optional>
#include <string>
#include <vector>

#include "lmcurv/energy.hpp"

namespace lmcurv {

enum class Classification { global_min, local_min, mountain_pass, seventh, frozen_global_min, frozen_mountain_pass };

const char* to_string(Classification c);

enum class SolveStatus {
    converged,
    non_convergence,
    ball_violation,
    path_collapse,
    degenerate_to_endpoint,
    positive_max,
    not_applicable,
};

const char* to_string(SolveStatus s);

struct ThresholdSnapshot {
    double lambda_star = 0.0;
    double lambda_star_star = 0.0;
    double rho_plus = 0.0;
    double rho_minus = 0.0;
    double mp_floor = 0.0;
};

struct CriticalPointCertificate {
    std::string name;
    Classification classification = Classification::global_min;
    Branch branch = Branch::positive;
    MeshPtr mesh;
    std::vector<double> v;
    std::vector<double> u;
    EnergyBreakdown energy;
    double h_norm = 0.0;
    double criticality = 0.0;
    double weak_residual = 0.0;
    bool weak_residual_defined = true;
    double sup_slope = 0.0;
    double eps_margin = 0.0;  // 1 - sup|v|
    bool sign_ok = true;
    double sign_violation = 0.0;  // most negative u (positive branch) or most positive u (negative)
    bool monotone_ok = true;
    double monotone_violation = 0.0;
    bool descent_probe_ok = true;
    bool accepted = false;
    SolveStatus status = SolveStatus::converged;
    int iterations = 0;
    std::optional<ThresholdSnapshot> thresholds;
    std::vector<std::string> notes;
};

struct CertifyOptions {
    double tolerance = 1e-8;
    bool weak_residual = true;
};

// All checks evaluated; failures are recorded, not thrown.
CriticalPointCertificate certify(const EnergyModel& model, std::span<const double> v,
                                 Classification cls, std::string name,
                                 const PointSource& source, const CertifyOptions& opt = {});
CriticalPointCertificate certify(const SlopeField& v, const ProblemSpec& p, Classification cls,
                                 const CertifyOptions& opt = {});

// ||u_a - u_b||_inf > 1e-4 R and |I_a - I_b| > 1e-8
bool distinct(const CriticalPointCertificate& a, const CriticalPointCertificate& b, double R);
double linf_distance(std::span<const double> a, std::span<const double> b);

}  // namespace lmcurv
