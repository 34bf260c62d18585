#pragma once
#include <cstdint>
#include <limits>

#include "lmcurv/problem.hpp"
#include "lmcurv/radial_mesh.hpp"

namespace lmcurv {

struct EmbeddingOptions {
    int random_starts = 4;
    int max_iterations = 4000;
    double tolerance = 1e-13;
    std::uint64_t seed = 7;
};

struct EmbeddingEstimate {
    double value = 0.0;            // best discrete supremum found
    double power_iteration = 0.0;  // p = 2 only, else NaN
    double ascent = 0.0;           // best projected-ascent value
    int iterations = 0;
};

// Discrete C(N,p,R): sup of lp_norm(u)^p / h_norm_sq(v)^{p/2}.
EmbeddingEstimate estimate_embedding_constant(const RadialMesh& mesh, double p,
                                              const EmbeddingOptions& opt = {});
// Power iteration for the p = 2 generalized eigenproblem.
double embedding_constant_power(const RadialMesh& mesh, int max_iterations = 20000,
                                double tolerance = 1e-15);
// Projected gradient ascent on the H-sphere from a given start.
double embedding_constant_ascent(const RadialMesh& mesh, double p, std::vector<double> start,
                                 int max_iterations, double tolerance, int* iterations = nullptr);
// sup of sum_i hardy_i u_i^2 / h_norm_sq(v).
double hardy_ratio(const RadialMesh& mesh);

struct SuperlinearityCheck {
    bool holds = false;
    double lhs = 0.0;
    double gamma_ratio = 0.0;  // Gamma(N) Gamma(theta+1) / Gamma(N+theta+1)
};
SuperlinearityCheck check_superlinearity(int N, double theta, double a1, double a2, double R);

double default_alpha(int N);

// Constant with |F(r,s)| <= eps/2 s^2 + c |s|^alpha on [0,R]x[-R,R].
double growth_constant(const NonlinearitySpec& f, double eps, double alpha, double R);

struct EmbeddingConstants {
    double C2 = 0.0;
    double Cq = 0.0;
    double Calpha = 0.0;
};

struct ThresholdReport {
    double alpha = 0.0;
    EmbeddingConstants C;
    bool constants_are_discrete_estimates = true;
    double eps = 0.0;
    double c_eps = 0.0;
    double d2 = 0.0, dq = 0.0, dalpha = 0.0;
    double beta = 0.0;
    double lambda = 0.0;
    double t_lambda = 0.0;  // = rho_minus
    double lambda_star = 0.0;
    double rho_plus = 0.0;
    double rho_minus = 0.0;
    double mp_floor = 0.0;
    double lambda_star_star = 0.0;
    bool lambda_star_star_is_lambda_star = false;
    SuperlinearityCheck superlinearity;
    // gradient-term conditions, populated when a gradient term is present
    bool has_gradient_term = false;
    bool lip1_ok = false;
    bool lip2_ok = false;
    double L1 = 0.0, L2 = 0.0;
    double lambda_bar = 0.0;
    double k = std::numeric_limits<double>::infinity();
    bool k_valid = false;
};

// The lambda*-rho block from given constants. Throws on q or alpha out of range.
ThresholdReport compute_lambda_star(const ProblemSpec& p, double alpha, const EmbeddingConstants& C);

struct GradientConditions {
    bool lip1_ok = false;
    bool lip2_ok = false;
    double lambda_bar = 0.0;
    double k = std::numeric_limits<double>::infinity();
    bool k_valid = false;  // denominator positive and k < 1
};
GradientConditions check_gradient_conditions(double L1, double L2, double C2, double lambda,
                                             double q, double b1, double R);

// Full report: estimates constants on the mesh, then the explicit formulas.
ThresholdReport compute_thresholds(const ProblemSpec& p, const RadialMesh& mesh, double alpha = 0.0,
                                   const EmbeddingOptions& opt = {});

// d_q rho^q lambda + c d_alpha rho^alpha >= -R^N bound, largest admissible lambda.
double lambda_star_star(const ThresholdReport& t, double R, int N, double q, bool* equals_star);

}  // namespace lmcurv
