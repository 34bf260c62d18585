#include "lmcurv/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace lmcurv {

namespace {

double critical_exponent(int N) { return 2.0 * N / (N - 2.0); }

// v <- W^{-1} A^T diag(weights) A v, returns the Rayleigh quotient at the input v.
double apply_normal_operator(const RadialMesh& mesh, std::span<const double> weights,
                             std::span<const double> v, std::vector<double>& out) {
    const auto u = reconstruct(mesh, v);
    std::vector<double> loads(u.size());
    double num = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        loads[i] = weights[i] * u[i];
        num += loads[i] * u[i];
    }
    out.resize(v.size());
    reconstruct_adjoint(mesh, loads, out);
    const auto w = mesh.cell_weights();
    for (std::size_t j = 0; j < out.size(); ++j) out[j] /= w[j];
    return num / h_norm_sq(mesh, v);
}

double power_iteration(const RadialMesh& mesh, std::span<const double> weights, int max_it,
                       double tol, std::vector<double>* vec = nullptr) {
    std::vector<double> v(mesh.cells(), -1.0), next;
    double rq = 0.0;
    for (int it = 0; it < max_it; ++it) {
        const double prev = rq;
        rq = apply_normal_operator(mesh, weights, v, next);
        const double n = std::sqrt(h_norm_sq(mesh, next));
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = next[j] / n;
        if (it > 2 && std::fabs(rq - prev) <= tol * rq) break;
    }
    if (vec) *vec = v;
    return rq;
}

void normalize_h(const RadialMesh& mesh, std::vector<double>& v) {
    const double n = std::sqrt(h_norm_sq(mesh, v));
    for (auto& x : v) x /= n;
}

// L(v) = sum omega |u|^p on the unit H-sphere, with its H-Riesz gradient.
double lp_objective(const RadialMesh& mesh, double p, std::span<const double> v,
                    std::vector<double>* grad) {
    const auto u = reconstruct(mesh, v);
    const auto om = mesh.node_weights();
    std::vector<double> loads(u.size());
    double L = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double a = std::fabs(u[i]);
        if (a == 0.0) {
            loads[i] = 0.0;
            continue;
        }
        const double ap = std::pow(a, p);
        L += om[i] * ap;
        loads[i] = p * om[i] * ap / u[i];
    }
    if (grad) {
        grad->resize(v.size());
        reconstruct_adjoint(mesh, loads, *grad);
        const auto w = mesh.cell_weights();
        for (std::size_t j = 0; j < v.size(); ++j) (*grad)[j] /= w[j];
    }
    return L;
}

}  // namespace

double embedding_constant_power(const RadialMesh& mesh, int max_iterations, double tolerance) {
    return power_iteration(mesh, mesh.node_weights(), max_iterations, tolerance);
}

double hardy_ratio(const RadialMesh& mesh) {
    return power_iteration(mesh, mesh.hardy_weights(), 200000, 1e-14);
}

double embedding_constant_ascent(const RadialMesh& mesh, double p, std::vector<double> v,
                                 int max_iterations, double tolerance, int* iterations) {
    normalize_h(mesh, v);
    std::vector<double> g, trial(v.size());
    double J = lp_objective(mesh, p, v, &g);
    double step = 1.0;
    int it = 0;
    for (; it < max_iterations; ++it) {
        const double gv = h_dot(mesh, g, v);
        for (std::size_t j = 0; j < v.size(); ++j) g[j] -= gv * v[j];
        const double gn = std::sqrt(h_norm_sq(mesh, g));
        if (gn <= tolerance * std::max(J, 1e-300)) break;
        bool accepted = false;
        double Jn = J;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t j = 0; j < v.size(); ++j) trial[j] = v[j] + step * g[j];
            normalize_h(mesh, trial);
            Jn = lp_objective(mesh, p, trial, nullptr);
            if (Jn > J) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        const double gain = Jn - J;
        v.swap(trial);
        J = lp_objective(mesh, p, v, &g);
        step *= 2.0;
        if (gain <= tolerance * J) break;
    }
    if (iterations) *iterations = it;
    return J;
}

EmbeddingEstimate estimate_embedding_constant(const RadialMesh& mesh, double p,
                                              const EmbeddingOptions& opt) {
    if (!(p >= 1.0)) throw std::invalid_argument("embedding constant: p must be >= 1");
    if (!(p < critical_exponent(mesh.dim())))
        throw std::invalid_argument("embedding constant: p must be below 2N/(N-2)");
    EmbeddingEstimate est;
    std::vector<double> eig;
    const double pw = power_iteration(mesh, mesh.node_weights(), 20000, 1e-15, &eig);
    est.power_iteration = p == 2.0 ? pw : std::numeric_limits<double>::quiet_NaN();

    std::vector<std::vector<double>> starts;
    starts.push_back(eig);
    starts.emplace_back(mesh.cells(), -1.0);
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int k = 0; k < opt.random_starts; ++k) {
        std::vector<double> v(mesh.cells());
        for (auto& x : v) x = U(rng) - 0.5;
        starts.push_back(std::move(v));
    }
    est.ascent = 0.0;
    for (auto& s : starts) {
        int it = 0;
        const double J = embedding_constant_ascent(mesh, p, s, opt.max_iterations, opt.tolerance, &it);
        est.iterations += it;
        est.ascent = std::max(est.ascent, J);
    }
    est.value = p == 2.0 ? std::max(est.ascent, pw) : est.ascent;
    return est;
}

SuperlinearityCheck check_superlinearity(int N, double theta, double a1, double a2, double R) {
    SuperlinearityCheck c;
    c.gamma_ratio = std::exp(std::lgamma(static_cast<double>(N)) + std::lgamma(theta + 1.0) -
                             std::lgamma(N + theta + 1.0));
    c.lhs = (1.0 + a2) / N - a1 * std::pow(R, theta) * c.gamma_ratio;
    c.holds = c.lhs <= -1.0 + 1e-12;
    return c;
}

double default_alpha(int N) { return 0.5 * (2.0 + critical_exponent(N)); }

double growth_constant(const NonlinearitySpec& f, double eps, double alpha, double R) {
    double a = 0.0;
    double theta = nl_theta(f);
    if (auto p = std::get_if<PurePower>(&f)) {
        a = p->a;
    } else if (auto p = std::get_if<AsymmetricPower>(&f)) {
        a = std::max(p->a_plus, p->a_minus);
    } else {
        // sampled: max over the grid of (|F| - eps s^2 / 2) / |s|^alpha
        double c = 0.0;
        for (int i = 0; i <= 16; ++i) {
            const double r = R * i / 16.0;
            for (int k = 1; k <= 256; ++k) {
                const double s = R * std::pow(k / 256.0, 2.0);
                for (double x : {s, -s}) {
                    const double F = std::fabs(nl_primitive(f, r, x));
                    c = std::max(c, (F - 0.5 * eps * x * x) / std::pow(s, alpha));
                }
            }
        }
        return std::max(c, 1e-300);
    }
    if (theta >= alpha) return a / theta * std::pow(R, theta - alpha);
    // |s|^theta = (s^2)^mu (|s|^alpha)^{1-mu} <= mu delta s^2 + (1-mu) delta^{-mu/(1-mu)} |s|^alpha
    const double mu = (alpha - theta) / (alpha - 2.0);
    const double delta = eps * theta / (2.0 * a * mu);
    return a / theta * (1.0 - mu) * std::pow(delta, -mu / (1.0 - mu));
}

ThresholdReport compute_lambda_star(const ProblemSpec& p, double alpha, const EmbeddingConstants& C) {
    const double q = p.q;
    if (!(q > 1.0 && q < 2.0)) throw std::invalid_argument("thresholds: q must lie in (1,2)");
    if (!(alpha > 2.0 && alpha < critical_exponent(p.N)))
        throw std::invalid_argument("thresholds: alpha must lie in (2, 2N/(N-2))");
    ThresholdReport t;
    t.alpha = alpha;
    t.C = C;
    t.lambda = p.lambda;
    t.d2 = C.C2;
    t.dq = p.weight_b.upper() / q * C.Cq;
    t.dalpha = C.Calpha;
    t.eps = 1.0 / (4.0 * t.d2);
    t.c_eps = growth_constant(p.nonlinearity, t.eps, alpha, p.R);
    const double cd = t.c_eps * t.dalpha;
    t.beta = std::pow(alpha - q, (alpha - q) / (alpha - 2.0)) /
             (std::pow(2.0 - q, (2.0 - q) / (alpha - 2.0)) * (alpha - 2.0));
    t.lambda_star = std::pow(0.25, (alpha - q) / (alpha - 2.0)) /
                    (t.beta * t.dq * std::pow(cd, (2.0 - q) / (alpha - 2.0)));
    t.rho_plus = std::pow((2.0 - q) / (4.0 * cd * (alpha - q)), 1.0 / (alpha - 2.0));
    t.t_lambda = std::pow(p.lambda * (2.0 - q) * t.dq / ((alpha - 2.0) * cd), 1.0 / (alpha - q));
    t.rho_minus = t.t_lambda;
    t.mp_floor = t.rho_minus * t.rho_minus / 8.0;
    t.lambda_star_star = lambda_star_star(t, p.R, p.N, q, &t.lambda_star_star_is_lambda_star);
    return t;
}

double lambda_star_star(const ThresholdReport& t, double R, int N, double q, bool* equals_star) {
    const double alpha = t.alpha;
    const double cd = t.c_eps * t.dalpha;
    auto margin = [&](double lam) {
        const double rho = std::pow(lam * (2.0 - q) * t.dq / ((alpha - 2.0) * cd), 1.0 / (alpha - q));
        return std::pow(R, N) - lam * t.dq * std::pow(rho, q) - cd * std::pow(rho, alpha);
    };
    if (margin(t.lambda_star) >= 0.0) {
        if (equals_star) *equals_star = true;
        return t.lambda_star;
    }
    if (equals_star) *equals_star = false;
    double lo = 0.0, hi = t.lambda_star;
    for (int k = 0; k < 200 && hi - lo > 1e-15 * t.lambda_star; ++k) {
        const double mid = 0.5 * (lo + hi);
        (margin(mid) >= 0.0 ? lo : hi) = mid;
    }
    return lo;
}

GradientConditions check_gradient_conditions(double L1, double L2, double C2, double lambda,
                                             double q, double b1, double R) {
    GradientConditions g;
    g.lip1_ok = L1 * C2 < 0.25;
    g.lip2_ok = L2 * std::sqrt(C2) < 0.5;
    const double lam_coef = std::pow(2.0 * R, q - 2.0) * q * b1 * C2;
    g.lambda_bar = 0.25 / lam_coef;
    const double den = 1.0 - (lambda * std::pow(2.0 * R, q - 2.0) * q * b1 + L1) * C2;
    if (den > 0.0) {
        g.k = L2 * std::sqrt(C2) / den;
        g.k_valid = g.k < 1.0;
    }
    return g;
}

ThresholdReport compute_thresholds(const ProblemSpec& p, const RadialMesh& mesh, double alpha,
                                   const EmbeddingOptions& opt) {
    if (alpha == 0.0) alpha = default_alpha(p.N);
    EmbeddingConstants C;
    C.C2 = estimate_embedding_constant(mesh, 2.0, opt).value;
    C.Cq = estimate_embedding_constant(mesh, p.q, opt).value;
    C.Calpha = estimate_embedding_constant(mesh, alpha, opt).value;
    ThresholdReport t = compute_lambda_star(p, alpha, C);
    t.superlinearity = check_superlinearity(p.N, nl_theta(p.nonlinearity), nl_a1(p.nonlinearity),
                                            nl_a2(p.nonlinearity), p.R);
    if (p.gradient_term) {
        const auto lip = gt_lipschitz(*p.gradient_term, p.R);
        const auto g = check_gradient_conditions(lip.L1, lip.L2, C.C2, p.lambda, p.q,
                                                 p.weight_b.upper(), p.R);
        t.has_gradient_term = true;
        t.L1 = lip.L1;
        t.L2 = lip.L2;
        t.lip1_ok = g.lip1_ok;
        t.lip2_ok = g.lip2_ok;
        t.lambda_bar = std::min(g.lambda_bar, t.lambda_star);
        t.k = g.k;
        t.k_valid = g.k_valid;
    }
    return t;
}

}  // namespace lmcurv
