#include "lmcurv/minimizers.hpp"

#include <cmath>
#include <random>

#include "lmcurv/simd/kernels.hpp"

namespace lmcurv {

namespace {

constexpr double kCap = 1.0 - 1e-15;

bool project_ball(const RadialMesh& mesh, std::vector<double>& v, const std::optional<double>& rho) {
    if (!rho) return false;
    const double n = std::sqrt(h_norm_sq(mesh, v));
    if (n <= *rho) return n >= *rho * (1.0 - 1e-10);
    const double s = *rho / n;
    for (auto& x : v) x *= s;
    return true;
}

double energy_slack(const EnergyBreakdown& e) {
    return 1e-14 * (std::fabs(e.psi) + std::fabs(e.q_term) + std::fabs(e.f_term)) + 1e-300;
}

std::vector<double> tent(std::size_t n, Branch b, double t) {
    return std::vector<double>(n, b == Branch::negative ? t : -t);
}

std::vector<std::vector<double>> global_starts(const RadialMesh& mesh, Branch b, const SolveOptions& opt) {
    const std::size_t n = mesh.cells();
    std::vector<std::vector<double>> starts;
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> U(0.5, 1.0), S(-1.0, 1.0);
    std::vector<Branch> signs = b == Branch::full ? std::vector<Branch>{Branch::positive, Branch::negative}
                                                  : std::vector<Branch>{b};
    for (Branch s : signs) {
        std::vector<double> small(n);
        for (auto& x : small) x = (s == Branch::negative ? 1e-4 : -1e-4) * U(rng);
        starts.push_back(std::move(small));
        for (double t : {0.25, 0.5, 0.75, 1.0}) starts.push_back(tent(n, s, t));
    }
    for (int k = 0; k < opt.random_starts; ++k) {
        std::vector<double> v(n);
        for (auto& x : v) x = S(rng);
        starts.push_back(std::move(v));
    }
    return starts;
}

}  // namespace

DescentResult descend(const EnergyModel& model, std::vector<double> v, const SolveOptions& opt) {
    const auto& mesh = model.mesh();
    const std::size_t n = v.size();
    const auto w = mesh.cell_weights();
    for (auto& x : v) x = std::clamp(x, -kCap, kCap);
    DescentResult res;
    res.on_ball = project_ball(mesh, v, opt.ball_radius);

    std::vector<double> g(n), gn(n), z(n), vn(n), d(n);
    EnergyBreakdown E = model.energy_grad(v, g);
    double tau = opt.tau0;
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        kernels::riesz_step(v.data(), g.data(), w.data(), 1.0, z.data(), n);
        prox_psi(z, 1.0, z);
        kernels::axpy(v.data(), -1.0, z.data(), d.data(), n);
        res.residual = std::sqrt(h_norm_sq(mesh, d));
        const double target =
            opt.scale_tolerance ? opt.tolerance * std::clamp(std::sqrt(h_norm_sq(mesh, v)), 1e-12, 1.0)
                                : opt.tolerance;
        if (res.residual <= target) {
            res.converged = true;
            break;
        }
        bool accepted = false;
        EnergyBreakdown En;
        bool on_ball = false;
        for (int bt = 0; bt < 60; ++bt) {
            kernels::riesz_step(v.data(), g.data(), w.data(), tau, z.data(), n);
            prox_psi(z, tau, vn);
            on_ball = project_ball(mesh, vn, opt.ball_radius);
            En = model.energy_grad(vn, gn);
            kernels::axpy(vn.data(), -1.0, v.data(), d.data(), n);
            double gd = 0.0;
            for (std::size_t j = 0; j < n; ++j) gd += g[j] * d[j];
            const double sm = -E.q_term - E.f_term, smn = -En.q_term - En.f_term;
            const double slack = energy_slack(E);
            const bool armijo = smn <= sm + gd + h_norm_sq(mesh, d) / (2.0 * tau) + slack;
            if ((armijo && En.total <= E.total + slack) || !opt.backtracking) {
                accepted = true;
                break;
            }
            tau *= 0.5;
        }
        if (!accepted) break;
        v.swap(vn);
        g.swap(gn);
        E = En;
        res.on_ball = on_ball;
        if (opt.backtracking) tau = std::min(2.0 * tau, opt.tau_max);
    }
    res.iterations = it;
    res.energy = E;
    res.v = std::move(v);
    return res;
}

namespace {

CriticalPointCertificate best_of(const EnergyModel& model, const std::vector<std::vector<double>>& starts,
                                 const SolveOptions& opt, Classification cls, const PointSource& source) {
    std::optional<DescentResult> best;
    int total = 0;
    for (const auto& s : starts) {
        auto r = descend(model, s, opt);
        total += r.iterations;
        if (!best || r.energy.total < best->energy.total) best = std::move(r);
    }
    CertifyOptions co;
    co.tolerance = opt.tolerance;
    auto cert = certify(model, best->v, cls, to_string(cls), source, co);
    cert.iterations = total;
    if (!best->converged) cert.status = SolveStatus::non_convergence;
    if (opt.ball_radius && best->on_ball) cert.status = SolveStatus::ball_violation;
    return cert;
}

}  // namespace

CriticalPointCertificate minimize(const EnergyModel& model, const SolveOptions& opt,
                                  const PointSource& source) {
    return best_of(model, global_starts(model.mesh(), model.branch(), opt), opt,
                   Classification::global_min, source);
}

CriticalPointCertificate minimize(const ProblemSpec& p, MeshPtr mesh, Branch branch,
                                  const SolveOptions& opt) {
    EnergyModel model(std::move(mesh), p, branch);
    return minimize(model, opt, point_source(p));
}

CriticalPointCertificate minimize_in_ball(const EnergyModel& model, double rho,
                                          const SolveOptions& opt_in, const PointSource& source) {
    SolveOptions opt = opt_in;
    opt.ball_radius = rho;
    const auto& mesh = model.mesh();
    const std::size_t n = mesh.cells();
    const double tn = std::sqrt(h_norm_sq(mesh, std::vector<double>(n, 1.0)));
    std::vector<std::vector<double>> starts;
    std::vector<Branch> signs = model.branch() == Branch::full
                                    ? std::vector<Branch>{Branch::positive, Branch::negative}
                                    : std::vector<Branch>{model.branch()};
    for (Branch s : signs)
        for (double frac : {1e-3, 0.1, 0.5}) starts.push_back(tent(n, s, frac * rho / tn));
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> S(-1.0, 1.0);
    for (int k = 0; k < opt.random_starts; ++k) {
        std::vector<double> v(n);
        for (auto& x : v) x = S(rng);
        const double vn = std::sqrt(h_norm_sq(mesh, v));
        for (auto& x : v) x *= 0.5 * rho / vn;
        starts.push_back(std::move(v));
    }
    return best_of(model, starts, opt, Classification::local_min, source);
}

CriticalPointCertificate minimize_in_ball(const ProblemSpec& p, MeshPtr mesh, Branch branch,
                                          double rho, const SolveOptions& opt) {
    EnergyModel model(std::move(mesh), p, branch);
    return minimize_in_ball(model, rho, opt, point_source(p));
}

SignRepair repair_sign(const SlopeField& field, const ProblemSpec& p) {
    const auto& mesh = field.mesh();
    EnergyModel full(field.mesh_ptr(), p, Branch::full);
    SignRepair out;
    out.v.assign(field.values().begin(), field.values().end());
    out.energy_before = full.energy(out.v).total;
    out.norm_sq_before = h_norm_sq(mesh, out.v);
    auto u = reconstruct(mesh, out.v);
    bool negative = false;
    for (double x : u) negative = negative || x < 0.0;
    if (negative && !(u[0] > 0.0))
        throw NotApplicable("repair_sign: profile is not positive on an initial interval");
    const std::size_t M = mesh.cells();
    for (int guard = 0; negative && guard < static_cast<int>(M); ++guard) {
        std::size_t i2 = 0;
        while (i2 <= M && u[i2] >= 0.0) ++i2;
        if (i2 > M) break;
        std::size_t i3 = i2;
        while (u[i3] < 0.0) ++i3;  // u_M = 0 stops the scan
        std::size_t ibar = i2;
        for (std::size_t i = i2; i < i3; ++i)
            if (u[i] < u[ibar]) ibar = i;
        for (std::size_t k = ibar; k < i3; ++k) out.v[k] = -out.v[k];
        const double w1 = 2.0 * u[i3] - u[ibar];
        std::size_t itau = 0;
        for (std::size_t i = i2; i-- > 0;)
            if (u[i] >= w1) {
                itau = i;
                break;
            }
        for (std::size_t k = itau; k < ibar; ++k) out.v[k] = 0.0;
        out.dips.push_back({itau, ibar, i3});
        ++out.dips_repaired;
        u = reconstruct(mesh, out.v);
        negative = false;
        for (double x : u) negative = negative || x < 0.0;
    }
    out.energy_after = full.energy(out.v).total;
    out.norm_sq_after = h_norm_sq(mesh, out.v);
    return out;
}

}  // namespace lmcurv
