#include "lmcurv/mountain_pass.hpp"

#include <cmath>
#include <stdexcept>

#include "lmcurv/simd/kernels.hpp"
#include "lmcurv/thresholds.hpp"

namespace lmcurv {

namespace {

constexpr double kCap = 1.0 - 1e-15;

double hnorm(const RadialMesh& m, std::span<const double> v) { return std::sqrt(h_norm_sq(m, v)); }

void clamp_k(std::vector<double>& v) {
    for (auto& x : v) x = std::clamp(x, -kCap, kCap);
}

void project_ball(const RadialMesh& m, std::vector<double>& v, const std::optional<double>& rho) {
    if (!rho) return;
    const double n = hnorm(m, v);
    if (n > *rho)
        for (auto& x : v) x *= *rho / n;
}

bool normalize(const RadialMesh& m, std::vector<double>& v) {
    const double n = hnorm(m, v);
    if (!(n > 0.0)) return false;
    for (auto& x : v) x /= n;
    return true;
}

double target_tolerance(const RadialMesh& m, std::span<const double> v, const PathOptions& opt) {
    if (!opt.scale_tolerance) return opt.tolerance;
    return opt.tolerance * std::clamp(hnorm(m, v), 1e-12, 1.0);
}

std::vector<double> polyline_lengths(const RadialMesh& m, const std::vector<std::vector<double>>& pts) {
    std::vector<double> s(pts.size(), 0.0);
    std::vector<double> d(pts[0].size());
    for (std::size_t k = 1; k < pts.size(); ++k) {
        kernels::axpy(pts[k].data(), -1.0, pts[k - 1].data(), d.data(), d.size());
        s[k] = s[k - 1] + hnorm(m, d);
    }
    return s;
}

std::vector<std::vector<double>> resample(const RadialMesh& m, const std::vector<std::vector<double>>& pts,
                                          int P) {
    const auto s = polyline_lengths(m, pts);
    const double L = s.back();
    std::vector<std::vector<double>> out;
    out.push_back(pts.front());
    std::size_t seg = 1;
    for (int k = 1; k < P; ++k) {
        const double target = L * k / P;
        while (seg + 1 < pts.size() && s[seg] < target) ++seg;
        const double len = s[seg] - s[seg - 1];
        const double t = len > 0.0 ? std::clamp((target - s[seg - 1]) / len, 0.0, 1.0) : 0.0;
        std::vector<double> x(pts[0].size());
        for (std::size_t j = 0; j < x.size(); ++j) x[j] = (1.0 - t) * pts[seg - 1][j] + t * pts[seg][j];
        out.push_back(std::move(x));
    }
    out.push_back(pts.back());
    return out;
}

std::vector<double> tangent_at(const RadialMesh& m, const PathInState& path, std::size_t k) {
    const std::size_t lo = k == 0 ? 0 : k - 1;
    const std::size_t hi = std::min(k + 1, path.nodes.size() - 1);
    std::vector<double> e(path.nodes[0].size());
    kernels::axpy(path.nodes[hi].data(), -1.0, path.nodes[lo].data(), e.data(), e.size());
    normalize(m, e);
    return e;
}

// Descent steps with the path-tangential part of the gradient mapping removed, so the
// node moves off the path instead of sliding along it. Energy never increases.
void relax_across(const EnergyModel& model, std::vector<double>& v, const std::vector<double>& t, int steps,
                  const PathOptions& opt) {
    const auto& m = model.mesh();
    const std::size_t n = v.size();
    std::vector<double> G(n), x(n);
    double E = model.energy(v).total;
    for (int s = 0; s < steps; ++s) {
        model.gradient_mapping(v, opt.path_tau, G);
        const double gt = h_dot(m, G, t);
        for (std::size_t j = 0; j < n; ++j) G[j] -= gt * t[j];
        bool moved = false;
        for (double step = opt.path_tau; step > opt.path_tau * 1e-6; step *= 0.5) {
            for (std::size_t j = 0; j < n; ++j) x[j] = std::clamp(v[j] - step * G[j], -kCap, kCap);
            project_ball(m, x, opt.ball_radius);
            const double Ex = model.energy(x).total;
            if (Ex < E) {
                v.swap(x);
                E = Ex;
                moved = true;
                break;
            }
        }
        if (!moved) return;
    }
}

}  // namespace

void evaluate_path(const EnergyModel& model, PathInState& path) {
    path.energies.resize(path.nodes.size());
    path.max_index = 0;
    for (std::size_t k = 0; k < path.nodes.size(); ++k) {
        path.energies[k] = model.energy(path.nodes[k]).total;
        if (path.energies[k] > path.energies[path.max_index]) path.max_index = k;
    }
}

PathInState linear_path(const EnergyModel& model, std::span<const double> a, std::span<const double> b,
                        int P) {
    PathInState path;
    for (int k = 0; k <= P; ++k) {
        const double t = static_cast<double>(k) / P;
        std::vector<double> x(a.size());
        for (std::size_t j = 0; j < x.size(); ++j) x[j] = (1.0 - t) * a[j] + t * b[j];
        path.nodes.push_back(std::move(x));
    }
    evaluate_path(model, path);
    return path;
}

PathInState reparametrize(const EnergyModel& model, const PathInState& path, int P) {
    PathInState out;
    out.nodes = resample(model.mesh(), path.nodes, P);
    evaluate_path(model, out);
    return out;
}

SaddleResult refine_saddle(const EnergyModel& model, std::vector<double> x, std::vector<double> e,
                           const PathOptions& opt) {
    const auto& m = model.mesh();
    const std::size_t n = x.size();
    const double tau = opt.refine_tau;
    SaddleResult res;
    clamp_k(x);
    if (!normalize(m, e)) {
        e.assign(n, -1.0);
        normalize(m, e);
    }
    std::vector<double> G(n), Ge(n), Je(n), xe(n);
    double mu = -1.0;
    int it = 0;
    for (; it < opt.refine_iterations; ++it) {
        res.residual = model.gradient_mapping(x, tau, G);
        if (tau != 1.0) res.residual = model.criticality(x, 1.0);
        if (res.residual <= target_tolerance(m, x, opt)) {
            res.converged = true;
            break;
        }
        // finite-difference product with the gradient-mapping Jacobian
        const double delta = 1e-7 * std::max(hnorm(m, x), 1e-6);
        for (std::size_t j = 0; j < n; ++j) xe[j] = std::clamp(x[j] + delta * e[j], -kCap, kCap);
        model.gradient_mapping(xe, tau, Ge);
        for (std::size_t j = 0; j < n; ++j) Je[j] = (Ge[j] - G[j]) / delta;
        mu = h_dot(m, Je, e);
        // power step on (1/tau) I - J: pulls e toward the most negative direction
        for (std::size_t j = 0; j < n; ++j) e[j] = e[j] / tau - Je[j];
        normalize(m, e);

        const double ge = h_dot(m, G, e);
        double along = mu < 0.0 ? -ge / mu : ge * tau;
        const double cap = 0.1 * std::max(hnorm(m, x), 1e-3);
        along = std::clamp(along, -cap, cap);
        for (std::size_t j = 0; j < n; ++j) x[j] = x[j] - tau * (G[j] - ge * e[j]) + along * e[j];
        clamp_k(x);
        project_ball(m, x, opt.ball_radius);
    }
    res.iterations = it;
    res.curvature = mu;
    res.v = std::move(x);
    res.direction = std::move(e);
    return res;
}

CriticalPointCertificate mountain_pass(const EnergyModel& model, std::span<const double> a,
                                       std::span<const double> b, const PathOptions& opt,
                                       const PointSource& source, double floor, Classification cls,
                                       MountainPassTrace* trace_out, PathInState* initial_path) {
    const auto& m = model.mesh();
    MountainPassTrace trace;
    PathInState path;
    if (initial_path) {
        path = *initial_path;
        evaluate_path(model, path);
    } else {
        path = linear_path(model, a, b, opt.nodes);
    }
    const double end_max = std::max(path.energies.front(), path.energies.back());
    trace.initial_max = path.max_energy();
    trace.max_history.push_back(path.max_energy());
    bool collapsed = false;

    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
        const std::size_t k = path.max_index;
        if (k == 0 || k + 1 == path.nodes.size()) break;  // max at an endpoint: no interior barrier
        if (model.criticality(path.nodes[k]) <= opt.switch_residual) break;
        const double before = path.max_energy();
        const auto tk = tangent_at(m, path, k);
        relax_across(model, path.nodes[k], tk, opt.descent_steps, opt);
        if (k > 1) relax_across(model, path.nodes[k - 1], tangent_at(m, path, k - 1), opt.descent_steps / 2, opt);
        if (k + 2 < path.nodes.size())
            relax_across(model, path.nodes[k + 1], tangent_at(m, path, k + 1), opt.descent_steps / 2, opt);
        evaluate_path(model, path);
        auto rp = reparametrize(model, path, static_cast<int>(path.nodes.size()) - 1);
        if (rp.max_energy() <= path.max_energy()) path = std::move(rp);
        if (path.max_energy() > before) trace.monotone_max = false;
        trace.max_history.push_back(path.max_energy());
        trace.sweeps = sweep + 1;
        const std::size_t h = trace.max_history.size();
        if (h > static_cast<std::size_t>(opt.stall_sweeps)) {
            const double old = trace.max_history[h - 1 - opt.stall_sweeps];
            if (old - path.max_energy() <= opt.stall_decrease * std::fabs(old)) break;
        }
        if (path.max_energy() < end_max + opt.tolerance) {
            collapsed = true;
            break;
        }
    }
    trace.final_path_max = path.max_energy();

    const std::size_t k = path.max_index;
    auto sad = refine_saddle(model, path.nodes[k], tangent_at(m, path, k), opt);
    CertifyOptions co;
    co.tolerance = opt.tolerance;
    auto cert = certify(model, sad.v, cls, to_string(cls), source, co);
    cert.iterations = sad.iterations + trace.sweeps;
    if (!sad.converged) cert.status = SolveStatus::non_convergence;
    if (collapsed && !sad.converged) cert.status = SolveStatus::path_collapse;
    if (cert.energy.total < floor - opt.tolerance) cert.notes.emplace_back("energy below annulus floor");
    if (sad.curvature >= 0.0) cert.notes.emplace_back("no negative curvature along the climbing direction");
    if (trace_out) *trace_out = trace;
    return cert;
}

CriticalPointCertificate mountain_pass(const ProblemSpec& p, MeshPtr mesh, Branch branch,
                                       std::span<const double> endpoint_b, const PathOptions& opt,
                                       double floor) {
    EnergyModel model(std::move(mesh), p, branch);
    if (model.energy(endpoint_b).total > 0.0)
        throw std::invalid_argument("mountain_pass: endpoint energy must be <= 0");
    const auto th = compute_thresholds(p, model.mesh());
    if (std::sqrt(h_norm_sq(model.mesh(), endpoint_b)) <= th.rho_plus)
        throw std::invalid_argument("mountain_pass: endpoint must lie outside the rho_plus ball");
    std::vector<double> zero(model.size(), 0.0);
    return mountain_pass(model, zero, endpoint_b, opt, point_source(p), floor);
}

LowEnergyPath build_low_energy_path(const EnergyModel& full, std::span<const double> vp,
                                    std::span<const double> vm, double eps2, double rho, int P) {
    const auto& m = full.mesh();
    const std::size_t n = vp.size();
    LowEnergyPath out;
    const double np = hnorm(m, vp), nm = hnorm(m, vm);
    std::vector<double> e1(vp.begin(), vp.end());
    normalize(m, e1);
    std::vector<double> e2(vm.begin(), vm.end());
    const double c = h_dot(m, e2, e1);
    for (std::size_t j = 0; j < n; ++j) e2[j] -= c * e1[j];
    if (hnorm(m, e2) <= 1e-8 * nm) {
        // proportional endpoints: any plane through v+ will do
        out.degenerate_plane = true;
        const auto r = m.r();
        for (std::size_t j = 0; j < n; ++j) e2[j] = std::cos(M_PI * 0.5 * (r[j] + r[j + 1]) / m.radius());
        const double c2 = h_dot(m, e2, e1);
        for (std::size_t j = 0; j < n; ++j) e2[j] -= c2 * e1[j];
    }
    normalize(m, e2);
    const double phi_end = std::atan2(h_dot(m, vm, e2), h_dot(m, vm, e1));

    const int dense = 200;
    auto build = [&](double r2, std::vector<std::vector<double>>& pts, std::vector<double>& ts) {
        pts.clear();
        ts.clear();
        for (int k = 0; k <= dense; ++k) {
            const double t = 1.0 - (1.0 - r2 / np) * k / dense;
            std::vector<double> x(n);
            for (std::size_t j = 0; j < n; ++j) x[j] = t * vp[j];
            pts.push_back(std::move(x));
            ts.push_back(t);
        }
        for (int k = 1; k < dense; ++k) {
            const double phi = phi_end * k / dense;
            std::vector<double> x(n);
            for (std::size_t j = 0; j < n; ++j) x[j] = r2 * (std::cos(phi) * e1[j] + std::sin(phi) * e2[j]);
            pts.push_back(std::move(x));
            ts.push_back(1.0 + static_cast<double>(k) / dense);
        }
        for (int k = 0; k <= dense; ++k) {
            const double t = r2 / nm + (1.0 - r2 / nm) * k / dense;
            std::vector<double> x(n);
            for (std::size_t j = 0; j < n; ++j) x[j] = t * vm[j];
            pts.push_back(std::move(x));
            ts.push_back(2.0 + t);
        }
    };
    auto arc_max = [&](double r2) {
        double mx = -1e300;
        for (int k = 0; k <= dense; ++k) {
            const double phi = phi_end * k / dense;
            std::vector<double> x(n);
            for (std::size_t j = 0; j < n; ++j) x[j] = r2 * (std::cos(phi) * e1[j] + std::sin(phi) * e2[j]);
            mx = std::max(mx, full.energy(x).total);
        }
        return mx;
    };
    if (eps2 <= 0.0) {
        eps2 = 0.5 * std::min({rho, np, nm});
        for (int k = 0; k < 60 && arc_max(eps2) >= 0.0; ++k) eps2 *= 0.5;
    }
    out.eps2 = eps2;
    std::vector<std::vector<double>> pts;
    std::vector<double> ts;
    build(eps2, pts, ts);
    pts.front().assign(vp.begin(), vp.end());
    pts.back().assign(vm.begin(), vm.end());
    out.max_energy = -1e300;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const double E = full.energy(pts[k]).total;
        if (E > out.max_energy) {
            out.max_energy = E;
            out.offending_t = ts[k];
        }
    }
    if (out.max_energy >= 0.0) out.status = SolveStatus::positive_max;
    out.path.nodes = resample(m, pts, P);
    evaluate_path(full, out.path);
    return out;
}

SeventhResult find_seventh(const EnergyModel& full, std::span<const double> vp,
                           std::span<const double> vm, double rho, const PathOptions& opt_in,
                           const PointSource& source) {
    const auto& m = full.mesh();
    SeventhResult res;
    PathOptions opt = opt_in;
    opt.ball_radius = rho;
    res.path = build_low_energy_path(full, vp, vm, -1.0, rho, opt.nodes);
    res.cert = mountain_pass(full, vp, vm, opt, source, -1e300, Classification::seventh, &res.trace,
                             &res.path.path);
    if (res.path.status != SolveStatus::converged) res.cert.status = res.path.status;
    const double R = m.radius();
    auto up = reconstruct(m, vp), um = reconstruct(m, vm);
    const double Ep = full.energy(vp).total, Em = full.energy(vm).total;
    auto far = [&](const std::vector<double>& u, double E) {
        return linf_distance(res.cert.u, u) > 1e-4 * R && std::fabs(res.cert.energy.total - E) > 1e-8;
    };
    res.distinct_from_endpoints = far(up, Ep) && far(um, Em);
    std::vector<double> zero(up.size(), 0.0);
    res.distinct_from_zero = far(zero, 0.0);
    if (!res.distinct_from_endpoints && res.cert.status == SolveStatus::converged)
        res.cert.status = SolveStatus::degenerate_to_endpoint;
    res.cert.accepted = res.cert.accepted && res.cert.energy.total < 0.0 && res.distinct_from_endpoints &&
                        res.distinct_from_zero;
    return res;
}

}  // namespace lmcurv
