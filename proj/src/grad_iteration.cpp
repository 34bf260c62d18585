#include "lmcurv/grad_iteration.hpp"

#include <cmath>
#include <stdexcept>

#include "lmcurv/thresholds.hpp"

namespace lmcurv {

const char* to_string(IterationMode m) {
    return m == IterationMode::global_min ? "global-min" : "mountain-pass";
}

IterationMode iteration_mode_from_string(const std::string& s) {
    if (s == "global-min") return IterationMode::global_min;
    if (s == "mountain-pass") return IterationMode::mountain_pass;
    throw std::invalid_argument("unknown iteration mode: " + s);
}

namespace {

std::vector<double> abs_cells(std::span<const double> v) {
    std::vector<double> a(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) a[j] = std::fabs(v[j]);
    return a;
}

}  // namespace

CriticalPointCertificate solve_frozen(const ProblemSpec& p, MeshPtr mesh, std::span<const double> omega,
                                      Branch branch, IterationMode mode, const FrozenOptions& opt,
                                      const std::vector<double>* warm) {
    if (!p.gradient_term) throw std::invalid_argument("problem.gradient_term: required for the frozen solve");
    const auto& g = *p.gradient_term;
    const RadialMesh& m = *mesh;
    EnergyModel model(mesh, p, branch, NodeSource::frozen(g, m, node_slope_magnitude(m, omega)));
    const auto source = point_source_gradient(g, abs_cells(omega));

    CriticalPointCertificate cmin;
    if (warm && mode == IterationMode::global_min) {
        auto d = descend(model, *warm, opt.solve);
        auto fresh = minimize(model, opt.solve, source);
        // keep the warm continuation unless a fresh search finds lower energy
        if (d.energy.total <= fresh.energy.total + 1e-12 * std::fabs(fresh.energy.total)) {
            cmin = certify(model, d.v, Classification::frozen_global_min, "frozen-global-min", source,
                           {opt.solve.tolerance, true});
            cmin.iterations = d.iterations;
            if (!d.converged) cmin.status = SolveStatus::non_convergence;
        } else {
            cmin = std::move(fresh);
        }
    } else {
        cmin = minimize(model, opt.solve, source);
    }
    cmin.classification = Classification::frozen_global_min;
    cmin.name = "frozen-global-min";
    if (mode == IterationMode::global_min) return cmin;

    std::vector<double> zero(model.size(), 0.0);
    PathOptions po = opt.path;
    po.tolerance = opt.solve.tolerance;
    auto w = mountain_pass(model, zero, cmin.v, po, source, opt.mp_floor, Classification::frozen_mountain_pass);
    w.name = "frozen-mountain-pass";
    return w;
}

std::vector<double> default_omega0(const RadialMesh& mesh, Branch branch) {
    return std::vector<double>(mesh.cells(), branch == Branch::negative ? 0.5 : -0.5);
}

IterationTrace iterate(const ProblemSpec& p, MeshPtr mesh, Branch branch, IterationMode mode,
                       std::optional<std::vector<double>> omega0, const IterationOptions& opt_in) {
    if (!p.gradient_term) throw std::invalid_argument("problem.gradient_term: required for iterate");
    const RadialMesh& m = *mesh;
    IterationOptions opt = opt_in;
    opt.frozen.solve.tolerance = std::min(opt.frozen.solve.tolerance, opt.tolerance / 10.0);

    const auto th = compute_thresholds(p, m);
    IterationTrace tr;
    tr.mode = mode;
    tr.branch = branch;
    tr.k_predicted = th.k;
    tr.k_valid = th.k_valid;
    tr.norm_floor = opt.norm_floor > 0.0 ? opt.norm_floor : 1e-3 * th.rho_minus;
    tr.min_norm = INFINITY;
    if (mode == IterationMode::mountain_pass && opt.frozen.mp_floor == 0.0) opt.frozen.mp_floor = th.mp_floor;

    std::vector<double> omega = omega0 ? *omega0 : default_omega0(m, branch);
    std::vector<double> prev;
    int above_one = 0;
    for (int n = 0; n < opt.max_iterations; ++n) {
        IterationStep step;
        step.cert = solve_frozen(p, mesh, omega, branch, mode, opt.frozen, prev.empty() ? nullptr : &prev);
        std::vector<double> d(omega.size());
        const auto& base = prev.empty() ? omega : prev;
        for (std::size_t j = 0; j < d.size(); ++j) d[j] = step.cert.v[j] - base[j];
        step.increment = std::sqrt(h_norm_sq(m, d));
        if (!tr.steps.empty() && tr.steps.back().increment > 0.0)
            step.ratio = step.increment / tr.steps.back().increment;
        tr.min_norm = std::min(tr.min_norm, step.cert.h_norm);
        if (n >= opt.burn_in) tr.k_hat = std::max(tr.k_hat, step.ratio);
        above_one = step.ratio > 1.0 ? above_one + 1 : 0;
        prev = step.cert.v;
        omega = step.cert.v;
        tr.steps.push_back(std::move(step));
        if (tr.steps.back().increment <= opt.tolerance && n > 0) {
            tr.converged = true;
            break;
        }
        if (above_one >= opt.non_contraction_run) {
            tr.non_contraction = true;
            break;
        }
    }

    const auto& last = tr.steps.back().cert;
    EnergyModel full(mesh, p, branch, NodeSource::frozen(*p.gradient_term, m, node_slope_magnitude(m, last.v)));
    const auto source = point_source_gradient(*p.gradient_term, abs_cells(last.v));
    const Classification cls =
        mode == IterationMode::global_min ? Classification::frozen_global_min : Classification::frozen_mountain_pass;
    tr.final = certify(full, last.v, cls, std::string("iterate-") + to_string(mode) + "-" + to_string(branch),
                       source, {opt.tolerance, true});
    tr.final.iterations = static_cast<int>(tr.steps.size());
    if (!tr.converged) tr.final.status = SolveStatus::non_convergence;
    if (tr.final.weak_residual_defined) tr.final_weak_residual = tr.final.weak_residual;
    else tr.final_weak_residual = INFINITY;
    return tr;
}

}  // namespace lmcurv
