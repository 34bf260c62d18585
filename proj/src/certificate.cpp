#include "lmcurv/certificate.hpp"

#include <cmath>

#include "lmcurv/simd/kernels.hpp"

namespace lmcurv {

const char* to_string(Classification c) {
    switch (c) {
        case Classification::global_min: return "global-min";
        case Classification::local_min: return "local-min";
        case Classification::mountain_pass: return "mountain-pass";
        case Classification::seventh: return "seventh";
        case Classification::frozen_global_min: return "frozen-global-min";
        case Classification::frozen_mountain_pass: return "frozen-mountain-pass";
    }
    return "?";
}

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::non_convergence: return "non-convergence";
        case SolveStatus::ball_violation: return "ball-violation";
        case SolveStatus::path_collapse: return "path-collapse";
        case SolveStatus::degenerate_to_endpoint: return "degenerate-to-endpoint";
        case SolveStatus::positive_max: return "positive-max";
        case SolveStatus::not_applicable: return "not-applicable";
    }
    return "?";
}

namespace {

bool is_min(Classification c) {
    return c == Classification::global_min || c == Classification::local_min ||
           c == Classification::frozen_global_min;
}

// Energy along short steps in the tent directions and along -G must not drop.
bool descent_probe(const EnergyModel& model, std::span<const double> v, double energy) {
    const std::size_t n = v.size();
    const auto& mesh = model.mesh();
    const double scale = std::max(std::sqrt(h_norm_sq(mesh, v)), 1e-3);
    std::vector<std::vector<double>> dirs;
    dirs.emplace_back(n, -1.0);
    dirs.emplace_back(n, 1.0);
    std::vector<double> G(n);
    if (model.gradient_mapping(v, 1.0, G) > 0.0) {
        for (auto& x : G) x = -x;
        dirs.push_back(G);
    }
    std::vector<double> trial(n);
    for (auto& d : dirs) {
        const double dn = std::sqrt(h_norm_sq(mesh, d));
        if (dn == 0.0) continue;
        for (double t : {1e-2, 1e-3}) {
            const double s = t * scale / dn;
            bool inside = true;
            for (std::size_t j = 0; j < n; ++j) {
                trial[j] = v[j] + s * d[j];
                if (std::fabs(trial[j]) >= 1.0) inside = false;
            }
            if (!inside) continue;
            if (model.energy(trial).total < energy - 1e-14 * std::max(1.0, std::fabs(energy)))
                return false;
        }
    }
    return true;
}

}  // namespace

CriticalPointCertificate certify(const EnergyModel& model, std::span<const double> v,
                                 Classification cls, std::string name, const PointSource& source,
                                 const CertifyOptions& opt) {
    CriticalPointCertificate c;
    const auto& mesh = model.mesh();
    c.name = std::move(name);
    c.classification = cls;
    c.branch = model.branch();
    c.mesh = model.mesh_ptr();
    c.v.assign(v.begin(), v.end());
    c.u = reconstruct(mesh, v);
    c.energy = model.energy(v);
    c.h_norm = std::sqrt(h_norm_sq(mesh, v));
    c.criticality = model.criticality(v, 1.0);
    c.sup_slope = kernels::max_abs(v.data(), v.size());
    c.eps_margin = 1.0 - c.sup_slope;
    if (opt.weak_residual) {
        try {
            c.weak_residual = weak_residual(mesh, v, model.problem(), model.branch(), source);
        } catch (const SingularSlope&) {
            c.weak_residual_defined = false;
            c.weak_residual = std::numeric_limits<double>::infinity();
            c.notes.emplace_back("singular slope: weak residual undefined");
        }
    }
    if (c.branch == Branch::positive) {
        double lo = 0.0, hi = -1e300;
        for (double x : c.u) lo = std::min(lo, x);
        for (double x : c.v) hi = std::max(hi, x);
        c.sign_violation = lo;
        c.sign_ok = lo >= -1e-10;
        c.monotone_violation = std::max(hi, 0.0);
        c.monotone_ok = hi <= 1e-8;
    } else if (c.branch == Branch::negative) {
        double hi = 0.0, lo = 1e300;
        for (double x : c.u) hi = std::max(hi, x);
        for (double x : c.v) lo = std::min(lo, x);
        c.sign_violation = hi;
        c.sign_ok = hi <= 1e-10;
        c.monotone_violation = std::max(-lo, 0.0);
        c.monotone_ok = lo >= -1e-8;
    }
    if (is_min(cls)) c.descent_probe_ok = descent_probe(model, v, c.energy.total);
    c.accepted = c.criticality <= opt.tolerance && c.eps_margin > 0.0 && c.sign_ok &&
                 c.monotone_ok && c.descent_probe_ok;
    return c;
}

CriticalPointCertificate certify(const SlopeField& v, const ProblemSpec& p, Classification cls,
                                 const CertifyOptions& opt) {
    EnergyModel model(v.mesh_ptr(), p, p.branch);
    return certify(model, v.values(), cls, to_string(cls), point_source(p), opt);
}

double linf_distance(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
    return d;
}

bool distinct(const CriticalPointCertificate& a, const CriticalPointCertificate& b, double R) {
    return linf_distance(a.u, b.u) > 1e-4 * R &&
           std::fabs(a.energy.total - b.energy.total) > 1e-8;
}

}  // namespace lmcurv
