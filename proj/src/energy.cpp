#include "lmcurv/energy.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>

#include "lmcurv/simd/kernels.hpp"

namespace lmcurv {

namespace {

constexpr double kSlopeCap = 1.0 - 1e-15;

// d/du of (1/q)|u^branch|^q, i.e. sign part of |u|^{q-2}u restricted to the branch.
double branch_power_derivative(double u, double q, Branch b) {
    if (u > 0.0 && b != Branch::negative) return std::pow(u, q - 1.0);
    if (u < 0.0 && b != Branch::positive) return -std::pow(-u, q - 1.0);
    return 0.0;
}

}  // namespace

NodeSource NodeSource::from_spec(const NonlinearitySpec& f, const RadialMesh& mesh) {
    NodeSource s;
    const std::size_t n = mesh.nodes();
    s.r_.assign(mesh.r().begin(), mesh.r().end());
    if (auto p = std::get_if<PurePower>(&f)) {
        s.theta_ = p->theta;
        s.a_plus_.assign(n, p->a);
        s.a_minus_.assign(n, p->a);
    } else if (auto p = std::get_if<AsymmetricPower>(&f)) {
        s.theta_ = p->theta;
        s.a_plus_.assign(n, p->a_plus);
        s.a_minus_.assign(n, p->a_minus);
    } else {
        s.power_ = false;
        auto r = s.r_;
        s.f_ = [f, r](std::size_t i, double x) { return nl_value(f, r[i], x); };
        s.F_ = [f, r](std::size_t i, double x) { return nl_primitive(f, r[i], x); };
    }
    return s;
}

NodeSource NodeSource::frozen(const GradientTermSpec& g, const RadialMesh& mesh,
                              std::vector<double> xi) {
    NodeSource s;
    const std::size_t n = mesh.nodes();
    s.r_.assign(mesh.r().begin(), mesh.r().end());
    if (auto p = std::get_if<PowerGradient>(&g)) {
        s.theta_ = p->theta;
        s.a_plus_.resize(n);
        for (std::size_t i = 0; i < n; ++i) s.a_plus_[i] = p->a * (1.0 + p->eta * xi[i]);
        s.a_minus_ = s.a_plus_;
    } else {
        s.power_ = false;
        auto r = s.r_;
        s.f_ = [g, r, xi](std::size_t i, double x) { return gt_value(g, r[i], x, xi[i]); };
        s.F_ = [g, r, xi](std::size_t i, double x) {
            if (x == 0.0) return 0.0;
            auto integrand = [&](double t) { return gt_value(g, r[i], t, xi[i]); };
            return boost::math::quadrature::gauss<double, 20>::integrate(integrand, 0.0, x);
        };
    }
    return s;
}

double NodeSource::value(std::size_t i, double s) const {
    if (!power_) return f_(i, s);
    if (s == 0.0) return 0.0;
    const double a = s > 0.0 ? a_plus_[i] : a_minus_[i];
    return a * std::copysign(std::pow(std::fabs(s), theta_ - 1.0), s);
}

double NodeSource::primitive(std::size_t i, double s) const {
    if (!power_) return F_(i, s);
    const double a = s >= 0.0 ? a_plus_[i] : a_minus_[i];
    return a * std::pow(std::fabs(s), theta_) / theta_;
}

EnergyModel::EnergyModel(MeshPtr mesh, const ProblemSpec& p, Branch branch)
    : EnergyModel(mesh, p, branch, NodeSource::from_spec(p.nonlinearity, *mesh)) {}

EnergyModel::EnergyModel(MeshPtr mesh, const ProblemSpec& p, Branch branch, NodeSource source)
    : mesh_(std::move(mesh)), p_(p), branch_(branch), src_(std::move(source)) {
    const auto r = mesh_->r();
    b_.resize(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) b_[i] = p_.weight_b.value(r[i], mesh_->radius());
}

double EnergyModel::node_rhs(std::size_t i, double u) const {
    const double R = mesh_->radius();
    const double fq = p_.lambda * b_[i] * branch_power_derivative(u, p_.q, branch_);
    const double ff = truncated_value([&](double s) { return src_.value(i, s); }, u, R, branch_);
    return fq + ff;
}

void EnergyModel::node_terms(std::span<const double> u, double& qsum, double& fsum,
                             std::vector<double>* loads) const {
    const auto om = mesh_->node_weights();
    const double R = mesh_->radius();
    const double q = p_.q;
    qsum = 0.0;
    fsum = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double x = u[i];
        double a = 0.0, sg = 0.0;
        if (x > 0.0 && branch_ != Branch::negative) {
            a = x;
            sg = 1.0;
        } else if (x < 0.0 && branch_ != Branch::positive) {
            a = -x;
            sg = -1.0;
        }
        double dq = 0.0;
        if (a > 0.0) {
            const double aq = std::pow(a, q);
            qsum += om[i] * b_[i] * aq;
            dq = sg * p_.lambda * b_[i] * aq / a;
        }
        double F = 0.0, f = 0.0;
        if (sg != 0.0) {
            if (a <= R) {
                F = src_.primitive(i, x);
                if (loads) f = src_.value(i, x);
            } else {
                auto fv = [&](double s) { return src_.value(i, s); };
                auto Fv = [&](double s) { return src_.primitive(i, s); };
                F = truncated_primitive(fv, Fv, x, R, branch_);
                if (loads) f = truncated_value(fv, x, R, branch_);
            }
        }
        fsum += om[i] * F;
        if (loads) (*loads)[i] = -om[i] * (dq + f);
    }
}

EnergyBreakdown EnergyModel::energy(std::span<const double> v) const {
    EnergyBreakdown e;
    const auto u = reconstruct(*mesh_, v);
    double qsum, fsum;
    node_terms(u, qsum, fsum, nullptr);
    e.psi = psi(*mesh_, v);
    e.q_term = p_.lambda / p_.q * qsum;
    e.f_term = fsum;
    e.total = e.psi - e.q_term - e.f_term;
    return e;
}

double EnergyModel::smooth(std::span<const double> v) const {
    const auto e = energy(v);
    return -e.q_term - e.f_term;
}

EnergyBreakdown EnergyModel::energy_grad(std::span<const double> v, std::span<double> grad) const {
    EnergyBreakdown e;
    const auto u = reconstruct(*mesh_, v);
    std::vector<double> loads(u.size());
    double qsum, fsum;
    node_terms(u, qsum, fsum, &loads);
    reconstruct_adjoint(*mesh_, loads, grad);
    e.psi = psi(*mesh_, v);
    e.q_term = p_.lambda / p_.q * qsum;
    e.f_term = fsum;
    e.total = e.psi - e.q_term - e.f_term;
    return e;
}

double EnergyModel::gradient_mapping(std::span<const double> v, double tau,
                                     std::span<double> out) const {
    const std::size_t n = v.size();
    std::vector<double> g(n), z(n);
    energy_grad(v, g);
    kernels::riesz_step(v.data(), g.data(), mesh_->cell_weights().data(), tau, z.data(), n);
    prox_psi(z, tau, z);
    kernels::axpy(v.data(), -1.0, z.data(), out.data(), n);
    for (auto& x : out) x /= tau;
    return std::sqrt(h_norm_sq(*mesh_, out));
}

double EnergyModel::criticality(std::span<const double> v, double tau) const {
    std::vector<double> G(v.size());
    return gradient_mapping(v, tau, G);
}

double psi(const RadialMesh& mesh, std::span<const double> v) {
    return kernels::psi_sum(mesh.cell_weights().data(), v.data(), v.size());
}

double psi(const SlopeField& v) { return psi(v.mesh(), v.values()); }

EnergyBreakdown energy(const SlopeField& v, const ProblemSpec& p) {
    return EnergyModel(v.mesh_ptr(), p, p.branch).energy(v.values());
}

std::vector<double> grad_smooth(const SlopeField& v, const ProblemSpec& p) {
    std::vector<double> g(v.size());
    EnergyModel(v.mesh_ptr(), p, p.branch).energy_grad(v.values(), g);
    return g;
}

double prox_scalar(double z, double tau) {
    if (z == 0.0) return 0.0;
    // Work in t = v / sqrt(1 - v^2): tau t + t / sqrt(1 + t^2) = z, strictly increasing.
    const double az = std::fabs(z);
    const double lo = std::max(0.0, (az - 1.0) / tau);
    const double hi = az / tau;
    if (!(lo < hi) || hi > 1e16) return std::copysign(kSlopeCap, z);
    const double guess = az < 1.0 ? az / (tau + 1.0) : std::clamp((az - 1.0) / tau + 1e-3, lo, hi);
    auto fn = [&](double t) {
        const double s = std::sqrt(1.0 + t * t);
        return std::make_pair(tau * t + t / s - az, tau + 1.0 / (s * s * s));
    };
    std::uintmax_t iters = 200;
    const double t = boost::math::tools::newton_raphson_iterate(
        fn, guess, lo, hi, std::numeric_limits<double>::digits - 2, iters);
    const double v = std::min(t / std::sqrt(1.0 + t * t), kSlopeCap);
    return std::copysign(v, z);
}

double prox_optimality_residual(double v, double z, double tau) {
    const long double lv = v;
    const long double c = (1.0L - lv) * (1.0L + lv);
    const long double g = lv / std::sqrt(c) + (lv - z) / tau;
    const long double dg = 1.0L / (c * std::sqrt(c)) + 1.0L / tau;
    return static_cast<double>(g / dg);
}

void prox_psi(std::span<const double> z, double tau, std::span<double> out) {
    for (std::size_t j = 0; j < z.size(); ++j) out[j] = prox_scalar(z[j], tau);
}

SlopeField prox_psi(MeshPtr mesh, std::span<const double> z, double tau) {
    std::vector<double> v(z.size());
    prox_psi(z, tau, v);
    return SlopeField(std::move(mesh), std::move(v));
}

double criticality_residual(const SlopeField& v, const ProblemSpec& p, double tau) {
    return EnergyModel(v.mesh_ptr(), p, p.branch).criticality(v.values(), tau);
}

PointSource point_source(const ProblemSpec& p) {
    auto f = p.nonlinearity;
    return [f](double r, double s, std::size_t) { return nl_value(f, r, s); };
}

PointSource point_source_gradient(const GradientTermSpec& g, std::vector<double> xi_cells) {
    return [g, xi = std::move(xi_cells)](double r, double s, std::size_t k) {
        return gt_value(g, r, s, xi[k]);
    };
}

double weak_residual(const RadialMesh& mesh, std::span<const double> v, const ProblemSpec& p,
                     Branch branch, const PointSource& source) {
    if (kernels::max_abs(v.data(), v.size()) >= 1.0 - 1e-10)
        throw SingularSlope("weak residual: sup|v| >= 1 - 1e-10");
    const auto u = reconstruct(mesh, v);
    const auto r = mesh.r();
    const auto h = mesh.h();
    const auto w = mesh.cell_weights();
    const int N = mesh.dim();
    const double R = mesh.radius();
    const std::size_t M = mesh.cells();

    std::vector<double> flux(M);
    for (std::size_t k = 0; k < M; ++k) flux[k] = w[k] * v[k] / std::sqrt((1.0 - v[k]) * (1.0 + v[k]));

    auto rhs_density = [&](double x, std::size_t k) {
        const double t = (x - r[k]) / h[k];
        const double ux = u[k] + t * (u[k + 1] - u[k]);
        const double fq = p.lambda * p.weight_b.value(x, R) * branch_power_derivative(ux, p.q, branch);
        const double ff = truncated_value([&](double s) { return source(x, s, k); }, ux, R, branch);
        return std::pow(x, N - 1) * (fq + ff);
    };

    using GL = boost::math::quadrature::gauss<double, 7>;
    double worst = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
        double lhs = 0.0, rhs = 0.0, nrm = 0.0;
        if (i > 0) {
            const std::size_t k = i - 1;
            lhs += flux[k] / h[k];
            nrm += w[k] / (h[k] * h[k]);
            rhs += GL::integrate([&](double x) { return rhs_density(x, k) * (x - r[k]) / h[k]; },
                                 r[k], r[k + 1]);
        }
        lhs -= flux[i] / h[i];
        nrm += w[i] / (h[i] * h[i]);
        rhs += GL::integrate([&](double x) { return rhs_density(x, i) * (r[i + 1] - x) / h[i]; },
                             r[i], r[i + 1]);
        worst = std::max(worst, std::fabs(lhs - rhs) / std::sqrt(nrm));
    }
    return worst;
}

double weak_residual(const SlopeField& v, const ProblemSpec& p) {
    return weak_residual(v.mesh(), v.values(), p, p.branch, point_source(p));
}

std::vector<double> node_slope_magnitude(const RadialMesh& mesh, std::span<const double> omega) {
    const std::size_t M = mesh.cells();
    std::vector<double> xi(M + 1);
    xi[0] = std::fabs(omega[0]);
    xi[M] = std::fabs(omega[M - 1]);
    for (std::size_t i = 1; i < M; ++i) xi[i] = 0.5 * (std::fabs(omega[i - 1]) + std::fabs(omega[i]));
    return xi;
}

}  // namespace lmcurv
