#include "lmcurv/radial_mesh.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "lmcurv/simd/kernels.hpp"

namespace lmcurv {

namespace {

double power_integral(double a, double b, int k) {
    // integral of r^{k-1} over [a,b], k >= 1
    return (std::pow(b, k) - std::pow(a, k)) / k;
}

}  // namespace

RadialMesh::RadialMesh(int N, double R, std::size_t M, Grading grading, double gamma)
    : N_(N), R_(R), grading_(grading), gamma_(gamma) {
    if (N < 3) throw std::invalid_argument("mesh: dimension N must be >= 3, got " + std::to_string(N));
    if (!(R > 0.0) || !std::isfinite(R)) throw std::invalid_argument("mesh: radius must be positive");
    if (M < 1) throw std::invalid_argument("mesh: need at least one cell");
    if (grading == Grading::graded && !(gamma > 0.0))
        throw std::invalid_argument("mesh: grading exponent must be positive");

    r_.resize(M + 1);
    for (std::size_t j = 0; j <= M; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(M);
        r_[j] = grading == Grading::uniform ? R * t : R * std::pow(t, gamma);
    }
    r_[M] = R;

    h_.resize(M);
    w_.resize(M);
    for (std::size_t j = 0; j < M; ++j) {
        h_[j] = r_[j + 1] - r_[j];
        if (!(h_[j] > 0.0)) throw std::invalid_argument("mesh: nodes not strictly increasing");
        w_[j] = power_integral(r_[j], r_[j + 1], N);
    }

    omega_.resize(M + 1);
    hardy_.resize(M + 1);
    for (std::size_t i = 0; i <= M; ++i) {
        const double a = i == 0 ? 0.0 : 0.5 * (r_[i - 1] + r_[i]);
        const double b = i == M ? R : 0.5 * (r_[i] + r_[i + 1]);
        omega_[i] = power_integral(a, b, N);
        hardy_[i] = N == 3 ? b - a : power_integral(a, b, N - 2);
    }
}

MeshPtr build_mesh(int N, double R, std::size_t M, Grading grading, double gamma) {
    return std::make_shared<const RadialMesh>(N, R, M, grading, gamma);
}

std::vector<double> reconstruct(const RadialMesh& mesh, std::span<const double> v) {
    const std::size_t M = mesh.cells();
    if (v.size() != M) throw std::invalid_argument("reconstruct: slope count does not match mesh");
    std::vector<double> u(M + 1, 0.0);
    const auto h = mesh.h();
    for (std::size_t j = M; j-- > 0;) u[j] = u[j + 1] - v[j] * h[j];
    return u;
}

void reconstruct_adjoint(const RadialMesh& mesh, std::span<const double> loads,
                         std::span<double> out) {
    const auto h = mesh.h();
    double acc = 0.0;
    for (std::size_t j = 0; j < mesh.cells(); ++j) {
        acc += loads[j];
        out[j] = -h[j] * acc;
    }
}

double h_norm_sq(const RadialMesh& mesh, std::span<const double> v) {
    return kernels::weighted_dot(mesh.cell_weights().data(), v.data(), v.data(), v.size());
}

double h_dot(const RadialMesh& mesh, std::span<const double> a, std::span<const double> b) {
    return kernels::weighted_dot(mesh.cell_weights().data(), a.data(), b.data(), a.size());
}

double lp_norm(const RadialMesh& mesh, std::span<const double> u, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
    const auto om = mesh.node_weights();
    double s = 0.0;
    if (p == 2.0) {
        for (std::size_t i = 0; i < u.size(); ++i) s += om[i] * u[i] * u[i];
        return std::sqrt(s);
    }
    for (std::size_t i = 0; i < u.size(); ++i) s += om[i] * std::pow(std::fabs(u[i]), p);
    return std::pow(s, 1.0 / p);
}

std::vector<double> slopes_from_profile(const RadialMesh& mesh, std::span<const double> u) {
    std::vector<double> v(mesh.cells());
    const auto h = mesh.h();
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = (u[j + 1] - u[j]) / h[j];
    return v;
}

SlopeField::SlopeField(MeshPtr mesh, std::vector<double> v) : mesh_(std::move(mesh)), v_(std::move(v)) {
    if (!mesh_) throw std::invalid_argument("slope field: null mesh");
    if (v_.size() != mesh_->cells())
        throw std::invalid_argument("slope field: size does not match mesh cells");
    for (double x : v_)
        if (!(std::fabs(x) <= 1.0)) throw std::invalid_argument("slope field: |v| > 1 or NaN");
}

SlopeField SlopeField::zero(MeshPtr mesh) { return constant(std::move(mesh), 0.0); }

SlopeField SlopeField::constant(MeshPtr mesh, double c) {
    const std::size_t M = mesh->cells();
    return SlopeField(std::move(mesh), std::vector<double>(M, c));
}

RadialProfile reconstruct(const SlopeField& v) {
    return RadialProfile{v.mesh_ptr(), reconstruct(v.mesh(), v.values())};
}

double h_norm_sq(const SlopeField& v) { return h_norm_sq(v.mesh(), v.values()); }

}  // namespace lmcurv
