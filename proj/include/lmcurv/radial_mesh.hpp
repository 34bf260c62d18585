#pragma once
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace lmcurv {

enum class Grading { uniform, graded };

// Radial grid on [0,R] with exact r^{N-1} cell and dual-cell weights.
// Cell j (0-based) spans [r_j, r_{j+1}].
class RadialMesh {
public:
    RadialMesh(int N, double R, std::size_t M, Grading grading = Grading::uniform,
               double gamma = 1.0);

    int dim() const { return N_; }
    double radius() const { return R_; }
    std::size_t cells() const { return h_.size(); }
    std::size_t nodes() const { return r_.size(); }
    Grading grading() const { return grading_; }
    double gamma() const { return gamma_; }

    std::span<const double> r() const { return r_; }
    std::span<const double> h() const { return h_; }
    // w_j = (r_{j+1}^N - r_j^N)/N
    std::span<const double> cell_weights() const { return w_; }
    // omega_i = integral of r^{N-1} over the dual cell of node i
    std::span<const double> node_weights() const { return omega_; }
    // integral of r^{N-3} over the dual cell of node i (Hardy companion)
    std::span<const double> hardy_weights() const { return hardy_; }

private:
    int N_;
    double R_;
    Grading grading_;
    double gamma_;
    std::vector<double> r_, h_, w_, omega_, hardy_;
};

using MeshPtr = std::shared_ptr<const RadialMesh>;

MeshPtr build_mesh(int N, double R, std::size_t M, Grading grading = Grading::uniform,
                   double gamma = 1.0);

// u_M = 0, u_j = u_{j+1} - v_j h_j
std::vector<double> reconstruct(const RadialMesh& mesh, std::span<const double> v);
// Adjoint of reconstruct: out_j = -h_j * sum_{i<=j} loads_i
void reconstruct_adjoint(const RadialMesh& mesh, std::span<const double> loads,
                         std::span<double> out);

double h_norm_sq(const RadialMesh& mesh, std::span<const double> v);
double h_dot(const RadialMesh& mesh, std::span<const double> a, std::span<const double> b);
double lp_norm(const RadialMesh& mesh, std::span<const double> u, double p);

// Slope values sampled from a profile given at the nodes.
std::vector<double> slopes_from_profile(const RadialMesh& mesh, std::span<const double> u);

// Per-cell slopes of the given function u(r) (exact differences at nodes).
template <class F>
std::vector<double> slopes_of(const RadialMesh& mesh, F&& u) {
    std::vector<double> un(mesh.nodes());
    for (std::size_t i = 0; i < un.size(); ++i) un[i] = u(mesh.r()[i]);
    return slopes_from_profile(mesh, un);
}

// Validated slope vector bound to a mesh; |v_j| <= 1.
class SlopeField {
public:
    SlopeField(MeshPtr mesh, std::vector<double> v);
    static SlopeField zero(MeshPtr mesh);
    static SlopeField constant(MeshPtr mesh, double c);

    const RadialMesh& mesh() const { return *mesh_; }
    const MeshPtr& mesh_ptr() const { return mesh_; }
    std::span<const double> values() const { return v_; }
    std::size_t size() const { return v_.size(); }
    double operator[](std::size_t j) const { return v_[j]; }

private:
    MeshPtr mesh_;
    std::vector<double> v_;
};

struct RadialProfile {
    MeshPtr mesh;
    std::vector<double> u;
};

RadialProfile reconstruct(const SlopeField& v);
double h_norm_sq(const SlopeField& v);

}  // namespace lmcurv
