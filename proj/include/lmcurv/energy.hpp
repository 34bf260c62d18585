#pragma once
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lmcurv/problem.hpp"
#include "lmcurv/radial_mesh.hpp"

namespace lmcurv {

struct EnergyBreakdown {
    double psi = 0.0;
    double q_term = 0.0;
    double f_term = 0.0;
    double total = 0.0;
};

class SingularSlope : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Untruncated nonlinearity as seen at mesh nodes. Power families carry a
// per-node coefficient so a frozen gradient term stays closed form.
class NodeSource {
public:
    static NodeSource from_spec(const NonlinearitySpec& f, const RadialMesh& mesh);
    // f_i(s) = g(r_i, s, xi_i)
    static NodeSource frozen(const GradientTermSpec& g, const RadialMesh& mesh,
                             std::vector<double> xi_nodes);

    double value(std::size_t i, double s) const;
    double primitive(std::size_t i, double s) const;

private:
    bool power_ = true;
    double theta_ = 3.0;
    std::vector<double> a_plus_, a_minus_, r_;
    std::function<double(std::size_t, double)> f_, F_;
};

// Source used by the weak residual at arbitrary r inside cell k (untruncated).
using PointSource = std::function<double(double r, double s, std::size_t cell)>;

// I = Psi + F on one mesh for one branch.
class EnergyModel {
public:
    EnergyModel(MeshPtr mesh, const ProblemSpec& p, Branch branch);
    EnergyModel(MeshPtr mesh, const ProblemSpec& p, Branch branch, NodeSource source);

    const RadialMesh& mesh() const { return *mesh_; }
    const MeshPtr& mesh_ptr() const { return mesh_; }
    const ProblemSpec& problem() const { return p_; }
    Branch branch() const { return branch_; }
    std::size_t size() const { return mesh_->cells(); }

    EnergyBreakdown energy(std::span<const double> v) const;
    // Euclidean partials of the smooth part F with respect to v.
    EnergyBreakdown energy_grad(std::span<const double> v, std::span<double> grad) const;
    double smooth(std::span<const double> v) const;

    // (v - prox(v - tau * grad/w, tau)) / tau, returns its H-norm.
    double gradient_mapping(std::span<const double> v, double tau, std::span<double> out) const;
    double criticality(std::span<const double> v, double tau = 1.0) const;

    // Truncated source at node i: lambda b |u|^{q-2}u (branch part) + f^(u).
    double node_rhs(std::size_t i, double u) const;

private:
    void node_terms(std::span<const double> u, double& qsum, double& fsum,
                    std::vector<double>* loads) const;

    MeshPtr mesh_;
    ProblemSpec p_;
    Branch branch_;
    NodeSource src_;
    std::vector<double> b_;
};

double psi(const RadialMesh& mesh, std::span<const double> v);
double psi(const SlopeField& v);
EnergyBreakdown energy(const SlopeField& v, const ProblemSpec& p);
std::vector<double> grad_smooth(const SlopeField& v, const ProblemSpec& p);

// Scalar prox: argmin over |v| < 1 of (1 - sqrt(1 - v^2)) + (v - z)^2 / (2 tau).
double prox_scalar(double z, double tau);
// Optimality residual g(v) = v/sqrt(1-v^2) + (v - z)/tau in slope units, g(v)/g'(v).
// The raw g is dominated by rounding of v once |v| is close to 1.
double prox_optimality_residual(double v, double z, double tau);
void prox_psi(std::span<const double> z, double tau, std::span<double> out);
SlopeField prox_psi(MeshPtr mesh, std::span<const double> z, double tau);

double criticality_residual(const SlopeField& v, const ProblemSpec& p, double tau = 1.0);

// max over interior hat functions of |LHS - RHS| / ||phi||_H.
double weak_residual(const RadialMesh& mesh, std::span<const double> v, const ProblemSpec& p,
                     Branch branch, const PointSource& source);
double weak_residual(const SlopeField& v, const ProblemSpec& p);
PointSource point_source(const ProblemSpec& p);
// g(r, s, |v_k|) read from the slope field v itself (the full gradient equation)
// or from a frozen field omega.
PointSource point_source_gradient(const GradientTermSpec& g, std::vector<double> xi_cells);

// |omega'| at nodes: mean of adjacent cell magnitudes.
std::vector<double> node_slope_magnitude(const RadialMesh& mesh, std::span<const double> omega);

}  // namespace lmcurv
