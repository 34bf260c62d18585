#include "doctest.h"

#include <cmath>

#include "lmcurv/mountain_pass.hpp"
#include "lmcurv/thresholds.hpp"

using namespace lmcurv;

namespace {

ProblemSpec desk(double lambda) {
    ProblemSpec p;
    p.lambda = lambda;
    p.nonlinearity = PurePower{1120.0, 5.0};
    return p;
}

double hdist(const RadialMesh& m, const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> d(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) d[j] = a[j] - b[j];
    return std::sqrt(h_norm_sq(m, d));
}

struct Fixture {
    MeshPtr mesh = build_mesh(3, 1.0, 200);
    ProblemSpec p = desk(0.5);
    ThresholdReport th = compute_thresholds(p, *mesh);
    EnergyModel pos{mesh, p, Branch::positive};
    EnergyModel neg{mesh, p, Branch::negative};
    EnergyModel full{mesh, p, Branch::full};
    PointSource src = point_source(p);
};

}  // namespace

TEST_CASE("linear path and equal-length reparametrization") {
    Fixture f;
    std::vector<double> a(200, 0.0), b(200, 0.5);
    b[0] = 0.9;
    auto path = linear_path(f.pos, a, b, 16);
    REQUIRE(path.nodes.size() == 17);
    CHECK(path.energies.front() == 0.0);
    path.nodes[3][5] += 0.3;
    auto rp = reparametrize(f.pos, path, 16);
    CHECK(rp.nodes.front() == path.nodes.front());
    CHECK(rp.nodes.back() == path.nodes.back());
    const double d0 = hdist(*f.mesh, rp.nodes[0], rp.nodes[1]);
    for (std::size_t k = 1; k + 1 < rp.nodes.size(); ++k)
        CHECK(hdist(*f.mesh, rp.nodes[k], rp.nodes[k + 1]) == doctest::Approx(d0).epsilon(1e-6));
}

TEST_CASE("initial path crosses the sphere above the floor") {
    Fixture f;
    SolveOptions o;
    auto up = minimize(f.pos, o, f.src);
    const double n = std::sqrt(h_norm_sq(*f.mesh, up.v));
    for (double rho : {f.th.rho_minus, 0.5 * (f.th.rho_minus + f.th.rho_plus), f.th.rho_plus}) {
        std::vector<double> x(up.v);
        for (auto& s : x) s *= rho / n;
        CHECK(f.pos.energy(x).total >= f.th.mp_floor);
    }
}

TEST_CASE("mountain pass on the positive branch, mirrored on the negative") {
    Fixture f;
    SolveOptions o;
    auto up = minimize(f.pos, o, f.src);
    auto um = minimize(f.neg, o, f.src);
    std::vector<double> zero(200, 0.0);
    PathOptions po;
    MountainPassTrace tr;
    auto wp = mountain_pass(f.pos, zero, up.v, po, f.src, f.th.mp_floor, Classification::mountain_pass, &tr);
    CHECK(wp.accepted);
    CHECK(wp.status == SolveStatus::converged);
    CHECK(wp.energy.total >= f.th.mp_floor);
    CHECK(tr.monotone_max);
    for (std::size_t k = 1; k < tr.max_history.size(); ++k) CHECK(tr.max_history[k] <= tr.max_history[k - 1]);
    CHECK(tr.final_path_max <= tr.initial_max);
    CHECK(wp.energy.total <= tr.initial_max);
    CHECK(wp.u[0] > 0.0);

    auto wm = mountain_pass(f.neg, zero, um.v, po, f.src, f.th.mp_floor);
    CHECK(wm.accepted);
    CHECK(wm.energy.total == doctest::Approx(wp.energy.total).epsilon(1e-8));
    CHECK(linf_distance(wm.u, std::vector<double>(wp.u.begin(), wp.u.end())) > 0.1);
    std::vector<double> mirrored(wp.u.size());
    for (std::size_t j = 0; j < mirrored.size(); ++j) mirrored[j] = -wp.u[j];
    CHECK(linf_distance(wm.u, mirrored) < 1e-6);
}

TEST_CASE("low-energy path stays below zero: degenerate plane for odd f") {
    Fixture f;
    SolveOptions o;
    auto vp = minimize_in_ball(f.pos, f.th.rho_plus, o, f.src);
    auto vm = minimize_in_ball(f.neg, f.th.rho_plus, o, f.src);
    auto lp = build_low_energy_path(f.full, vp.v, vm.v, -1.0, f.th.rho_plus, 32);
    CHECK(lp.degenerate_plane);
    CHECK(lp.status == SolveStatus::converged);
    CHECK(lp.max_energy < 0.0);
    CHECK(lp.eps2 <= 0.5 * f.th.rho_plus);
    CHECK(lp.path.nodes.size() == 33);
    CHECK(lp.path.nodes.front() == vp.v);
    CHECK(lp.path.nodes.back() == vm.v);
    for (double e : lp.path.energies) CHECK(e < 0.0);
}

TEST_CASE("low-energy path with a genuine plane") {
    auto mesh = build_mesh(3, 1.0, 200);
    ProblemSpec p = desk(0.5);
    p.nonlinearity = AsymmetricPower{1120.0, 800.0, 5.0};
    auto th = compute_thresholds(p, *mesh);
    EnergyModel pos(mesh, p, Branch::positive), neg(mesh, p, Branch::negative), full(mesh, p, Branch::full);
    SolveOptions o;
    auto vp = minimize_in_ball(pos, th.rho_plus, o, point_source(p));
    auto vm = minimize_in_ball(neg, th.rho_plus, o, point_source(p));
    auto lp = build_low_energy_path(full, vp.v, vm.v, -1.0, th.rho_plus, 32);
    CHECK_FALSE(lp.degenerate_plane);
    CHECK(lp.max_energy < 0.0);
}

TEST_CASE("a too-large arc radius is reported") {
    Fixture f;
    SolveOptions o;
    auto vp = minimize_in_ball(f.pos, f.th.rho_plus, o, f.src);
    auto vm = minimize_in_ball(f.neg, f.th.rho_plus, o, f.src);
    auto lp = build_low_energy_path(f.full, vp.v, vm.v, 0.3, f.th.rho_plus, 32);
    CHECK(lp.status == SolveStatus::positive_max);
    CHECK(lp.max_energy >= 0.0);
    CHECK(lp.offending_t > 1.0);
    CHECK(lp.offending_t < 2.0);
}

TEST_CASE("seventh solution changes sign and differs from the endpoints") {
    Fixture f;
    SolveOptions o;
    auto vp = minimize_in_ball(f.pos, f.th.rho_plus, o, f.src);
    auto vm = minimize_in_ball(f.neg, f.th.rho_plus, o, f.src);
    PathOptions po;
    auto s = find_seventh(f.full, vp.v, vm.v, f.th.rho_plus, po, f.src);
    CHECK(s.cert.accepted);
    CHECK(s.cert.status == SolveStatus::converged);
    CHECK(s.distinct_from_endpoints);
    CHECK(s.distinct_from_zero);
    CHECK(s.cert.energy.total < 0.0);
    CHECK(s.cert.energy.total > vp.energy.total);
    CHECK(s.cert.h_norm <= f.th.rho_plus * (1 + 1e-12));
    const auto [lo, hi] = std::minmax_element(s.cert.u.begin(), s.cert.u.end());
    CHECK(*lo < 0.0);
    CHECK(*hi > 0.0);
}

TEST_CASE("spec-level entry checks its endpoint") {
    Fixture f;
    std::vector<double> small(200, 1e-4);
    PathOptions po;
    CHECK_THROWS_AS(mountain_pass(f.p, f.mesh, Branch::positive, small, po, f.th.mp_floor), std::invalid_argument);
    SolveOptions o;
    auto up = minimize(f.pos, o, f.src);
    auto w = mountain_pass(f.p, f.mesh, Branch::positive, up.v, po, f.th.mp_floor);
    CHECK(w.accepted);
}
