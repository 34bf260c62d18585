#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lmcurv/energy.hpp"
#include "lmcurv/minimizers.hpp"
#include "lmcurv/shooting.hpp"

using namespace lmcurv;

namespace {

ProblemSpec desk(double lambda) {
    ProblemSpec p;
    p.lambda = lambda;
    p.nonlinearity = PurePower{1120.0, 5.0};
    return p;
}

}  // namespace

TEST_CASE("zero height stays at zero") {
    auto m = build_mesh(3, 1.0, 100);
    auto r = shoot(desk(0.5), Branch::positive, 0.0, *m);
    CHECK(r.reached_R);
    CHECK(r.terminal == 0.0);
    for (double u : r.u) CHECK(u == 0.0);
}

TEST_CASE("slope stays inside (-1,1) and the flux obeys its bound") {
    auto m = build_mesh(3, 1.0, 200);
    auto p = desk(0.5);
    for (double s : {0.01, 0.2, 0.5, 0.9, 0.999, 1.0}) {
        auto rec = shoot(p, Branch::positive, s, *m);
        CHECK_FALSE(rec.step_failure);
        for (std::size_t i = 0; i < rec.r.size(); ++i) {
            CHECK(std::fabs(rec.du[i]) < 1.0);
            if (rec.touch_r < 0.0 || rec.r[i] <= rec.touch_r)
                CHECK(std::fabs(rec.h[i]) <= rec.source_sup * std::pow(rec.r[i], 3) / 3.0 * (1 + 1e-6) + 1e-14);
        }
    }
}

TEST_CASE("the series start agrees with a direct integration near the origin") {
    auto m = build_mesh(3, 1.0, 200);
    ShootingOptions a, b;
    b.start_fraction = 1e-4;
    auto ra = shoot(desk(0.5), Branch::positive, 0.4, *m, a);
    auto rb = shoot(desk(0.5), Branch::positive, 0.4, *m, b);
    CHECK(ra.terminal == doctest::Approx(rb.terminal).epsilon(1e-7));
}

TEST_CASE("desk scan finds three positive roots, each decreasing with a small weak residual") {
    auto m = build_mesh(3, 1.0, 1000);
    auto p = desk(0.5);
    auto scan = scan_and_count(p, Branch::positive, *m);
    REQUIRE(scan.roots.size() == 3);
    CHECK(scan.skipped == 0);
    for (const auto& root : scan.roots) {
        CHECK(root.tolerance_met);
        CHECK(std::fabs(root.record.terminal) <= 1e-10);
        for (std::size_t i = 1; i < root.record.du.size(); ++i) CHECK(root.record.du[i] < 0.0);
        auto v = slopes_from_profile(*m, root.record.u);
        CHECK(weak_residual(*m, v, p, Branch::positive, point_source(p)) < 1e-3);
    }
    for (std::size_t k = 1; k < 3; ++k) CHECK(scan.roots[k].s - scan.roots[k - 1].s > 1e-6);
}

TEST_CASE("shooting roots agree with the variational minimizers") {
    auto m = build_mesh(3, 1.0, 400);
    auto p = desk(0.5);
    EnergyModel model(m, p, Branch::positive);
    SolveOptions o;
    auto up = minimize(model, o, point_source(p));
    auto scan = scan_and_count(p, Branch::positive, *m);
    REQUIRE_FALSE(scan.roots.empty());
    CHECK(linf_distance(scan.roots.back().record.u, up.u) < 1e-2);
}

TEST_CASE("odd f: negative roots mirror positive roots") {
    auto m = build_mesh(3, 1.0, 300);
    auto p = desk(0.4);
    ScanOptions so;
    so.grid = 256;
    auto pos = scan_and_count(p, Branch::positive, *m, so);
    auto neg = scan_and_count(p, Branch::negative, *m, so);
    REQUIRE(pos.roots.size() == neg.roots.size());
    const std::size_t n = pos.roots.size();
    for (std::size_t k = 0; k < n; ++k) {
        const auto& a = pos.roots[k];
        const auto& b = neg.roots[n - 1 - k];
        CHECK(b.s == doctest::Approx(-a.s).epsilon(1e-8));
        for (std::size_t i = 0; i < a.record.u.size(); i += 10)
            CHECK(b.record.u[i] == doctest::Approx(-a.record.u[i]).epsilon(1e-6).scale(1e-9));
    }
}

TEST_CASE("no source, no roots") {
    auto m = build_mesh(3, 1.0, 100);
    ProblemSpec p;
    p.lambda = 0.0;
    p.nonlinearity = PurePower{0.0, 5.0};
    auto scan = scan_and_count(p, Branch::positive, *m);
    CHECK(scan.roots.empty());
    for (double T : scan.T) CHECK(T > 0.0);
}

TEST_CASE("scan grid mixes log and linear spacing") {
    ScanOptions so;
    auto g = scan_grid(2.0, Branch::positive, so);
    CHECK(g.size() >= 500);
    CHECK(g.front() == doctest::Approx(2e-10));
    CHECK(g.back() == doctest::Approx(2.0));
    CHECK(std::is_sorted(g.begin(), g.end()));
    auto gf = scan_grid(2.0, Branch::full, so);
    CHECK(gf.size() == 2 * g.size());
    CHECK(gf.front() == doctest::Approx(-2.0));
}
