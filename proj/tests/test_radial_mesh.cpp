#include <doctest.h>

#include <cmath>
#include <random>

#include "lmcurv/radial_mesh.hpp"

using namespace lmcurv;

TEST_CASE("single cell weight") {
    auto m = build_mesh(3, 1.0, 1);
    CHECK(m->cell_weights()[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("weights sum to R^N/N") {
    for (std::size_t M : {1u, 7u, 50u, 333u}) {
        auto m = build_mesh(3, 2.0, M);
        double s = 0, so = 0;
        for (double w : m->cell_weights()) s += w;
        for (double w : m->node_weights()) so += w;
        CHECK(s == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
        CHECK(so == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
    }
    auto m5 = build_mesh(5, 1.0, 100);
    double s = 0;
    for (std::size_t j = 0; j < 100; ++j) {
        const double a = m5->r()[j], b = m5->r()[j + 1];
        CHECK(m5->cell_weights()[j] == doctest::Approx((std::pow(b, 5) - std::pow(a, 5)) / 5));
        s += m5->cell_weights()[j];
    }
    CHECK(s == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("graded mesh clusters at the origin") {
    auto m = build_mesh(3, 1.0, 40, Grading::graded, 2.0);
    CHECK(m->h()[0] < m->h()[39]);
    CHECK(m->r()[40] == 1.0);
    for (double w : m->cell_weights()) CHECK(w > 0.0);
}

TEST_CASE("mesh rejects bad input") {
    CHECK_THROWS_AS(build_mesh(2, 1.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(build_mesh(3, 0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(build_mesh(3, 1.0, 0), std::invalid_argument);
}

TEST_CASE("reconstruct") {
    auto m = build_mesh(3, 1.0, 64);
    auto zero = reconstruct(SlopeField::zero(m));
    for (double x : zero.u) CHECK(x == 0.0);
    auto down = reconstruct(SlopeField::constant(m, -1.0));
    auto up = reconstruct(SlopeField::constant(m, 1.0));
    for (std::size_t i = 0; i <= 64; ++i) {
        CHECK(down.u[i] == doctest::Approx(1.0 - m->r()[i]).epsilon(1e-14));
        CHECK(up.u[i] == doctest::Approx(m->r()[i] - 1.0).epsilon(1e-14));
    }
    CHECK(down.u[64] == 0.0);
}

TEST_CASE("adjoint of reconstruct matches the dense transpose") {
    auto m = build_mesh(4, 1.3, 9, Grading::graded, 1.5);
    const std::size_t M = 9;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1, 1);
    std::vector<double> loads(M + 1), out(M);
    for (auto& x : loads) x = U(rng);
    reconstruct_adjoint(*m, loads, out);
    for (std::size_t j = 0; j < M; ++j) {
        std::vector<double> e(M, 0.0);
        e[j] = 1.0;
        auto col = reconstruct(*m, e);  // column j of the dense map
        double dot = 0;
        for (std::size_t i = 0; i <= M; ++i) dot += col[i] * loads[i];
        CHECK(out[j] == doctest::Approx(dot).epsilon(1e-14));
    }
}

TEST_CASE("norms") {
    auto m = build_mesh(3, 1.0, 2000);
    CHECK(h_norm_sq(SlopeField::zero(m)) == 0.0);
    CHECK(h_norm_sq(SlopeField::constant(m, -1.0)) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    // u = 1 - r^2: exact node differences give slopes -(r_j + r_{j+1})
    auto v = slopes_of(*m, [](double r) { return 1.0 - r * r; });
    CHECK(h_norm_sq(*m, v) == doctest::Approx(0.8).epsilon(1e-6));

    std::vector<double> one(2001, 1.0);
    CHECK(lp_norm(*m, one, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    auto u = reconstruct(SlopeField::constant(m, -1.0)).u;
    CHECK(lp_norm(*m, u, 2.0) == doctest::Approx(std::sqrt(1.0 / 30.0)).epsilon(1e-6));
}

TEST_CASE("lp norm converges at second order") {
    auto err = [](std::size_t M) {
        auto m = build_mesh(3, 1.0, M);
        std::vector<double> u(M + 1);
        for (std::size_t i = 0; i <= M; ++i) u[i] = std::cos(m->r()[i]);
        // int_0^1 r^2 cos^2 r dr
        const double exact = 1.0 / 6.0 + (std::sin(2.0) / 4.0 + std::cos(2.0) / 4.0 - std::sin(2.0) / 8.0);
        return std::fabs(std::pow(lp_norm(*m, u, 2.0), 2) - exact);
    };
    const double e1 = err(100), e2 = err(200);
    CHECK(e1 / e2 > 3.5);
}

TEST_CASE("profiles from slope fields are bounded by R") {
    auto m = build_mesh(3, 1.7, 120);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int k = 0; k < 200; ++k) {
        std::vector<double> v(120);
        for (auto& x : v) x = U(rng);
        for (double x : reconstruct(*m, v)) CHECK(std::fabs(x) <= 1.7 + 1e-14);
    }
}
