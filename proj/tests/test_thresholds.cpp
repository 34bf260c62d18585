#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "lmcurv/energy.hpp"
#include "lmcurv/thresholds.hpp"

using namespace lmcurv;

namespace {

// Dense generalized eigenproblem A^T Omega A x = mu W x.
double dense_embedding_constant(const RadialMesh& m) {
    const Eigen::Index M = static_cast<Eigen::Index>(m.cells());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(M + 1, M);
    for (Eigen::Index j = 0; j < M; ++j)
        for (Eigen::Index i = 0; i <= j; ++i) A(i, j) = -m.h()[j];
    Eigen::VectorXd om(M + 1), w(M);
    for (Eigen::Index i = 0; i <= M; ++i) om(i) = m.node_weights()[i];
    for (Eigen::Index j = 0; j < M; ++j) w(j) = m.cell_weights()[j];
    Eigen::MatrixXd K = A.transpose() * om.asDiagonal() * A;
    Eigen::MatrixXd W = w.asDiagonal();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, W);
    return es.eigenvalues().maxCoeff();
}

ProblemSpec desk(double lambda) {
    ProblemSpec p;
    p.lambda = lambda;
    p.nonlinearity = PurePower{1120.0, 5.0};
    return p;
}

}  // namespace

TEST_CASE("p = 2 constant: power iteration, ascent and dense oracle agree") {
    auto m = build_mesh(3, 1.0, 120);
    const double pw = embedding_constant_power(*m);
    const double dense = dense_embedding_constant(*m);
    CHECK(pw == doctest::Approx(dense).epsilon(1e-10));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-1, 1);
    std::vector<double> start(120);
    for (auto& x : start) x = U(rng);
    const double asc = embedding_constant_ascent(*m, 2.0, start, 20000, 1e-15);
    CHECK(std::fabs(asc - pw) <= 1e-6 * pw);
    // close to 1/pi^2 for N = 3, R = 1
    CHECK(pw == doctest::Approx(1.0 / (M_PI * M_PI)).epsilon(1e-3));
}

TEST_CASE("embedding inequality holds for arbitrary discrete fields") {
    auto m = build_mesh(3, 1.0, 80);
    for (double p : {1.5, 2.0, 4.0}) {
        const double C = estimate_embedding_constant(*m, p).value;
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> U(-1, 1);
        for (int k = 0; k < 200; ++k) {
            std::vector<double> v(80);
            for (auto& x : v) x = U(rng);
            const auto u = reconstruct(*m, v);
            CHECK(std::pow(lp_norm(*m, u, p), p) <= C * std::pow(h_norm_sq(*m, v), p / 2) * (1 + 1e-12));
        }
    }
    CHECK_THROWS_AS(estimate_embedding_constant(*m, 6.0), std::invalid_argument);
}

TEST_CASE("Hardy ratio stays below 4/(N-2)^2") {
    for (int N : {3, 4, 5}) {
        auto m = build_mesh(N, 1.0, 400);
        const double h = hardy_ratio(*m);
        CHECK(h <= 4.0 / ((N - 2.0) * (N - 2.0)) + 1e-3);
        CHECK(h > 0.0);
    }
}

TEST_CASE("Gamma-ratio superlinearity condition") {
    auto c = check_superlinearity(3, 5.0, 224.0, 0.0, 1.0);
    CHECK(c.gamma_ratio == doctest::Approx(1.0 / 168.0).epsilon(1e-12));
    CHECK(std::fabs(c.lhs + 1.0) <= 1e-12);
    CHECK(c.holds);
    CHECK_FALSE(check_superlinearity(3, 5.0, 0.0, 0.0, 1.0).holds);
    // N = 3, theta = 5, a2 = 0: condition equals a1 R^5 / 168 >= 4/3
    for (double a1 : {100.0, 223.0, 225.0, 400.0})
        for (double R : {0.8, 1.0, 1.2})
            CHECK(check_superlinearity(3, 5.0, a1, 0.0, R).holds ==
                  (a1 * std::pow(R, 5) / 168.0 >= 4.0 / 3.0 - 1e-12));
}

TEST_CASE("growth constant") {
    CHECK(growth_constant(PurePower{1120.0, 5.0}, 2.0, 4.0, 1.0) == doctest::Approx(224.0));
    // theta < alpha: Young splitting must dominate F on [-R,R]
    for (double eps : {0.1, 1.0, 5.0}) {
        PurePower f{7.0, 3.0};
        const double c = growth_constant(f, eps, 5.0, 1.5);
        for (int k = 1; k <= 500; ++k) {
            const double s = 1.5 * k / 500.0;
            CHECK(nl_primitive(f, 0, s) <= 0.5 * eps * s * s + c * std::pow(s, 5.0) + 1e-14);
        }
    }
}

TEST_CASE("rho_minus at lambda* equals rho_plus") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> U(0, 1);
    for (int k = 0; k < 20; ++k) {
        ProblemSpec p;
        p.N = 3 + static_cast<int>(U(rng) * 3);
        p.R = 0.5 + 2 * U(rng);
        p.q = 1.05 + 0.9 * U(rng);
        p.nonlinearity = PurePower{1 + 100 * U(rng), 2.5 + 3 * U(rng)};
        const double crit = 2.0 * p.N / (p.N - 2.0);
        const double alpha = 2.0 + (crit - 2.0) * (0.05 + 0.9 * U(rng));
        EmbeddingConstants C{0.1 + U(rng), 0.1 + U(rng), 0.1 + U(rng)};
        p.lambda = 1.0;
        auto t = compute_lambda_star(p, alpha, C);
        p.lambda = t.lambda_star;
        auto s = compute_lambda_star(p, alpha, C);
        CHECK(s.rho_minus == doctest::Approx(s.rho_plus).epsilon(1e-10));
    }
}

TEST_CASE("rho_minus monotone and vanishing") {
    EmbeddingConstants C{0.1, 0.12, 0.12};
    auto p = desk(1e-3);
    double prev = 0.0;
    for (double lam : {1e-8, 1e-6, 1e-4, 1e-2, 0.1, 0.4}) {
        p.lambda = lam;
        auto t = compute_lambda_star(p, 4.0, C);
        CHECK(t.rho_minus > prev);
        prev = t.rho_minus;
    }
    p.lambda = 1e-14;
    CHECK(compute_lambda_star(p, 4.0, C).rho_minus < 1e-4);
    CHECK_THROWS_AS(compute_lambda_star(p, 6.5, C), std::invalid_argument);
    p.q = 2.0;
    CHECK_THROWS_AS(compute_lambda_star(p, 4.0, C), std::invalid_argument);
}

TEST_CASE("rho_plus decreases in R") {
    double prev = 1e300;
    for (double R : {0.6, 0.8, 1.0, 1.3}) {
        auto p = desk(1e-3);
        p.R = R;
        auto m = build_mesh(3, R, 100);
        auto t = compute_thresholds(p, *m);
        CHECK(t.rho_plus < prev);
        prev = t.rho_plus;
    }
}

TEST_CASE("annulus energy floor on sampled fields") {
    auto m = build_mesh(3, 1.0, 200);
    auto p = desk(0.2);
    auto t = compute_thresholds(p, *m);
    REQUIRE(p.lambda < t.lambda_star);
    EnergyModel model(m, p, Branch::positive);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> U(-1, 1), T(0, 1);
    int checked = 0;
    for (int k = 0; k < 1000; ++k) {
        std::vector<double> v(200);
        const double phase = 6 * T(rng);
        for (std::size_t j = 0; j < 200; ++j) v[j] = U(rng) + std::cos(phase * j / 200.0) - 1.0;
        const double rho = t.rho_minus + (t.rho_plus - t.rho_minus) * T(rng);
        const double n = std::sqrt(h_norm_sq(*m, v));
        for (auto& x : v) x *= rho / n;
        if (std::fabs(*std::max_element(v.begin(), v.end(), [](double a, double b) {
                return std::fabs(a) < std::fabs(b);
            })) > 1.0)
            continue;
        ++checked;
        CHECK(model.energy(v).total >= t.mp_floor);
    }
    CHECK(checked > 900);
}

TEST_CASE("desk thresholds") {
    auto m = build_mesh(3, 1.0, 400);
    auto t = compute_thresholds(desk(0.3), *m);
    CHECK(t.alpha == 4.0);
    CHECK(t.eps * t.d2 == doctest::Approx(0.25));
    CHECK(t.c_eps == doctest::Approx(224.0));
    CHECK(t.superlinearity.holds);
    CHECK(t.lambda_star > 0.3);
    CHECK(t.lambda_star_star <= t.lambda_star);
    CHECK(t.rho_minus < t.rho_plus);
}

TEST_CASE("gradient-term conditions") {
    auto g0 = check_gradient_conditions(0, 0, 0.1, 0.01, 1.5, 1, 1);
    CHECK(g0.lip1_ok);
    CHECK(g0.lip2_ok);
    CHECK(g0.k == 0.0);
    const double C2 = 0.1;
    CHECK_FALSE(check_gradient_conditions(0.25 / C2, 0, C2, 0.01, 1.5, 1, 1).lip1_ok);
    auto half = check_gradient_conditions(0.125 / C2, 0.25 / std::sqrt(C2), C2, 0.0, 1.5, 1, 1);
    CHECK(half.k == doctest::Approx(0.25 / (1 - 0.125)));
    CHECK(half.k_valid);
    auto big = check_gradient_conditions(100.0 / C2, 0.1, C2, 0.0, 1.5, 1, 1);
    CHECK_FALSE(big.k_valid);
}
