// One PASS/FAIL line per acceptance criterion. Exit status 1 if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

#include "lmcurv/pipeline.hpp"

using namespace lmcurv;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... xs) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, xs...);
    return buf;
}

RunConfig desk_config() { return load_config(std::string(LMCURV_SOURCE_DIR) + "/configs/desk.cfg"); }

// ---- shared solve-all runs over the lambda sweep (criteria 7, 8, 9, 11)

struct SweepRuns {
    double lambda_star_star = 0.0;
    std::vector<double> lambdas;
    std::vector<RunReport> reports;
    double seconds = 0.0;
};

const SweepRuns& sweep_runs() {
    static SweepRuns runs = [] {
        SweepRuns s;
        auto t0 = Clock::now();
        auto cfg = desk_config();
        cfg.mesh.M = 400;
        const auto th = run_thresholds(cfg).thresholds;
        s.lambda_star_star = th->lambda_star_star;
        for (double f : cfg.solver.sweep_fractions) {
            auto c = cfg;
            c.problem.lambda = f * s.lambda_star_star;
            s.lambdas.push_back(c.problem.lambda);
            s.reports.push_back(run_solve_all(c));
        }
        s.seconds = seconds_since(t0);
        return s;
    }();
    return runs;
}

const CriticalPointCertificate* find(const RunReport& r, const std::string& name) {
    for (const auto& c : r.certificates)
        if (c.name == name) return &c;
    return nullptr;
}

// ---- criteria

Outcome psi_sandwich() {
    auto t0 = Clock::now();
    auto m = build_mesh(3, 1.0, 200);
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> U(-1.0, 1.0), S(0.0, 1.0);
    int violations = 0;
    for (int k = 0; k < 1000; ++k) {
        std::vector<double> v(200);
        const double scale = S(rng);
        for (auto& x : v) x = scale * U(rng);
        const double n2 = h_norm_sq(*m, v);
        const double p = psi(*m, v);
        if (!(0.5 * n2 <= p && p <= n2)) ++violations;
    }
    const double dt = seconds_since(t0);
    return {violations == 0 && dt < 1.0, fmt("%d violations in 1000 draws, %.3f s", violations, dt)};
}

Outcome hardy() {
    auto t0 = Clock::now();
    bool ok = true;
    std::string d;
    for (int N : {3, 4, 5}) {
        const double h = hardy_ratio(*build_mesh(N, 1.0, 400));
        const double bound = 4.0 / ((N - 2.0) * (N - 2.0));
        ok = ok && h <= bound + 1e-3;
        d += fmt("N=%d: %.6f <= %.6f; ", N, h, bound + 1e-3);
    }
    const double dt = seconds_since(t0);
    return {ok && dt < 10.0, d + fmt("%.2f s", dt)};
}

Outcome gamma_ratio() {
    const auto c = check_superlinearity(3, 5.0, 224.0, 0.0, 1.0);
    const double rel = std::fabs(c.gamma_ratio * 168.0 - 1.0);
    const double eq = std::fabs(c.lhs + 1.0);
    bool reduction = true;
    for (double a1 : {100.0, 200.0, 224.0 * (1 - 1e-6), 224.0 * (1 + 1e-6), 300.0})
        for (double R : {0.9, 1.0, 1.1})
            reduction = reduction &&
                        check_superlinearity(3, 5.0, a1, 0.0, R).holds == (a1 * std::pow(R, 5) / 168.0 >= 4.0 / 3.0);
    return {rel <= 1e-12 && eq <= 1e-12 && c.holds && reduction,
            fmt("ratio rel err %.2e, equality |LHS+1| = %.2e, reduction %s", rel, eq, reduction ? "agrees" : "differs")};
}

Outcome threshold_identity() {
    auto t0 = Clock::now();
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        ProblemSpec p;
        p.N = 3 + static_cast<int>(U(rng) * 3);
        p.R = 0.5 + 2.0 * U(rng);
        p.q = 1.05 + 0.9 * U(rng);
        p.nonlinearity = PurePower{1.0 + 100.0 * U(rng), 2.5 + 3.0 * U(rng)};
        const double crit = 2.0 * p.N / (p.N - 2.0);
        const double alpha = 2.0 + (crit - 2.0) * (0.05 + 0.9 * U(rng));
        EmbeddingConstants C{0.1 + U(rng), 0.1 + U(rng), 0.1 + U(rng)};
        p.lambda = 1.0;
        p.lambda = compute_lambda_star(p, alpha, C).lambda_star;
        const auto s = compute_lambda_star(p, alpha, C);
        worst = std::max(worst, std::fabs(s.rho_minus / s.rho_plus - 1.0));
    }
    const double dt = seconds_since(t0);
    return {worst <= 1e-10 && dt < 1.0, fmt("worst relative gap %.2e over 20 draws, %.3f s", worst, dt)};
}

Outcome gradient_fd() {
    auto t0 = Clock::now();
    auto m = build_mesh(3, 1.0, 200);
    ProblemSpec p;
    p.lambda = 0.4;
    p.nonlinearity = PurePower{1120.0, 5.0};
    EnergyModel model(m, p, Branch::full);
    std::mt19937_64 rng(505);
    std::uniform_real_distribution<double> U(-0.9, 0.9);
    double worst = 0.0;
    const double h = 1e-6;
    for (int k = 0; k < 100; ++k) {
        std::vector<double> v(200);
        for (auto& x : v) x = U(rng);
        std::vector<double> g(200);
        model.energy_grad(v, g);
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < 200; ++j) {
            auto vp = v, vm = v;
            vp[j] += h;
            vm[j] -= h;
            const double fd = (model.smooth(vp) - model.smooth(vm)) / (2.0 * h);
            num += (fd - g[j]) * (fd - g[j]);
            den += g[j] * g[j];
        }
        worst = std::max(worst, std::sqrt(num / den));
    }
    const double dt = seconds_since(t0);
    return {worst < 1e-6 && dt < 10.0, fmt("worst relative error %.2e over 100 points, %.2f s", worst, dt)};
}

Outcome prox() {
    auto t0 = Clock::now();
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> Z(-5.0, 5.0), T(0.05, 20.0);
    double worst_res = 0.0, worst_lip = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const double z1 = Z(rng), z2 = Z(rng), tau = T(rng);
        const double p1 = prox_scalar(z1, tau), p2 = prox_scalar(z2, tau);
        worst_res = std::max(worst_res, std::fabs(prox_optimality_residual(p1, z1, tau)));
        worst_lip = std::max(worst_lip, std::fabs(p1 - p2) - std::fabs(z1 - z2));
    }
    const double dt = seconds_since(t0);
    return {worst_res <= 1e-12 && worst_lip <= 0.0 && dt < 1.0,
            fmt("worst optimality residual %.2e, worst expansion %.2e, %.3f s", worst_res, worst_lip, dt)};
}

Outcome multiplicity() {
    const auto& s = sweep_runs();
    bool ok = true;
    std::string d;
    for (std::size_t k = 0; k < s.reports.size(); ++k) {
        const auto& r = s.reports[k];
        bool here = true;
        double worst_margin = INFINITY, worst_res = 0.0;
        for (const char* b : {"positive", "negative"}) {
            const auto* u = find(r, std::string("u-") + b);
            const auto* v = find(r, std::string("v-") + b);
            const auto* w = find(r, std::string("w-") + b);
            if (!u || !v || !w) return {false, "missing certificate"};
            for (const auto* c : {u, v, w}) {
                here = here && c->accepted && c->criticality <= 1e-8;
                worst_res = std::max(worst_res, c->criticality);
            }
            here = here && distinct(*u, *v, 1.0) && distinct(*u, *w, 1.0) && distinct(*v, *w, 1.0);
            for (const auto& i : energy_ordering_suite(*u, *v, *w, 1.0, 3)) {
                here = here && i.passed;
                worst_margin = std::min(worst_margin, i.margin);
            }
        }
        ok = ok && here;
        d += fmt("lambda=%.4f: %s (min margin %.2e, max residual %.1e); ", s.lambdas[k], here ? "6 ok" : "FAILED",
                 worst_margin, worst_res);
    }
    return {ok && s.seconds < 300.0, d + fmt("M=400, %.1f s for the sweep", s.seconds)};
}

Outcome oracle() {
    const auto& s = sweep_runs();
    bool ok = true;
    std::string d;
    for (std::size_t k = 0; k < s.reports.size(); ++k) {
        const auto& r = s.reports[k];
        const auto& m = *r.match_positive;
        double worst = 0.0;
        for (const auto& x : m.matches) worst = std::max(worst, x.linf);
        const bool here = r.roots_positive.size() >= 3 && m.matches.size() == 3 && m.unmatched_certs.empty() &&
                          worst <= 1e-2;
        ok = ok && here;
        d += fmt("lambda=%.4f: %zu roots, %zu matched, worst Linf %.2e; ", s.lambdas[k], r.roots_positive.size(),
                 m.matches.size(), worst);
    }
    return {ok, d + "512 scan points"};
}

Outcome seventh() {
    const auto& s = sweep_runs();
    int certified = 0;
    std::string d;
    for (std::size_t k = 0; k < s.reports.size(); ++k) {
        const auto& r = s.reports[k];
        bool here = true;
        for (const auto& i : r.invariants)
            if (i.name.rfind("seventh", 0) == 0 || i.name == "low-energy path max < 0" || i.name == "accepted: seventh")
                here = here && i.passed;
        const auto* c = find(r, "seventh");
        certified += here;
        d += fmt("lambda=%.4f: %s (I=%.3e, residual %.1e); ", s.lambdas[k], here ? "certified" : "not certified",
                 c ? c->energy.total : NAN, c ? c->criticality : NAN);
    }
    auto cfg = desk_config();
    const auto sw = run_sweep_lambda(cfg);
    d += sw.sweep->lambda_triple_star_found ? fmt("empirical lambda*** = %.6f (lambda** = %.6f)", sw.sweep->lambda_triple_star,
                                                  sw.sweep->lambda_star_star)
                                            : std::string("empirical lambda*** not found");
    return {certified >= 1 && sw.sweep->lambda_triple_star_found, d};
}

Outcome gradient_contraction() {
    auto t0 = Clock::now();
    auto cfg = desk_config();
    cfg.mesh.M = 1000;
    cfg.problem.lambda = 0.45;
    const auto C2 = run_thresholds(cfg).thresholds->C.C2;
    const double eta = 0.25 / (1120.0 * std::sqrt(C2));
    cfg.problem.gradient_term = PowerGradient{1120.0, 5.0, eta};
    const auto r = run_grad_iter(cfg);
    const auto& th = *r.thresholds;
    bool ratios = true, weak = true;
    double k_hat = 0.0, worst_weak = 0.0;
    for (const auto& t : r.iterations) {
        ratios = ratios && t.k_valid && t.k_hat <= t.k_predicted + 0.05;
        k_hat = std::max(k_hat, t.k_hat);
        worst_weak = std::max(worst_weak, t.final_weak_residual);
        weak = weak && t.final_weak_residual <= 1e-3 && t.converged;
    }
    bool four = false;
    for (const auto& i : r.invariants)
        if (i.name == "four distinct nontrivial certificates") four = i.passed;
    const double dt = seconds_since(t0);
    std::string d = fmt("eta=%.3e, L1*C2=%.3g (need < 1/4), L2*sqrt(C2)=%.3g, predicted k %s; k_hat=%.2e, "
                        "weak residual %.2e, four distinct %s, %.1f s",
                        eta, th.L1 * th.C.C2, th.L2 * std::sqrt(th.C.C2),
                        th.k_valid ? fmt("%.3f", th.k).c_str() : "undefined", k_hat, worst_weak, four ? "yes" : "no", dt);
    return {th.lip1_ok && th.lip2_ok && ratios && weak && four && dt < 600.0, d};
}

Outcome monotonicity() {
    const auto& s = sweep_runs();
    bool ok = true;
    double min_eps = INFINITY, worst_viol = 0.0;
    int count = 0;
    for (const auto& r : s.reports)
        for (const auto& c : r.certificates) {
            if (c.branch == Branch::full) continue;
            ++count;
            ok = ok && c.monotone_ok && c.sign_ok && c.eps_margin > 0.0;
            min_eps = std::min(min_eps, c.eps_margin);
            worst_viol = std::max(worst_viol, c.monotone_violation);
        }
    return {ok && count > 0, fmt("%d one-signed certificates, min eps = %.3e, worst wrong-sign slope %.1e", count,
                                 min_eps, worst_viol)};
}

Outcome determinism() {
    namespace fs = std::filesystem;
    const auto base = fs::temp_directory_path() / ("lmcurv_accept_" + std::to_string(::getpid()));
    const std::string cfg = std::string(LMCURV_SOURCE_DIR) + "/configs/desk.cfg";
    std::string bytes[2];
    for (int k = 0; k < 2; ++k) {
        const auto out = base / ("run" + std::to_string(k));
        const std::string cmd = std::string("\"") + LMCURV_CLI + "\" solve-all --config \"" + cfg + "\" --out \"" +
                                out.string() + "\" --deterministic --seed 7 > /dev/null";
        const int rc = std::system(cmd.c_str());
        if (rc != 0) return {false, fmt("solve-all exited with status %d", rc)};
        std::ifstream in(out / "report.json", std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        bytes[k] = ss.str();
    }
    fs::remove_all(base);
    const bool same = !bytes[0].empty() && bytes[0] == bytes[1];
    return {same, fmt("two runs, %zu report bytes, %s", bytes[0].size(), same ? "identical" : "different")};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"psi sandwich", psi_sandwich},
        {"Hardy constant", hardy},
        {"Gamma-ratio condition", gamma_ratio},
        {"threshold identity", threshold_identity},
        {"gradient correctness", gradient_fd},
        {"prox correctness", prox},
        {"multiplicity, desk instance", multiplicity},
        {"oracle agreement", oracle},
        {"seventh solution", seventh},
        {"gradient-term contraction", gradient_contraction},
        {"monotonicity and sign", monotonicity},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s  %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
