#include "lmcurv/shooting.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <boost/numeric/odeint.hpp>

namespace lmcurv {

namespace {

using State = std::array<double, 2>;  // (u, h)

double branch_power(double u, double q, Branch b) {
    if (u > 0.0 && b != Branch::negative) return std::pow(u, q - 1.0);
    if (u < 0.0 && b != Branch::positive) return -std::pow(-u, q - 1.0);
    return 0.0;
}

struct System {
    const ProblemSpec& p;
    Branch branch;
    int N;
    double R;

    double source(double r, double u) const {
        const double fq = p.lambda * p.weight_b.value(r, R) * branch_power(u, p.q, branch);
        const double ff = truncated_value([&](double s) { return nl_value(p.nonlinearity, r, s); }, u, R, branch);
        return fq + ff;
    }
    double slope(double r, double h) const {
        const double rn = std::pow(r, N - 1);
        return h / std::sqrt(rn * rn + h * h);
    }
    void operator()(const State& x, State& dx, double r) const {
        dx[0] = slope(r, x[1]);
        dx[1] = -std::pow(r, N - 1) * source(r, x[0]);
    }
};

bool left_branch(double u, Branch b) {
    return (b == Branch::positive && u < 0.0) || (b == Branch::negative && u > 0.0);
}

}  // namespace

ShootingRecord shoot(const ProblemSpec& p, Branch branch, double s, const RadialMesh& mesh,
                     const ShootingOptions& opt) {
    namespace ode = boost::numeric::odeint;
    const int N = mesh.dim();
    const double R = mesh.radius();
    System sys{p, branch, N, R};
    ShootingRecord rec;
    rec.s = s;
    const auto nodes = mesh.r();
    rec.r.assign(nodes.begin(), nodes.end());
    rec.u.assign(nodes.size(), 0.0);
    rec.du.assign(nodes.size(), 0.0);
    rec.h.assign(nodes.size(), 0.0);

    // series start: h ~ -h2(0) r^N / N, u' ~ -h2(0) r / N
    const double h20 = sys.source(0.0, s);
    rec.source_sup = std::fabs(h20);
    const double r0 = opt.start_fraction * R;
    auto series = [&](double r, std::size_t i) {
        rec.u[i] = s - h20 * r * r / (2.0 * N);
        rec.h[i] = -h20 * std::pow(r, N) / N;
        rec.du[i] = r > 0.0 ? sys.slope(r, rec.h[i]) : 0.0;
    };
    std::size_t next = 0;
    while (next < nodes.size() && nodes[next] <= r0) series(nodes[next], next), ++next;

    State x{s - h20 * r0 * r0 / (2.0 * N), -h20 * std::pow(r0, N) / N};
    // absolute tolerance follows the height so tiny shots are not drowned in it
    const double atol = opt.abs_tol * std::clamp(std::fabs(s) / R, 1e-300, 1.0);
    auto stepper = ode::make_dense_output(atol, opt.rel_tol, ode::runge_kutta_dopri5<State>());
    stepper.initialize(x, r0, 1e-3 * r0);
    auto sample = [&](double r, std::size_t i) {
        State y;
        stepper.calc_state(r, y);
        rec.u[i] = y[0];
        rec.h[i] = y[1];
        rec.du[i] = sys.slope(r, y[1]);
    };
    double t = r0;
    try {
        while (t < R) {
            // never step past R: shrink the proposal when it would overshoot
            if (t + stepper.current_time_step() > R) stepper.initialize(stepper.current_state(), t, R - t);
            const auto [t0, t1] = stepper.do_step(sys);
            t = t1;
            ++rec.steps;
            const State& y = stepper.current_state();
            rec.source_sup = std::max(rec.source_sup, std::fabs(sys.source(t1, y[0])));
            if (std::fabs(y[0]) > R + 1.0) rec.exceeded_truncation = true;
            if (left_branch(y[0], branch)) {
                double a = t0, b = t1;
                for (int k = 0; k < 100; ++k) {
                    const double mid = 0.5 * (a + b);
                    State z;
                    stepper.calc_state(mid, z);
                    (left_branch(z[0], branch) ? b : a) = mid;
                }
                State z;
                stepper.calc_state(a, z);
                while (next < nodes.size() && nodes[next] <= a) sample(nodes[next], next), ++next;
                rec.touched_zero = true;
                rec.touch_r = a;
                const double slope = sys.slope(a, z[1]);
                for (; next < nodes.size(); ++next) {
                    rec.u[next] = z[0] + slope * (nodes[next] - a);
                    rec.du[next] = slope;
                    rec.h[next] = z[1];
                }
                rec.terminal = z[0] + slope * (R - a);
                return rec;
            }
            while (next < nodes.size() && nodes[next] <= t1) sample(nodes[next], next), ++next;
            if (R - t <= 1e-14 * R) break;
        }
    } catch (const std::exception&) {
        rec.step_failure = true;
        rec.terminal = rec.u[next > 0 ? next - 1 : 0];
        return rec;
    }
    rec.reached_R = true;
    rec.terminal = stepper.current_state()[0];
    rec.u.back() = rec.terminal;
    rec.h.back() = stepper.current_state()[1];
    rec.du.back() = sys.slope(R, rec.h.back());
    return rec;
}

std::vector<double> scan_grid(double R, Branch branch, const ScanOptions& opt) {
    const int half = opt.grid / 2;
    std::vector<double> g;
    const double l0 = std::log(opt.log_floor * R), l1 = std::log(R);
    for (int k = 0; k < half; ++k) g.push_back(std::exp(l0 + (l1 - l0) * k / (half - 1)));
    for (int k = 1; k <= opt.grid - half; ++k) g.push_back(R * k / (opt.grid - half));
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end(), [&](double a, double b) { return b - a <= 1e-15 * R; }), g.end());
    if (branch == Branch::negative)
        for (auto& x : g) x = -x;
    if (branch == Branch::full) {
        const std::size_t n = g.size();
        for (std::size_t k = 0; k < n; ++k) g.push_back(-g[k]);
    }
    std::sort(g.begin(), g.end());
    return g;
}

ScanResult scan_and_count(const ProblemSpec& p, Branch branch, const RadialMesh& mesh,
                          const ScanOptions& opt) {
    const double R = mesh.radius();
    ScanResult res;
    res.s = scan_grid(R, branch, opt);
    std::vector<ShootingRecord> recs;
    for (double s : res.s) {
        recs.push_back(shoot(p, branch, s, mesh, opt.shooting));
        res.T.push_back(recs.back().terminal);
        res.touched.push_back(recs.back().touched_zero);
        res.failed.push_back(recs.back().step_failure);
        if (recs.back().step_failure) ++res.skipped;
    }
    std::size_t prev = res.s.size();
    for (std::size_t k = 0; k < res.s.size(); ++k) {
        if (res.failed[k]) continue;
        if (res.T[k] == 0.0) {
            res.roots.push_back({res.s[k], recs[k], static_cast<bool>(res.touched[k]), true});
            prev = k;
            continue;
        }
        if (prev < res.s.size() && res.T[prev] != 0.0 && (res.T[prev] > 0.0) != (res.T[k] > 0.0)) {
            double a = res.s[prev], b = res.s[k], Ta = res.T[prev];
            ShootingRoot root;
            root.bracket_touched = res.touched[prev] || res.touched[k];
            ShootingRecord best = std::fabs(Ta) < std::fabs(res.T[k]) ? recs[prev] : recs[k];
            for (int it = 0; it < opt.max_bisections && std::fabs(best.terminal) > opt.root_tol; ++it) {
                const double mid = 0.5 * (a + b);
                if (mid == a || mid == b) break;
                auto rm = shoot(p, branch, mid, mesh, opt.shooting);
                if (rm.step_failure) break;
                if ((rm.terminal > 0.0) == (Ta > 0.0)) {
                    a = mid;
                    Ta = rm.terminal;
                } else {
                    b = mid;
                }
                if (std::fabs(rm.terminal) < std::fabs(best.terminal)) best = std::move(rm);
            }
            root.s = best.s;
            root.tolerance_met = std::fabs(best.terminal) <= opt.root_tol;
            root.record = std::move(best);
            const bool dup = std::any_of(res.roots.begin(), res.roots.end(), [&](const ShootingRoot& o) {
                return std::fabs(o.s - root.s) <= opt.distinct * R;
            });
            if (!dup) res.roots.push_back(std::move(root));
        }
        prev = k;
    }
    return res;
}

}  // namespace lmcurv
