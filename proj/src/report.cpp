#include "lmcurv/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace lmcurv {

using nlohmann::ordered_json;

namespace {

ordered_json num(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

InvariantResult gap(std::string name, double lhs, double rhs, double min_margin, const std::string& what) {
    InvariantResult r;
    r.name = std::move(name);
    r.margin = lhs - rhs;
    r.passed = r.margin >= min_margin;
    if (!r.passed) r.witness = what + ": " + fmt(lhs) + " vs " + fmt(rhs);
    return r;
}

}  // namespace

MatchTable cross_validate(const std::vector<CriticalPointCertificate>& certs,
                          const std::vector<ShootingRoot>& roots, double tol_linf) {
    MatchTable t;
    t.tolerance = tol_linf;
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < certs.size(); ++i) {
        const double R = certs[i].mesh ? certs[i].mesh->radius() : 1.0;
        const bool dup = std::any_of(kept.begin(), kept.end(),
                                     [&](std::size_t k) { return !distinct(certs[k], certs[i], R); });
        (dup ? t.collapsed : kept).push_back(i);
    }
    struct Cand {
        double d;
        std::size_t c, r;
    };
    std::vector<Cand> cand;
    for (std::size_t c : kept)
        for (std::size_t r = 0; r < roots.size(); ++r)
            if (roots[r].record.u.size() == certs[c].u.size())
                cand.push_back({linf_distance(certs[c].u, roots[r].record.u), c, r});
    std::stable_sort(cand.begin(), cand.end(), [](const Cand& a, const Cand& b) { return a.d < b.d; });
    std::vector<char> cused(certs.size(), 0), rused(roots.size(), 0);
    for (const auto& x : cand) {
        if (x.d > tol_linf) break;
        if (cused[x.c] || rused[x.r]) continue;
        cused[x.c] = rused[x.r] = 1;
        t.matches.push_back({x.c, x.r, x.d});
    }
    for (std::size_t c : kept)
        if (!cused[c]) t.unmatched_certs.push_back(c);
    for (std::size_t r = 0; r < roots.size(); ++r)
        if (!rused[r]) t.unmatched_roots.push_back(r);
    return t;
}

std::vector<InvariantResult> energy_ordering_suite(const CriticalPointCertificate& u,
                                                   const CriticalPointCertificate& v,
                                                   const CriticalPointCertificate& w, double R, int N,
                                                   double min_margin) {
    const double floor = -std::pow(R, N);
    const std::string b = to_string(u.branch);
    return {
        gap("energy-order " + b + ": I(w) > 0", w.energy.total, 0.0, min_margin, "I(w)"),
        gap("energy-order " + b + ": 0 > I(v)", 0.0, v.energy.total, min_margin, "I(v)"),
        gap("energy-order " + b + ": I(v) >= -R^N", v.energy.total, floor, min_margin, "I(v)"),
        gap("energy-order " + b + ": -R^N > I(u)", floor, u.energy.total, min_margin, "I(u)"),
    };
}

std::vector<InvariantResult> seventh_suite(const CriticalPointCertificate& s,
                                           const CriticalPointCertificate& vp,
                                           const CriticalPointCertificate& vm, double R, double tol) {
    std::vector<InvariantResult> out;
    out.push_back(gap("seventh: I < 0", 0.0, s.energy.total, 0.0, "I(seventh)"));
    out.back().passed = s.energy.total < 0.0;
    InvariantResult crit{"seventh: residual <= tol", s.criticality <= tol, tol - s.criticality, ""};
    if (!crit.passed) crit.witness = "residual " + fmt(s.criticality);
    out.push_back(crit);
    auto sep = [&](const std::string& name, const CriticalPointCertificate& o) {
        InvariantResult r{name, distinct(s, o, R), linf_distance(s.u, o.u) - 1e-4 * R, ""};
        if (!r.passed)
            r.witness = "Linf " + fmt(linf_distance(s.u, o.u)) + ", dI " + fmt(s.energy.total - o.energy.total);
        out.push_back(r);
    };
    sep("seventh: distinct from v+", vp);
    sep("seventh: distinct from v-", vm);
    CriticalPointCertificate zero;
    zero.u.assign(s.u.size(), 0.0);
    sep("seventh: distinct from 0", zero);
    return out;
}

std::vector<InvariantResult> monotonicity_suite(const std::vector<CriticalPointCertificate>& certs) {
    std::vector<InvariantResult> out;
    for (const auto& c : certs) {
        if (c.classification == Classification::seventh || c.branch == Branch::full) continue;
        InvariantResult m{"monotone: " + c.name, c.monotone_ok, -c.monotone_violation, ""};
        if (!m.passed) m.witness = "slope of the wrong sign " + fmt(c.monotone_violation);
        out.push_back(m);
        InvariantResult e{"slope margin: " + c.name, c.eps_margin > 0.0, c.eps_margin, ""};
        if (!e.passed) e.witness = "sup|u'| " + fmt(c.sup_slope);
        out.push_back(e);
    }
    return out;
}

bool RunReport::all_passed() const {
    return std::all_of(invariants.begin(), invariants.end(), [](const InvariantResult& r) { return r.passed; });
}

ordered_json to_json(const ThresholdReport& t) {
    ordered_json j;
    j["alpha"] = t.alpha;
    j["C2"] = num(t.C.C2);
    j["Cq"] = num(t.C.Cq);
    j["Calpha"] = num(t.C.Calpha);
    j["constants_are_discrete_estimates"] = t.constants_are_discrete_estimates;
    j["eps"] = num(t.eps);
    j["c_eps"] = num(t.c_eps);
    j["d2"] = num(t.d2);
    j["dq"] = num(t.dq);
    j["dalpha"] = num(t.dalpha);
    j["beta"] = num(t.beta);
    j["lambda"] = num(t.lambda);
    j["t_lambda"] = num(t.t_lambda);
    j["lambda_star"] = num(t.lambda_star);
    j["lambda_star_star"] = num(t.lambda_star_star);
    j["lambda_star_star_is_lambda_star"] = t.lambda_star_star_is_lambda_star;
    j["rho_plus"] = num(t.rho_plus);
    j["rho_minus"] = num(t.rho_minus);
    j["mp_floor"] = num(t.mp_floor);
    j["superlinearity_ok"] = t.superlinearity.holds;
    j["superlinearity_lhs"] = num(t.superlinearity.lhs);
    j["gamma_ratio"] = num(t.superlinearity.gamma_ratio);
    if (t.has_gradient_term) {
        j["gradient"] = {{"L1", num(t.L1)},         {"L2", num(t.L2)},       {"lip1_ok", t.lip1_ok},
                         {"lip2_ok", t.lip2_ok},    {"lambda_bar", num(t.lambda_bar)},
                         {"k", num(t.k)},           {"k_valid", t.k_valid}};
    }
    return j;
}

ordered_json to_json(const CriticalPointCertificate& c) {
    ordered_json j;
    j["name"] = c.name;
    j["classification"] = to_string(c.classification);
    j["branch"] = to_string(c.branch);
    j["accepted"] = c.accepted;
    j["status"] = to_string(c.status);
    j["energy"] = {{"psi", num(c.energy.psi)},
                   {"q_term", num(c.energy.q_term)},
                   {"f_term", num(c.energy.f_term)},
                   {"total", num(c.energy.total)}};
    j["h_norm"] = num(c.h_norm);
    j["criticality"] = num(c.criticality);
    j["weak_residual"] = c.weak_residual_defined ? num(c.weak_residual) : ordered_json(nullptr);
    j["sup_slope"] = num(c.sup_slope);
    j["eps_margin"] = num(c.eps_margin);
    j["u0"] = c.u.empty() ? ordered_json(nullptr) : num(c.u.front());
    j["sign_ok"] = c.sign_ok;
    j["sign_violation"] = num(c.sign_violation);
    j["monotone_ok"] = c.monotone_ok;
    j["monotone_violation"] = num(c.monotone_violation);
    j["descent_probe_ok"] = c.descent_probe_ok;
    if (c.mesh) j["energy_at_most_minus_RN"] = c.energy.total <= -std::pow(c.mesh->radius(), c.mesh->dim());
    j["iterations"] = c.iterations;
    j["profile"] = "profiles/" + c.name + ".csv";
    if (c.thresholds) {
        j["thresholds"] = {{"lambda_star", num(c.thresholds->lambda_star)},
                           {"lambda_star_star", num(c.thresholds->lambda_star_star)},
                           {"rho_plus", num(c.thresholds->rho_plus)},
                           {"rho_minus", num(c.thresholds->rho_minus)},
                           {"mp_floor", num(c.thresholds->mp_floor)}};
    }
    j["notes"] = c.notes;
    return j;
}

ordered_json to_json(const MatchTable& m) {
    ordered_json j;
    j["tolerance"] = m.tolerance;
    j["matches"] = ordered_json::array();
    for (const auto& x : m.matches) j["matches"].push_back({{"cert", x.cert}, {"root", x.root}, {"linf", num(x.linf)}});
    j["unmatched_certs"] = m.unmatched_certs;
    j["unmatched_roots"] = m.unmatched_roots;
    j["collapsed"] = m.collapsed;
    return j;
}

ordered_json to_json(const IterationTrace& t) {
    ordered_json j;
    j["mode"] = to_string(t.mode);
    j["branch"] = to_string(t.branch);
    j["converged"] = t.converged;
    j["non_contraction"] = t.non_contraction;
    j["k_hat"] = num(t.k_hat);
    j["k_predicted"] = num(t.k_predicted);
    j["k_valid"] = t.k_valid;
    j["norm_floor"] = num(t.norm_floor);
    j["min_norm"] = num(t.min_norm);
    j["final_weak_residual"] = num(t.final_weak_residual);
    j["steps"] = ordered_json::array();
    for (const auto& s : t.steps)
        j["steps"].push_back({{"increment", num(s.increment)},
                              {"ratio", num(s.ratio)},
                              {"energy", num(s.cert.energy.total)},
                              {"criticality", num(s.cert.criticality)},
                              {"h_norm", num(s.cert.h_norm)}});
    j["final"] = to_json(t.final);
    return j;
}

namespace {

ordered_json roots_json(const std::vector<ShootingRoot>& roots) {
    ordered_json a = ordered_json::array();
    for (const auto& r : roots)
        a.push_back({{"s", num(r.s)},
                     {"terminal", num(r.record.terminal)},
                     {"tolerance_met", r.tolerance_met},
                     {"bracket_touched", r.bracket_touched},
                     {"reached_R", r.record.reached_R},
                     {"exceeded_truncation", r.record.exceeded_truncation},
                     {"steps", r.record.steps}});
    return a;
}

ordered_json scan_json(const ScanResult& s) {
    std::size_t touched = 0;
    for (char t : s.touched) touched += t != 0;
    return {{"points", s.s.size()}, {"skipped", s.skipped}, {"touched", touched}, {"roots", s.roots.size()}};
}

}  // namespace

ordered_json to_json(const RunReport& r, bool deterministic) {
    ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["command"] = r.command;
    j["deterministic"] = deterministic;
    j["config"] = to_json(r.config);
    j["seed"] = r.config.solver.seed;
    j["mesh"] = {{"N", r.config.problem.N},
                 {"R", r.config.problem.R},
                 {"M", r.config.mesh.M},
                 {"grading", to_string(r.config.mesh.grading)},
                 {"gamma", r.config.mesh.gamma}};
    if (r.thresholds) j["thresholds"] = to_json(*r.thresholds);
    j["certificates"] = ordered_json::array();
    for (const auto& c : r.certificates) j["certificates"].push_back(to_json(c));
    if (r.scan_positive || r.scan_negative || !r.roots_positive.empty() || !r.roots_negative.empty()) {
        ordered_json o;
        if (r.scan_positive) o["scan_positive"] = scan_json(*r.scan_positive);
        if (r.scan_negative) o["scan_negative"] = scan_json(*r.scan_negative);
        o["roots_positive"] = roots_json(r.roots_positive);
        o["roots_negative"] = roots_json(r.roots_negative);
        auto table = [&](const MatchTable& m, const std::vector<std::size_t>& idx) {
            auto t = to_json(m);
            // report certificate indices relative to the full certificate list
            for (auto& x : t["matches"]) x["cert"] = r.certificates[idx[x["cert"].get<std::size_t>()]].name;
            for (auto& x : t["unmatched_certs"]) x = r.certificates[idx[x.get<std::size_t>()]].name;
            for (auto& x : t["collapsed"]) x = r.certificates[idx[x.get<std::size_t>()]].name;
            return t;
        };
        if (r.match_positive) o["matching_positive"] = table(*r.match_positive, r.match_positive_certs);
        if (r.match_negative) o["matching_negative"] = table(*r.match_negative, r.match_negative_certs);
        j["oracle"] = o;
    }
    if (r.sweep) {
        ordered_json s;
        s["lambda_star_star"] = num(r.sweep->lambda_star_star);
        s["lambda_triple_star_found"] = r.sweep->lambda_triple_star_found;
        s["lambda_triple_star"] = num(r.sweep->lambda_triple_star);
        s["points"] = ordered_json::array();
        for (const auto& p : r.sweep->points)
            s["points"].push_back({{"fraction", num(p.fraction)},
                                   {"lambda", num(p.lambda)},
                                   {"path_negative", p.path_negative},
                                   {"path_max", num(p.path_max)},
                                   {"seventh_ok", p.seventh_ok},
                                   {"seventh_energy", num(p.seventh_energy)},
                                   {"seventh_residual", num(p.seventh_residual)},
                                   {"ordering_ok", p.ordering_ok}});
        j["sweep"] = s;
    }
    if (!r.iterations.empty()) {
        j["iterations"] = ordered_json::array();
        for (const auto& t : r.iterations) j["iterations"].push_back(to_json(t));
    }
    j["invariants"] = ordered_json::array();
    for (const auto& i : r.invariants) {
        ordered_json x{{"name", i.name}, {"passed", i.passed}, {"margin", num(i.margin)}};
        if (!i.passed) x["witness"] = i.witness;
        j["invariants"].push_back(x);
    }
    j["all_passed"] = r.all_passed();
    j["notes"] = r.notes;
    if (!deterministic) {
        ordered_json t = ordered_json::object();
        for (const auto& [k, v] : r.timings) t[k] = v;
        j["timings_seconds"] = t;
    }
    return j;
}

std::string report_text(const RunReport& r, bool deterministic) { return to_json(r, deterministic).dump(2) + "\n"; }

std::vector<double> node_slopes(const RadialMesh& mesh, std::span<const double> v) {
    const std::size_t M = mesh.cells();
    std::vector<double> du(M + 1);
    du[0] = 0.0;  // radial symmetry
    du[M] = v[M - 1];
    for (std::size_t i = 1; i < M; ++i) du[i] = 0.5 * (v[i - 1] + v[i]);
    return du;
}

void write_profile_csv(const std::string& path, std::span<const double> r, std::span<const double> u,
                       std::span<const double> du) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "r,u,du\n";
    for (std::size_t i = 0; i < r.size(); ++i) out << fmt(r[i]) << ',' << fmt(u[i]) << ',' << fmt(du[i]) << '\n';
}

void write_profile_csv(const std::string& path, const CriticalPointCertificate& c) {
    const auto du = node_slopes(*c.mesh, c.v);
    write_profile_csv(path, c.mesh->r(), c.u, du);
}

void write_scan_csv(const std::string& path, const std::vector<const ScanResult*>& scans) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "s,T\n";
    std::vector<std::pair<double, double>> rows;
    for (const auto* s : scans)
        for (std::size_t k = 0; k < s->s.size(); ++k) rows.emplace_back(s->s[k], s->T[k]);
    std::sort(rows.begin(), rows.end());
    for (const auto& [s, T] : rows) out << fmt(s) << ',' << fmt(T) << '\n';
}

void write_run(const std::string& dir, const RunReport& r, bool deterministic) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "profiles");
    for (const auto& c : r.certificates)
        if (c.mesh) write_profile_csv((fs::path(dir) / "profiles" / (c.name + ".csv")).string(), c);
    auto roots = [&](const std::vector<ShootingRoot>& rs, const char* tag) {
        for (std::size_t k = 0; k < rs.size(); ++k)
            write_profile_csv((fs::path(dir) / "profiles" / (std::string("root-") + tag + "-" + std::to_string(k) + ".csv"))
                                  .string(),
                              rs[k].record.r, rs[k].record.u, rs[k].record.du);
    };
    roots(r.roots_positive, "positive");
    roots(r.roots_negative, "negative");
    std::vector<const ScanResult*> scans;
    if (r.scan_positive) scans.push_back(&*r.scan_positive);
    if (r.scan_negative) scans.push_back(&*r.scan_negative);
    if (!scans.empty()) write_scan_csv((fs::path(dir) / "scan.csv").string(), scans);
    std::ofstream out(fs::path(dir) / "report.json");
    if (!out) throw std::runtime_error("cannot write report in " + dir);
    out << report_text(r, deterministic);
}

}  // namespace lmcurv
