#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "lmcurv/pipeline.hpp"

using namespace lmcurv;

namespace {

struct Common {
    std::string config;
    std::string out;
    std::size_t mesh_cells = 0;
    std::optional<std::uint64_t> seed;
    std::optional<double> lambda;
    bool deterministic = false;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "configuration file (block text or JSON)")->required();
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--mesh-cells", c.mesh_cells, "override mesh.M");
    sub->add_option("--seed", c.seed, "override solver.seed");
    sub->add_option("--lambda", c.lambda, "override problem.lambda");
    sub->add_flag("--deterministic", c.deterministic, "omit timings from the report");
}

RunConfig configure(const Common& c) {
    auto cfg = load_config(c.config);
    if (c.mesh_cells) {
        if (c.mesh_cells < 2) throw ConfigError("mesh.M: need at least 2 cells");
        cfg.mesh.M = c.mesh_cells;
    }
    if (c.seed) cfg.solver.seed = *c.seed;
    if (c.lambda) {
        cfg.problem.lambda = *c.lambda;
        try {
            validate(cfg.problem);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    return cfg;
}

void print_summary(const RunReport& r) {
    for (const auto& i : r.invariants)
        std::cout << (i.passed ? "ok    " : "FAIL  ") << i.name << (i.passed ? "" : "  [" + i.witness + "]") << "\n";
    for (const auto& c : r.certificates)
        std::cout << "  " << c.name << ": I = " << c.energy.total << ", residual = " << c.criticality
                  << ", u(0) = " << (c.u.empty() ? 0.0 : c.u.front()) << (c.accepted ? "" : "  (rejected)") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Radial prescribed mean curvature problems in Lorentz-Minkowski space"};
    app.require_subcommand(1);
    Common c;
    std::string verify_dir;
    const std::vector<std::pair<std::string, std::string>> subs = {
        {"thresholds", "embedding constants, lambda*, lambda**, rho+-, floors"},
        {"minimize", "global and ball minima on the configured branch"},
        {"mountain-pass", "mountain-pass solution between 0 and the global minimum"},
        {"seventh", "sign-changing solution from the low-energy path"},
        {"shoot", "shooting scan and root list on the configured branch"},
        {"solve-all", "full pipeline with oracle cross-validation"},
        {"grad-iter", "frozen-gradient iteration on both branches and modes"},
        {"verify", "re-certify the profiles of an earlier run"},
        {"sweep-lambda", "lambda sweep and empirical lambda*** for the seventh solution"},
    };
    for (const auto& [name, help] : subs) {
        auto* s = app.add_subcommand(name, help);
        add_common(s, c);
        if (name == "verify") s->add_option("--run", verify_dir, "directory of the earlier run")->required();
    }
    CLI11_PARSE(app, argc, argv);
    const std::string cmd = app.get_subcommands().front()->get_name();

    RunReport rep;
    try {
        const auto cfg = configure(c);
        if (cmd == "thresholds") rep = run_thresholds(cfg);
        else if (cmd == "minimize") rep = run_minimize(cfg);
        else if (cmd == "mountain-pass") rep = run_mountain_pass(cfg);
        else if (cmd == "seventh") rep = run_seventh(cfg);
        else if (cmd == "shoot") rep = run_shoot(cfg);
        else if (cmd == "solve-all") rep = run_solve_all(cfg);
        else if (cmd == "grad-iter") rep = run_grad_iter(cfg);
        else if (cmd == "verify") rep = run_verify(cfg, verify_dir);
        else rep = run_sweep_lambda(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    }

    if (c.out.empty()) {
        std::cout << report_text(rep, c.deterministic);
    } else {
        write_run(c.out, rep, c.deterministic);
        print_summary(rep);
        std::cout << "report written to " << (std::filesystem::path(c.out) / "report.json").string() << "\n";
    }
    return rep.all_passed() ? 0 : 1;
}
