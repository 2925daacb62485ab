// Command-line experiment runner: run / compare / map / bounds subcommands
// over the benchmark problems, emitting CSV iteration histories.
//
// Exit codes: 0 success (including unconverged runs), 2 usage error,
// 3 numerical failure (non-finite values or a domain violation).

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nlkrylov/experiment.hpp"

namespace ex = nlkrylov::experiment;

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> sets;
    std::string problem;
    std::vector<std::string> methods;
    std::string output;
    bool diagnostics = false;
    std::string tol;
    std::string max_iter;
    std::string seed;
};

void add_common(CLI::App* app, CommonArgs& a) {
    app->add_option("-c,--config", a.config_path,
                    "config file: key = value lines with [problem] and [method.NAME] sections");
    app->add_option("-s,--set", a.sets,
                    "override any config key, e.g. --set problem.n=50 or --set method.gcr.k=4 "
                    "(repeatable; applied last)");
    app->add_option("-p,--problem", a.problem,
                    "problem name (same as --set problem.name=NAME)");
    app->add_option("-m,--method", a.methods,
                    "add a method: NAME or LABEL=NAME (repeatable)");
    app->add_option("-o,--output", a.output, "output directory for CSV files (default .)");
    app->add_flag("-d,--diagnostics", a.diagnostics,
                  "emit per-step bound diagnostics columns");
    app->add_option("--tol", a.tol, "relative tolerance applied to every method");
    app->add_option("--max-iter", a.max_iter, "iteration cap applied to every method");
    app->add_option("--seed", a.seed, "seed for seeded problem constructions");
}

ex::Config assemble(const CommonArgs& a) {
    ex::Config cfg;
    if (!a.config_path.empty()) cfg = ex::parse_config_file(a.config_path);
    if (!a.problem.empty()) cfg.problem["name"] = a.problem;
    for (const std::string& m : a.methods) {
        const auto eq = m.find('=');
        if (eq == std::string::npos) {
            cfg.method(m);
        } else {
            cfg.method(m.substr(0, eq))["kind"] = m.substr(eq + 1);
        }
    }
    if (!a.output.empty()) cfg.top["output"] = a.output;
    if (a.diagnostics) cfg.top["emit_diagnostics"] = "true";
    if (!a.seed.empty()) cfg.top["seed"] = a.seed;
    for (auto& [label, sec] : cfg.methods) {
        if (!a.tol.empty()) sec["tol"] = a.tol;
        if (!a.max_iter.empty()) sec["max_iter"] = a.max_iter;
    }
    for (const std::string& s : a.sets) ex::apply_override(cfg, s);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonlinear Krylov experiment runner"};
    app.require_subcommand(1);

    CommonArgs run_args, cmp_args, map_args, bounds_args;
    CLI::App* run = app.add_subcommand("run", "run each configured method, one CSV per method");
    add_common(run, run_args);
    CLI::App* cmp =
        app.add_subcommand("compare", "run >= 2 methods, one combined long-format CSV");
    add_common(cmp, cmp_args);
    CLI::App* map = app.add_subcommand(
        "map", "convergence map over a grid of starts for the singular 2-d problem");
    add_common(map, map_args);
    CLI::App* bounds =
        app.add_subcommand("bounds", "per-step convergence-bound trace for one method");
    add_common(bounds, bounds_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ex::kExitOk : ex::kExitUsage;
    }

    try {
        if (run->parsed()) return ex::run_cmd(assemble(run_args), std::cout);
        if (cmp->parsed()) return ex::compare_cmd(assemble(cmp_args), std::cout);
        if (map->parsed()) return ex::map_cmd(assemble(map_args), std::cout);
        return ex::bounds_cmd(assemble(bounds_args), std::cout);
    } catch (const ex::usage_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return ex::kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return ex::kExitUsage;
    } catch (const nlkrylov::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return ex::kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ex::kExitNumerical;
    }
}
