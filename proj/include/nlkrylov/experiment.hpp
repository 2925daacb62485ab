#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "baselines.hpp"
#include "problems.hpp"
#include "solver.hpp"

namespace nlkrylov::experiment {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Malformed config, unknown name, violated precondition; maps to exit 2.
class usage_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Section = std::map<std::string, std::string>;

/// A parsed experiment description: top-level keys, the [problem] section,
/// and the [method.NAME] sections in file order.
struct Config {
    Section top;
    Section problem;
    std::vector<std::pair<std::string, Section>> methods;

    Section* find_method(const std::string& label) {
        for (auto& [name, sec] : methods)
            if (name == label) return &sec;
        return nullptr;
    }

    /// Existing section for label, or a fresh one appended at the end.
    Section& method(const std::string& label) {
        if (Section* s = find_method(label)) return *s;
        methods.emplace_back(label, Section{});
        return methods.back().second;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const char* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

inline bool safe_label(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
    return true;
}

}  // namespace detail

/// Parses `key = value` lines with `#` comments and [problem] / [method.NAME]
/// section headers. Keys before any header are top-level.
inline Config parse_config_text(const std::string& text) {
    Config cfg;
    Section* cur = &cfg.top;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::string where = "config line " + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']') throw usage_error(where + ": unterminated section header");
            const std::string name = detail::trim(line.substr(1, line.size() - 2));
            if (name == "problem") {
                cur = &cfg.problem;
            } else if (name.rfind("method.", 0) == 0) {
                const std::string label = name.substr(7);
                if (!detail::safe_label(label))
                    throw usage_error(where + ": method name must be [A-Za-z0-9_-]+: " + label);
                cur = &cfg.method(label);
            } else {
                throw usage_error(where + ": unknown section [" + name +
                                  "] (expected [problem] or [method.NAME])");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw usage_error(where + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        if (key.empty()) throw usage_error(where + ": empty key");
        (*cur)[key] = detail::trim(line.substr(eq + 1));
    }
    return cfg;
}

inline Config parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw usage_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// One command-line override `dotted.key=value`: a bare key addresses the
/// top level, `problem.key` and `method.NAME.key` the sections. Overrides
/// are applied after the file, so flags win.
inline void apply_override(Config& cfg, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw usage_error("override needs key=value: " + spec);
    const std::string path = detail::trim(spec.substr(0, eq));
    const std::string val = detail::trim(spec.substr(eq + 1));
    if (path.rfind("problem.", 0) == 0) {
        const std::string key = path.substr(8);
        if (key.empty()) throw usage_error("empty key in override: " + spec);
        cfg.problem[key] = val;
    } else if (path.rfind("method.", 0) == 0) {
        const std::string rest = path.substr(7);
        const auto dot = rest.find('.');
        if (dot == std::string::npos || dot == 0 || dot + 1 == rest.size())
            throw usage_error("method override needs method.NAME.key=value: " + spec);
        const std::string label = rest.substr(0, dot);
        if (!detail::safe_label(label))
            throw usage_error("method name must be [A-Za-z0-9_-]+: " + label);
        cfg.method(label)[rest.substr(dot + 1)] = val;
    } else if (!path.empty() && path.find('.') == std::string::npos) {
        cfg.top[path] = val;
    } else {
        throw usage_error("unknown override path: " + path);
    }
}

inline std::string get_string(const Section& s, const std::string& key, const std::string& dflt) {
    const auto it = s.find(key);
    return it == s.end() ? dflt : it->second;
}

inline double get_double(const Section& s, const std::string& key, double dflt) {
    const auto it = s.find(key);
    if (it == s.end()) return dflt;
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(it->second, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != it->second.size())
        throw usage_error("key " + key + ": not a number: " + it->second);
    return v;
}

inline long long get_int(const Section& s, const std::string& key, long long dflt) {
    const auto it = s.find(key);
    if (it == s.end()) return dflt;
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(it->second, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != it->second.size())
        throw usage_error("key " + key + ": not an integer: " + it->second);
    return v;
}

inline bool get_bool(const Section& s, const std::string& key, bool dflt) {
    const auto it = s.find(key);
    if (it == s.end()) return dflt;
    const std::string v = detail::lower(it->second);
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw usage_error("key " + key + ": not a boolean: " + it->second);
}

inline void require_known_keys(const Section& s, const std::vector<std::string>& known,
                               const std::string& where) {
    for (const auto& [k, v] : s) {
        if (std::find(known.begin(), known.end(), k) == known.end()) {
            std::string msg = "unknown key '" + k + "' in " + where + "; known keys:";
            for (const auto& kk : known) msg += " " + kk;
            throw usage_error(msg);
        }
    }
}

inline const std::vector<std::string>& known_problem_names() {
    static const std::vector<std::string> names = {"linear",     "bratu",         "hequation",
                                                   "singular2d", "lennard_jones", "nare"};
    return names;
}

inline const std::vector<std::string>& known_method_names() {
    static const std::vector<std::string> names = {
        "nlgcr", "nlgmresr", "nlgcro", "nllgmreso", "newton_krylov", "nl_orthomin", "anderson"};
    return names;
}

namespace detail {

inline std::size_t dim_key(const Section& s, const std::string& key, long long dflt,
                           long long max_value) {
    const long long v = get_int(s, key, dflt);
    if (v < 1 || v > max_value)
        throw usage_error("key " + key + ": must be in [1, " + std::to_string(max_value) +
                          "]: " + std::to_string(v));
    return static_cast<std::size_t>(v);
}

inline std::vector<double> parse_number_list(const std::string& text, const std::string& key) {
    std::string s = text;
    for (char& c : s)
        if (c == ',') c = ' ';
    std::istringstream in(s);
    std::vector<double> out;
    double v = 0.0;
    while (in >> v) out.push_back(v);
    if (!in.eof()) throw usage_error("key " + key + ": not a number list: " + text);
    return out;
}

}  // namespace detail

/// Instantiates the named benchmark problem, applies the optional x0_rule
/// (default | zeros | ones) and explicit x0 list, and returns the handle.
inline ProblemHandle build_problem(const Section& ps, std::uint64_t default_seed) {
    const std::string name = get_string(ps, "name", "");
    if (name.empty()) throw usage_error("[problem] section needs name = <problem>");
    const std::vector<std::string> base_keys = {"name", "x0", "x0_rule"};
    auto keys = [&base_keys](std::initializer_list<const char*> extra) {
        std::vector<std::string> k = base_keys;
        for (const char* e : extra) k.emplace_back(e);
        return k;
    };
    ProblemHandle h;
    if (name == "linear") {
        require_known_keys(ps, keys({"n", "seed"}), "[problem] linear");
        h = make_random_linear(detail::dim_key(ps, "n", 30, 4096),
                               static_cast<std::uint64_t>(get_int(
                                   ps, "seed", static_cast<long long>(default_seed))));
    } else if (name == "bratu") {
        require_known_keys(ps, keys({"N", "lambda"}), "[problem] bratu");
        h = make_bratu(detail::dim_key(ps, "N", 100, 2048), get_double(ps, "lambda", 0.5));
    } else if (name == "hequation") {
        require_known_keys(ps, keys({"n", "omega"}), "[problem] hequation");
        h = make_hequation(detail::dim_key(ps, "n", 1000, 65536), get_double(ps, "omega", 0.99));
    } else if (name == "singular2d") {
        require_known_keys(ps, keys({}), "[problem] singular2d");
        h = make_singular2d();
    } else if (name == "lennard_jones") {
        require_known_keys(ps, keys({"cells", "perturb_scale", "seed"}),
                           "[problem] lennard_jones");
        h = make_lennard_jones(detail::dim_key(ps, "cells", 2, 16),
                               get_double(ps, "perturb_scale", 0.01),
                               static_cast<std::uint64_t>(
                                   get_int(ps, "seed", static_cast<long long>(default_seed))))
                .handle;
    } else if (name == "nare") {
        require_known_keys(ps, keys({"n", "p", "r", "s"}), "[problem] nare");
        h = make_nare(detail::dim_key(ps, "n", 100, 65536), detail::dim_key(ps, "p", 10, 4096),
                      detail::dim_key(ps, "r", 3, 4096), detail::dim_key(ps, "s", 5, 4096));
    } else {
        std::string msg = "unknown problem '" + name + "'; known problems:";
        for (const auto& nm : known_problem_names()) msg += " " + nm;
        throw usage_error(msg);
    }
    const std::string rule = get_string(ps, "x0_rule", "default");
    if (rule == "zeros") {
        h.x0.set_zero();
    } else if (rule == "ones") {
        for (double& v : h.x0.data()) v = 1.0;
    } else if (rule != "default") {
        throw usage_error("unknown x0_rule '" + rule + "' (default, zeros, ones)");
    }
    const std::string x0s = get_string(ps, "x0", "");
    if (!x0s.empty()) {
        const std::vector<double> vals = detail::parse_number_list(x0s, "x0");
        if (vals.size() != h.x0.size())
            throw usage_error("x0 needs " + std::to_string(h.x0.size()) + " entries, got " +
                              std::to_string(vals.size()));
        for (std::size_t i = 0; i < vals.size(); ++i) h.x0[i] = vals[i];
    }
    return h;
}

/// One configured method: the label names the output file, the kind selects
/// the algorithm, and exactly one of the two config structs applies.
struct MethodEntry {
    std::string label;
    std::string kind;
    bool nested = false;  ///< one of the nonlinear Krylov methods
    SolverConfig scfg;
    BaselineConfig bcfg;
};

inline MethodEntry parse_method(const std::string& label, const Section& ms) {
    MethodEntry me;
    me.label = label;
    me.kind = get_string(ms, "kind", label);
    const auto& known = known_method_names();
    if (std::find(known.begin(), known.end(), me.kind) == known.end()) {
        std::string msg = "unknown method '" + me.kind + "'; known methods:";
        for (const auto& nm : known) msg += " " + nm;
        throw usage_error(msg);
    }
    me.nested = me.kind == "nlgcr" || me.kind == "nlgmresr" || me.kind == "nlgcro" ||
                me.kind == "nllgmreso";
    const std::string where = "[method." + label + "]";
    if (me.nested) {
        require_known_keys(ms,
                           {"kind", "k", "m", "tol", "max_iter", "linesearch", "c1",
                            "max_backtracks", "adaptive", "theta", "recheck_period", "restart_c",
                            "restart_tau", "force_fd", "diagnostics"},
                           where);
        SolverConfig& c = me.scfg;
        c.method = method_from_name(me.kind);
        c.k = static_cast<int>(get_int(ms, "k", c.k));
        c.m = static_cast<int>(get_int(ms, "m", c.m));
        c.tol = get_double(ms, "tol", c.tol);
        c.max_iter = static_cast<int>(get_int(ms, "max_iter", c.max_iter));
        c.linesearch.enabled = get_bool(ms, "linesearch", c.linesearch.enabled);
        c.linesearch.c1 = get_double(ms, "c1", c.linesearch.c1);
        c.linesearch.max_backtracks =
            static_cast<int>(get_int(ms, "max_backtracks", c.linesearch.max_backtracks));
        c.adaptive.enabled = get_bool(ms, "adaptive", c.adaptive.enabled);
        c.adaptive.theta = get_double(ms, "theta", c.adaptive.theta);
        c.adaptive.recheck_period =
            static_cast<int>(get_int(ms, "recheck_period", c.adaptive.recheck_period));
        c.restart.C = get_double(ms, "restart_c", c.restart.C);
        c.restart.tau = get_double(ms, "restart_tau", c.restart.tau);
        c.jvp.force_fd = get_bool(ms, "force_fd", c.jvp.force_fd);
        c.diagnostics = get_bool(ms, "diagnostics", c.diagnostics);
        if (c.max_iter < 1) throw usage_error(where + ": max_iter must be >= 1");
    } else {
        require_known_keys(ms,
                           {"kind", "tol", "max_iter", "m_max", "eta0", "eta_min", "eta_max",
                            "linesearch", "c1", "max_backtracks", "k", "beta", "gn_max",
                            "force_fd"},
                           where);
        BaselineConfig& c = me.bcfg;
        c.tol = get_double(ms, "tol", c.tol);
        c.max_iter = static_cast<int>(get_int(ms, "max_iter", c.max_iter));
        c.m_max = static_cast<int>(get_int(ms, "m_max", c.m_max));
        c.eta0 = get_double(ms, "eta0", c.eta0);
        c.eta_min = get_double(ms, "eta_min", c.eta_min);
        c.eta_max = get_double(ms, "eta_max", c.eta_max);
        c.linesearch.enabled = get_bool(ms, "linesearch", c.linesearch.enabled);
        c.linesearch.c1 = get_double(ms, "c1", c.linesearch.c1);
        c.linesearch.max_backtracks =
            static_cast<int>(get_int(ms, "max_backtracks", c.linesearch.max_backtracks));
        c.k = static_cast<int>(get_int(ms, "k", c.k));
        c.beta = get_double(ms, "beta", c.beta);
        c.gn_max = static_cast<int>(get_int(ms, "gn_max", c.gn_max));
        c.jvp.force_fd = get_bool(ms, "force_fd", c.jvp.force_fd);
        if (c.max_iter < 1) throw usage_error(where + ": max_iter must be >= 1");
    }
    return me;
}

/// Runs one configured method from x0 with fresh evaluation counters.
inline SolveResult run_method(const ProblemHandle& h, const Element& x0, const MethodEntry& me) {
    h.fevals = 0;
    h.diag_fevals = 0;
    if (me.nested) return solve(h, x0, me.scfg);
    if (me.kind == "newton_krylov") return newton_krylov_solve(h, x0, me.bcfg);
    if (me.kind == "nl_orthomin") return nl_orthomin_solve(h, x0, me.bcfg);
    return anderson_solve(h, x0, me.bcfg);
}

/// 17 significant digits in scientific notation: value-deterministic and
/// round-trip exact for binary64.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

namespace detail {

inline std::filesystem::path output_dir(const Config& cfg) {
    const std::string dir = get_string(cfg.top, "output", ".");
    std::filesystem::path p(dir);
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (!std::filesystem::is_directory(p))
        throw usage_error("output path not writable: " + dir);
    return p;
}

inline std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw usage_error("cannot write " + path.string());
    return f;
}

inline void write_history_csv(const std::filesystem::path& path, const SolveResult& res,
                              bool diag_columns) {
    std::ofstream f = open_csv(path);
    f << "iter,resnorm,rel_resnorm,fevals,alpha,mode,restarted";
    if (diag_columns) f << ",mu,eta,c,theta_ratio";
    f << "\n";
    for (const IterationRecord& r : res.history) {
        f << r.iter << ',' << fmt(r.resnorm) << ',' << fmt(r.rel_resnorm) << ',' << r.fevals
          << ',' << fmt(r.alpha) << ',' << (r.linear_mode ? "linear" : "nonlinear") << ','
          << (r.restarted ? 1 : 0);
        if (diag_columns)
            f << ',' << fmt(r.mu) << ',' << fmt(r.eta) << ',' << fmt(r.c) << ','
              << fmt(r.theta_ratio);
        f << "\n";
    }
}

inline void print_summary(std::ostream& os,
                          const std::vector<std::pair<std::string, SolveResult>>& rows) {
    os << std::left << std::setw(16) << "method" << std::setw(11) << "converged" << std::setw(7)
       << "iters" << std::setw(15) << "rel_resnorm" << std::setw(9) << "fevals"
       << "termination\n";
    for (const auto& [label, res] : rows) {
        const double rel = res.r0_norm > 0.0 ? res.final_resnorm / res.r0_norm : 0.0;
        char relbuf[24];
        std::snprintf(relbuf, sizeof relbuf, "%.3e", rel);
        os << std::left << std::setw(16) << label << std::setw(11)
           << (res.converged ? "true" : "false") << std::setw(7) << res.iters << std::setw(15)
           << relbuf << std::setw(9) << res.fevals << res.termination << "\n";
    }
}

inline std::vector<MethodEntry> parse_methods(const Config& cfg, bool emit_diagnostics) {
    std::vector<MethodEntry> entries;
    entries.reserve(cfg.methods.size());
    for (const auto& [label, sec] : cfg.methods) {
        MethodEntry me = parse_method(label, sec);
        if (emit_diagnostics && me.nested) me.scfg.diagnostics = true;
        entries.push_back(std::move(me));
    }
    return entries;
}

inline const std::vector<std::string>& run_top_keys() {
    static const std::vector<std::string> keys = {"output", "emit_diagnostics", "seed"};
    return keys;
}

}  // namespace detail

/// Executes every configured method on the problem; one CSV per method named
/// <output>/<label>.csv, summary table on os. Breakdown and stagnation are
/// recorded, not fatal; only non-finite failure escapes (exit 3 in the CLI).
inline int run_cmd(const Config& cfg, std::ostream& os) {
    require_known_keys(cfg.top, detail::run_top_keys(), "top level");
    if (cfg.methods.empty()) throw usage_error("no methods configured; add a [method.NAME] section");
    const bool diag = get_bool(cfg.top, "emit_diagnostics", false);
    const std::vector<MethodEntry> entries = detail::parse_methods(cfg, diag);
    const ProblemHandle h =
        build_problem(cfg.problem, static_cast<std::uint64_t>(get_int(cfg.top, "seed", 1)));
    const std::filesystem::path dir = detail::output_dir(cfg);
    std::vector<std::pair<std::string, SolveResult>> results;
    for (const MethodEntry& me : entries) {
        SolveResult res = run_method(h, h.x0, me);
        detail::write_history_csv(dir / (me.label + ".csv"), res, diag && me.nested);
        results.emplace_back(me.label, std::move(res));
    }
    detail::print_summary(os, results);
    return kExitOk;
}

/// Runs >= 2 methods from the identical start on the identical problem and
/// writes one combined long-format CSV <output>/compare.csv.
inline int compare_cmd(const Config& cfg, std::ostream& os) {
    require_known_keys(cfg.top, detail::run_top_keys(), "top level");
    if (cfg.methods.size() < 2) throw usage_error("compare needs at least 2 methods");
    const std::vector<MethodEntry> entries = detail::parse_methods(cfg, false);
    const ProblemHandle h =
        build_problem(cfg.problem, static_cast<std::uint64_t>(get_int(cfg.top, "seed", 1)));
    const std::filesystem::path dir = detail::output_dir(cfg);
    std::ofstream f = detail::open_csv(dir / "compare.csv");
    f << "method,iter,resnorm,fevals\n";
    std::vector<std::pair<std::string, SolveResult>> results;
    for (const MethodEntry& me : entries) {
        SolveResult res = run_method(h, h.x0, me);
        for (const IterationRecord& r : res.history)
            f << me.label << ',' << r.iter << ',' << fmt(r.resnorm) << ',' << r.fevals << "\n";
        results.emplace_back(me.label, std::move(res));
    }
    detail::print_summary(os, results);
    return kExitOk;
}

/// Convergence map on the singular two-dimensional problem: one run per grid
/// start (cap 200 iterations, relative tolerance 1e-10), one CSV row per
/// start with the geometric-mean residual contraction over the run.
inline int map_cmd(const Config& cfg, std::ostream& os) {
    static const std::vector<std::string> top_keys = {
        "output", "emit_diagnostics", "seed", "x1_min", "x1_max", "x2_min", "x2_max", "n_grid"};
    require_known_keys(cfg.top, top_keys, "top level");
    if (get_string(cfg.problem, "name", "singular2d") != "singular2d")
        throw usage_error("the convergence map requires problem name = singular2d");
    if (cfg.methods.size() != 1) throw usage_error("the convergence map needs exactly one method");
    const double x1min = get_double(cfg.top, "x1_min", -0.1);
    const double x1max = get_double(cfg.top, "x1_max", 0.1);
    const double x2min = get_double(cfg.top, "x2_min", -0.1);
    const double x2max = get_double(cfg.top, "x2_max", 0.1);
    const long long ng = get_int(cfg.top, "n_grid", 200);
    if (ng < 2 || ng > 4096) throw usage_error("n_grid must be in [2, 4096]");
    if (!(x1max > x1min) || !(x2max > x2min)) throw usage_error("empty grid range");

    MethodEntry me = parse_method(cfg.methods.front().first, cfg.methods.front().second);
    me.scfg.tol = 1e-10;
    me.scfg.max_iter = 200;
    me.bcfg.tol = 1e-10;
    me.bcfg.max_iter = 200;

    Section ps = cfg.problem;
    ps["name"] = "singular2d";
    const ProblemHandle h =
        build_problem(ps, static_cast<std::uint64_t>(get_int(cfg.top, "seed", 1)));
    const std::filesystem::path dir = detail::output_dir(cfg);
    std::ofstream f = detail::open_csv(dir / "map.csv");
    f << "x1,x2,iters,converged,mean_contraction\n";
    long long converged_count = 0;
    for (long long i = 0; i < ng; ++i) {
        const double x1 = x1min + (x1max - x1min) * static_cast<double>(i) /
                                      static_cast<double>(ng - 1);
        for (long long j = 0; j < ng; ++j) {
            const double x2 = x2min + (x2max - x2min) * static_cast<double>(j) /
                                          static_cast<double>(ng - 1);
            Element x0 = Element::vector(2);
            x0[0] = x1;
            x0[1] = x2;
            const SolveResult res = run_method(h, x0, me);
            double contraction = 0.0;
            if (res.iters > 0 && res.r0_norm > 0.0)
                contraction =
                    std::pow(res.final_resnorm / res.r0_norm, 1.0 / static_cast<double>(res.iters));
            f << fmt(x1) << ',' << fmt(x2) << ',' << res.iters << ','
              << (res.converged ? 1 : 0) << ',' << fmt(contraction) << "\n";
            converged_count += res.converged ? 1 : 0;
        }
    }
    os << "grid " << ng << " x " << ng << ", converged " << converged_count << "/" << ng * ng
       << "\n";
    return kExitOk;
}

/// Bound-diagnostic trace of a single nonlinear Krylov method: per-step mu,
/// eta, their sum c_j, the observed relative inexactness, and the post-hoc
/// uniform constant max_j c_j; reports the fraction of steps on which the
/// bound held.
inline int bounds_cmd(const Config& cfg, std::ostream& os) {
    require_known_keys(cfg.top, detail::run_top_keys(), "top level");
    if (cfg.methods.size() != 1) throw usage_error("bounds needs exactly one method");
    MethodEntry me = parse_method(cfg.methods.front().first, cfg.methods.front().second);
    if (!me.nested)
        throw usage_error(
            "bounds requires a nonlinear Krylov method (nlgcr, nlgmresr, nlgcro, nllgmreso)");
    me.scfg.diagnostics = true;
    const ProblemHandle h =
        build_problem(cfg.problem, static_cast<std::uint64_t>(get_int(cfg.top, "seed", 1)));
    const SolveResult res = run_method(h, h.x0, me);
    double c_uniform = 0.0;
    for (const IterationRecord& r : res.history)
        if (r.has_diag) c_uniform = std::max(c_uniform, r.c);
    const std::filesystem::path dir = detail::output_dir(cfg);
    std::ofstream f = detail::open_csv(dir / "bounds.csv");
    f << "iter,mu,eta,c_j,theta_ratio,c_uniform\n";
    long long n_diag = 0, n_held = 0;
    for (const IterationRecord& r : res.history) {
        if (!r.has_diag) continue;
        f << r.iter << ',' << fmt(r.mu) << ',' << fmt(r.eta) << ',' << fmt(r.c) << ','
          << fmt(r.theta_ratio) << ',' << fmt(c_uniform) << "\n";
        ++n_diag;
        if (r.theta_ratio <= r.c + 1e-10) ++n_held;
    }
    std::vector<std::pair<std::string, SolveResult>> rows;
    rows.emplace_back(me.label, res);
    detail::print_summary(os, rows);
    os << "c_uniform " << fmt(c_uniform) << "\n";
    if (n_diag > 0) {
        char frac[24];
        std::snprintf(frac, sizeof frac, "%.4f",
                      static_cast<double>(n_held) / static_cast<double>(n_diag));
        os << "bound held on " << n_held << "/" << n_diag << " steps (fraction " << frac << ")\n";
    } else {
        os << "no diagnostic steps recorded\n";
    }
    return kExitOk;
}

}  // namespace nlkrylov::experiment
