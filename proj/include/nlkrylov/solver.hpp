#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "basis.hpp"
#include "element.hpp"
#include "inner_solvers.hpp"
#include "operators.hpp"

namespace nlkrylov {

/// Outer methods: all share the truncated generalized-conjugate-residual
/// outer iteration and differ only in the subroutine that turns the current
/// residual into a new direction pair.
enum class Method { nlgcr, nlgmresr, nlgcro, nllgmreso };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::nlgcr: return "nlgcr";
        case Method::nlgmresr: return "nlgmresr";
        case Method::nlgcro: return "nlgcro";
        case Method::nllgmreso: return "nllgmreso";
    }
    return "?";
}

inline Method method_from_name(const std::string& s) {
    if (s == "nlgcr") return Method::nlgcr;
    if (s == "nlgmresr") return Method::nlgmresr;
    if (s == "nlgcro") return Method::nlgcro;
    if (s == "nllgmreso") return Method::nllgmreso;
    throw std::invalid_argument("unknown method: " + s);
}

struct LineSearchConfig {
    bool enabled = true;
    double c1 = 1e-3;        ///< sufficient-decrease constant
    int max_backtracks = 40; ///< halvings before accepting the smallest step tried
};

struct AdaptiveConfig {
    bool enabled = false;
    double theta = 1e-2;     ///< angle threshold between true and model residual
    int recheck_period = 5;  ///< steps between model validations in linear mode
};

struct RestartConfig {
    double C = 1.0;   ///< scale of the forward-error weight recursion
    double tau = 1e3; ///< weight threshold that triggers a window restart
};

struct IterationRecord {
    int iter = 0;
    double resnorm = 0.0;
    double rel_resnorm = 0.0;
    std::int64_t fevals = 0;  ///< cumulative solver-charged evaluations
    double alpha = 0.0;
    bool linear_mode = false; ///< residual update used the linear model
    bool restarted = false;   ///< direction window was rebuilt this step
    bool ls_exhausted = false;
    double ls_zeta = std::numeric_limits<double>::quiet_NaN();
    bool has_diag = false;
    /// Bound quantities: mu the window inexactness, eta the projection gap,
    /// c = mu + eta their bound, theta_ratio the observed relative
    /// inexactness it bounds (theta_ratio <= c up to roundoff).
    double mu = 0.0, eta = 0.0, c = 0.0, theta_ratio = 0.0;
};

struct SolveResult {
    Element x;
    bool converged = false;
    int iters = 0;
    std::int64_t fevals = 0;
    std::int64_t diag_fevals = 0;
    double r0_norm = 0.0;
    double final_resnorm = 0.0;
    std::string termination;  ///< "tolerance", "max_iter", or "breakdown"
    std::vector<IterationRecord> history;
};

struct SolverConfig {
    Method method = Method::nlgmresr;
    int k = 10;   ///< outer window; <= 0 means unbounded
    int m = 10;   ///< inner Krylov depth
    double tol = 1e-10;
    int max_iter = 100;
    LineSearchConfig linesearch;
    AdaptiveConfig adaptive;
    RestartConfig restart;
    JvpConfig jvp;
    bool diagnostics = false;  ///< per-step bound quantities, charged separately
    std::function<void(const IterationRecord&, const Element&)> observer;
};

struct LineSearchOutcome {
    double alpha = 1.0;
    Element x_new;
    Element f_new;  ///< f at the accepted point; callers negate it into the next residual
    bool negated = false;
    bool exhausted = false;
    int backtracks = 0;
    double zeta = 0.0;
};

/// Backtracking sufficient-decrease search along d. The descent estimate
/// zeta ~ <r, J d> comes from the split form (||r||^2 + <r, f(x+a d)>)/a, so
/// every trial evaluation is reused and the accepted one becomes the next
/// residual. A negative initial estimate flips the direction. Halves alpha
/// until ||f||^2 <= ||r||^2 - c1 a zeta, up to max_backtracks, then accepts
/// the smallest step tried.
inline LineSearchOutcome line_search(const ProblemHandle& h, const Element& x, Element d,
                                     const Element& r, double c1, double alpha0,
                                     int max_backtracks) {
    LineSearchOutcome out;
    const double rr = inner(r, r);
    double alpha = alpha0;
    Element xt = x;
    xt.axpy(alpha, d);
    Element ft = h.eval(xt);
    double zeta = (rr + inner(r, ft)) / alpha;
    if (zeta < 0.0) {
        out.negated = true;
        d.negate();
        zeta = -zeta;
        xt = x;
        xt.axpy(alpha, d);
        ft = h.eval(xt);
    }
    while (inner(ft, ft) > rr - c1 * alpha * zeta) {
        if (out.backtracks == max_backtracks) {
            out.exhausted = true;
            break;
        }
        alpha *= 0.5;
        xt = x;
        xt.axpy(alpha, d);
        ft = h.eval(xt);
        zeta = (rr + inner(r, ft)) / alpha;
        ++out.backtracks;
    }
    out.alpha = alpha;
    out.x_new = std::move(xt);
    out.f_new = std::move(ft);
    out.zeta = zeta;
    return out;
}

namespace detail {

struct ExtendOutcome {
    bool ok = true;
    bool restarted = false;
};

}  // namespace detail

/// Truncated nonlinear Krylov outer iteration. Per step: project the residual
/// onto the direction window (y = V^T r), step along d = P y through the line
/// search, update the residual (evaluated, or via the linear model once the
/// adaptive monitor validates it), then ask the method's subroutine for a new
/// direction pair and append it with paired Gram-Schmidt. Window restarts
/// fire on orthogonalization breakdown or when the forward-error weight
/// recursion exceeds tau.
inline SolveResult solve(const ProblemHandle& h, Element x, const SolverConfig& cfg) {
    if (cfg.method == Method::nllgmreso && cfg.k <= 0)
        throw std::invalid_argument("nllgmreso requires a finite window k >= 1");
    if (cfg.method != Method::nlgcr && cfg.m < 1)
        throw std::invalid_argument("inner depth m must be >= 1");

    SolveResult out;
    const std::int64_t fevals_base = h.fevals;
    const std::int64_t diag_base = h.diag_fevals;
    const std::size_t cap =
        cfg.k <= 0 ? static_cast<std::size_t>(cfg.max_iter) + 2 : static_cast<std::size_t>(cfg.k);
    BlockBasis P(cap), V(cap);

    Element r = h.residual(x);
    require_finite(r, "initial residual");
    const double r0n = norm(r);
    out.r0_norm = r0n;
    double resnorm = r0n;

    bool linear_mode = false;
    int steps_since_recheck = 0;
    double alpha0 = 1.0;
    std::string termination;

    auto dispatch = [&](const LinearAction& A, const Element& rhs) -> InnerResult {
        switch (cfg.method) {
            case Method::nlgcr: {
                InnerResult res;
                res.p_hat = rhs;
                res.v_hat = A.apply(rhs);
                res.fevals_used = A.counts_feval() ? 1 : 0;
                return res;
            }
            case Method::nlgmresr:
                return gmres(A, rhs, cfg.m);
            case Method::nlgcro:
                return gcro_inner(A, P, V, rhs, cfg.m);
            case Method::nllgmreso:
                if (P.empty()) return gmres(A, rhs, cfg.m + cfg.k);
                return agmres(A, rhs, cfg.m, cfg.k, P, linear_mode ? &V : nullptr);
        }
        throw std::logic_error("unreachable");
    };

    // Subroutine call plus paired append, shared by the seed and every step.
    // Degenerate inner solves fall back to the raw residual pair; breakdown
    // or a tripped weight monitor rebuilds the window from the raw pair.
    auto extend_basis = [&](const Element& xx, const Element& rr) -> detail::ExtendOutcome {
        detail::ExtendOutcome eo;
        LinearAction A(h, xx, rr, cfg.jvp);
        InnerResult res = dispatch(A, rr);
        Element p_hat = std::move(res.p_hat);
        Element v_hat = std::move(res.v_hat);
        if (res.degenerate || norm(v_hat) == 0.0) {
            P.clear();
            V.clear();
            p_hat = rr;
            v_hat = A.apply(rr);
            eo.restarted = true;
        }
        require_finite(v_hat, "direction image");
        if (norm(v_hat) == 0.0) {
            termination = "breakdown";
            eo.ok = false;
            return eo;
        }
        GsAppend gs = gram_schmidt_append(P, V, p_hat, v_hat, cfg.restart.C);
        const bool tripped = gs.appended && gs.weight > cfg.restart.tau && P.size() > 1;
        if (!gs.appended || tripped) {
            P.clear();
            V.clear();
            gs = gram_schmidt_append(P, V, p_hat, v_hat, cfg.restart.C);
            eo.restarted = true;
            if (!gs.appended) {
                termination = "breakdown";
                eo.ok = false;
            }
        }
        return eo;
    };

    if (resnorm <= cfg.tol * r0n) {
        out.converged = true;
        termination = "tolerance";
    } else if (!extend_basis(x, r).ok) {
        // seed failed; termination already set
    } else {
        for (int j = 1; j <= cfg.max_iter; ++j) {
            std::vector<double> y = block_inner(V, r);
            Element d = diamond(P, y, x);
            Element Vy = diamond(V, y, x);

            IterationRecord rec;
            rec.iter = j;
            const bool was_linear = linear_mode;

            if (cfg.diagnostics && !linear_mode) {
                // One derivative action on the combined direction gives every
                // bound quantity; charged to the diagnostics counter.
                LinearAction Ad(h, x, r, cfg.jvp, /*diagnostic=*/true);
                Element t = Ad.apply(d);
                const double fn = resnorm;
                if (fn > 0.0) {
                    rec.mu = norm(t - Vy) / fn;
                    rec.eta = norm(Vy - r) / fn;
                    rec.c = rec.mu + rec.eta;
                    rec.theta_ratio = norm(t - r) / fn;
                }
                rec.has_diag = true;
            }

            double alpha = 1.0;
            Element x_new, r_new;
            bool violated = false;
            if (!linear_mode) {
                bool negated = false;
                if (cfg.linesearch.enabled) {
                    LineSearchOutcome ls = line_search(h, x, d, r, cfg.linesearch.c1, alpha0,
                                                       cfg.linesearch.max_backtracks);
                    alpha = ls.alpha;
                    x_new = std::move(ls.x_new);
                    r_new = std::move(ls.f_new);
                    r_new.negate();
                    negated = ls.negated;
                    rec.ls_exhausted = ls.exhausted;
                    rec.ls_zeta = ls.zeta;
                    alpha0 = ls.backtracks == 0 ? std::min(1.0, 2.0 * alpha0) : 0.5 * alpha0;
                } else {
                    x_new = x;
                    x_new.axpy(1.0, d);
                    r_new = h.residual(x_new);
                }
                require_finite(r_new, "residual");
                if (cfg.adaptive.enabled) {
                    Element r_lin = r;
                    r_lin.axpy(negated ? alpha : -alpha, Vy);
                    const double nn = norm(r_new), nl = norm(r_lin);
                    // A zero-norm residual leaves the mode unchanged.
                    if (nn > 0.0 && nl > 0.0 &&
                        1.0 - inner(r_new, r_lin) / (nn * nl) < cfg.adaptive.theta) {
                        linear_mode = true;
                        steps_since_recheck = 0;
                    }
                }
            } else {
                // Linear model step: the damped model residual replaces the
                // evaluation in the sufficient-decrease test, so no f calls.
                const double rr2 = inner(r, r);
                const double zeta = inner(r, Vy);
                alpha = cfg.linesearch.enabled ? alpha0 : 1.0;
                int bt = 0;
                if (cfg.linesearch.enabled) {
                    while (bt < cfg.linesearch.max_backtracks) {
                        Element rl = r;
                        rl.axpy(-alpha, Vy);
                        if (inner(rl, rl) <= rr2 - cfg.linesearch.c1 * alpha * zeta) break;
                        alpha *= 0.5;
                        ++bt;
                    }
                    alpha0 = bt == 0 ? std::min(1.0, 2.0 * alpha0) : 0.5 * alpha0;
                }
                rec.ls_zeta = zeta;
                x_new = x;
                x_new.axpy(alpha, d);
                r_new = r;
                r_new.axpy(-alpha, Vy);
                ++steps_since_recheck;
                bool anchored = false;
                if (steps_since_recheck >= cfg.adaptive.recheck_period) {
                    Element r_nl = h.residual(x_new);
                    require_finite(r_nl, "residual");
                    const double nn = norm(r_nl), nl = norm(r_new);
                    const double angle =
                        (nn == 0.0 || nl == 0.0) ? 0.0 : 1.0 - inner(r_nl, r_new) / (nn * nl);
                    r_new = std::move(r_nl);  // re-anchor on the evaluated residual
                    steps_since_recheck = 0;
                    anchored = true;
                    if (angle >= cfg.adaptive.theta) {
                        linear_mode = false;
                        violated = true;
                        P.clear();
                        V.clear();
                    }
                }
                if (linear_mode && !anchored && norm(r_new) <= cfg.tol * r0n) {
                    // The model residual alone cannot declare success: confirm
                    // with one evaluation, and treat disagreement as a model
                    // violation (drop to nonlinear mode with a fresh window).
                    Element r_nl = h.residual(x_new);
                    require_finite(r_nl, "residual");
                    r_new = std::move(r_nl);
                    steps_since_recheck = 0;
                    if (norm(r_new) > cfg.tol * r0n) {
                        linear_mode = false;
                        violated = true;
                        P.clear();
                        V.clear();
                    }
                }
            }

            const double resnorm_new = norm(r_new);
            rec.resnorm = resnorm_new;
            rec.rel_resnorm = r0n > 0.0 ? resnorm_new / r0n : 0.0;
            rec.alpha = alpha;
            rec.linear_mode = was_linear;
            rec.fevals = h.fevals - fevals_base;

            const bool converged = resnorm_new <= cfg.tol * r0n;
            bool step_ok = true;
            if (!converged && j < cfg.max_iter) {
                detail::ExtendOutcome eo = extend_basis(x_new, r_new);
                step_ok = eo.ok;
                rec.restarted = eo.restarted || violated;
            } else {
                rec.restarted = violated;
            }

            out.history.push_back(rec);
            if (cfg.observer) cfg.observer(rec, x_new);
            x = std::move(x_new);
            r = std::move(r_new);
            resnorm = resnorm_new;
            if (converged) {
                out.converged = true;
                termination = "tolerance";
                break;
            }
            if (!step_ok) break;  // termination set to breakdown
        }
        if (termination.empty()) termination = out.converged ? "tolerance" : "max_iter";
    }

    out.x = std::move(x);
    out.final_resnorm = resnorm;
    out.iters = static_cast<int>(out.history.size());
    out.fevals = h.fevals - fevals_base;
    out.diag_fevals = h.diag_fevals - diag_base;
    out.termination = termination;
    return out;
}

}  // namespace nlkrylov
