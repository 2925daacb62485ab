#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "basis.hpp"
#include "element.hpp"
#include "inner_solvers.hpp"
#include "lstsq.hpp"
#include "operators.hpp"
#include "solver.hpp"

namespace nlkrylov {

/// Shared knobs for the reference methods. k doubles as the direction window
/// of the orthogonal-minimization scheme and the difference window of
/// Anderson acceleration; beta is Anderson's fixed-point mixing.
struct BaselineConfig {
    double tol = 1e-10;
    int max_iter = 100;
    int m_max = 100;  ///< inexact-Newton inner iteration cap
    double eta0 = 1.0 / 3.0;
    double eta_exponent = 1.6180339887498949;  // (1 + sqrt(5)) / 2
    double eta_min = 1e-6;
    double eta_max = 1.0;
    LineSearchConfig linesearch;
    JvpConfig jvp;
    int k = 10;
    double beta = 1.0;
    int gn_max = 20;
    std::function<void(const IterationRecord&, const Element&)> observer;
};

namespace detail {

inline void push_record(SolveResult& out, const BaselineConfig& cfg, int iter, double resnorm,
                        double r0n, std::int64_t fevals, double alpha, const Element& x_new) {
    IterationRecord rec;
    rec.iter = iter;
    rec.resnorm = resnorm;
    rec.rel_resnorm = r0n > 0.0 ? resnorm / r0n : 0.0;
    rec.fevals = fevals;
    rec.alpha = alpha;
    out.history.push_back(rec);
    if (cfg.observer) cfg.observer(rec, x_new);
}

/// Cholesky solve of a symmetric positive definite system; returns false when
/// a pivot is not positive (the caller then shifts the diagonal).
inline bool cholesky_solve(SmallMat N, std::vector<double> g, std::vector<double>& y) {
    const std::size_t n = N.rows;
    for (std::size_t j = 0; j < n; ++j) {
        double d = N.at(j, j);
        for (std::size_t l = 0; l < j; ++l) d -= N.at(j, l) * N.at(j, l);
        if (d <= 0.0) return false;
        d = std::sqrt(d);
        N.at(j, j) = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = N.at(i, j);
            for (std::size_t l = 0; l < j; ++l) s -= N.at(i, l) * N.at(j, l);
            N.at(i, j) = s / d;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = g[i];
        for (std::size_t l = 0; l < i; ++l) s -= N.at(i, l) * g[l];
        g[i] = s / N.at(i, i);
    }
    y.assign(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = g[ii];
        for (std::size_t l = ii + 1; l < n; ++l) s -= N.at(l, ii) * y[l];
        y[ii] = s / N.at(ii, ii);
    }
    return true;
}

}  // namespace detail

/// Inexact Newton: each step solves J_f(x) d = r by GMRES to the adaptive
/// forcing tolerance eta_j = (||r_j|| / ||r_{j-1}||)^((1+sqrt(5))/2), clamped
/// to [eta_min, eta_max], then takes the same backtracking line search as the
/// nonlinear Krylov methods.
inline SolveResult newton_krylov_solve(const ProblemHandle& h, Element x,
                                       const BaselineConfig& cfg) {
    SolveResult out;
    const std::int64_t base = h.fevals;
    Element r = h.residual(x);
    require_finite(r, "initial residual");
    const double r0n = norm(r);
    out.r0_norm = r0n;
    double resnorm = r0n;
    double eta = cfg.eta0;
    double alpha0 = 1.0;

    if (resnorm <= cfg.tol * r0n) {
        out.converged = true;
    } else {
        for (int j = 1; j <= cfg.max_iter; ++j) {
            LinearAction A(h, x, r, cfg.jvp);
            InnerResult inner = gmres(A, r, cfg.m_max, eta);
            Element d = std::move(inner.p_hat);

            double alpha = 1.0;
            Element x_new, r_new;
            if (cfg.linesearch.enabled) {
                LineSearchOutcome ls = line_search(h, x, d, r, cfg.linesearch.c1, alpha0,
                                                   cfg.linesearch.max_backtracks);
                alpha = ls.alpha;
                x_new = std::move(ls.x_new);
                r_new = std::move(ls.f_new);
                r_new.negate();
                alpha0 = ls.backtracks == 0 ? std::min(1.0, 2.0 * alpha0) : 0.5 * alpha0;
            } else {
                x_new = x;
                x_new.axpy(1.0, d);
                r_new = h.residual(x_new);
            }
            require_finite(r_new, "residual");
            const double rn = norm(r_new);
            eta = std::min(cfg.eta_max, std::max(cfg.eta_min, std::pow(rn / resnorm, cfg.eta_exponent)));
            detail::push_record(out, cfg, j, rn, r0n, h.fevals - base, alpha, x_new);
            x = std::move(x_new);
            r = std::move(r_new);
            resnorm = rn;
            if (resnorm <= cfg.tol * r0n) {
                out.converged = true;
                break;
            }
        }
    }
    out.x = std::move(x);
    out.final_resnorm = resnorm;
    out.iters = static_cast<int>(out.history.size());
    out.fevals = h.fevals - base;
    out.termination = out.converged ? "tolerance" : "max_iter";
    return out;
}

/// Orthogonal-minimization scheme over a truncated direction window: each
/// step minimizes ||f(x + P y)|| by damped-free Gauss-Newton (columns of the
/// local Jacobian formed by one derivative action per direction), then
/// appends the residual orthogonalized in the J-image inner product. No
/// image basis is stored, which is what the nonlinear Krylov recurrence
/// improves on.
inline SolveResult nl_orthomin_solve(const ProblemHandle& h, Element x, const BaselineConfig& cfg) {
    SolveResult out;
    const std::int64_t base = h.fevals;
    Element r = h.residual(x);
    require_finite(r, "initial residual");
    const double r0n = norm(r);
    out.r0_norm = r0n;
    double resnorm = r0n;
    const std::size_t cap = cfg.k <= 0 ? static_cast<std::size_t>(cfg.max_iter) + 2
                                       : static_cast<std::size_t>(cfg.k);
    BlockBasis P(cap);

    if (resnorm <= cfg.tol * r0n) {
        out.converged = true;
    } else {
        P.append(r, 0.0);
        for (int j = 1; j <= cfg.max_iter; ++j) {
            const std::size_t nj = P.size();
            std::vector<double> y(nj, 0.0);
            for (int it = 0; it < cfg.gn_max; ++it) {
                Element xs = x;
                for (std::size_t i = 0; i < nj; ++i) xs.axpy(y[i], P.col(i));
                Element s = h.eval(xs);
                Element rs = s;
                rs.negate();
                LinearAction As(h, xs, rs, cfg.jvp);
                std::vector<Element> jp;
                jp.reserve(nj);
                for (std::size_t i = 0; i < nj; ++i) jp.push_back(As.apply(P.col(i)));
                SmallMat N(nj, nj);
                std::vector<double> g(nj);
                for (std::size_t a = 0; a < nj; ++a) {
                    g[a] = -inner(jp[a], s);
                    for (std::size_t b = 0; b <= a; ++b) {
                        N.at(a, b) = inner(jp[a], jp[b]);
                        N.at(b, a) = N.at(a, b);
                    }
                }
                std::vector<double> delta;
                if (!detail::cholesky_solve(N, g, delta)) {
                    for (std::size_t a = 0; a < nj; ++a) N.at(a, a) += 1e-12;
                    delta = solve_dense(N, g);
                }
                double dn = 0.0, yn = 0.0;
                for (std::size_t i = 0; i < nj; ++i) {
                    y[i] += delta[i];
                    dn += delta[i] * delta[i];
                    yn += y[i] * y[i];
                }
                if (std::sqrt(dn) <= 1e-12 * (1.0 + std::sqrt(yn))) break;
            }
            Element x_new = x;
            for (std::size_t i = 0; i < nj; ++i) x_new.axpy(y[i], P.col(i));
            Element r_new = h.residual(x_new);
            require_finite(r_new, "residual");
            const double rn = norm(r_new);
            detail::push_record(out, cfg, j, rn, r0n, h.fevals - base, 1.0, x_new);
            x = std::move(x_new);
            r = std::move(r_new);
            resnorm = rn;
            if (resnorm <= cfg.tol * r0n) {
                out.converged = true;
                break;
            }
            if (j == cfg.max_iter) break;
            LinearAction A2(h, x, r, cfg.jvp);
            Element jr = A2.apply(r);
            Element p_new = r;
            for (std::size_t i = 0; i < nj; ++i) {
                Element jp = A2.apply(P.col(i));
                const double den = inner(jp, jp);
                if (den > 0.0) p_new.axpy(-inner(jr, jp) / den, P.col(i));
            }
            P.append(std::move(p_new), 0.0);
        }
    }
    out.x = std::move(x);
    out.final_resnorm = resnorm;
    out.iters = static_cast<int>(out.history.size());
    out.fevals = h.fevals - base;
    out.termination = out.converged ? "tolerance" : "max_iter";
    return out;
}

/// Anderson acceleration (type II) on the fixed-point map g(x) = x + beta
/// f(x): least squares over the window of successive w = beta f differences,
/// oldest column truncated first, no line search. k = 0 degenerates to the
/// plain damped fixed-point iteration; a rank-deficient window falls back to
/// the plain step for that iteration.
inline SolveResult anderson_solve(const ProblemHandle& h, Element x, const BaselineConfig& cfg) {
    SolveResult out;
    const std::int64_t base = h.fevals;
    Element fx = h.eval(x);
    require_finite(fx, "initial residual");
    const double r0n = norm(fx);
    out.r0_norm = r0n;
    double resnorm = r0n;

    std::vector<Element> dX, dW;
    if (resnorm <= cfg.tol * r0n) {
        out.converged = true;
    } else {
        for (int j = 1; j <= cfg.max_iter; ++j) {
            Element w = cfg.beta * fx;
            Element x_new = x + w;
            if (!dW.empty()) {
                SmallMat M(w.size(), dW.size());
                for (std::size_t c = 0; c < dW.size(); ++c)
                    for (std::size_t i = 0; i < w.size(); ++i) M.at(i, c) = dW[c][i];
                LstsqResult ls = dense_lstsq(std::move(M), w.data());
                if (ls.full_rank)
                    for (std::size_t c = 0; c < dW.size(); ++c) {
                        x_new.axpy(-ls.gamma[c], dX[c]);
                        x_new.axpy(-ls.gamma[c], dW[c]);
                    }
            }
            Element fx_new = h.eval(x_new);
            require_finite(fx_new, "residual");
            const double rn = norm(fx_new);
            if (cfg.k > 0) {
                // The window never exceeds the space dimension, so the
                // least-squares matrix stays tall.
                const std::size_t window =
                    std::min(static_cast<std::size_t>(cfg.k), x.size());
                while (dX.size() >= window) {
                    dX.erase(dX.begin());
                    dW.erase(dW.begin());
                }
                dX.push_back(x_new - x);
                dW.push_back(cfg.beta * fx_new - w);
            }
            detail::push_record(out, cfg, j, rn, r0n, h.fevals - base, 1.0, x_new);
            x = std::move(x_new);
            fx = std::move(fx_new);
            resnorm = rn;
            if (resnorm <= cfg.tol * r0n) {
                out.converged = true;
                break;
            }
        }
    }
    out.x = std::move(x);
    out.final_resnorm = resnorm;
    out.iters = static_cast<int>(out.history.size());
    out.fevals = h.fevals - base;
    out.termination = out.converged ? "tolerance" : "max_iter";
    return out;
}

}  // namespace nlkrylov
