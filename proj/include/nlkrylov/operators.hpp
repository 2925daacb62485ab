#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "basis.hpp"
#include "element.hpp"

namespace nlkrylov {

/// Raised for domain violations and non-finite state; carries a message that
/// identifies the offending component where one exists.
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A root-finding problem f(x) = 0 over vector or matrix elements, with an
/// optional analytic derivative action. Counters separate evaluations charged
/// to the solve from evaluations charged to optional diagnostics, so bound
/// reporting never distorts cost curves.
struct ProblemHandle {
    std::string name;
    Element x0;  ///< default start; also fixes the element space
    std::function<Element(const Element&)> f;
    /// Analytic derivative action q -> J_f(x) q (Frechet action for matrix
    /// kind); empty when only finite differences are available.
    std::function<Element(const Element&, const Element&)> jvp;

    mutable std::int64_t fevals = 0;
    mutable std::int64_t diag_fevals = 0;

    bool has_jvp() const { return static_cast<bool>(jvp); }

    /// f(x); every call costs one evaluation on the selected counter.
    Element eval(const Element& x, bool diagnostic = false) const {
        (diagnostic ? diag_fevals : fevals) += 1;
        return f(x);
    }

    /// -f(x), the residual the outer iterations track.
    Element residual(const Element& x, bool diagnostic = false) const {
        Element r = eval(x, diagnostic);
        r.negate();
        return r;
    }
};

/// Derivative-action policy. force_fd disables an analytic jvp so evaluation
/// accounting can be exercised; fd_scale is the square root of machine
/// epsilon unless overridden.
struct JvpConfig {
    bool force_fd = false;
    double fd_scale = 1.4901161193847656e-08;  // sqrt(eps) for binary64
};

/// The frozen linear operator J_f(x) as an action, bound to a base point and
/// its cached residual. Analytic when the handle provides it (free of
/// charge); otherwise one-sided differences (f(x + eps q) + r) / eps at one
/// evaluation per application, with eps = fd_scale * max(1, ||x||) / ||q||.
class LinearAction {
public:
    LinearAction(const ProblemHandle& h, const Element& x, const Element& r, JvpConfig cfg = {},
                 bool diagnostic = false)
        : h_(&h), x_(&x), r_(&r), cfg_(cfg), diag_(diagnostic), xnorm_(norm(x)) {}

    bool counts_feval() const { return cfg_.force_fd || !h_->has_jvp(); }

    const Element& base_point() const { return *x_; }
    const Element& base_residual() const { return *r_; }

    /// J_f(x) q.
    Element apply(const Element& q) const {
        if (!counts_feval()) return h_->jvp(*x_, q);
        const double qn = norm(q);
        if (qn == 0.0) return q.zero_like();
        const double eps = cfg_.fd_scale * std::max(1.0, xnorm_) / qn;
        Element xq = *x_;
        xq.axpy(eps, q);
        Element out = h_->eval(xq, diag_);
        out += *r_;
        out.scale(1.0 / eps);
        return out;
    }

    /// (I - V V^T) J_f(x) q. Also hands back the raw image and its V
    /// coefficients, which the deflated inner solve needs to reconstruct the
    /// undeflated direction pair.
    Element apply_deflated(const Element& q, const BlockBasis& V, Element* raw_out,
                           std::vector<double>* coeff_out) const {
        Element u = apply(q);
        if (raw_out) *raw_out = u;
        std::vector<double> c = block_inner(V, u);
        for (std::size_t i = 0; i < V.size(); ++i) u.axpy(-c[i], V.col(i));
        if (coeff_out) *coeff_out = std::move(c);
        return u;
    }

private:
    const ProblemHandle* h_;
    const Element* x_;
    const Element* r_;
    JvpConfig cfg_;
    bool diag_;
    double xnorm_;
};

inline void require_finite(const Element& e, const char* what) {
    if (!e.is_finite()) throw numerical_error(std::string("non-finite ") + what);
}

}  // namespace nlkrylov
