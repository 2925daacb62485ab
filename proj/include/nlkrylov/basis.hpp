#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "element.hpp"

namespace nlkrylov {

/// Relative drop below which an orthogonalized column counts as a breakdown.
inline constexpr double kGramSchmidtBreakdownTol = 1e-14;

/// Ordered window of basis columns with fixed capacity. When full, appending
/// evicts the oldest column, which is what truncates the outer recurrence.
/// Each column carries a scalar weight used by the restart monitor.
class BlockBasis {
public:
    explicit BlockBasis(std::size_t capacity = 0) : capacity_(capacity) {}

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return cols_.size(); }
    bool empty() const { return cols_.empty(); }

    const Element& col(std::size_t i) const { return cols_[i]; }
    double weight(std::size_t i) const { return weights_[i]; }
    const std::vector<double>& weights() const { return weights_; }

    /// Appends a column, evicting the oldest first when at capacity.
    void append(Element c, double w) {
        if (capacity_ > 0 && cols_.size() == capacity_) {
            cols_.erase(cols_.begin());
            weights_.erase(weights_.begin());
        }
        cols_.push_back(std::move(c));
        weights_.push_back(w);
    }

    void clear() {
        cols_.clear();
        weights_.clear();
    }

private:
    std::size_t capacity_;
    std::vector<Element> cols_;
    std::vector<double> weights_;
};

/// Linear combination sum_i gamma[i] * U.col(i); the product that turns a
/// coefficient vector back into a space element. Works for any column count
/// n_j <= capacity, including the empty basis (returns proto's zero).
inline Element diamond(const BlockBasis& U, const std::vector<double>& gamma, const Element& proto) {
    if (gamma.size() != U.size()) throw std::invalid_argument("diamond: coefficient count mismatch");
    Element out = proto.zero_like();
    for (std::size_t i = 0; i < U.size(); ++i) out.axpy(gamma[i], U.col(i));
    return out;
}

/// Columnwise inner products [<U.col(i), w>]_i; the adjoint of diamond.
inline std::vector<double> block_inner(const BlockBasis& U, const Element& w) {
    std::vector<double> y(U.size());
    for (std::size_t i = 0; i < U.size(); ++i) y[i] = inner(U.col(i), w);
    return y;
}

/// Outcome of one paired Gram-Schmidt append.
struct GsAppend {
    std::vector<double> betas;  ///< projection coefficients onto the pre-append V columns
    bool appended = false;      ///< false on breakdown (v_hat numerically in span V)
    double pre_norm = 0.0;      ///< ||v_hat|| before orthogonalization
    double post_norm = 0.0;     ///< ||v_hat|| after; the normalizer of the new pair
    double weight = 0.0;        ///< restart weight of the appended column
};

/// Weight recursion for the restart monitor: the new column's forward-error
/// indicator from the raw direction's magnitude plus the weighted projections
/// removed by Gram-Schmidt, all divided by the normalizer.
inline double restart_weight(const std::vector<double>& weights, const std::vector<double>& betas,
                             double p_hat_inf, double v_post_norm, double C) {
    double s = C * p_hat_inf;
    for (std::size_t i = 0; i < betas.size(); ++i) s += std::abs(betas[i]) * weights[i];
    if (v_post_norm == 0.0) return std::numeric_limits<double>::infinity();
    return s / v_post_norm;
}

/// One modified Gram-Schmidt pass of v_hat against every V column, with the
/// same coefficients removed from p_hat so the pair relation v = (op) p is
/// preserved. Both are normalized by the post-pass ||v_hat|| and appended;
/// at capacity the oldest pair (and its weight) is dropped first. The sweep
/// runs over the full current window, including a column about to be
/// evicted: orthogonalizing only against survivors lets the pair columns mix
/// recursively across the whole history, which quietly destroys the stored
/// direction/image pairing on strongly nonlinear problems. A window that
/// already spans the space instead signals breakdown (the caller restarts
/// with a fresh seed) when v_hat collapses below kGramSchmidtBreakdownTol
/// relative to its incoming norm.
inline GsAppend gram_schmidt_append(BlockBasis& P, BlockBasis& V, Element p_hat, Element v_hat,
                                    double restart_C = 1.0) {
    if (P.size() != V.size()) throw std::invalid_argument("gram_schmidt_append: unpaired bases");
    GsAppend out;
    out.pre_norm = norm(v_hat);
    const double p_inf = inf_norm(p_hat);
    out.betas.resize(V.size());
    for (std::size_t i = 0; i < V.size(); ++i) {
        double b = inner(v_hat, V.col(i));
        out.betas[i] = b;
        v_hat.axpy(-b, V.col(i));
        p_hat.axpy(-b, P.col(i));
    }
    out.post_norm = norm(v_hat);
    if (out.post_norm <= kGramSchmidtBreakdownTol * out.pre_norm) return out;
    out.weight = restart_weight(P.weights(), out.betas, p_inf, out.post_norm, restart_C);
    p_hat.scale(1.0 / out.post_norm);
    v_hat.scale(1.0 / out.post_norm);
    P.append(std::move(p_hat), out.weight);
    V.append(std::move(v_hat), out.weight);
    out.appended = true;
    return out;
}

}  // namespace nlkrylov
