#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "basis.hpp"
#include "element.hpp"
#include "lstsq.hpp"
#include "operators.hpp"

namespace nlkrylov {

/// Subdiagonal drop (relative to ||b||) treated as a happy breakdown: the
/// Krylov space became invariant and the projected solve is exact.
inline constexpr double kHappyBreakdownTol = 1e-14;

/// Output of one inner solve: an approximate correction p_hat for
/// (op) p = b together with its image v_hat = (op) p_hat recovered from the
/// projected recurrence, so no extra operator application is spent on it.
struct InnerResult {
    Element p_hat;
    Element v_hat;
    double inner_resnorm = 0.0;            ///< attained ||b - (op) p_hat|| in the projected solve
    std::vector<double> resnorm_history;   ///< projected residual norm after each expansion step
    int fevals_used = 0;                   ///< evaluations charged to the subroutine; the first
                                           ///< Krylov application stands in for the explicit pair
                                           ///< application every subroutine otherwise pays, so it
                                           ///< is charged to the outer step instead
    bool degenerate = false;               ///< deflated right-hand side vanished; caller restarts
};

namespace detail {

/// Assembles the rectangular projected matrix from per-step columns
/// (column i holds rows 0..i+1).
inline SmallMat assemble_projected(const std::vector<std::vector<double>>& hcols) {
    const std::size_t m = hcols.size();
    SmallMat H(m + 1, m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t l = 0; l < hcols[i].size(); ++l) H.at(l, i) = hcols[i][l];
    return H;
}

inline Element recover_image(const std::vector<std::vector<double>>& hcols,
                             const std::vector<double>& gamma, const std::vector<Element>& qs,
                             const Element& proto) {
    std::vector<double> hg(hcols.size() + 1, 0.0);
    for (std::size_t i = 0; i < hcols.size(); ++i)
        for (std::size_t l = 0; l < hcols[i].size(); ++l) hg[l] += hcols[i][l] * gamma[i];
    Element v = proto.zero_like();
    const std::size_t lim = std::min(hg.size(), qs.size());
    for (std::size_t l = 0; l < lim; ++l) v.axpy(hg[l], qs[l]);
    return v;
}

inline int charged_fevals(bool counts, std::size_t applications) {
    if (!counts || applications == 0) return 0;
    return static_cast<int>(applications) - 1;
}

}  // namespace detail

/// Restarted-free GMRES over at most m expansion steps: one modified
/// Gram-Schmidt Arnoldi pass per step, plane-rotation least squares on the
/// projected system. Stops early on happy breakdown, or once the projected
/// residual falls below rtol * ||b|| when rtol > 0.
inline InnerResult gmres(const LinearAction& A, const Element& b, int m, double rtol = 0.0) {
    InnerResult res;
    res.p_hat = b.zero_like();
    res.v_hat = b.zero_like();
    const double beta = norm(b);
    if (beta == 0.0 || m <= 0) return res;

    std::vector<Element> qs;
    qs.push_back((1.0 / beta) * b);
    std::vector<std::vector<double>> hcols;
    LstsqResult last;
    std::size_t apps = 0;
    for (int i = 0; i < m; ++i) {
        Element w = A.apply(qs[i]);
        ++apps;
        std::vector<double> col(i + 2, 0.0);
        for (int l = 0; l <= i; ++l) {
            col[l] = inner(w, qs[l]);
            w.axpy(-col[l], qs[l]);
        }
        const double hsub = norm(w);
        col[i + 1] = hsub;
        hcols.push_back(std::move(col));

        std::vector<double> rhs(hcols.size() + 1, 0.0);
        rhs[0] = beta;
        last = hessenberg_lstsq(detail::assemble_projected(hcols), rhs);
        res.resnorm_history.push_back(last.resnorm);

        if (hsub <= kHappyBreakdownTol * beta) break;
        qs.push_back((1.0 / hsub) * w);
        if (rtol > 0.0 && last.resnorm <= rtol * beta) break;
    }

    for (std::size_t i = 0; i < last.gamma.size(); ++i) res.p_hat.axpy(last.gamma[i], qs[i]);
    res.v_hat = detail::recover_image(hcols, last.gamma, qs, b);
    res.inner_resnorm = last.resnorm;
    res.fevals_used = detail::charged_fevals(A.counts_feval(), apps);
    return res;
}

/// Augmented GMRES: m + k expansion steps where the first
/// m_s = m + (k - s) images come from fresh Arnoldi vectors and the last s
/// from the supplied outer directions P. The approximation space is
/// span{q_1..q_{m_s}} + span{P}; augmentation makes the projected system a
/// general tall matrix, solved by dense QR. When linear_mode_V is given, the
/// images of the P columns are read from it instead of applying the operator.
inline InnerResult agmres(const LinearAction& A, const Element& b, int m, int k, const BlockBasis& P,
                          const BlockBasis* linear_mode_V = nullptr) {
    const int s = static_cast<int>(P.size());
    if (s > k) throw std::invalid_argument("agmres: more augmentation columns than k");
    if (linear_mode_V && linear_mode_V->size() != P.size())
        throw std::invalid_argument("agmres: linear_mode_V not paired with P");
    const int m_s = m + (k - s);
    const int total = m + k;

    InnerResult res;
    res.p_hat = b.zero_like();
    res.v_hat = b.zero_like();
    const double beta = norm(b);
    if (beta == 0.0 || total <= 0) return res;

    std::vector<Element> qs;
    qs.push_back((1.0 / beta) * b);
    std::vector<std::vector<double>> hcols;
    LstsqResult last;
    std::size_t apps = 0;
    for (int i = 0; i < total; ++i) {
        Element w = b.zero_like();
        if (i < m_s) {
            w = A.apply(qs[i]);
            ++apps;
        } else if (linear_mode_V) {
            w = linear_mode_V->col(i - m_s);
        } else {
            w = A.apply(P.col(i - m_s));
            ++apps;
        }
        std::vector<double> col(i + 2, 0.0);
        for (int l = 0; l <= i; ++l) {
            col[l] = inner(w, qs[l]);
            w.axpy(-col[l], qs[l]);
        }
        const double hsub = norm(w);
        col[i + 1] = hsub;
        hcols.push_back(std::move(col));

        std::vector<double> rhs(hcols.size() + 1, 0.0);
        rhs[0] = beta;
        last = dense_lstsq(detail::assemble_projected(hcols), rhs);
        res.resnorm_history.push_back(last.resnorm);

        if (hsub <= kHappyBreakdownTol * beta) break;
        qs.push_back((1.0 / hsub) * w);
    }

    const int used = static_cast<int>(hcols.size());
    const int nq = std::min(used, m_s);
    for (int i = 0; i < nq; ++i) res.p_hat.axpy(last.gamma[i], qs[i]);
    for (int j = 0; m_s + j < used; ++j) res.p_hat.axpy(last.gamma[m_s + j], P.col(j));
    res.v_hat = detail::recover_image(hcols, last.gamma, qs, b);
    res.inner_resnorm = last.resnorm;
    res.fevals_used = detail::charged_fevals(A.counts_feval(), apps);
    return res;
}

/// Inner solve on the deflated operator (I - V V^T) J: the right-hand side is
/// deflated explicitly, every Arnoldi image is split into its V coefficients
/// (accumulated as B) and its deflated part, and the returned correction
/// (Q - P B) gamma folds the outer-direction feedback back in. A vanishing
/// deflated right-hand side is reported as degenerate; the caller restarts.
inline InnerResult gcro_inner(const LinearAction& A, const BlockBasis& P, const BlockBasis& V,
                              const Element& r, int m) {
    if (P.size() != V.size()) throw std::invalid_argument("gcro_inner: unpaired bases");
    InnerResult res;
    res.p_hat = r.zero_like();
    res.v_hat = r.zero_like();

    std::vector<double> yr = block_inner(V, r);
    Element rt = r;
    for (std::size_t i = 0; i < V.size(); ++i) rt.axpy(-yr[i], V.col(i));
    const double rn = norm(r);
    const double beta = norm(rt);
    if (beta <= kHappyBreakdownTol * rn || m <= 0) {
        res.degenerate = true;
        return res;
    }

    std::vector<Element> qs;
    qs.push_back((1.0 / beta) * rt);
    std::vector<std::vector<double>> hcols;
    std::vector<std::vector<double>> bcols;  // column i: V^T J q_i
    LstsqResult last;
    std::size_t apps = 0;
    for (int i = 0; i < m; ++i) {
        std::vector<double> vcoef;
        Element w = A.apply_deflated(qs[i], V, nullptr, &vcoef);
        ++apps;
        bcols.push_back(std::move(vcoef));
        std::vector<double> col(i + 2, 0.0);
        for (int l = 0; l <= i; ++l) {
            col[l] = inner(w, qs[l]);
            w.axpy(-col[l], qs[l]);
        }
        const double hsub = norm(w);
        col[i + 1] = hsub;
        hcols.push_back(std::move(col));

        std::vector<double> rhs(hcols.size() + 1, 0.0);
        rhs[0] = beta;
        last = hessenberg_lstsq(detail::assemble_projected(hcols), rhs);
        res.resnorm_history.push_back(last.resnorm);

        if (hsub <= kHappyBreakdownTol * beta) break;
        qs.push_back((1.0 / hsub) * w);
    }

    for (std::size_t i = 0; i < last.gamma.size(); ++i) res.p_hat.axpy(last.gamma[i], qs[i]);
    if (!P.empty()) {
        std::vector<double> bg(P.size(), 0.0);
        for (std::size_t i = 0; i < last.gamma.size(); ++i)
            for (std::size_t l = 0; l < bg.size(); ++l) bg[l] += bcols[i][l] * last.gamma[i];
        for (std::size_t l = 0; l < bg.size(); ++l) res.p_hat.axpy(-bg[l], P.col(l));
    }
    res.v_hat = detail::recover_image(hcols, last.gamma, qs, r);
    res.inner_resnorm = last.resnorm;
    res.fevals_used = detail::charged_fevals(A.counts_feval(), apps);
    return res;
}

}  // namespace nlkrylov
