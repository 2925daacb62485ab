#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace nlkrylov {

/// Tiny dense row-major matrix for the projected least-squares systems the
/// inner solvers assemble. Dimensions stay O(m + k), so no blocking, no BLAS.
struct SmallMat {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;

    SmallMat() = default;
    SmallMat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

    double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

struct LstsqResult {
    std::vector<double> gamma;  ///< minimizer of ||rhs - M gamma||
    double resnorm = 0.0;       ///< attained residual norm
    bool full_rank = true;      ///< false when a pivot fell below the rank tolerance
};

/// Least squares for an (m+1) x m upper-Hessenberg system via plane
/// rotations. rhs has m+1 entries; callers pass beta * e_1.
inline LstsqResult hessenberg_lstsq(SmallMat H, std::vector<double> rhs) {
    const std::size_t m = H.cols;
    if (H.rows != m + 1 || rhs.size() != m + 1) throw std::invalid_argument("hessenberg_lstsq: bad shape");
    LstsqResult out;
    // Zero the subdiagonal one column at a time.
    for (std::size_t i = 0; i < m; ++i) {
        double p = H.at(i, i), q = H.at(i + 1, i);
        double r = std::hypot(p, q);
        if (r == 0.0) continue;
        double c = p / r, s = q / r;
        for (std::size_t j = i; j < m; ++j) {
            double hi = H.at(i, j), hk = H.at(i + 1, j);
            H.at(i, j) = c * hi + s * hk;
            H.at(i + 1, j) = -s * hi + c * hk;
        }
        double gi = rhs[i], gk = rhs[i + 1];
        rhs[i] = c * gi + s * gk;
        rhs[i + 1] = -s * gi + c * gk;
    }
    out.gamma.assign(m, 0.0);
    for (std::size_t ii = m; ii-- > 0;) {
        double s = rhs[ii];
        for (std::size_t j = ii + 1; j < m; ++j) s -= H.at(ii, j) * out.gamma[j];
        double d = H.at(ii, ii);
        if (std::abs(d) < 1e-300) {
            out.full_rank = false;
            out.gamma[ii] = 0.0;
        } else {
            out.gamma[ii] = s / d;
        }
    }
    out.resnorm = std::abs(rhs[m]);
    return out;
}

/// Dense least squares min ||rhs - M gamma|| via Householder QR, rows >= cols.
/// Augmented Krylov bases feed general tall systems through here.
inline LstsqResult dense_lstsq(SmallMat M, std::vector<double> rhs) {
    const std::size_t r = M.rows, c = M.cols;
    if (rhs.size() != r || r < c) throw std::invalid_argument("dense_lstsq: bad shape");
    LstsqResult out;
    double scale = 0.0;
    for (double x : M.a) scale = std::max(scale, std::abs(x));
    const double rank_tol = scale * 1e-14;
    for (std::size_t j = 0; j < c; ++j) {
        double nrm = 0.0;
        for (std::size_t i = j; i < r; ++i) nrm += M.at(i, j) * M.at(i, j);
        nrm = std::sqrt(nrm);
        if (nrm <= rank_tol) {
            out.full_rank = false;
            continue;
        }
        double alpha = M.at(j, j) >= 0 ? -nrm : nrm;
        // Householder vector v, stored in-place below the diagonal, v[j] held apart.
        double vj = M.at(j, j) - alpha;
        M.at(j, j) = alpha;
        double vtv = vj * vj;
        for (std::size_t i = j + 1; i < r; ++i) vtv += M.at(i, j) * M.at(i, j);
        if (vtv == 0.0) continue;
        for (std::size_t jj = j + 1; jj < c; ++jj) {
            double dot = vj * M.at(j, jj);
            for (std::size_t i = j + 1; i < r; ++i) dot += M.at(i, j) * M.at(i, jj);
            double f = 2.0 * dot / vtv;
            M.at(j, jj) -= f * vj;
            for (std::size_t i = j + 1; i < r; ++i) M.at(i, jj) -= f * M.at(i, j);
        }
        double dot = vj * rhs[j];
        for (std::size_t i = j + 1; i < r; ++i) dot += M.at(i, j) * rhs[i];
        double f = 2.0 * dot / vtv;
        rhs[j] -= f * vj;
        for (std::size_t i = j + 1; i < r; ++i) rhs[i] -= f * M.at(i, j);
    }
    out.gamma.assign(c, 0.0);
    for (std::size_t ii = c; ii-- > 0;) {
        double d = M.at(ii, ii);
        if (std::abs(d) <= rank_tol) {
            out.full_rank = false;
            out.gamma[ii] = 0.0;
            continue;
        }
        double s = rhs[ii];
        for (std::size_t j = ii + 1; j < c; ++j) s -= M.at(ii, j) * out.gamma[j];
        out.gamma[ii] = s / d;
    }
    double rn = 0.0;
    for (std::size_t i = c; i < r; ++i) rn += rhs[i] * rhs[i];
    // Skipped (rank-deficient) columns leave residual mass above row c as well.
    if (!out.full_rank)
        for (std::size_t i = 0; i < c; ++i)
            if (out.gamma[i] == 0.0 && std::abs(M.at(i, i)) <= rank_tol) rn += rhs[i] * rhs[i];
    out.resnorm = std::sqrt(rn);
    return out;
}

/// Square solve with partial pivoting; exact-zero pivots get a 1e-12 shift so
/// the Gauss-Newton normal equations stay solvable near rank deficiency.
inline std::vector<double> solve_dense(SmallMat A, std::vector<double> b) {
    const std::size_t n = A.rows;
    if (A.cols != n || b.size() != n) throw std::invalid_argument("solve_dense: bad shape");
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t piv = j;
        for (std::size_t i = j + 1; i < n; ++i)
            if (std::abs(A.at(i, j)) > std::abs(A.at(piv, j))) piv = i;
        if (piv != j) {
            for (std::size_t jj = 0; jj < n; ++jj) std::swap(A.at(j, jj), A.at(piv, jj));
            std::swap(b[j], b[piv]);
        }
        if (A.at(j, j) == 0.0) A.at(j, j) = 1e-12;
        for (std::size_t i = j + 1; i < n; ++i) {
            double f = A.at(i, j) / A.at(j, j);
            if (f == 0.0) continue;
            for (std::size_t jj = j; jj < n; ++jj) A.at(i, jj) -= f * A.at(j, jj);
            b[i] -= f * b[j];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= A.at(ii, j) * x[j];
        x[ii] = s / A.at(ii, ii);
    }
    return x;
}

}  // namespace nlkrylov
