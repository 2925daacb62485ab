#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "element.hpp"
#include "lstsq.hpp"
#include "operators.hpp"
#include "rng.hpp"

namespace nlkrylov {

/// Dense linear test problem f(x) = A x - b with the exact derivative action.
inline ProblemHandle make_linear(const SmallMat& A, const std::vector<double>& b) {
    if (A.rows != A.cols || A.rows != b.size()) throw std::invalid_argument("make_linear: bad shape");
    const std::size_t n = A.rows;
    auto Ap = std::make_shared<SmallMat>(A);
    auto mult = [Ap, n](const Element& q) {
        Element out = Element::vector(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += Ap->at(i, j) * q[j];
            out[i] = s;
        }
        return out;
    };
    auto bp = std::make_shared<std::vector<double>>(b);
    ProblemHandle h;
    h.name = "linear";
    h.x0 = Element::vector(n);
    h.f = [mult, bp, n](const Element& x) {
        Element out = mult(x);
        for (std::size_t i = 0; i < n; ++i) out[i] -= (*bp)[i];
        return out;
    };
    h.jvp = [mult](const Element&, const Element& q) { return mult(q); };
    return h;
}

/// Well-conditioned seeded random system for the linear equivalence studies:
/// A = 2 I + G / (2 sqrt(n)) with standard normal G, standard normal b.
inline ProblemHandle make_random_linear(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    SmallMat A(n, n);
    const double s = 0.5 / std::sqrt(static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) A.at(i, j) = (i == j ? 2.0 : 0.0) + s * rng.normal();
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = rng.normal();
    return make_linear(A, b);
}

/// Solid-fuel ignition model on the unit square: N x N interior grid,
/// five-point Laplacian L (unscaled), f(x) = L x - h^2 lambda exp(x) with
/// h = 1/(N+2). Starts from the all-ones field.
inline ProblemHandle make_bratu(std::size_t N, double lambda) {
    if (N < 1) throw std::invalid_argument("make_bratu: N must be >= 1");
    const std::size_t n = N * N;
    const double h = 1.0 / static_cast<double>(N + 2);
    const double h2l = h * h * lambda;
    auto lap = [N, n](const Element& x) {
        Element out = Element::vector(n);
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) {
                const std::size_t c = i * N + j;
                double s = 4.0 * x[c];
                if (i > 0) s -= x[c - N];
                if (i + 1 < N) s -= x[c + N];
                if (j > 0) s -= x[c - 1];
                if (j + 1 < N) s -= x[c + 1];
                out[c] = s;
            }
        return out;
    };
    ProblemHandle p;
    p.name = "bratu";
    p.x0 = Element::vector(n, 1.0);
    p.f = [lap, h2l, n](const Element& x) {
        Element out = lap(x);
        for (std::size_t i = 0; i < n; ++i) out[i] -= h2l * std::exp(x[i]);
        return out;
    };
    p.jvp = [lap, h2l, n](const Element& x, const Element& q) {
        Element out = lap(q);
        for (std::size_t i = 0; i < n; ++i) out[i] -= h2l * std::exp(x[i]) * q[i];
        return out;
    };
    return p;
}

/// Chandrasekhar transfer equation on the midpoint grid mu_i = (i - 1/2)/n,
/// dense kernel K_ij = mu_i/(mu_i + mu_j) = (i - 1/2)/(i + j - 1) (1-based)
/// precomputed once: f(h)_i = h_i - (1 - (omega / 2n) (K h)_i)^{-1}.
/// Values 1 - s_i <= 0 are a domain violation and raise a numerical error
/// naming the first bad index. Starts from the all-ones field; omega = 1 is
/// the singular edge case (a root still exists there, with singular Jacobian).
inline ProblemHandle make_hequation(std::size_t n, double omega) {
    if (n < 1) throw std::invalid_argument("make_hequation: n must be >= 1");
    auto K = std::make_shared<SmallMat>(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            K->at(i, j) = (static_cast<double>(i) + 0.5) / static_cast<double>(i + j + 1);
    const double w2n = omega / (2.0 * static_cast<double>(n));
    auto ks = [K, w2n, n](const Element& x) {
        std::vector<double> s(n);
        for (std::size_t i = 0; i < n; ++i) {
            double a = 0.0;
            for (std::size_t j = 0; j < n; ++j) a += K->at(i, j) * x[j];
            s[i] = w2n * a;
        }
        return s;
    };
    ProblemHandle p;
    p.name = "hequation";
    p.x0 = Element::vector(n, 1.0);
    p.f = [ks, n](const Element& x) {
        std::vector<double> s = ks(x);
        Element out = Element::vector(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = 1.0 - s[i];
            if (d <= 0.0)
                throw numerical_error("hequation: 1 - s <= 0 at index " + std::to_string(i + 1));
            out[i] = x[i] - 1.0 / d;
        }
        return out;
    };
    p.jvp = [ks, K, w2n, n](const Element& x, const Element& q) {
        std::vector<double> s = ks(x);
        Element out = Element::vector(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = 1.0 - s[i];
            if (d <= 0.0)
                throw numerical_error("hequation: 1 - s <= 0 at index " + std::to_string(i + 1));
            double kq = 0.0;
            for (std::size_t j = 0; j < n; ++j) kq += K->at(i, j) * q[j];
            out[i] = q[i] - (w2n * kq) / (d * d);
        }
        return out;
    };
    return p;
}

/// Two-dimensional problem with a singular Jacobian at the root x* = 0:
/// f(x) = [x1 + x2^2, 1.5 x1 x2 + x2^2 + x2^3], J(0) = diag(1, 0) with the
/// null space along e2. Iterates contract toward the root along the null
/// direction at an asymptotic rate of one half.
inline ProblemHandle make_singular2d() {
    ProblemHandle p;
    p.name = "singular2d";
    p.x0 = Element::vector(2);
    p.x0[0] = 0.1;
    p.x0[1] = 1.0;
    p.f = [](const Element& x) {
        Element out = Element::vector(2);
        out[0] = x[0] + x[1] * x[1];
        out[1] = 1.5 * x[0] * x[1] + x[1] * x[1] + x[1] * x[1] * x[1];
        return out;
    };
    p.jvp = [](const Element& x, const Element& q) {
        Element out = Element::vector(2);
        out[0] = q[0] + 2.0 * x[1] * q[1];
        out[1] = 1.5 * x[1] * q[0] + (1.5 * x[0] + 2.0 * x[1] + 3.0 * x[1] * x[1]) * q[1];
        return out;
    };
    return p;
}

/// Pair-potential energy of a cluster with coordinates packed as
/// [x1, y1, z1, x2, ...]: E = 4 sum_{i<j} (r_ij^-12 - r_ij^-6).
inline double lj_energy(const Element& y) {
    const std::size_t na = y.size() / 3;
    double e = 0.0;
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = i + 1; j < na; ++j) {
            double r2 = 0.0;
            for (std::size_t c = 0; c < 3; ++c) {
                const double d = y[3 * i + c] - y[3 * j + c];
                r2 += d * d;
            }
            const double ir6 = 1.0 / (r2 * r2 * r2);
            e += 4.0 * (ir6 * ir6 - ir6);
        }
    return e;
}

/// Gradient of lj_energy; the root-finding residual of the cluster problem.
inline Element lj_gradient(const Element& y) {
    const std::size_t na = y.size() / 3;
    Element g = y.zero_like();
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = i + 1; j < na; ++j) {
            double d[3];
            double r2 = 0.0;
            for (std::size_t c = 0; c < 3; ++c) {
                d[c] = y[3 * i + c] - y[3 * j + c];
                r2 += d[c] * d[c];
            }
            const double ir2 = 1.0 / r2;
            const double ir6 = ir2 * ir2 * ir2;
            // dE/dr * 1/r = 4 (-12 r^-14 + 6 r^-8)
            const double f = 4.0 * (-12.0 * ir6 * ir6 * ir2 + 6.0 * ir6 * ir2);
            for (std::size_t c = 0; c < 3; ++c) {
                g[3 * i + c] += f * d[c];
                g[3 * j + c] -= f * d[c];
            }
        }
    return g;
}

struct LennardJonesProblem {
    ProblemHandle handle;  ///< f = gradient of the energy; derivative action by differences
    std::size_t atoms = 0;
    double nn_distance = 0.0;  ///< unperturbed nearest-neighbor distance (the pair minimum)
};

/// Face-centered-cubic cluster of 4 * cells^3 atoms at the pair-potential
/// minimum spacing 2^(1/6), each coordinate perturbed by a seeded uniform
/// draw from [-perturb_scale, perturb_scale]. The critical point is a
/// nearby relaxed cluster.
inline LennardJonesProblem make_lennard_jones(std::size_t cells, double perturb_scale,
                                              std::uint64_t seed) {
    if (cells < 1) throw std::invalid_argument("make_lennard_jones: cells must be >= 1");
    const double d_nn = std::pow(2.0, 1.0 / 6.0);
    const double a = d_nn * std::sqrt(2.0);  // cubic lattice constant
    static const double frac[4][3] = {
        {0.0, 0.0, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}, {0.5, 0.5, 0.0}};
    const std::size_t natoms = 4 * cells * cells * cells;
    Element y = Element::vector(3 * natoms);
    Rng rng(seed);
    std::size_t at = 0;
    for (std::size_t ci = 0; ci < cells; ++ci)
        for (std::size_t cj = 0; cj < cells; ++cj)
            for (std::size_t ck = 0; ck < cells; ++ck)
                for (int b = 0; b < 4; ++b) {
                    const double cell[3] = {static_cast<double>(ci), static_cast<double>(cj),
                                            static_cast<double>(ck)};
                    for (std::size_t c = 0; c < 3; ++c)
                        y[3 * at + c] = a * (cell[c] + frac[b][c]) +
                                        perturb_scale * rng.uniform(-1.0, 1.0);
                    ++at;
                }
    LennardJonesProblem out;
    out.atoms = natoms;
    out.nn_distance = d_nn;
    out.handle.name = "lennard_jones";
    out.handle.x0 = std::move(y);
    out.handle.f = [](const Element& x) { return lj_gradient(x); };
    return out;
}

/// Nonsymmetric algebraic Riccati residual over n x p matrices:
/// R(X) = F G^T + A X + X B - (X P)(Q^T X), with the structured sparse
/// factors fixed by the four dimensions (r low-rank columns of the constant
/// term, s columns of the quadratic coupling). The derivative action is the
/// exact Frechet derivative. Starts from X = 0.
inline ProblemHandle make_nare(std::size_t n, std::size_t p, std::size_t r, std::size_t s) {
    if (n < 2 || p < 2 || r < 1 || s < 1 || r > p || r > n || s > p || s > n)
        throw std::invalid_argument("make_nare: inconsistent dimensions");

    // A: tridiagonal rows [3, -1] with A(n,n) = 1.9 and corner A(n,1) = -1.
    auto AX = [n, p](const Element& X) {
        Element out = Element::matrix(n, p);
        for (std::size_t i = 0; i < n; ++i) {
            const double di = (i + 1 == n) ? 1.9 : 3.0;
            for (std::size_t c = 0; c < p; ++c) {
                double v = di * X.at(i, c);
                if (i + 1 < n) v -= X.at(i + 1, c);
                if (i + 1 == n) v -= X.at(0, c);
                out.at(i, c) = v;
            }
        }
        return out;
    };
    // B: diag [2, 3, ..., 3], superdiagonal -1, corner B(p,1) = -1.
    auto XB = [n, p](const Element& X) {
        Element out = Element::matrix(n, p);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < p; ++c) {
                double v = (c == 0 ? 2.0 : 3.0) * X.at(i, c);
                if (c > 0) v -= X.at(i, c - 1);
                if (c == 0) v -= X.at(i, p - 1);
                out.at(i, c) = v;
            }
        return out;
    };
    // (X P)(Q^T Y): P = [P1; 0] with P1 lower bidiagonal of ones, Q = I_{n,s}.
    auto quad = [n, p, s](const Element& X, const Element& Y) {
        Element out = Element::matrix(n, p);
        std::vector<double> xp(n * s);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < s; ++c)
                xp[i * s + c] = X.at(i, c) + (c + 1 < s ? X.at(i, c + 1) : 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < p; ++c) {
                double v = 0.0;
                for (std::size_t l = 0; l < s; ++l) v += xp[i * s + l] * Y.at(l, c);
                out.at(i, c) = v;
            }
        return out;
    };
    // F G^T: F1 is r x r with diagonal -1 (last entry -0.9) and superdiagonal -1.
    auto add_fgt = [r](Element& out) {
        for (std::size_t i = 0; i < r; ++i) {
            out.at(i, i) += (i + 1 == r) ? -0.9 : -1.0;
            if (i + 1 < r) out.at(i, i + 1) += -1.0;
        }
    };

    ProblemHandle h;
    h.name = "nare";
    h.x0 = Element::matrix(n, p);
    h.f = [AX, XB, quad, add_fgt](const Element& X) {
        Element out = AX(X);
        out += XB(X);
        out -= quad(X, X);
        add_fgt(out);
        return out;
    };
    h.jvp = [AX, XB, quad](const Element& X, const Element& D) {
        Element out = AX(D);
        out += XB(D);
        out -= quad(D, X);
        out -= quad(X, D);
        return out;
    };
    return h;
}

}  // namespace nlkrylov
