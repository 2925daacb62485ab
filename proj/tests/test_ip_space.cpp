// Inner-product-space layer: elements, paired Gram-Schmidt windows, and the
// small projected least-squares solvers, checked against hand values and an
// independent normal-equations oracle.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "nlkrylov/basis.hpp"
#include "nlkrylov/element.hpp"
#include "nlkrylov/lstsq.hpp"
#include "nlkrylov/rng.hpp"

using namespace nlkrylov;

namespace {

std::vector<double> matvec(const SmallMat& M, const std::vector<double>& x) {
    std::vector<double> y(M.rows, 0.0);
    for (std::size_t i = 0; i < M.rows; ++i)
        for (std::size_t j = 0; j < M.cols; ++j) y[i] += M.at(i, j) * x[j];
    return y;
}

// Independent least-squares oracle: solve the normal equations M^T M g = M^T b
// by unpivoted Gaussian elimination written out longhand.
std::vector<double> normal_equations_oracle(const SmallMat& M, const std::vector<double>& b) {
    const std::size_t c = M.cols;
    std::vector<std::vector<double>> N(c, std::vector<double>(c + 1, 0.0));
    for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t j = 0; j < c; ++j)
            for (std::size_t l = 0; l < M.rows; ++l) N[i][j] += M.at(l, i) * M.at(l, j);
        for (std::size_t l = 0; l < M.rows; ++l) N[i][c] += M.at(l, i) * b[l];
    }
    for (std::size_t j = 0; j < c; ++j) {
        for (std::size_t i = j + 1; i < c; ++i) {
            const double f = N[i][j] / N[j][j];
            for (std::size_t l = j; l <= c; ++l) N[i][l] -= f * N[j][l];
        }
    }
    std::vector<double> g(c, 0.0);
    for (std::size_t ii = c; ii-- > 0;) {
        double s = N[ii][c];
        for (std::size_t j = ii + 1; j < c; ++j) s -= N[ii][j] * g[j];
        g[ii] = s / N[ii][ii];
    }
    return g;
}

double residual_norm(const SmallMat& M, const std::vector<double>& g,
                     const std::vector<double>& b) {
    const std::vector<double> mg = matvec(M, g);
    double s = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) s += (b[i] - mg[i]) * (b[i] - mg[i]);
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("element arithmetic and reductions") {
    Element x = Element::vector(3);
    x[0] = 1.0;
    x[1] = -2.0;
    x[2] = 2.0;
    Element y = Element::vector(3, 1.0);

    CHECK(inner(x, y) == 1.0);
    CHECK(norm(x) == 3.0);
    CHECK(inf_norm(x) == 2.0);

    Element z = x;
    z.axpy(2.0, y);
    CHECK(z[0] == 3.0);
    CHECK(z[1] == 0.0);
    CHECK(z[2] == 4.0);

    z.negate();
    CHECK(z[0] == -3.0);
    z.scale(-2.0);
    CHECK(z[0] == 6.0);

    Element s = x + y;
    CHECK(s[1] == -1.0);
    s -= y;
    CHECK(s[1] == -2.0);
    Element t = 3.0 * y;
    CHECK(t[2] == 3.0);

    CHECK(x.is_finite());
    Element bad = x;
    bad[1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(bad.is_finite());

    Element w = Element::vector(2);
    CHECK_THROWS_AS(inner(x, w), std::invalid_argument);
    CHECK_THROWS_AS(x.axpy(1.0, w), std::invalid_argument);
}

TEST_CASE("matrix elements use the componentwise inner product") {
    Element A = Element::matrix(2, 3);
    int v = 0;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 3; ++j) A.at(i, j) = static_cast<double>(++v);
    CHECK(A.at(1, 2) == 6.0);
    CHECK(A[5] == 6.0);
    // Frobenius norm of [1..6] = sqrt(91)
    CHECK(norm(A) == Catch::Approx(std::sqrt(91.0)).epsilon(1e-15));
    CHECK(A.zero_like().size() == 6);
    CHECK(A.zero_like().kind() == Kind::matrix);
}

TEST_CASE("a vector and a one-column matrix behave identically") {
    Rng rng(11);
    Element v = Element::vector(7);
    Element m = Element::matrix(7, 1);
    Element v2 = Element::vector(7);
    Element m2 = Element::matrix(7, 1);
    for (std::size_t i = 0; i < 7; ++i) {
        v[i] = m[i] = rng.normal();
        v2[i] = m2[i] = rng.normal();
    }
    CHECK(inner(v, v2) == inner(m, m2));
    CHECK(norm(v) == norm(m));
    CHECK(inf_norm(v) == inf_norm(m));
    Element va = v, ma = m;
    va.axpy(0.37, v2);
    ma.axpy(0.37, m2);
    for (std::size_t i = 0; i < 7; ++i) CHECK(va[i] == ma[i]);
}

TEST_CASE("diamond and block_inner") {
    Element proto = Element::vector(2);
    BlockBasis U(3);
    Element u1 = Element::vector(2);
    u1[0] = 1.0;
    Element u2 = Element::vector(2);
    u2[1] = 1.0;
    U.append(u1, 0.0);
    U.append(u2, 0.0);

    Element w = diamond(U, {2.0, -3.0}, proto);
    CHECK(w[0] == 2.0);
    CHECK(w[1] == -3.0);

    const std::vector<double> y = block_inner(U, w);
    REQUIRE(y.size() == 2);
    CHECK(y[0] == 2.0);
    CHECK(y[1] == -3.0);

    CHECK(norm(diamond(BlockBasis(2), {}, proto)) == 0.0);
    CHECK_THROWS_AS(diamond(U, {1.0}, proto), std::invalid_argument);
}

TEST_CASE("paired Gram-Schmidt append: hand-computed two-step case") {
    BlockBasis P(2), V(2);
    Element p1 = Element::vector(2);
    p1[0] = 1.0;
    Element v1 = Element::vector(2);
    v1[0] = 3.0;
    v1[1] = 4.0;
    GsAppend g1 = gram_schmidt_append(P, V, p1, v1);
    REQUIRE(g1.appended);
    CHECK(g1.pre_norm == 5.0);
    CHECK(g1.post_norm == 5.0);
    CHECK(g1.betas.empty());
    // weight = (C * ||p1||_inf) / ||v1'|| = 1/5
    CHECK(g1.weight == Catch::Approx(0.2).margin(1e-15));
    CHECK(V.col(0)[0] == Catch::Approx(0.6).margin(1e-15));
    CHECK(V.col(0)[1] == Catch::Approx(0.8).margin(1e-15));
    CHECK(P.col(0)[0] == Catch::Approx(0.2).margin(1e-15));
    CHECK(P.col(0)[1] == 0.0);

    Element p2 = Element::vector(2);
    p2[1] = 1.0;
    Element v2 = Element::vector(2);
    v2[0] = 4.0;
    v2[1] = 3.0;
    GsAppend g2 = gram_schmidt_append(P, V, p2, v2);
    REQUIRE(g2.appended);
    REQUIRE(g2.betas.size() == 1);
    // beta = <v2, V1> = 4*0.6 + 3*0.8 = 4.8; v2' = (1.12, -0.84), norm 1.4
    CHECK(g2.betas[0] == Catch::Approx(4.8).margin(1e-14));
    CHECK(g2.post_norm == Catch::Approx(1.4).margin(1e-14));
    CHECK(V.col(1)[0] == Catch::Approx(0.8).margin(1e-14));
    CHECK(V.col(1)[1] == Catch::Approx(-0.6).margin(1e-14));
    // p2' = p2 - 4.8 * P1 = (-0.96, 1), then scaled by 1/1.4
    CHECK(P.col(1)[0] == Catch::Approx(-0.96 / 1.4).margin(1e-14));
    CHECK(P.col(1)[1] == Catch::Approx(1.0 / 1.4).margin(1e-14));
    // weight = (||p2||_inf + |beta| w1) / ||v2'|| = (1 + 4.8 * 0.2) / 1.4
    CHECK(g2.weight == Catch::Approx(1.96 / 1.4).margin(1e-14));
    CHECK(V.weight(1) == g2.weight);
}

TEST_CASE("appended image columns stay orthonormal") {
    Rng rng(42);
    BlockBasis P(5), V(5);
    for (int it = 0; it < 12; ++it) {
        Element p = Element::vector(8);
        Element v = Element::vector(8);
        for (std::size_t i = 0; i < 8; ++i) {
            p[i] = rng.normal();
            v[i] = rng.normal();
        }
        GsAppend g = gram_schmidt_append(P, V, p, v);
        REQUIRE(g.appended);
        REQUIRE(P.size() == V.size());
        CHECK(P.size() == std::min<std::size_t>(static_cast<std::size_t>(it) + 1, 5));
        for (std::size_t a = 0; a < V.size(); ++a)
            for (std::size_t b = 0; b <= a; ++b)
                CHECK(inner(V.col(a), V.col(b)) == Catch::Approx(a == b ? 1.0 : 0.0).margin(1e-12));
    }
}

TEST_CASE("window eviction drops the oldest pair") {
    BlockBasis P(2), V(2);
    Element e1 = Element::vector(3);
    e1[0] = 1.0;
    Element e2 = Element::vector(3);
    e2[1] = 1.0;
    Element e3 = Element::vector(3);
    e3[2] = 1.0;
    gram_schmidt_append(P, V, e1, e1);
    gram_schmidt_append(P, V, e2, e2);
    Element keep = V.col(1);  // the e2 image
    gram_schmidt_append(P, V, e3, e3);
    REQUIRE(V.size() == 2);
    CHECK(norm(V.col(0) - keep) == 0.0);
    CHECK(V.col(1)[2] == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("a dependent image signals breakdown and leaves the window intact") {
    BlockBasis P(3), V(3);
    Element p1 = Element::vector(2, 1.0);
    Element v1 = Element::vector(2);
    v1[0] = 1.0;
    REQUIRE(gram_schmidt_append(P, V, p1, v1).appended);
    Element p2 = Element::vector(2);
    p2[1] = 1.0;
    Element v2 = Element::vector(2);
    v2[0] = 2.0;  // exactly in span(V)
    GsAppend g = gram_schmidt_append(P, V, p2, v2);
    CHECK_FALSE(g.appended);
    CHECK(P.size() == 1);
    CHECK(V.size() == 1);
}

TEST_CASE("restart weight recursion") {
    // Empty history: w = C * pinf / vnorm.
    CHECK(restart_weight({}, {}, 3.0, 2.0, 1.0) == 1.5);
    CHECK(restart_weight({}, {}, 3.0, 2.0, 10.0) == 15.0);
    // One prior column: w = (C * pinf + |beta| w1) / vnorm.
    CHECK(restart_weight({0.5}, {-2.0}, 1.0, 4.0, 1.0) == Catch::Approx(0.5).margin(1e-15));
    CHECK(restart_weight({}, {}, 1.0, 0.0, 1.0) == std::numeric_limits<double>::infinity());
}

TEST_CASE("Hessenberg least squares matches the normal-equations oracle") {
    Rng rng(7);
    for (int m = 1; m <= 20; ++m) {
        SmallMat H(static_cast<std::size_t>(m) + 1, static_cast<std::size_t>(m), 0.0);
        for (int j = 0; j < m; ++j) {
            for (int i = 0; i <= j + 1; ++i) H.at(i, j) = rng.normal();
            H.at(j, j) += 4.0;  // keep the projected system well conditioned
            H.at(j + 1, j) = std::abs(H.at(j + 1, j)) + 0.5;
        }
        std::vector<double> rhs(static_cast<std::size_t>(m) + 1, 0.0);
        rhs[0] = 2.0 + rng.uniform();

        const LstsqResult got = hessenberg_lstsq(H, rhs);
        const std::vector<double> want = normal_equations_oracle(H, rhs);
        REQUIRE(got.gamma.size() == want.size());
        for (int i = 0; i < m; ++i)
            CHECK(got.gamma[i] == Catch::Approx(want[i]).margin(1e-10).epsilon(1e-10));
        CHECK(got.resnorm ==
              Catch::Approx(residual_norm(H, got.gamma, rhs)).margin(1e-10).epsilon(1e-10));
    }
}

TEST_CASE("dense least squares matches the normal-equations oracle") {
    Rng rng(13);
    SmallMat M(12, 5, 0.0);
    for (std::size_t i = 0; i < 12; ++i)
        for (std::size_t j = 0; j < 5; ++j) M.at(i, j) = rng.normal() + (i == j ? 3.0 : 0.0);
    std::vector<double> b(12);
    for (double& x : b) x = rng.normal();

    const LstsqResult got = dense_lstsq(M, b);
    REQUIRE(got.full_rank);
    const std::vector<double> want = normal_equations_oracle(M, b);
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(got.gamma[i] == Catch::Approx(want[i]).margin(1e-10).epsilon(1e-10));
    CHECK(got.resnorm == Catch::Approx(residual_norm(M, got.gamma, b)).margin(1e-10));
}

TEST_CASE("dense least squares flags rank deficiency") {
    SmallMat M(4, 2, 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
        M.at(i, 0) = static_cast<double>(i) + 1.0;
        M.at(i, 1) = 2.0 * (static_cast<double>(i) + 1.0);  // duplicate direction
    }
    std::vector<double> b = {1.0, 0.0, 0.0, 0.0};
    const LstsqResult got = dense_lstsq(M, b);
    CHECK_FALSE(got.full_rank);
    for (double g : got.gamma) CHECK(std::isfinite(g));
}

TEST_CASE("square solve with partial pivoting") {
    SmallMat A(2, 2, 0.0);
    A.at(0, 0) = 0.0;
    A.at(0, 1) = 1.0;
    A.at(1, 0) = 2.0;
    A.at(1, 1) = 1.0;
    const std::vector<double> x = solve_dense(A, {3.0, 4.0});
    CHECK(x[0] == Catch::Approx(0.5).margin(1e-14));
    CHECK(x[1] == Catch::Approx(3.0).margin(1e-14));
}
