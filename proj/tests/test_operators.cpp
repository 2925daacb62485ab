// Problem handles and frozen derivative actions: evaluation accounting, the
// finite-difference rule, and deflated application.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <memory>

#include "nlkrylov/operators.hpp"
#include "nlkrylov/problems.hpp"
#include "nlkrylov/rng.hpp"

using namespace nlkrylov;

namespace {

// f(x) = [x0^2 - 2, x0 x1] with analytic derivative action.
ProblemHandle smooth2d() {
    ProblemHandle h;
    h.name = "smooth2d";
    h.x0 = Element::vector(2, 1.0);
    h.f = [](const Element& x) {
        Element out = Element::vector(2);
        out[0] = x[0] * x[0] - 2.0;
        out[1] = x[0] * x[1];
        return out;
    };
    h.jvp = [](const Element& x, const Element& q) {
        Element out = Element::vector(2);
        out[0] = 2.0 * x[0] * q[0];
        out[1] = x[1] * q[0] + x[0] * q[1];
        return out;
    };
    return h;
}

}  // namespace

TEST_CASE("evaluation counters split solve and diagnostic charges") {
    ProblemHandle h = smooth2d();
    CHECK(h.fevals == 0);
    h.eval(h.x0);
    CHECK(h.fevals == 1);
    CHECK(h.diag_fevals == 0);
    h.eval(h.x0, /*diagnostic=*/true);
    CHECK(h.fevals == 1);
    CHECK(h.diag_fevals == 1);

    const Element f = h.eval(h.x0);
    const Element r = h.residual(h.x0);
    for (std::size_t i = 0; i < 2; ++i) CHECK(r[i] == -f[i]);
}

TEST_CASE("analytic action is used when available and costs nothing") {
    ProblemHandle h = smooth2d();
    const Element r = h.residual(h.x0);
    const std::int64_t before = h.fevals;
    LinearAction A(h, h.x0, r);
    CHECK_FALSE(A.counts_feval());

    Element q = Element::vector(2);
    q[0] = 0.3;
    q[1] = -0.7;
    const Element jq = A.apply(q);
    CHECK(h.fevals == before);
    // J at x0 = (1,1): [[2,0],[1,1]]
    CHECK(jq[0] == Catch::Approx(0.6).margin(1e-15));
    CHECK(jq[1] == Catch::Approx(-0.4).margin(1e-15));

    // Linearity of the analytic action.
    Element q2 = Element::vector(2);
    q2[0] = -1.1;
    q2[1] = 0.4;
    Element lhs = A.apply(q + q2);
    Element rhs = A.apply(q) + A.apply(q2);
    CHECK(norm(lhs - rhs) <= 1e-12);
}

TEST_CASE("finite differences are positively homogeneous by construction") {
    ProblemHandle h = smooth2d();
    const Element r = h.residual(h.x0);
    JvpConfig cfg;
    cfg.force_fd = true;
    LinearAction A(h, h.x0, r, cfg);
    CHECK(A.counts_feval());

    Element q = Element::vector(2);
    q[0] = 0.4;
    q[1] = 1.2;
    const Element j1 = A.apply(q);
    const Element j2 = A.apply(2.0 * q);
    // The step eps scales with 1/||q||, so both applications evaluate f at
    // the identical point and the results differ by the exact factor 2.
    for (std::size_t i = 0; i < 2; ++i) CHECK(j2[i] == 2.0 * j1[i]);
}

TEST_CASE("finite differences approximate the analytic action") {
    ProblemHandle h = smooth2d();
    Element x = Element::vector(2);
    x[0] = 1.3;
    x[1] = -0.2;
    const Element r = h.residual(x);
    JvpConfig fd;
    fd.force_fd = true;
    LinearAction Afd(h, x, r, fd);
    LinearAction Aan(h, x, r);
    Rng rng(3);
    for (int t = 0; t < 5; ++t) {
        Element q = Element::vector(2);
        q[0] = rng.normal();
        q[1] = rng.normal();
        const Element a = Aan.apply(q);
        const Element b = Afd.apply(q);
        CHECK(norm(a - b) <= 1e-6 * (1.0 + norm(a)));
    }
}

TEST_CASE("finite-difference accounting: one evaluation per application, zero direction free") {
    ProblemHandle h = smooth2d();
    const Element r = h.residual(h.x0);
    JvpConfig cfg;
    cfg.force_fd = true;
    LinearAction A(h, h.x0, r, cfg);
    const std::int64_t before = h.fevals;
    Element q = Element::vector(2);
    q[0] = 1.0;
    A.apply(q);
    CHECK(h.fevals == before + 1);
    A.apply(q);
    CHECK(h.fevals == before + 2);
    const Element z = A.apply(Element::vector(2));
    CHECK(h.fevals == before + 2);  // zero direction costs nothing
    CHECK(norm(z) == 0.0);

    LinearAction Ad(h, h.x0, r, cfg, /*diagnostic=*/true);
    const std::int64_t dbefore = h.diag_fevals;
    Ad.apply(q);
    CHECK(h.fevals == before + 2);
    CHECK(h.diag_fevals == dbefore + 1);
}

TEST_CASE("finite-difference step follows the configured rule") {
    auto seen = std::make_shared<Element>();
    ProblemHandle h;
    h.name = "probe";
    h.x0 = Element::vector(3);
    h.x0[0] = 3.0;  // ||x0|| = 3 > 1
    h.f = [seen](const Element& x) {
        *seen = x;
        return Element::vector(3);
    };
    const Element r = h.residual(h.x0);
    JvpConfig cfg;  // force_fd irrelevant: no analytic action provided
    LinearAction A(h, h.x0, r, cfg);
    REQUIRE(A.counts_feval());
    Element q = Element::vector(3);
    q[1] = 2.0;
    A.apply(q);
    // eps = fd_scale * max(1, ||x||) / ||q||, so the probe distance is
    // ||eps q|| = fd_scale * max(1, ||x||).
    const double dist = norm(*seen - h.x0);
    CHECK(dist == Catch::Approx(cfg.fd_scale * 3.0).epsilon(1e-12));
}

TEST_CASE("deflated application splits the image against the window") {
    ProblemHandle h = make_random_linear(6, 99);
    const Element r = h.residual(h.x0);
    LinearAction A(h, h.x0, r);

    BlockBasis V(3);
    Element v1 = Element::vector(6);
    v1[0] = 1.0;
    Element v2 = Element::vector(6);
    v2[3] = 1.0;
    V.append(v1, 0.0);
    V.append(v2, 0.0);

    Rng rng(5);
    Element q = Element::vector(6);
    for (std::size_t i = 0; i < 6; ++i) q[i] = rng.normal();

    Element raw;
    std::vector<double> coeff;
    const Element defl = A.apply_deflated(q, V, &raw, &coeff);
    REQUIRE(coeff.size() == 2);
    // raw = deflated + V coeff, and the deflated part is orthogonal to V.
    Element rebuilt = defl;
    rebuilt.axpy(coeff[0], V.col(0));
    rebuilt.axpy(coeff[1], V.col(1));
    CHECK(norm(rebuilt - raw) <= 1e-13 * (1.0 + norm(raw)));
    CHECK(std::abs(inner(defl, V.col(0))) <= 1e-13 * (1.0 + norm(raw)));
    CHECK(std::abs(inner(defl, V.col(1))) <= 1e-13 * (1.0 + norm(raw)));
}

TEST_CASE("require_finite raises on non-finite state") {
    Element ok = Element::vector(2, 1.0);
    CHECK_NOTHROW(require_finite(ok, "state"));
    ok[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(require_finite(ok, "state"), numerical_error);
}

TEST_CASE("matrix-kind handles take Frechet actions") {
    ProblemHandle h = make_nare(4, 3, 2, 2);
    const Element X = h.x0;  // zero matrix
    const Element r = h.residual(X);
    LinearAction A(h, X, r);
    Element D = Element::matrix(4, 3);
    D.at(0, 0) = 1.0;
    D.at(2, 1) = -2.0;
    const Element L = A.apply(D);
    CHECK(L.kind() == Kind::matrix);
    CHECK(L.rows() == 4);
    CHECK(L.cols() == 3);
    // At X = 0 the quadratic term's derivative vanishes: L = A D + D B.
    ProblemHandle lin = make_nare(4, 3, 2, 2);
    JvpConfig fd;
    fd.force_fd = true;
    LinearAction Afd(lin, X, r, fd);
    CHECK(norm(L - Afd.apply(D)) <= 1e-6 * (1.0 + norm(L)));
}
