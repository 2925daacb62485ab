// Reference methods: inexact Newton with adaptive forcing, the truncated
// orthogonal-minimization scheme, and Anderson acceleration. Forcing depths
// are pinned through raw evaluation counts; Anderson is checked against a
// hand secant recurrence and against one-shot Krylov iterates.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <functional>
#include <vector>

#include "nlkrylov/baselines.hpp"
#include "nlkrylov/inner_solvers.hpp"
#include "nlkrylov/problems.hpp"

using namespace nlkrylov;

namespace {

ProblemHandle diag12() {
    SmallMat A(2, 2, 0.0);
    A.at(0, 0) = 1.0;
    A.at(1, 1) = 2.0;
    return make_linear(A, {1.0, 1.0});
}

}  // namespace

TEST_CASE("inexact Newton forcing controls the inner depth") {
    // On diag(1,2) from b = (1,1) the residual directions cycle between
    // (1,1) and (2,-1), so every depth-one inner solve reduces the linear
    // residual by exactly 1/sqrt(10) ~ 0.3162.
    BaselineConfig cfg;
    cfg.tol = 1e-12;
    cfg.max_iter = 40;
    cfg.linesearch.enabled = false;
    cfg.jvp.force_fd = true;  // makes every inner application visible in fevals

    SECTION("the exponent update deepens the second solve") {
        // Step 1 stops at depth one (0.3162 <= eta0 = 1/3); the update
        // 0.3162^phi ~ 0.155 then forces depth two, which solves the
        // two-dimensional system to difference-quotient accuracy, and the
        // floor-clamped third step finishes. Raw counts: initial residual,
        // then depth + 1 per step.
        ProblemHandle h = diag12();
        SolveResult res = newton_krylov_solve(h, h.x0, cfg);
        REQUIRE(res.converged);
        REQUIRE(res.history.size() == 3);
        CHECK(res.history[0].fevals == 3);
        CHECK(res.history[1].fevals == 6);
        CHECK(res.history[2].fevals == 9);
        CHECK(res.history[0].resnorm ==
              Catch::Approx(1.0 / std::sqrt(5.0)).margin(1e-7));
        CHECK(res.final_resnorm <= 1e-12 * res.r0_norm);
    }

    SECTION("a pinched clamp holds the forcing fixed") {
        // With eta frozen at 0.32 every step stops at depth one and the
        // relative residual is exactly 10^(-j/2); tol 2e-12 is first met
        // at j = 24.
        ProblemHandle h = diag12();
        cfg.eta0 = 0.32;
        cfg.eta_min = 0.32;
        cfg.eta_max = 0.32;
        cfg.tol = 2e-12;
        SolveResult res = newton_krylov_solve(h, h.x0, cfg);
        REQUIRE(res.converged);
        CHECK(res.history.size() == 24);
        CHECK(res.fevals == 49);
        for (std::size_t i = 1; i < res.history.size(); ++i)
            CHECK(res.history[i].fevals - res.history[i - 1].fevals == 2);
        CHECK(res.history[4].rel_resnorm ==
              Catch::Approx(std::pow(10.0, -2.5)).epsilon(1e-6));
    }
}

TEST_CASE("inexact Newton converges on the ignition problem") {
    ProblemHandle h = make_bratu(6, 0.5);
    BaselineConfig cfg;
    cfg.tol = 1e-11;
    cfg.max_iter = 30;
    int calls = 0;
    double last = -1.0;
    cfg.observer = [&](const IterationRecord& rec, const Element&) {
        ++calls;
        last = rec.resnorm;
    };
    SolveResult res = newton_krylov_solve(h, h.x0, cfg);
    CHECK(res.converged);
    CHECK(res.iters <= 15);
    CHECK(norm(h.residual(res.x)) <= 1e-10 * res.r0_norm);
    CHECK(calls == res.iters);
    CHECK(last == res.final_resnorm);
}

TEST_CASE("orthogonal minimization converges on the ignition problem") {
    ProblemHandle h = make_bratu(5, 0.5);
    BaselineConfig cfg;
    cfg.tol = 1e-10;
    cfg.max_iter = 60;
    cfg.k = 10;
    int calls = 0;
    cfg.observer = [&](const IterationRecord&, const Element&) { ++calls; };
    SolveResult res = nl_orthomin_solve(h, h.x0, cfg);
    CHECK(res.converged);
    CHECK(norm(h.residual(res.x)) <= 1e-9 * res.r0_norm);
    CHECK(calls == res.iters);
    CHECK(res.iters == static_cast<int>(res.history.size()));
    for (std::size_t i = 1; i < res.history.size(); ++i)
        CHECK(res.history[i].fevals >= res.history[i - 1].fevals);
}

TEST_CASE("single-difference Anderson is the secant method on a scalar") {
    ProblemHandle h;
    h.name = "scalar";
    h.x0 = Element::vector(1, 1.0);
    h.f = [](const Element& x) {
        Element out = Element::vector(1);
        out[0] = x[0] * x[0] - 2.0;
        return out;
    };
    BaselineConfig cfg;
    cfg.k = 1;
    cfg.beta = 1.0;
    cfg.tol = 1e-12;
    cfg.max_iter = 20;
    std::vector<double> xs;
    cfg.observer = [&](const IterationRecord&, const Element& x) { xs.push_back(x[0]); };
    SolveResult res = anderson_solve(h, h.x0, cfg);
    REQUIRE(res.converged);
    CHECK(res.iters <= 15);
    CHECK(res.x[0] == Catch::Approx(std::sqrt(2.0)).margin(1e-9));

    // Oracle: s1 = s0 + f(s0), then the secant recurrence.
    auto f = [](double x) { return x * x - 2.0; };
    std::vector<double> s = {1.0, 1.0 + f(1.0)};
    for (int j = 0; j < 5; ++j) {
        const double a = s[s.size() - 2], b = s.back();
        s.push_back(b - f(b) * (b - a) / (f(b) - f(a)));
    }
    REQUIRE(xs.size() >= 5);
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(xs[i] == Catch::Approx(s[i + 1]).margin(1e-10));
}

TEST_CASE("full-memory Anderson steps through the one-shot Krylov iterates") {
    // On a linear problem, the accelerated iterate is the fixed-point map
    // applied to the minimum-residual iterate of the same depth:
    // x_{k+1} = g(x^mr_k) with g(x) = x + f(x).
    ProblemHandle h = make_random_linear(8, 47);
    BaselineConfig cfg;
    cfg.k = 8;
    cfg.beta = 1.0;
    cfg.tol = 1e-15;
    cfg.max_iter = 5;
    std::vector<Element> xa;
    cfg.observer = [&](const IterationRecord&, const Element& x) { xa.push_back(x); };
    anderson_solve(h, h.x0, cfg);
    REQUIRE(xa.size() == 5);

    const Element r0 = h.residual(h.x0);
    for (std::size_t k = 0; k + 1 < 5; ++k) {
        Element xg = h.x0;
        if (k > 0) {
            LinearAction A(h, h.x0, r0, cfg.jvp);
            InnerResult ir = gmres(A, r0, static_cast<int>(k));
            xg = h.x0 + ir.p_hat;
        }
        const Element pred = xg + h.f(xg);
        CHECK(norm(xa[k] - pred) <= 1e-8 * (1.0 + norm(pred)));
    }
}

TEST_CASE("windowless Anderson is the plain damped fixed-point iteration") {
    ProblemHandle h = make_random_linear(10, 53);
    BaselineConfig plain;
    plain.k = 0;
    plain.beta = -0.4;  // spectrum of I - 0.4 A sits inside the unit disk
    plain.tol = 1e-10;
    plain.max_iter = 300;
    SolveResult a = anderson_solve(h, h.x0, plain);
    CHECK(a.converged);
    CHECK(a.iters > 10);

    BaselineConfig wide = plain;
    wide.k = 5;
    SolveResult b = anderson_solve(h, h.x0, wide);
    CHECK(b.converged);
    CHECK(b.iters < a.iters);

    // The damped map contracts at a fixed linear rate; verify the first
    // plain step by hand: x1 = x0 + beta f(x0).
    Element x1 = h.x0;
    x1.axpy(plain.beta, h.f(h.x0));
    BaselineConfig one = plain;
    one.max_iter = 1;
    SolveResult c = anderson_solve(h, h.x0, one);
    CHECK(norm(c.x - x1) <= 1e-14 * norm(x1));
}

TEST_CASE("baselines return immediately on a zero residual") {
    ProblemHandle h;
    h.x0 = Element::vector(4, 1.0);
    h.f = [](const Element& x) { return x.zero_like(); };
    BaselineConfig cfg;
    for (int which = 0; which < 3; ++which) {
        SolveResult res = which == 0   ? newton_krylov_solve(h, h.x0, cfg)
                          : which == 1 ? nl_orthomin_solve(h, h.x0, cfg)
                                       : anderson_solve(h, h.x0, cfg);
        CHECK(res.converged);
        CHECK(res.iters == 0);
    }
}
