// Minimal library walkthrough: solve the solid-fuel ignition problem with
// the nested Krylov method and print the residual history.

#include <cstdio>

#include "nlkrylov/problems.hpp"
#include "nlkrylov/solver.hpp"

int main() {
    nlkrylov::ProblemHandle problem = nlkrylov::make_bratu(32, 0.5);

    nlkrylov::SolverConfig cfg;
    cfg.method = nlkrylov::Method::nlgmresr;
    cfg.k = 10;       // outer direction window
    cfg.m = 10;       // inner Krylov depth per step
    cfg.tol = 1e-12;  // relative residual target
    cfg.max_iter = 50;

    nlkrylov::SolveResult res = nlkrylov::solve(problem, problem.x0, cfg);

    std::printf("%-6s %-14s %-8s\n", "iter", "rel_resnorm", "fevals");
    for (const nlkrylov::IterationRecord& rec : res.history)
        std::printf("%-6d %-14.3e %-8lld\n", rec.iter, rec.rel_resnorm,
                    static_cast<long long>(rec.fevals));
    std::printf("converged=%s iters=%d fevals=%lld termination=%s\n",
                res.converged ? "true" : "false", res.iters,
                static_cast<long long>(res.fevals), res.termination.c_str());
    return res.converged ? 0 : 1;
}
