#pragma once

#include <cstddef>

#include "superhedge/solver.hpp"

namespace superhedge {

/// Literal min-max evaluation of the hedging cost: enumerate every assignment
/// of one grid-valued action per non-terminal node of the unrolled scenario
/// tree, and for each assignment take the worst root-to-leaf path cost. Slow
/// by design; the search space matches the solver's grid exactly, so the
/// result must agree with Solver::solve bit for bit. The strategy space is
/// scanned in contiguous chunks across workers; the reduction is a plain min,
/// so the result does not depend on the thread count.
///
/// Throws TooLarge when (grid points)^(decision nodes) exceeds strategy_cap.
double enumerate_price(const Instance& instance,
                       std::size_t strategy_cap = 10'000'000, int threads = 0);

/// Classical replication value of a cash call on a recombining binomial tree
/// without frictions. `up` and `down` are per-step factors with down < 1 < up.
double binomial_frictionless_price(double s0, double up, double down,
                                   double strike, int steps);

/// Worst terminal shortfall when the recorded policy is funded with
/// price + slack. Nonnegative slack must keep every path solvent.
double verify_superhedge(const SolveResult& result, const Instance& instance,
                         double slack);

/// Cost Lipschitz bound times the coarsest grid step; the slack used by the
/// pathwise super-replication checks.
double lipschitz_slack(const Instance& instance, const SupportLattice& lattice);

}  // namespace superhedge
