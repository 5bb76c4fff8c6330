#pragma once

#include <vector>

#include "core/equilibrium.hpp"
#include "core/grid.hpp"

namespace bdb {

// Per-x state of the BGK operator Q(f) = gamma*n(1-eta*n)*(F_f - f):
// Lagrange multipliers, moments, relaxation rate and the local equilibrium.
struct CollisionContext {
  std::vector<Multipliers> lambda;  // per flat x index
  std::vector<MomentPair> moments;
  std::vector<double> rate;         // r(x) = gamma*n*(1-eta*n) >= 0
  std::vector<double> feq;          // F(x,p), same layout as a DistributionField
};

// Solves the per-x moment inversion (warm-started from `warm` if given, else
// chained from the neighboring cell). Throws Infeasible/NoConvergence when a
// spatial point has left the feasible regime.
CollisionContext build_collision_context(const DistributionField& f, const ModelParams& params,
                                         const BandStructure& band,
                                         const CollisionContext* warm = nullptr);

DistributionField bgk_rhs(const DistributionField& f, const ModelParams& params);
DistributionField bgk_rhs(const DistributionField& f, const ModelParams& params,
                          const BandStructure& band);

// Exact relaxation substep: f_out = F + (f - F)*exp(-r*dt), with F and r from
// the moments of the input. Conserves (n,E) per x up to Newton tolerance,
// preserves 0 <= f <= 1/eta, and contracts monotonically toward F.
DistributionField bgk_step(const DistributionField& f, const ModelParams& params, double dt);
DistributionField bgk_step(const DistributionField& f, const ModelParams& params,
                           const BandStructure& band, double dt,
                           const CollisionContext* warm = nullptr);

}  // namespace bdb
