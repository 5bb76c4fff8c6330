#include "core/collision.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace bdb {
namespace {

inline double decay_factor(double r, double dt) {
  if (r == 0.0 || dt == 0.0) return 1.0;  // avoid 0*inf in the dt -> inf limit
  return std::exp(-r * dt);
}

}  // namespace

CollisionContext build_collision_context(const DistributionField& f, const ModelParams& params,
                                         const BandStructure& band,
                                         const CollisionContext* warm) {
  const std::size_t xs = f.grid.x_size();
  const std::size_t ps = f.grid.p_size();
  const double dp = f.grid.dp_measure();

  CollisionContext ctx;
  ctx.lambda.resize(xs);
  ctx.moments.resize(xs);
  ctx.rate.resize(xs);
  ctx.feq.resize(f.v.size());

  for (std::size_t xf = 0; xf < xs; ++xf) {
    const double* row = f.v.data() + xf * ps;
    double n = 0.0, E = 0.0;
    for (std::size_t pf = 0; pf < ps; ++pf) {
      n += row[pf];
      E += band.eps[pf] * row[pf];
    }
    n *= dp;
    E *= dp;

    std::optional<Multipliers> init;
    if (warm)
      init = warm->lambda[xf];
    else if (xf > 0)
      init = ctx.lambda[xf - 1];

    const MomentPair target{n, E};
    ctx.lambda[xf] = moments_invert(target, params, band, dp, init);
    ctx.moments[xf] = target;
    ctx.rate[xf] = params.gamma * n * (1.0 - params.eta * n);

    const Multipliers lam = ctx.lambda[xf];
    double* feq_row = ctx.feq.data() + xf * ps;
    for (std::size_t pf = 0; pf < ps; ++pf) {
      const double z = lam.l0 + lam.l1 * band.eps[pf];
      feq_row[pf] = (params.eta > 0.0) ? 1.0 / (params.eta + std::exp(-z)) : std::exp(z);
    }
  }
  return ctx;
}

DistributionField bgk_rhs(const DistributionField& f, const ModelParams& params,
                          const BandStructure& band) {
  if (!all_finite(f.v)) throw Unphysical("bgk_rhs: non-finite field");
  const auto ctx = build_collision_context(f, params, band);
  DistributionField q(f.grid);
  const std::size_t ps = f.grid.p_size();
  for (std::size_t xf = 0; xf < f.grid.x_size(); ++xf) {
    const double r = ctx.rate[xf];
    for (std::size_t pf = 0; pf < ps; ++pf) {
      const std::size_t i = xf * ps + pf;
      q.v[i] = r * (ctx.feq[i] - f.v[i]);
    }
  }
  return q;
}

DistributionField bgk_rhs(const DistributionField& f, const ModelParams& params) {
  return bgk_rhs(f, params, band_structure(params, f.grid));
}

DistributionField bgk_step(const DistributionField& f, const ModelParams& params,
                           const BandStructure& band, double dt,
                           const CollisionContext* warm) {
  if (dt < 0.0) throw InvalidArgument("bgk_step: dt must be >= 0");
  if (!all_finite(f.v)) throw Unphysical("bgk_step: non-finite field");
  const auto ctx = build_collision_context(f, params, band, warm);
  DistributionField out(f.grid);
  const std::size_t ps = f.grid.p_size();
  for (std::size_t xf = 0; xf < f.grid.x_size(); ++xf) {
    const double decay = decay_factor(ctx.rate[xf], dt);
    for (std::size_t pf = 0; pf < ps; ++pf) {
      const std::size_t i = xf * ps + pf;
      out.v[i] = ctx.feq[i] + (f.v[i] - ctx.feq[i]) * decay;
    }
  }
  return out;
}

DistributionField bgk_step(const DistributionField& f, const ModelParams& params, double dt) {
  return bgk_step(f, params, band_structure(params, f.grid), dt);
}

}  // namespace bdb
