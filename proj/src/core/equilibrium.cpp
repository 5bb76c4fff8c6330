#include "core/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "core/errors.hpp"

namespace bdb {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDensityFloor = 1e-10;

// F at one node; stable for any finite argument. For eta > 0 the expression
// saturates to 0 or 1/eta through IEEE overflow of exp; for eta = 0 it is the
// plain Maxwell-Boltzmann exponential.
inline double fermi(double eta, double z) {
  if (eta > 0.0) return 1.0 / (eta + std::exp(-z));
  return std::exp(z);
}

struct Moments3 {
  double n, E;          // plain moments
  double m0, m1, m2;    // eps^k against F(1-eta F)
};

Moments3 all_moments(const Multipliers& lam, const ModelParams& prm,
                     std::span<const double> eps, double dp) {
  Moments3 a{0, 0, 0, 0, 0};
  for (double e : eps) {
    const double F = fermi(prm.eta, lam.l0 + lam.l1 * e);
    const double s = F * (1.0 - prm.eta * F);
    a.n += F;
    a.E += e * F;
    a.m0 += s;
    a.m1 += e * s;
    a.m2 += e * e * s;
  }
  a.n *= dp;
  a.E *= dp;
  a.m0 *= dp;
  a.m1 *= dp;
  a.m2 *= dp;
  return a;
}

double residual_norm(const Multipliers& lam, const ModelParams& prm,
                     std::span<const double> eps, double dp, const MomentPair& target) {
  double n = 0, E = 0;
  for (double e : eps) {
    const double F = fermi(prm.eta, lam.l0 + lam.l1 * e);
    n += F;
    E += e * F;
  }
  n *= dp;
  E *= dp;
  return std::max(std::abs(n - target.n), std::abs(E - target.E));
}

}  // namespace

void validate_params(const ModelParams& p) {
  if (!(p.eta >= 0.0)) throw InvalidArgument("params: eta must be >= 0");
  if (!(p.eps0 > 0.0)) throw InvalidArgument("params: eps0 must be > 0");
  if (!(p.gamma >= 0.0)) throw InvalidArgument("params: gamma must be >= 0");
  if (p.d != 1 && p.d != 2) throw InvalidArgument("params: d must be 1 or 2");
}

BandStructure band_structure(const ModelParams& params, const PhaseGrid& grid) {
  validate_params(params);
  const int np = grid.np;
  // Per-axis samples folded so that index k and N-k give bitwise-symmetric
  // cosines and exactly antisymmetric sines.
  std::vector<double> c(np), s(np);
  for (int k = 0; k < np; ++k) {
    const int mirrored = std::min(k, np - k);
    c[k] = std::cos(kTwoPi * mirrored / np);
    if (k == 0 || 2 * k == np) {
      s[k] = 0.0;
    } else {
      const double base = std::sin(kTwoPi * mirrored / np);
      s[k] = (k < np - k) ? base : -base;
    }
  }

  BandStructure b;
  const std::size_t ps = grid.p_size();
  b.eps.resize(ps);
  b.u.assign(grid.d, std::vector<double>(ps));
  for (std::size_t pf = 0; pf < ps; ++pf) {
    double acc = 0.0;
    std::size_t rem = pf;
    // decode row-major p multi-index: axis 0 is the major one
    for (int ax = grid.d - 1; ax >= 0; --ax) {
      const int k = static_cast<int>(rem % np);
      rem /= np;
      acc += c[k];
      b.u[ax][pf] = 2.0 * kTwoPi * params.eps0 * s[k];  // 4*pi*eps0*sin(2*pi*p)
    }
    b.eps[pf] = -2.0 * params.eps0 * acc;
  }
  return b;
}

MomentPair moments_forward(const Multipliers& lambda, const ModelParams& params,
                           const BandStructure& band, double dp) {
  const auto a = all_moments(lambda, params, band.eps, dp);
  return {a.n, a.E};
}

MomentPair moments_forward(const Multipliers& lambda, const ModelParams& params,
                           const PhaseGrid& grid) {
  const auto band = band_structure(params, grid);
  return moments_forward(lambda, params, band, grid.dp_measure());
}

MomentJacobian moment_jacobian(const Multipliers& lambda, const ModelParams& params,
                               const BandStructure& band, double dp, double det_floor) {
  const auto a = all_moments(lambda, params, band.eps, dp);
  MomentJacobian j{a.m0, a.m1, a.m2};
  if (!(j.det() > det_floor))
    throw NearSingular("moment_jacobian: determinant " + std::to_string(j.det()) +
                       " below floor (n near 0 or 1/eta)");
  return j;
}

MomentJacobian moment_jacobian(const Multipliers& lambda, const ModelParams& params,
                               const PhaseGrid& grid, double det_floor) {
  const auto band = band_structure(params, grid);
  return moment_jacobian(lambda, params, band, grid.dp_measure(), det_floor);
}

bool moment_target_feasible(const MomentPair& target, const ModelParams& params) {
  if (!(target.n > kDensityFloor)) return false;
  if (params.eta > 0.0 && !(target.n < 1.0 / params.eta - kDensityFloor)) return false;
  return std::abs(target.E) < 2.0 * params.eps0 * params.d * target.n;
}

Multipliers moments_invert(const MomentPair& target, const ModelParams& params,
                           const BandStructure& band, double dp,
                           std::optional<Multipliers> init, double tol, int max_iter) {
  if (!moment_target_feasible(target, params))
    throw Infeasible("moments_invert: target (n=" + std::to_string(target.n) +
                     ", E=" + std::to_string(target.E) + ") outside the feasible cone");

  Multipliers lam;
  if (init) {
    lam = *init;
  } else {
    // exact solution of the E = 0 slice
    lam.l0 = (params.eta > 0.0) ? std::log(target.n / (1.0 - params.eta * target.n))
                                : std::log(target.n);
    lam.l1 = 0.0;
  }

  double res = residual_norm(lam, params, band.eps, dp, target);
  for (int it = 0; it < max_iter; ++it) {
    if (res < tol) return lam;
    const auto a = all_moments(lam, params, band.eps, dp);
    const double det = a.m0 * a.m2 - a.m1 * a.m1;
    if (!(det > 1e-300) || !std::isfinite(det))
      throw NearSingular("moments_invert: singular moment Jacobian");
    const double rn = a.n - target.n;
    const double rE = a.E - target.E;
    const double dl0 = (a.m2 * rn - a.m1 * rE) / det;
    const double dl1 = (-a.m1 * rn + a.m0 * rE) / det;

    // halve the step until the residual decreases
    double step = 1.0;
    bool accepted = false;
    for (int h = 0; h < 60; ++h) {
      const Multipliers trial{lam.l0 - step * dl0, lam.l1 - step * dl1};
      const double tres = residual_norm(trial, params, band.eps, dp, target);
      if (tres < res) {
        lam = trial;
        res = tres;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted)
      throw NoConvergence("moments_invert: line search stalled at residual " +
                          std::to_string(res));
  }
  if (res < tol) return lam;
  throw NoConvergence("moments_invert: no convergence after " + std::to_string(max_iter) +
                      " iterations (target too near the feasibility boundary)");
}

Multipliers moments_invert(const MomentPair& target, const ModelParams& params,
                           const PhaseGrid& grid, std::optional<Multipliers> init,
                           double tol, int max_iter) {
  const auto band = band_structure(params, grid);
  return moments_invert(target, params, band, grid.dp_measure(), init, tol, max_iter);
}

std::vector<double> equilibrium_values(const Multipliers& lambda, const ModelParams& params,
                                       const BandStructure& band) {
  std::vector<double> f(band.eps.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] = fermi(params.eta, lambda.l0 + lambda.l1 * band.eps[i]);
  return f;
}

EquilibriumProfile equilibrium_profile(const Multipliers& lambda, const ModelParams& params,
                                       const PhaseGrid& grid) {
  const auto band = band_structure(params, grid);
  return {equilibrium_values(lambda, params, band), lambda};
}

SensitivityKernel sensitivity_kernel(const Multipliers& lambda, const ModelParams& params,
                                     const BandStructure& band, double dp) {
  const auto j = moment_jacobian(lambda, params, band, dp);  // NearSingular propagates
  const double det = j.det();
  SensitivityKernel k;
  const std::size_t n = band.eps.size();
  k.g1.resize(n);
  k.g2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = band.eps[i];
    const double F = fermi(params.eta, lambda.l0 + lambda.l1 * e);
    const double s = F * (1.0 - params.eta * F);
    k.g1[i] = s * (j.m2 - e * j.m1) / det;
    k.g2[i] = s * (e * j.m0 - j.m1) / det;
  }
  return k;
}

SensitivityKernel sensitivity_kernel(const Multipliers& lambda, const ModelParams& params,
                                     const PhaseGrid& grid) {
  const auto band = band_structure(params, grid);
  return sensitivity_kernel(lambda, params, band, grid.dp_measure());
}

double kappa(const Multipliers& lambda, const ModelParams& params,
             const BandStructure& band, double dp) {
  double m0 = 0.0;
  for (double e : band.eps) {
    const double F = fermi(params.eta, lambda.l0 + lambda.l1 * e);
    m0 += F * (1.0 - params.eta * F);
  }
  return lambda.l1 * m0 * dp;
}

double kappa(const Multipliers& lambda, const ModelParams& params, const PhaseGrid& grid) {
  const auto band = band_structure(params, grid);
  return kappa(lambda, params, band, grid.dp_measure());
}

}  // namespace bdb
