#pragma once

#include <optional>
#include <span>
#include <vector>

#include "core/grid.hpp"

namespace bdb {

struct ModelParams {
  double eta = 1.0;    // Pauli saturation parameter, >= 0 (0 = Maxwell-Boltzmann)
  double eps0 = 1.0;   // tunneling rate, > 0
  double U = 1.0;      // on-site interaction strength
  double gamma = 1.0;  // collision frequency, >= 0
  int d = 1;
};

void validate_params(const ModelParams& params);

// Lagrange multipliers of the generalized Fermi-Dirac profile:
// F(p) = 1 / (eta + exp(-l0 - l1*eps(p))). l1 is a negative inverse
// temperature and may take either sign.
struct Multipliers {
  double l0 = 0.0;
  double l1 = 0.0;
};

struct MomentPair {
  double n = 0.0;  // particle density
  double E = 0.0;  // energy density
};

// Band samples over the flat p-grid. eps and each u_i are built with exact
// grid symmetry: eps(-p) == eps(p) and u(-p) == -u(p) bitwise.
struct BandStructure {
  std::vector<double> eps;             // eps(p) = -2*eps0 * sum_i cos(2*pi*p_i)
  std::vector<std::vector<double>> u;  // u_i(p) = 4*pi*eps0 * sin(2*pi*p_i)
};

BandStructure band_structure(const ModelParams& params, const PhaseGrid& grid);

struct EquilibriumProfile {
  std::vector<double> f;  // F over the flat p-grid
  Multipliers lambda;
};

// Moment matrix d(n,E)/d(lambda) = integral of [[1,eps],[eps,eps^2]] dmu with
// dmu = F(1-eta*F) dp. Symmetric positive definite on the feasible cone.
struct MomentJacobian {
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;  // integrals of eps^k dmu
  double det() const { return m0 * m2 - m1 * m1; }
};

// dF/d(n,E) at fixed p. The moment matrix of (g1,g2) against (1,eps) equals
// the 2x2 identity (chain rule on the identity map).
struct SensitivityKernel {
  std::vector<double> g1;  // dF/dn
  std::vector<double> g2;  // dF/dE
};

MomentPair moments_forward(const Multipliers& lambda, const ModelParams& params,
                           const PhaseGrid& grid);
MomentPair moments_forward(const Multipliers& lambda, const ModelParams& params,
                           const BandStructure& band, double dp_measure);

MomentJacobian moment_jacobian(const Multipliers& lambda, const ModelParams& params,
                               const PhaseGrid& grid, double det_floor = 1e-13);
MomentJacobian moment_jacobian(const Multipliers& lambda, const ModelParams& params,
                               const BandStructure& band, double dp_measure,
                               double det_floor = 1e-13);

// True iff the target lies strictly inside the conservative feasibility cone
// 0 < n < 1/eta (margin 1e-10) and |E| < 2*eps0*d*n.
bool moment_target_feasible(const MomentPair& target, const ModelParams& params);

// Damped Newton inversion of moments_forward. Throws Infeasible if the target
// violates the cone, NoConvergence after max_iter iterations (target too near
// the feasibility boundary).
Multipliers moments_invert(const MomentPair& target, const ModelParams& params,
                           const PhaseGrid& grid,
                           std::optional<Multipliers> init = std::nullopt,
                           double tol = 1e-12, int max_iter = 100);
Multipliers moments_invert(const MomentPair& target, const ModelParams& params,
                           const BandStructure& band, double dp_measure,
                           std::optional<Multipliers> init = std::nullopt,
                           double tol = 1e-12, int max_iter = 100);

EquilibriumProfile equilibrium_profile(const Multipliers& lambda, const ModelParams& params,
                                       const PhaseGrid& grid);
std::vector<double> equilibrium_values(const Multipliers& lambda, const ModelParams& params,
                                       const BandStructure& band);

SensitivityKernel sensitivity_kernel(const Multipliers& lambda, const ModelParams& params,
                                     const PhaseGrid& grid);
SensitivityKernel sensitivity_kernel(const Multipliers& lambda, const ModelParams& params,
                                     const BandStructure& band, double dp_measure);

// kappa(lambda) = l1 * integral F(1-eta F) dp; sign equals sign of l1.
double kappa(const Multipliers& lambda, const ModelParams& params, const PhaseGrid& grid);
double kappa(const Multipliers& lambda, const ModelParams& params,
             const BandStructure& band, double dp_measure);

}  // namespace bdb
