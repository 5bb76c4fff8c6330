#pragma once

#include <complex>
#include <span>
#include <vector>

#include "core/equilibrium.hpp"
#include "core/grid.hpp"

namespace bdb {

// 2x2 real dispersion matrix B(alpha, beta).
struct Mat2 {
  double a11 = 0, a12 = 0, a21 = 0, a22 = 0;
  double trace() const { return a11 + a22; }
  double det() const { return a11 * a22 - a12 * a21; }
  double det_minus_id() const { return (a11 - 1) * (a22 - 1) - a12 * a21; }
};

struct CriticalPoint {
  Multipliers lambda;   // background multipliers
  double alpha0 = 0.0;  // positive root of the beta = 0 condition
  double margin = 0.0;  // U*kappa(lambda) - 1
};

struct BranchPoint {
  double beta = 0.0;
  double alpha = 0.0;
  double det_resid = 0.0;  // det(B - Id) at (alpha, beta)
  int mode_index = 0;      // box mode m when snapped, 0 otherwise
  double wavenumber = 0.0; // phi = gamma_lambda * alpha / beta
};

// The constructed linear instability: g(x,p) = A(p) e^{i phi x_1} grows like
// e^{omega t} under the linearized dynamics.
struct UnstableMode {
  double alpha = 0.0, beta = 0.0;
  double nhat = 0.0, ehat = 0.0;  // eigenvector of B for eigenvalue 1, nhat^2+ehat^2=1
  std::vector<std::complex<double>> profile;  // A over the flat p-grid
  double omega = 0.0;       // gamma_lambda * (alpha^2 - beta) / beta
  double wavenumber = 0.0;  // phi
};

// Precomputed p-grid samples for one background lambda; every stability
// quadrature runs off these arrays.
class StabilityContext {
public:
  StabilityContext(const Multipliers& lambda, const ModelParams& params, const PhaseGrid& grid);

  const Multipliers& lambda() const { return lambda_; }
  const ModelParams& params() const { return params_; }
  double n_ref() const { return n_ref_; }
  double gamma_lambda() const { return gamma_lambda_; }
  double margin() const { return margin_; }
  const std::vector<double>& equilibrium() const { return f_ref_; }
  const std::vector<double>& dp1_f() const { return dp1_f_; }
  const SensitivityKernel& kernel() const { return kernel_; }
  const std::vector<double>& eps() const { return eps_; }
  const std::vector<double>& v1() const { return v1_; }

  // U*l1 * integral v1^2/(v1^2+alpha^2) F(1-eta F) dp, strictly decreasing in
  // alpha > 0 with limits U*kappa (alpha->0) and 0 (alpha->inf).
  double critical_rhs(double alpha) const;
  Mat2 dispersion(double alpha, double beta) const;
  Mat2 dispersion_dalpha(double alpha, double beta) const;  // entrywise d/dalpha

  // Newton in alpha for det(B - Id) = 0 at fixed beta. Throws BranchLost.
  double solve_branch_alpha(double beta, double alpha_seed) const;

  double omega_of(double alpha, double beta) const {
    return gamma_lambda_ * (alpha * alpha - beta) / beta;
  }
  double wavenumber_of(double alpha, double beta) const {
    return gamma_lambda_ * alpha / beta;
  }

private:
  Multipliers lambda_;
  ModelParams params_;
  double dp_ = 0.0;
  std::vector<double> eps_, v1_, f_ref_, sigma_, dp1_f_;
  SensitivityKernel kernel_;
  double n_ref_ = 0.0, gamma_lambda_ = 0.0, margin_ = 0.0;
};

// U*kappa(lambda) - 1; a positive value certifies the sufficient instability
// condition 1 < U*l1*int F(1-eta F) dp.
double instability_margin(const Multipliers& lambda, const ModelParams& params,
                          const PhaseGrid& grid);

// Grid scan maximizing the margin at fixed U.
Multipliers sweep_lambda(const ModelParams& params, const PhaseGrid& grid,
                         double l0_min, double l0_max, int l0_count,
                         double l1_min, double l1_max, int l1_count,
                         double* best_margin = nullptr);

// The unique alpha0 > 0 with critical_rhs(alpha0) = 1, by bisection on a
// geometrically grown bracket. Throws NoRoot when the margin is <= 0.
CriticalPoint critical_alpha(const Multipliers& lambda, const ModelParams& params,
                             const PhaseGrid& grid);

Mat2 dispersion_matrix(double alpha, double beta, const Multipliers& lambda,
                       const ModelParams& params, const PhaseGrid& grid);

// Continuation of alpha(beta) seeded at alpha0, processing each sign of beta
// outward from 0. Throws BranchLost outside the continuation interval.
std::vector<BranchPoint> branch_alpha(const CriticalPoint& critical,
                                      std::span<const double> betas,
                                      const ModelParams& params, const PhaseGrid& grid);

// Solves for the branch point whose wavenumber is exactly 2*pi*m/Lx, so the
// mode fits the periodic box. Requires gamma > 0 and m >= 1.
BranchPoint snap_beta_to_mode(const CriticalPoint& critical, int m,
                              const ModelParams& params, const PhaseGrid& grid);

UnstableMode unstable_mode(double alpha, double beta, const Multipliers& lambda,
                           const ModelParams& params, const PhaseGrid& grid);

double paper_amplitude(double beta, double c, double nu);

// F_lambda + amplitude_scale * beta * e^{-c nu/|beta|} * Re(A e^{i phi x_1}).
// Throws IncommensurableWavenumber if phi*Lx/2pi is not an integer to 1e-8,
// Unphysical if the perturbed field leaves [0, 1/eta].
DistributionField perturbed_initial(const UnstableMode& mode, const Multipliers& lambda,
                                    double c, double nu, double amplitude_scale,
                                    const ModelParams& params, const PhaseGrid& grid);

// Same construction with the amplitude given directly (the harness uses this
// for floor-scaled runs where the paper amplitude underflows).
DistributionField perturbed_initial_abs(const UnstableMode& mode, const Multipliers& lambda,
                                        double amplitude, const ModelParams& params,
                                        const PhaseGrid& grid);

// L2 norm of the stationary linearized identity applied to the grid
// realization of g = A e^{i phi x_1}; ~0 on the branch.
double linear_residual(const UnstableMode& mode, const Multipliers& lambda,
                       const ModelParams& params, const PhaseGrid& grid);

// L2 norm of the mode itself (normalization reference for residual checks).
double mode_l2(const UnstableMode& mode, const PhaseGrid& grid);

// Re(A(p) e^{i phi x_1}) realized on the grid; the linearized solver grows
// this field like e^{omega t}.
DistributionField mode_field(const UnstableMode& mode, const PhaseGrid& grid);

}  // namespace bdb
