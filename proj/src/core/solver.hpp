#pragma once

#include <functional>
#include <vector>

#include "core/collision.hpp"
#include "core/equilibrium.hpp"
#include "core/grid.hpp"

namespace bdb {

enum class SplitScheme { strang, lie };

// nonlinear: self-consistent BGK relaxation toward F_f.
// fixed_f:   relaxation toward the fixed profile F_{lambda_ref}.
// linearized: evolution of a perturbation g around F_{lambda_ref} with the
//             sensitivity kernel G replacing the full collision operator.
enum class SolveMode { nonlinear, fixed_f, linearized };

struct SolverConfig {
  double dt = 1e-2;
  double t_end = 1.0;
  SplitScheme scheme = SplitScheme::strang;
  bool dealias = true;
  SolveMode mode = SolveMode::nonlinear;
  int snapshot_every = 1;          // observer stride, in steps
  double blowup_ceiling = 1e6;     // |f| above this raises BlowUp
  Multipliers lambda_ref{};        // background multipliers for fixed_f/linearized
};

struct StepDiagnostics {
  double t = 0.0;
  double mass = 0.0;    // integral of f over phase space
  double energy = 0.0;  // integral of eps*f
  double l2 = 0.0;
};

struct SimState {
  DistributionField f;
  double t = 0.0;
  ModelParams params;
  std::vector<StepDiagnostics> history;  // one entry per completed step
};

using Observer = std::function<void(const SimState&)>;

// Acceleration a_i(x) = U * d/dx_i n_f, one SpatialField per spatial axis.
std::vector<SpatialField> interaction_field(const DistributionField& f,
                                            const ModelParams& params, bool dealias_n);

// Time integrator owning the per-run caches (band samples, warm-started
// multipliers, linearization kernels). Strang composition per step:
//   T_x(dt/2) C(dt/2) A_p(dt) C(dt/2) T_x(dt/2)
// with exact Fourier substeps for both advections and the exact exponential
// relaxation substep for C.
class Simulation {
public:
  Simulation(DistributionField f0, const ModelParams& params, const SolverConfig& config);

  void step();                 // advance by config.dt
  void step_by(double dt);     // advance by an arbitrary dt (reversal tests use dt < 0)
  // Runs until state().t reaches t_end; observer fires at t = 0, on the
  // snapshot stride, and on the final step. Raises BlowUp when the field
  // leaves the configured ceiling.
  void run(const Observer& observer = {});

  const SimState& state() const { return state_; }
  const SolverConfig& config() const { return config_; }
  const BandStructure& band() const { return band_; }

  // d/dt f for the configured mode, evaluated spectrally at the given field.
  DistributionField rhs(const DistributionField& f) const;

private:
  void transport_x(double dt);
  void collide(double dt);
  void accelerate(double dt);
  void record_diagnostics();
  void check_blowup() const;

  SolverConfig config_;
  SimState state_;
  BandStructure band_;
  CollisionContext warm_;
  bool have_warm_ = false;

  // linearized / fixed_f background
  std::vector<double> f_ref_;             // F_{lambda_ref} over p
  std::vector<double> grad_ref_;          // d/dp_i F_ref, per axis, concatenated
  SensitivityKernel kernel_;
  double gamma_ref_ = 0.0;                // gamma * n_ref * (1 - eta*n_ref)
};

// Convenience wrapper: validates f0, runs to t_end, returns the final state.
SimState simulate(const DistributionField& f0, const ModelParams& params,
                  const SolverConfig& config, const Observer& observer = {});

}  // namespace bdb
