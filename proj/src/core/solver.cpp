#include "core/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/errors.hpp"

namespace bdb {
namespace {

void validate_physical(const DistributionField& f, const ModelParams& params) {
  if (!all_finite(f.v)) throw Unphysical("field contains non-finite values");
  if (params.eta <= 0.0) {
    for (double x : f.v)
      if (x < -1e-9) throw Unphysical("field below 0");
    return;
  }
  const double hi = 1.0 / params.eta;
  const double tol = 1e-9 * hi;
  for (double x : f.v)
    if (x < -tol || x > hi + tol)
      throw Unphysical("field outside [0, 1/eta]");
}

}  // namespace

std::vector<SpatialField> interaction_field(const DistributionField& f,
                                            const ModelParams& params, bool dealias_n) {
  SpatialField n = integrate_p(f);
  if (dealias_n) dealias(n);
  std::vector<SpatialField> a;
  a.reserve(f.grid.d);
  for (int i = 0; i < f.grid.d; ++i) {
    SpatialField ai = spectral_derivative(n, i, 1);
    for (double& x : ai.v) x *= params.U;
    a.push_back(std::move(ai));
  }
  return a;
}

Simulation::Simulation(DistributionField f0, const ModelParams& params,
                       const SolverConfig& config)
    : config_(config), band_(band_structure(params, f0.grid)) {
  validate_params(params);
  if (!(config.dt != 0.0) || !std::isfinite(config.dt))
    throw InvalidArgument("solver: dt must be nonzero and finite");
  if (config.t_end < 0.0) throw InvalidArgument("solver: t_end must be >= 0");

  state_.f = std::move(f0);
  state_.params = params;
  state_.t = 0.0;

  if (config_.mode != SolveMode::linearized) validate_physical(state_.f, params);

  if (config_.mode == SolveMode::fixed_f || config_.mode == SolveMode::linearized) {
    f_ref_ = equilibrium_values(config_.lambda_ref, params, band_);
    const std::size_t ps = state_.f.grid.p_size();
    grad_ref_.resize(static_cast<std::size_t>(params.d) * ps);
    for (int ax = 0; ax < params.d; ++ax) {
      // d/dp_i F = l1 * u_i * F(1-eta F), analytic on the band samples
      for (std::size_t pf = 0; pf < ps; ++pf) {
        const double F = f_ref_[pf];
        grad_ref_[ax * ps + pf] =
            config_.lambda_ref.l1 * band_.u[ax][pf] * F * (1.0 - params.eta * F);
      }
    }
    if (config_.mode == SolveMode::linearized) {
      kernel_ = sensitivity_kernel(config_.lambda_ref, params, band_, state_.f.grid.dp_measure());
      double n_ref = 0.0;
      for (double F : f_ref_) n_ref += F;
      n_ref *= state_.f.grid.dp_measure();
      gamma_ref_ = params.gamma * n_ref * (1.0 - params.eta * n_ref);
    }
  }
}

void Simulation::transport_x(double dt) {
  const auto& g = state_.f.grid;
  const std::size_t ps = g.p_size();
  const std::size_t lines_per_axis = (g.x_size() / g.nx) * ps;
  std::vector<double> shifts(lines_per_axis);
  for (int ax = 0; ax < g.d; ++ax) {
    const std::vector<double>& u = band_.u[ax];
    for (std::size_t j = 0; j < lines_per_axis / ps; ++j)
      for (std::size_t pf = 0; pf < ps; ++pf) shifts[j * ps + pf] = u[pf] * dt;
    state_.f = fourier_phase_shift(state_.f, Axis{AxisKind::X, ax}, shifts);
  }
}

void Simulation::accelerate(double dt) {
  const auto& g = state_.f.grid;
  if (config_.mode == SolveMode::linearized) {
    // source substep: g += dt * U * sum_i (d/dx_i n_g) * (d/dp_i F_ref)
    SpatialField n = integrate_p(state_.f);
    if (config_.dealias) dealias(n);
    const std::size_t ps = g.p_size();
    for (int ax = 0; ax < g.d; ++ax) {
      SpatialField dn = spectral_derivative(n, ax, 1);
      const double* gref = grad_ref_.data() + static_cast<std::size_t>(ax) * ps;
      for (std::size_t xf = 0; xf < g.x_size(); ++xf) {
        const double c = dt * state_.params.U * dn.v[xf];
        double* row = state_.f.v.data() + xf * ps;
        for (std::size_t pf = 0; pf < ps; ++pf) row[pf] += c * gref[pf];
      }
    }
    return;
  }

  // characteristics dp/dt = -a, so f(x,p) <- f(x, p + a*dt)
  const auto a = interaction_field(state_.f, state_.params, config_.dealias);
  const std::size_t lines = g.x_size() * (g.p_size() / g.np);
  const std::size_t per_x = g.p_size() / g.np;
  std::vector<double> shifts(lines);
  for (int ax = 0; ax < g.d; ++ax) {
    for (std::size_t xf = 0; xf < g.x_size(); ++xf)
      for (std::size_t r = 0; r < per_x; ++r) shifts[xf * per_x + r] = -a[ax].v[xf] * dt;
    state_.f = fourier_phase_shift(state_.f, Axis{AxisKind::P, ax}, shifts);
  }
}

void Simulation::collide(double dt) {
  if (state_.params.gamma == 0.0) return;
  const auto& g = state_.f.grid;
  const std::size_t ps = g.p_size();

  switch (config_.mode) {
    case SolveMode::nonlinear: {
      warm_ = build_collision_context(state_.f, state_.params, band_,
                                      have_warm_ ? &warm_ : nullptr);
      have_warm_ = true;
      for (std::size_t xf = 0; xf < g.x_size(); ++xf) {
        const double r = warm_.rate[xf];
        const double decay = (r == 0.0 || dt == 0.0) ? 1.0 : std::exp(-r * dt);
        double* row = state_.f.v.data() + xf * ps;
        const double* feq = warm_.feq.data() + xf * ps;
        for (std::size_t pf = 0; pf < ps; ++pf)
          row[pf] = feq[pf] + (row[pf] - feq[pf]) * decay;
      }
      if (config_.dealias) dealias(state_.f, AxisKind::X);
      break;
    }
    case SolveMode::fixed_f: {
      // rate frozen at the substep start; relaxation toward the fixed profile
      SpatialField n = integrate_p(state_.f);
      for (std::size_t xf = 0; xf < g.x_size(); ++xf) {
        const double r = state_.params.gamma * n.v[xf] * (1.0 - state_.params.eta * n.v[xf]);
        const double decay = (r == 0.0 || dt == 0.0) ? 1.0 : std::exp(-r * dt);
        double* row = state_.f.v.data() + xf * ps;
        for (std::size_t pf = 0; pf < ps; ++pf)
          row[pf] = f_ref_[pf] + (row[pf] - f_ref_[pf]) * decay;
      }
      if (config_.dealias) dealias(state_.f, AxisKind::X);
      break;
    }
    case SolveMode::linearized: {
      // moments are invariant here, so the substep ODE solves exactly
      SpatialField n = integrate_p(state_.f);
      SpatialField E = integrate_p_weighted(state_.f, band_.eps);
      const double decay = (gamma_ref_ == 0.0 || dt == 0.0) ? 1.0 : std::exp(-gamma_ref_ * dt);
      for (std::size_t xf = 0; xf < g.x_size(); ++xf) {
        double* row = state_.f.v.data() + xf * ps;
        for (std::size_t pf = 0; pf < ps; ++pf) {
          const double target = n.v[xf] * kernel_.g1[pf] + E.v[xf] * kernel_.g2[pf];
          row[pf] = target + (row[pf] - target) * decay;
        }
      }
      break;
    }
  }
}

void Simulation::step_by(double dt) {
  if (config_.scheme == SplitScheme::strang) {
    transport_x(dt / 2);
    collide(dt / 2);
    accelerate(dt);
    collide(dt / 2);
    transport_x(dt / 2);
  } else {
    transport_x(dt);
    collide(dt);
    accelerate(dt);
  }
  state_.t += dt;
  record_diagnostics();
  check_blowup();
}

void Simulation::step() { step_by(config_.dt); }

void Simulation::record_diagnostics() {
  StepDiagnostics d;
  d.t = state_.t;
  d.mass = integrate_phase(state_.f);
  d.energy = integrate_x(integrate_p_weighted(state_.f, band_.eps));
  d.l2 = l2_norm(state_.f);
  state_.history.push_back(d);
}

void Simulation::check_blowup() const {
  for (double x : state_.f.v) {
    if (!std::isfinite(x) || std::abs(x) > config_.blowup_ceiling)
      throw BlowUp("solver: field left the physical regime at t = " + std::to_string(state_.t),
                   state_.t);
  }
}

void Simulation::run(const Observer& observer) {
  if (observer) observer(state_);
  long step_count = 0;
  while (state_.t < config_.t_end - 1e-12 * std::max(1.0, config_.t_end)) {
    const double remaining = config_.t_end - state_.t;
    step_by(std::min(config_.dt, remaining));
    ++step_count;
    const bool last = state_.t >= config_.t_end - 1e-12 * std::max(1.0, config_.t_end);
    if (observer && (last || (config_.snapshot_every > 0 && step_count % config_.snapshot_every == 0)))
      observer(state_);
  }
}

DistributionField Simulation::rhs(const DistributionField& f) const {
  const auto& g = f.grid;
  const std::size_t ps = g.p_size();
  DistributionField out(g);

  // -u . grad_x f
  for (int ax = 0; ax < g.d; ++ax) {
    DistributionField dxf = spectral_derivative(f, Axis{AxisKind::X, ax}, 1);
    const std::vector<double>& u = band_.u[ax];
    for (std::size_t xf = 0; xf < g.x_size(); ++xf) {
      double* orow = out.v.data() + xf * ps;
      const double* drow = dxf.v.data() + xf * ps;
      for (std::size_t pf = 0; pf < ps; ++pf) orow[pf] -= u[pf] * drow[pf];
    }
  }

  if (config_.mode == SolveMode::linearized) {
    SpatialField n = integrate_p(f);
    SpatialField E = integrate_p_weighted(f, band_.eps);
    for (int ax = 0; ax < g.d; ++ax) {
      SpatialField dn = spectral_derivative(n, ax, 1);
      const double* gref = grad_ref_.data() + static_cast<std::size_t>(ax) * ps;
      for (std::size_t xf = 0; xf < g.x_size(); ++xf) {
        const double c = state_.params.U * dn.v[xf];
        double* orow = out.v.data() + xf * ps;
        for (std::size_t pf = 0; pf < ps; ++pf) orow[pf] += c * gref[pf];
      }
    }
    for (std::size_t xf = 0; xf < g.x_size(); ++xf) {
      double* orow = out.v.data() + xf * ps;
      const double* frow = f.v.data() + xf * ps;
      for (std::size_t pf = 0; pf < ps; ++pf) {
        const double target = n.v[xf] * kernel_.g1[pf] + E.v[xf] * kernel_.g2[pf];
        orow[pf] += gamma_ref_ * (target - frow[pf]);
      }
    }
    return out;
  }

  // + U grad_x n . grad_p f
  const auto a = interaction_field(f, state_.params, config_.dealias);
  for (int ax = 0; ax < g.d; ++ax) {
    DistributionField dpf = spectral_derivative(f, Axis{AxisKind::P, ax}, 1);
    for (std::size_t xf = 0; xf < g.x_size(); ++xf) {
      const double c = a[ax].v[xf];
      double* orow = out.v.data() + xf * ps;
      const double* drow = dpf.v.data() + xf * ps;
      for (std::size_t pf = 0; pf < ps; ++pf) orow[pf] += c * drow[pf];
    }
  }

  if (state_.params.gamma > 0.0) {
    if (config_.mode == SolveMode::nonlinear) {
      DistributionField q = bgk_rhs(f, state_.params, band_);
      for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += q.v[i];
    } else {  // fixed_f
      SpatialField n = integrate_p(f);
      for (std::size_t xf = 0; xf < g.x_size(); ++xf) {
        const double r = state_.params.gamma * n.v[xf] * (1.0 - state_.params.eta * n.v[xf]);
        double* orow = out.v.data() + xf * ps;
        const double* frow = f.v.data() + xf * ps;
        for (std::size_t pf = 0; pf < ps; ++pf) orow[pf] += r * (f_ref_[pf] - frow[pf]);
      }
    }
  }
  return out;
}

SimState simulate(const DistributionField& f0, const ModelParams& params,
                  const SolverConfig& config, const Observer& observer) {
  Simulation sim(f0, params, config);
  sim.run(observer);
  return sim.state();
}

}  // namespace bdb
