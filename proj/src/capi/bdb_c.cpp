#include "bdb/bdb.h"

#include <algorithm>
#include <cstring>
#include <string>

#include "core/errors.hpp"
#include "core/scenario.hpp"
#include "core/snapshot.hpp"
#include "core/solver.hpp"
#include "core/stability.hpp"

namespace {

thread_local std::string g_last_error;

bdb::ModelParams to_params(const bdb_params* p) {
  if (!p) throw bdb::InvalidArgument("params is NULL");
  bdb::ModelParams out;
  out.eta = p->eta;
  out.eps0 = p->eps0;
  out.U = p->U;
  out.gamma = p->gamma;
  out.d = p->d;
  bdb::validate_params(out);
  return out;
}

template <typename Fn>
bdb_status guarded(Fn&& fn) {
  try {
    fn();
    return BDB_OK;
  } catch (const bdb::InvalidGrid& e) {
    g_last_error = e.what();
    return BDB_ERR_INVALID_GRID;
  } catch (const bdb::Infeasible& e) {
    g_last_error = e.what();
    return BDB_ERR_INFEASIBLE;
  } catch (const bdb::NoConvergence& e) {
    g_last_error = e.what();
    return BDB_ERR_NO_CONVERGENCE;
  } catch (const bdb::NearSingular& e) {
    g_last_error = e.what();
    return BDB_ERR_NEAR_SINGULAR;
  } catch (const bdb::NoRoot& e) {
    g_last_error = e.what();
    return BDB_ERR_NO_ROOT;
  } catch (const bdb::BranchLost& e) {
    g_last_error = e.what();
    return BDB_ERR_BRANCH_LOST;
  } catch (const bdb::DegenerateEigenvector& e) {
    g_last_error = e.what();
    return BDB_ERR_DEGENERATE_EIGENVECTOR;
  } catch (const bdb::IncommensurableWavenumber& e) {
    g_last_error = e.what();
    return BDB_ERR_INCOMMENSURABLE_WAVENUMBER;
  } catch (const bdb::Unphysical& e) {
    g_last_error = e.what();
    return BDB_ERR_UNPHYSICAL;
  } catch (const bdb::BlowUp& e) {
    g_last_error = e.what();
    return BDB_ERR_BLOW_UP;
  } catch (const bdb::SaturatedTooFast& e) {
    g_last_error = e.what();
    return BDB_ERR_SATURATED_TOO_FAST;
  } catch (const bdb::ProfileInvalid& e) {
    g_last_error = e.what();
    return BDB_ERR_PROFILE_INVALID;
  } catch (const bdb::ConfigError& e) {
    g_last_error = e.what();
    return BDB_ERR_CONFIG;
  } catch (const bdb::CorruptSnapshot& e) {
    g_last_error = e.what();
    return BDB_ERR_CORRUPT_SNAPSHOT;
  } catch (const bdb::IoError& e) {
    g_last_error = e.what();
    return BDB_ERR_IO;
  } catch (const bdb::InvalidArgument& e) {
    g_last_error = e.what();
    return BDB_ERR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BDB_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return BDB_ERR_INTERNAL;
  }
}

}  // namespace

struct bdb_grid {
  bdb::PhaseGrid grid;
};

struct bdb_field {
  bdb::DistributionField field;
};

struct bdb_sim {
  bdb::Simulation sim;
};

extern "C" {

const char* bdb_version(void) { return bdb::kBdbVersion; }

const char* bdb_last_error(void) { return g_last_error.c_str(); }

bdb_status bdb_grid_create(int d, int nx, int np, double lx, bdb_grid** out) {
  return guarded([&] {
    if (!out) throw bdb::InvalidArgument("out is NULL");
    *out = new bdb_grid{bdb::build_grid(d, nx, np, lx)};
  });
}

void bdb_grid_free(bdb_grid* grid) { delete grid; }

bdb_status bdb_grid_dims(const bdb_grid* grid, int* d, int* nx, int* np, double* lx) {
  return guarded([&] {
    if (!grid) throw bdb::InvalidArgument("grid is NULL");
    if (d) *d = grid->grid.d;
    if (nx) *nx = grid->grid.nx;
    if (np) *np = grid->grid.np;
    if (lx) *lx = grid->grid.lx;
  });
}

bdb_status bdb_moments_forward(const bdb_grid* grid, const bdb_params* params,
                               double lambda0, double lambda1, double* n, double* E) {
  return guarded([&] {
    if (!grid || !n || !E) throw bdb::InvalidArgument("NULL argument");
    const auto m = bdb::moments_forward({lambda0, lambda1}, to_params(params), grid->grid);
    *n = m.n;
    *E = m.E;
  });
}

bdb_status bdb_moments_invert(const bdb_grid* grid, const bdb_params* params,
                              double n, double E, double* lambda0, double* lambda1) {
  return guarded([&] {
    if (!grid || !lambda0 || !lambda1) throw bdb::InvalidArgument("NULL argument");
    const auto lam = bdb::moments_invert({n, E}, to_params(params), grid->grid);
    *lambda0 = lam.l0;
    *lambda1 = lam.l1;
  });
}

bdb_status bdb_kappa(const bdb_grid* grid, const bdb_params* params,
                     double lambda0, double lambda1, double* out) {
  return guarded([&] {
    if (!grid || !out) throw bdb::InvalidArgument("NULL argument");
    *out = bdb::kappa({lambda0, lambda1}, to_params(params), grid->grid);
  });
}

bdb_status bdb_instability_margin(const bdb_grid* grid, const bdb_params* params,
                                  double lambda0, double lambda1, double* out) {
  return guarded([&] {
    if (!grid || !out) throw bdb::InvalidArgument("NULL argument");
    *out = bdb::instability_margin({lambda0, lambda1}, to_params(params), grid->grid);
  });
}

bdb_status bdb_critical_alpha(const bdb_grid* grid, const bdb_params* params,
                              double lambda0, double lambda1, double* alpha0) {
  return guarded([&] {
    if (!grid || !alpha0) throw bdb::InvalidArgument("NULL argument");
    *alpha0 = bdb::critical_alpha({lambda0, lambda1}, to_params(params), grid->grid).alpha0;
  });
}

bdb_status bdb_field_create_equilibrium(const bdb_grid* grid, const bdb_params* params,
                                        double lambda0, double lambda1, bdb_field** out) {
  return guarded([&] {
    if (!grid || !out) throw bdb::InvalidArgument("NULL argument");
    const auto p = to_params(params);
    const auto prof = bdb::equilibrium_profile({lambda0, lambda1}, p, grid->grid);
    bdb::DistributionField f(grid->grid);
    const std::size_t ps = grid->grid.p_size();
    for (std::size_t xf = 0; xf < grid->grid.x_size(); ++xf)
      for (std::size_t pf = 0; pf < ps; ++pf) f.at(xf, pf) = prof.f[pf];
    *out = new bdb_field{std::move(f)};
  });
}

bdb_status bdb_field_create_from_data(const bdb_grid* grid, const double* values,
                                      size_t count, bdb_field** out) {
  return guarded([&] {
    if (!grid || !values || !out) throw bdb::InvalidArgument("NULL argument");
    if (count != grid->grid.size())
      throw bdb::InvalidArgument("value count does not match the grid size");
    bdb::DistributionField f(grid->grid);
    std::memcpy(f.v.data(), values, count * sizeof(double));
    if (!bdb::all_finite(f.v)) throw bdb::Unphysical("field contains non-finite values");
    *out = new bdb_field{std::move(f)};
  });
}

void bdb_field_free(bdb_field* field) { delete field; }

bdb_status bdb_field_data(const bdb_field* field, const double** data, size_t* count) {
  return guarded([&] {
    if (!field || !data || !count) throw bdb::InvalidArgument("NULL argument");
    *data = field->field.v.data();
    *count = field->field.v.size();
  });
}

bdb_status bdb_field_moments(const bdb_field* field, const bdb_params* params,
                             double* mass, double* energy, double* l2) {
  return guarded([&] {
    if (!field) throw bdb::InvalidArgument("field is NULL");
    const auto p = to_params(params);
    const auto band = bdb::band_structure(p, field->field.grid);
    if (mass) *mass = bdb::integrate_phase(field->field);
    if (energy) *energy = bdb::integrate_x(bdb::integrate_p_weighted(field->field, band.eps));
    if (l2) *l2 = bdb::l2_norm(field->field);
  });
}

bdb_status bdb_sim_create(const bdb_field* f0, const bdb_params* params, double dt,
                          int scheme, int mode, int dealias,
                          double lambda_ref0, double lambda_ref1, bdb_sim** out) {
  return guarded([&] {
    if (!f0 || !out) throw bdb::InvalidArgument("NULL argument");
    bdb::SolverConfig sc;
    sc.dt = dt;
    sc.t_end = 0.0;
    sc.scheme = (scheme == 1) ? bdb::SplitScheme::lie : bdb::SplitScheme::strang;
    switch (mode) {
      case 0: sc.mode = bdb::SolveMode::nonlinear; break;
      case 1: sc.mode = bdb::SolveMode::fixed_f; break;
      case 2: sc.mode = bdb::SolveMode::linearized; break;
      default: throw bdb::InvalidArgument("mode must be 0, 1 or 2");
    }
    sc.dealias = dealias != 0;
    sc.lambda_ref = {lambda_ref0, lambda_ref1};
    *out = new bdb_sim{bdb::Simulation(f0->field, to_params(params), sc)};
  });
}

bdb_status bdb_sim_advance(bdb_sim* sim, double t_end) {
  return guarded([&] {
    if (!sim) throw bdb::InvalidArgument("sim is NULL");
    const double dt = sim->sim.config().dt;
    while (sim->sim.state().t < t_end - 1e-12 * std::max(1.0, t_end))
      sim->sim.step_by(std::min(dt, t_end - sim->sim.state().t));
  });
}

bdb_status bdb_sim_time(const bdb_sim* sim, double* t) {
  return guarded([&] {
    if (!sim || !t) throw bdb::InvalidArgument("NULL argument");
    *t = sim->sim.state().t;
  });
}

bdb_status bdb_sim_field(const bdb_sim* sim, bdb_field** out) {
  return guarded([&] {
    if (!sim || !out) throw bdb::InvalidArgument("NULL argument");
    *out = new bdb_field{sim->sim.state().f};
  });
}

void bdb_sim_free(bdb_sim* sim) { delete sim; }

bdb_status bdb_snapshot_write(const char* path, const bdb_field* field,
                              const bdb_params* params, double t) {
  return guarded([&] {
    if (!path || !field) throw bdb::InvalidArgument("NULL argument");
    bdb::write_snapshot(path, field->field, to_params(params), t);
  });
}

bdb_status bdb_snapshot_read(const char* path, bdb_field** field, bdb_params* params,
                             double* t) {
  return guarded([&] {
    if (!path || !field) throw bdb::InvalidArgument("NULL argument");
    auto snap = bdb::read_snapshot(path);
    if (params) {
      params->eta = snap.params.eta;
      params->eps0 = snap.params.eps0;
      params->U = snap.params.U;
      params->gamma = snap.params.gamma;
      params->d = snap.params.d;
    }
    if (t) *t = snap.t;
    *field = new bdb_field{std::move(snap.f)};
  });
}

bdb_status bdb_run_scenario(const char* mode, const char* config_path, const char* out_dir,
                            int threads, char* manifest_path, size_t manifest_path_len) {
  return guarded([&] {
    if (!mode || !config_path || !out_dir) throw bdb::InvalidArgument("NULL argument");
    const auto manifest = bdb::run_scenario(mode, config_path, out_dir, threads);
    if (manifest_path && manifest_path_len > 0) {
      std::strncpy(manifest_path, manifest.manifest_path.c_str(), manifest_path_len - 1);
      manifest_path[manifest_path_len - 1] = '\0';
    }
  });
}

}  // extern "C"
