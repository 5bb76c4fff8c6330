#include "core/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "core/config.hpp"
#include "core/errors.hpp"
#include "core/norms.hpp"
#include "core/snapshot.hpp"
#include "core/solver.hpp"

namespace bdb {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// small output helpers

void write_text_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string());
    out << text;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("rename to " + path.string() + " failed: " + ec.message());
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

ManifestEntry checksum_file(const fs::path& dir, const std::string& name) {
  std::ifstream in(dir / name, std::ios::binary);
  if (!in) throw IoError("cannot reopen output " + name + " for checksumming");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return ManifestEntry{name, bytes.size(), hex64(fnv1a64(bytes))};
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// config -> core structures

ModelParams parse_model(const Config& cfg) {
  ModelParams p;
  p.eta = cfg.get_double("model.eta");
  p.eps0 = cfg.get_double("model.eps0");
  p.U = cfg.get_double("model.U");
  p.gamma = cfg.get_double("model.gamma");
  p.d = static_cast<int>(cfg.get_int("model.d"));
  validate_params(p);
  return p;
}

PhaseGrid parse_grid(const Config& cfg, const ModelParams& params) {
  return build_grid(params.d, static_cast<int>(cfg.get_int("grid.Nx")),
                    static_cast<int>(cfg.get_int("grid.Np")), cfg.get_double("grid.Lx", 1.0));
}

SolverConfig parse_solver(const Config& cfg) {
  SolverConfig sc;
  sc.dt = cfg.get_double("time.dt");
  sc.t_end = cfg.get_double("time.t_end");
  sc.snapshot_every = static_cast<int>(cfg.get_int("time.snapshot_every", 1));
  const std::string scheme = cfg.get_string("time.scheme", "strang");
  if (scheme == "strang")
    sc.scheme = SplitScheme::strang;
  else if (scheme == "lie")
    sc.scheme = SplitScheme::lie;
  else
    throw ConfigError("time.scheme must be strang or lie, got `" + scheme + "`");
  sc.dealias = cfg.get_bool("time.dealias", true);
  const std::string mode = cfg.get_string("time.solver_mode", "nonlinear");
  if (mode == "nonlinear")
    sc.mode = SolveMode::nonlinear;
  else if (mode == "fixed_F")
    sc.mode = SolveMode::fixed_f;
  else if (mode == "linearized")
    sc.mode = SolveMode::linearized;
  else
    throw ConfigError("time.solver_mode must be nonlinear, fixed_F or linearized");
  sc.blowup_ceiling = cfg.get_double("time.blowup_ceiling", 1e6);
  return sc;
}

struct InitResult {
  DistributionField f0;
  DistributionField reference;  // for the perturbation_l2 column
  Multipliers lambda;
};

DistributionField uniform_equilibrium(const Multipliers& lam, const ModelParams& params,
                                      const PhaseGrid& grid) {
  const auto prof = equilibrium_profile(lam, params, grid);
  DistributionField f(grid);
  const std::size_t ps = grid.p_size();
  for (std::size_t xf = 0; xf < grid.x_size(); ++xf)
    for (std::size_t pf = 0; pf < ps; ++pf) f.at(xf, pf) = prof.f[pf];
  return f;
}

// Paper amplitude clamped from below by the floor and halved until physical.
double usable_amplitude(const UnstableMode& mode, const Multipliers& lam, double c, double nu,
                        double floor_amp, const ModelParams& params, const PhaseGrid& grid,
                        DistributionField* out_field) {
  double amp = std::max(paper_amplitude(mode.beta, c, nu), floor_amp);
  for (int halvings = 0; halvings < 200; ++halvings) {
    try {
      DistributionField f = perturbed_initial_abs(mode, lam, amp, params, grid);
      if (out_field) *out_field = std::move(f);
      return amp;
    } catch (const Unphysical&) {
      amp *= 0.5;
    }
  }
  throw Unphysical("perturbation cannot be made physical at any amplitude");
}

InitResult build_initial(const Config& cfg, const ModelParams& params, const PhaseGrid& grid) {
  const std::string kind = cfg.get_string("init.kind");
  InitResult r;
  if (kind == "equilibrium") {
    r.lambda = Multipliers{cfg.get_double("init.lambda0"), cfg.get_double("init.lambda1")};
    r.f0 = uniform_equilibrium(r.lambda, params, grid);
    r.reference = r.f0;
  } else if (kind == "perturbed") {
    r.lambda = Multipliers{cfg.get_double("init.lambda0"), cfg.get_double("init.lambda1")};
    const auto critical = critical_alpha(r.lambda, params, grid);
    const int m = static_cast<int>(cfg.get_int("stability.wavenumber_m", 1));
    BranchPoint bp;
    if (cfg.has("init.beta")) {
      // snap the requested beta to the nearest box-commensurable branch point
      const double beta_req = cfg.get_double("init.beta");
      StabilityContext ctx(r.lambda, params, grid);
      const double alpha_req = ctx.solve_branch_alpha(beta_req, critical.alpha0);
      const double phi = ctx.wavenumber_of(alpha_req, beta_req);
      const int m_near = std::max(1, static_cast<int>(std::lround(
                                          phi * grid.lx / (2.0 * std::numbers::pi))));
      bp = snap_beta_to_mode(critical, m_near, params, grid);
    } else {
      bp = snap_beta_to_mode(critical, m, params, grid);
    }
    const auto mode = unstable_mode(bp.alpha, bp.beta, r.lambda, params, grid);
    const double c = cfg.get_double("init.c", 1.0);
    const double nu = cfg.get_double("init.nu", 0.1);
    const double floor_amp = cfg.get_double("init.amplitude_floor", 1e-6);
    usable_amplitude(mode, r.lambda, c, nu, floor_amp, params, grid, &r.f0);
    r.reference = uniform_equilibrium(r.lambda, params, grid);
  } else if (kind == "file") {
    const auto snap = read_snapshot(cfg.get_string("init.path"));
    if (!snap.f.grid.same_shape(grid))
      throw ConfigError("init.path snapshot grid does not match the [grid] section");
    r.f0 = snap.f;
    r.reference = snap.f;
  } else {
    throw ConfigError("init.kind must be equilibrium, perturbed or file, got `" + kind + "`");
  }
  return r;
}

double perturbation_l2(const DistributionField& f, const DistributionField& ref) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.v.size(); ++i) {
    const double d = f.v[i] - ref.v[i];
    s += d * d;
  }
  return std::sqrt(s * f.grid.dx_measure() * f.grid.dp_measure());
}

// ---------------------------------------------------------------------------
// pipelines; each returns the list of files it wrote (relative names)

std::vector<std::string> pipeline_equilibrium(const Config& cfg, const ModelParams& params,
                                              const PhaseGrid& grid, const fs::path& dir) {
  const Multipliers lam{cfg.get_double("init.lambda0", 0.0), cfg.get_double("init.lambda1", 0.0)};
  const auto mom = moments_forward(lam, params, grid);
  const double kap = kappa(lam, params, grid);
  const auto jac = moment_jacobian(lam, params, grid);

  json j;
  j["lambda0"] = lam.l0;
  j["lambda1"] = lam.l1;
  j["n"] = mom.n;
  j["E"] = mom.E;
  j["kappa"] = kap;
  j["margin"] = params.U * kap - 1.0;
  j["jacobian"] = {{jac.m0, jac.m1}, {jac.m1, jac.m2}};
  write_text_atomic(dir / "equilibrium.json", j.dump(2) + "\n");
  return {"equilibrium.json"};
}

std::vector<std::string> pipeline_simulate(const Config& cfg, const ModelParams& params,
                                           const PhaseGrid& grid, const fs::path& dir) {
  SolverConfig sc = parse_solver(cfg);
  InitResult init = build_initial(cfg, params, grid);
  sc.lambda_ref = init.lambda;

  std::ostringstream csv;
  csv << "t,mass,energy,l2,perturbation_l2\n";
  std::vector<std::string> files;
  int snap_index = 0;
  Simulation sim(init.f0, params, sc);
  sim.run([&](const SimState& s) {
    const double mass = integrate_phase(s.f);
    const double energy = integrate_x(integrate_p_weighted(s.f, sim.band().eps));
    csv << fmt(s.t) << "," << fmt(mass) << "," << fmt(energy) << "," << fmt(l2_norm(s.f)) << ","
        << fmt(perturbation_l2(s.f, init.reference)) << "\n";
    std::ostringstream name;
    name << "snapshot_" << std::setw(6) << std::setfill('0') << snap_index++ << ".bdbk";
    write_snapshot((dir / name.str()).string(), s.f, params, s.t);
    files.push_back(name.str());
  });
  write_text_atomic(dir / "series.csv", csv.str());
  files.push_back("series.csv");
  return files;
}

std::vector<std::string> pipeline_stability(const Config& cfg, const ModelParams& params,
                                            const PhaseGrid& grid, const fs::path& dir) {
  Multipliers lam;
  double margin;
  if (cfg.has("stability.lambda0") && cfg.has("stability.lambda1")) {
    lam = Multipliers{cfg.get_double("stability.lambda0"), cfg.get_double("stability.lambda1")};
    margin = instability_margin(lam, params, grid);
  } else {
    lam = sweep_lambda(params, grid, cfg.get_double("stability.sweep_l0_min", -3.0),
                       cfg.get_double("stability.sweep_l0_max", 3.0),
                       static_cast<int>(cfg.get_int("stability.sweep_l0_count", 61)),
                       cfg.get_double("stability.sweep_l1_min", 0.0),
                       cfg.get_double("stability.sweep_l1_max", 6.0),
                       static_cast<int>(cfg.get_int("stability.sweep_l1_count", 61)), &margin);
  }
  const auto critical = critical_alpha(lam, params, grid);
  StabilityContext ctx(lam, params, grid);

  // requested betas, snapped to box-commensurable branch points (dedup by m)
  const double beta_min = cfg.get_double("stability.beta_min");
  const double beta_max = cfg.get_double("stability.beta_max");
  const int beta_count = static_cast<int>(cfg.get_int("stability.beta_count"));
  if (beta_count < 1 || !(beta_min > 0.0) || !(beta_max >= beta_min))
    throw ConfigError("stability: need 0 < beta_min <= beta_max and beta_count >= 1");

  std::vector<int> ms;
  for (int i = 0; i < beta_count; ++i) {
    const double beta_req =
        (beta_count == 1) ? beta_min : beta_min + (beta_max - beta_min) * i / (beta_count - 1);
    const double alpha_req = ctx.solve_branch_alpha(beta_req, critical.alpha0);
    const double phi = ctx.wavenumber_of(alpha_req, beta_req);
    const int m = std::max(1, static_cast<int>(std::lround(phi * grid.lx / (2.0 * std::numbers::pi))));
    if (std::find(ms.begin(), ms.end(), m) == ms.end()) ms.push_back(m);
  }

  json j;
  j["lambda0"] = lam.l0;
  j["lambda1"] = lam.l1;
  j["margin"] = margin;
  j["alpha0"] = critical.alpha0;
  j["critical_residual"] = ctx.critical_rhs(critical.alpha0) - 1.0;
  const Mat2 b0 = ctx.dispersion(critical.alpha0, 0.0);
  j["B11_at_alpha0"] = b0.a11;

  std::ostringstream csv;
  csv << "m,beta,alpha,wavenumber,omega,det_B_minus_id,trace_B_minus_1,closure_err,residual_rel\n";
  json branch = json::array();
  for (int m : ms) {
    const auto bp = snap_beta_to_mode(critical, m, params, grid);
    const auto mode = unstable_mode(bp.alpha, bp.beta, lam, params, grid);
    const Mat2 B = ctx.dispersion(bp.alpha, bp.beta);

    std::complex<double> an(0, 0), ae(0, 0);
    const double dp = grid.dp_measure();
    for (std::size_t i = 0; i < mode.profile.size(); ++i) {
      an += mode.profile[i];
      ae += ctx.eps()[i] * mode.profile[i];
    }
    const double closure = std::max(std::abs(an * dp - std::complex<double>(mode.nhat, 0)),
                                    std::abs(ae * dp - std::complex<double>(mode.ehat, 0)));
    const double rel_resid = linear_residual(mode, lam, params, grid) / mode_l2(mode, grid);

    json row;
    row["m"] = m;
    row["beta"] = bp.beta;
    row["alpha"] = bp.alpha;
    row["wavenumber"] = bp.wavenumber;
    row["omega"] = mode.omega;
    row["det_B_minus_id"] = B.det_minus_id();
    row["trace_B_minus_1"] = B.trace() - 1.0;
    row["nhat"] = mode.nhat;
    row["ehat"] = mode.ehat;
    row["closure_err"] = closure;
    row["residual_rel"] = rel_resid;
    branch.push_back(row);
    csv << m << "," << fmt(bp.beta) << "," << fmt(bp.alpha) << "," << fmt(bp.wavenumber) << ","
        << fmt(mode.omega) << "," << fmt(B.det_minus_id()) << "," << fmt(B.trace() - 1.0) << ","
        << fmt(closure) << "," << fmt(rel_resid) << "\n";
  }
  j["branch"] = branch;
  write_text_atomic(dir / "stability.json", j.dump(2) + "\n");
  write_text_atomic(dir / "branch.csv", csv.str());
  return {"stability.json", "branch.csv"};
}

std::vector<std::string> pipeline_illposed(const Config& cfg, const ModelParams& params,
                                           const PhaseGrid& grid, const fs::path& dir,
                                           int threads) {
  Multipliers lam{cfg.get_double("stability.lambda0"), cfg.get_double("stability.lambda1")};
  const auto critical = critical_alpha(lam, params, grid);
  StabilityContext ctx(lam, params, grid);

  const double beta_min = cfg.get_double("stability.beta_min");
  const double beta_max = cfg.get_double("stability.beta_max");
  const int beta_count = static_cast<int>(cfg.get_int("stability.beta_count"));
  std::vector<int> ms;
  for (int i = 0; i < beta_count; ++i) {
    const double beta_req =
        (beta_count == 1) ? beta_min : beta_min + (beta_max - beta_min) * i / (beta_count - 1);
    const double alpha_req = ctx.solve_branch_alpha(beta_req, critical.alpha0);
    const double phi = ctx.wavenumber_of(alpha_req, beta_req);
    const int m = std::max(1, static_cast<int>(std::lround(phi * grid.lx / (2.0 * std::numbers::pi))));
    if (std::find(ms.begin(), ms.end(), m) == ms.end()) ms.push_back(m);
  }

  GrowthConfig gc;
  gc.mode_indices = ms;
  gc.lin_mode = static_cast<int>(cfg.get_int("stability.wavenumber_m", ms.front()));
  gc.c = cfg.get_double("init.c", 1.0);
  gc.nu = cfg.get_double("init.nu", 0.1);
  gc.amplitude_floor = cfg.get_double("init.amplitude_floor", 1e-6);
  gc.dt = cfg.get_double("time.dt");
  gc.t_end = cfg.get_double("time.t_end");
  gc.dealias = cfg.get_bool("time.dealias", true);
  gc.ratio_time = cfg.get_double("stability.ratio_time", 0.0);
  gc.ratio_ball_radius = cfg.get_double("stability.ratio_ball_radius", 0.25);
  gc.ratio_k = static_cast<int>(cfg.get_int("stability.ratio_k", 1));
  gc.ratio_theta = cfg.get_double("stability.ratio_theta", 1.0);
  gc.threads = threads;

  const GrowthReport rep = growth_measurement(critical, params, grid, gc);

  std::vector<std::string> files;
  json j;
  j["lambda0"] = rep.lambda.l0;
  j["lambda1"] = rep.lambda.l1;
  j["margin"] = rep.margin;
  j["alpha0"] = rep.alpha0;
  json runs = json::array();
  for (const auto& r : rep.runs) {
    json row;
    row["m"] = r.m;
    row["beta"] = r.beta;
    row["alpha"] = r.alpha;
    row["omega"] = r.omega;
    row["wavenumber"] = r.wavenumber;
    row["amp_paper"] = r.amp_paper;
    row["amp_used"] = r.amp_used;
    row["control"] = r.control;
    row["fitted_rate"] = r.fit.rate;
    row["rate_rel_err"] = r.rate_rel_err;
    row["r2"] = r.fit.r2;
    row["fit_samples"] = r.fit.samples;
    row["ratio"] = r.ratio;
    row["ratio_time"] = r.ratio_time;
    runs.push_back(row);

    std::ostringstream csv;
    csv << "t,perturbation_l2\n";
    for (std::size_t i = 0; i < r.t_series.size(); ++i)
      csv << fmt(r.t_series[i]) << "," << fmt(r.amp_series[i]) << "\n";
    const std::string name = "growth_m" + std::to_string(r.m) + ".csv";
    write_text_atomic(dir / name, csv.str());
    files.push_back(name);
  }
  j["runs"] = runs;
  j["linearized"] = {{"m", rep.lin_m},
                     {"omega", rep.lin_omega},
                     {"measured", rep.lin_measured},
                     {"rel_err", rep.lin_rel_err}};
  j["ratio_trend_increasing"] = rep.ratio_trend_increasing;
  write_text_atomic(dir / "growth_report.json", j.dump(2) + "\n");
  files.push_back("growth_report.json");
  return files;
}

std::vector<std::string> pipeline_norms(const Config& cfg, const ModelParams& params,
                                        const PhaseGrid& grid, const fs::path& dir) {
  NormProfile profile;
  profile.nu = cfg.get_double("norms.nu");
  profile.mu = cfg.get_double("norms.mu");
  profile.K = static_cast<int>(cfg.get_int("norms.K"));

  SolverConfig sc = parse_solver(cfg);
  InitResult init = build_initial(cfg, params, grid);
  sc.lambda_ref = init.lambda;
  profile.T = sc.t_end;

  std::vector<DistributionField> snaps, rhss;
  std::vector<double> times;
  Simulation sim(init.f0, params, sc);
  sim.run([&](const SimState& s) {
    snaps.push_back(s.f);
    rhss.push_back(sim.rhs(s.f));
    times.push_back(s.t);
  });

  const NormSeries series = weighted_tracker(snaps, rhss, times, profile);

  json j;
  j["nu"] = profile.nu;
  j["mu"] = profile.mu;
  j["K"] = profile.K;
  j["T"] = profile.T;
  j["value_nu_mu"] = series.value;
  j["rhs_bound"] = series.rhs_bound;
  j["slack"] = series.slack;
  j["verdict"] = series.satisfied ? "satisfied" : "violated";
  write_text_atomic(dir / "norms.json", j.dump(2) + "\n");

  std::ostringstream csv;
  csv << "t,norm_f,norm_df\n";
  for (std::size_t i = 0; i < series.t.size(); ++i)
    csv << fmt(series.t[i]) << "," << fmt(series.norm_f[i]) << "," << fmt(series.norm_df[i])
        << "\n";
  write_text_atomic(dir / "norm_series.csv", csv.str());
  return {"norms.json", "norm_series.csv"};
}

}  // namespace

double wkinf_norm(const DistributionField& f, int k) {
  auto supnorm = [](const DistributionField& g) {
    double m = 0.0;
    for (double x : g.v) m = std::max(m, std::abs(x));
    return m;
  };
  double total = supnorm(f);

  // breadth-first over mixed derivatives; each multi-index is enumerated once
  // by only extending along axes >= the highest axis already differentiated
  std::vector<DistributionField> level{f};
  std::vector<int> highest_axis{0};
  for (int order = 1; order <= k; ++order) {
    std::vector<DistributionField> next;
    std::vector<int> next_highest;
    for (std::size_t i = 0; i < level.size(); ++i) {
      for (int ax = highest_axis[i]; ax < 2 * f.grid.d; ++ax) {
        const Axis axis =
            (ax < f.grid.d) ? Axis{AxisKind::X, ax} : Axis{AxisKind::P, ax - f.grid.d};
        next.push_back(spectral_derivative(level[i], axis, 1));
        next_highest.push_back(ax);
        total += supnorm(next.back());
      }
    }
    level = std::move(next);
    highest_axis = std::move(next_highest);
  }
  return total;
}

double l1_ball_norm(const DistributionField& f, double delta, double x0, double p0) {
  const auto& g = f.grid;
  auto torus_d2 = [](double a, double b, double period) {
    double diff = std::abs(a - b);
    diff = std::min(diff, period - diff);
    return diff * diff;
  };
  double s = 0.0;
  const std::size_t ps = g.p_size();
  for (std::size_t xf = 0; xf < g.x_size(); ++xf) {
    // decode x multi-index
    double dx2 = 0.0;
    std::size_t rem = xf;
    for (int ax = g.d - 1; ax >= 0; --ax) {
      const int idx = static_cast<int>(rem % g.nx);
      rem /= g.nx;
      dx2 += torus_d2(g.x_axis[idx], (ax == 0) ? x0 : 0.0, g.lx);
    }
    for (std::size_t pf = 0; pf < ps; ++pf) {
      double dp2 = 0.0;
      std::size_t prem = pf;
      for (int ax = g.d - 1; ax >= 0; --ax) {
        const int idx = static_cast<int>(prem % g.np);
        prem /= g.np;
        dp2 += torus_d2(g.p_axis[idx], (ax == 0) ? p0 : 0.0, 1.0);
      }
      if (dx2 + dp2 <= delta * delta) s += std::abs(f.at(xf, pf));
    }
  }
  return s * g.dx_measure() * g.dp_measure();
}

RateFit fit_log_amplitude(std::span<const double> t, std::span<const double> a,
                          double window_ratio, int min_samples) {
  if (t.size() != a.size() || t.empty())
    throw InvalidArgument("fit_log_amplitude: series size mismatch");
  const double cap = window_ratio * a[0];
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (a[i] <= 0.0) continue;
    if (a[i] > cap) break;
    ts.push_back(t[i]);
    ys.push_back(std::log(a[i]));
  }
  if (static_cast<int>(ts.size()) < min_samples)
    throw SaturatedTooFast("fit window holds " + std::to_string(ts.size()) +
                           " samples; need >= " + std::to_string(min_samples) +
                           " (amplitude too large or dt too coarse)");
  const std::size_t n = ts.size();
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < n; ++i) {
    st += ts[i];
    sy += ys[i];
    stt += ts[i] * ts[i];
    sty += ts[i] * ys[i];
  }
  const double denom = n * stt - st * st;
  RateFit fit;
  fit.samples = static_cast<int>(n);
  fit.rate = (n * sty - st * sy) / denom;
  fit.intercept = (sy - fit.rate * st) / n;
  double ss_res = 0, ss_tot = 0;
  const double mean = sy / n;
  for (std::size_t i = 0; i < n; ++i) {
    const double pred = fit.intercept + fit.rate * ts[i];
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - mean) * (ys[i] - mean);
  }
  fit.r2 = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

GrowthReport growth_measurement(const CriticalPoint& critical, const ModelParams& params,
                                const PhaseGrid& grid, const GrowthConfig& cfg) {
  if (cfg.mode_indices.empty())
    throw InvalidArgument("growth_measurement: no modes requested");
  GrowthReport rep;
  rep.lambda = critical.lambda;
  rep.margin = critical.margin;
  rep.alpha0 = critical.alpha0;
  rep.runs.resize(cfg.mode_indices.size());

  const DistributionField f_ref = uniform_equilibrium(critical.lambda, params, grid);

  auto one_run = [&](std::size_t idx) {
    GrowthRun& run = rep.runs[idx];
    run.m = cfg.mode_indices[idx];
    const auto bp = snap_beta_to_mode(critical, run.m, params, grid);
    const auto mode = unstable_mode(bp.alpha, bp.beta, critical.lambda, params, grid);
    run.beta = bp.beta;
    run.alpha = bp.alpha;
    run.omega = mode.omega;
    run.wavenumber = mode.wavenumber;
    run.control = !(mode.omega > 0.0);
    run.amp_paper = paper_amplitude(bp.beta, cfg.c, cfg.nu);

    DistributionField f0;
    run.amp_used = usable_amplitude(mode, critical.lambda, cfg.c, cfg.nu, cfg.amplitude_floor,
                                    params, grid, &f0);

    SolverConfig sc;
    sc.dt = std::min(cfg.dt, run.control ? cfg.dt : 0.005 / mode.omega);
    sc.t_end = (cfg.t_end > 0.0) ? cfg.t_end : 8.0 / std::abs(mode.omega);
    sc.dealias = cfg.dealias;
    sc.mode = SolveMode::nonlinear;
    sc.snapshot_every = 1;
    run.ratio_time = (cfg.ratio_time > 0.0) ? cfg.ratio_time : 0.6 * sc.t_end;

    DistributionField f_at_star;
    bool have_star = false;
    Simulation sim(f0, params, sc);
    sim.run([&](const SimState& s) {
      run.t_series.push_back(s.t);
      run.amp_series.push_back(perturbation_l2(s.f, f_ref));
      if (!have_star && s.t >= run.ratio_time - 1e-12) {
        f_at_star = s.f;
        have_star = true;
      }
    });
    if (!have_star) f_at_star = sim.state().f;

    run.fit = fit_log_amplitude(run.t_series, run.amp_series);
    run.rate_rel_err = run.control ? 0.0 : std::abs(run.fit.rate / run.omega - 1.0);

    DistributionField diff_star = f_at_star;
    for (std::size_t i = 0; i < diff_star.v.size(); ++i) diff_star.v[i] -= f_ref.v[i];
    DistributionField diff0 = f0;
    for (std::size_t i = 0; i < diff0.v.size(); ++i) diff0.v[i] -= f_ref.v[i];
    const double numer = l1_ball_norm(diff_star, cfg.ratio_ball_radius);
    const double denom = std::pow(wkinf_norm(diff0, cfg.ratio_k), cfg.ratio_theta);
    run.ratio = numer / denom;
  };

  // independent beta runs in parallel worker slots
  const int workers = std::max(1, cfg.threads);
  if (workers == 1) {
    for (std::size_t i = 0; i < rep.runs.size(); ++i) one_run(i);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(rep.runs.size());
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < rep.runs.size(); i += workers) {
          try {
            one_run(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  // linearized control: the mode itself must grow like e^{omega t}
  {
    const auto bp = snap_beta_to_mode(critical, cfg.lin_mode, params, grid);
    const auto mode = unstable_mode(bp.alpha, bp.beta, critical.lambda, params, grid);
    rep.lin_m = cfg.lin_mode;
    rep.lin_omega = mode.omega;
    DistributionField g0 = mode_field(mode, grid);

    SolverConfig sc;
    sc.mode = SolveMode::linearized;
    sc.lambda_ref = critical.lambda;
    sc.dealias = cfg.dealias;
    sc.t_end = 1.0 / std::abs(mode.omega);  // one e-folding
    sc.dt = std::min(cfg.dt, 0.003 / std::abs(mode.omega));
    sc.blowup_ceiling = 1e12;
    const double a0 = l2_norm(g0);
    Simulation sim(g0, params, sc);
    sim.run();
    rep.lin_measured = std::log(l2_norm(sim.state().f) / a0) / sim.state().t;
    rep.lin_rel_err = std::abs(rep.lin_measured / rep.lin_omega - 1.0);
  }

  // ill-posedness trend: the ratio must increase as beta decreases
  std::vector<const GrowthRun*> sorted;
  for (const auto& r : rep.runs) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const GrowthRun* a, const GrowthRun* b) { return a->beta > b->beta; });
  rep.ratio_trend_increasing = sorted.size() >= 2;
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
    if (!(sorted[i + 1]->ratio > sorted[i]->ratio)) rep.ratio_trend_increasing = false;
  return rep;
}

RunManifest run_scenario(const std::string& mode, const std::string& config_path,
                         const std::string& out_dir, int threads) {
  const auto t_start = std::chrono::steady_clock::now();
  const Config cfg = Config::parse_file(config_path);
  const ModelParams params = parse_model(cfg);
  const PhaseGrid grid = parse_grid(cfg, params);

  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());

  std::vector<std::string> files;
  if (mode == "equilibrium")
    files = pipeline_equilibrium(cfg, params, grid, dir);
  else if (mode == "simulate")
    files = pipeline_simulate(cfg, params, grid, dir);
  else if (mode == "stability")
    files = pipeline_stability(cfg, params, grid, dir);
  else if (mode == "illposed")
    files = pipeline_illposed(cfg, params, grid, dir, threads);
  else if (mode == "norms")
    files = pipeline_norms(cfg, params, grid, dir);
  else
    throw ConfigError("unknown mode `" + mode +
                      "`; expected equilibrium|simulate|stability|illposed|norms");

  const auto unread = cfg.unread_keys();
  if (!unread.empty())
    throw ConfigError("unknown key `" + unread.front() + "` in " + config_path);

  RunManifest man;
  man.mode = mode;
  man.out_dir = out_dir;
  for (const auto& name : files) man.outputs.push_back(checksum_file(dir, name));
  man.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  json j;
  j["mode"] = mode;
  j["version"] = kBdbVersion;
  json echo;
  for (const auto& [k, v] : cfg.entries()) echo[k] = v;
  j["config"] = echo;
  j["grid"] = {{"d", grid.d}, {"Nx", grid.nx}, {"Np", grid.np}, {"Lx", grid.lx}};
  j["model"] = {{"eta", params.eta},
                {"eps0", params.eps0},
                {"U", params.U},
                {"gamma", params.gamma},
                {"d", params.d}};
  j["wall_seconds"] = man.wall_seconds;
  json outs = json::array();
  for (const auto& e : man.outputs)
    outs.push_back({{"name", e.name}, {"bytes", e.bytes}, {"fnv64", e.fnv64}});
  j["outputs"] = outs;

  man.manifest_path = (dir / "manifest.json").string();
  write_text_atomic(dir / "manifest.json", j.dump(2) + "\n");
  return man;
}

}  // namespace bdb
