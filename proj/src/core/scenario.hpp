#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/equilibrium.hpp"
#include "core/grid.hpp"
#include "core/stability.hpp"

namespace bdb {

inline constexpr const char* kBdbVersion = "0.1.0";

struct ManifestEntry {
  std::string name;  // relative to the output directory
  std::uint64_t bytes = 0;
  std::string fnv64;  // hex checksum of the file contents
};

struct RunManifest {
  std::string mode;
  std::string out_dir;
  std::string manifest_path;
  double wall_seconds = 0.0;
  std::vector<ManifestEntry> outputs;
};

// Dispatches to one of the pipelines {equilibrium, simulate, stability,
// illposed, norms}, writes every output atomically into out_dir and the
// manifest last. Throws ConfigError for bad configs; pipeline errors
// propagate with context.
RunManifest run_scenario(const std::string& mode, const std::string& config_path,
                         const std::string& out_dir, int threads = 1);

// --- growth experiment (the illposed pipeline core) -------------------------

struct RateFit {
  double rate = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int samples = 0;
};

// Least-squares fit of log a(t) over the window a(t) <= window_ratio * a(0).
// Throws SaturatedTooFast if fewer than min_samples points fall inside.
RateFit fit_log_amplitude(std::span<const double> t, std::span<const double> a,
                          double window_ratio = 10.0, int min_samples = 10);

struct GrowthConfig {
  std::vector<int> mode_indices;  // box modes m for the nonlinear runs
  int lin_mode = 1;               // box mode of the linearized control run
  double c = 1.0;
  double nu = 0.1;
  double amplitude_floor = 1e-6;
  double dt = 1e-4;
  double t_end = 0.0;  // <= 0: choose from the slowest growth rate
  bool dealias = true;
  double ratio_time = 0.0;  // <= 0: 0.6 * t_end
  double ratio_ball_radius = 0.25;
  int ratio_k = 1;
  double ratio_theta = 1.0;
  int threads = 1;
};

struct GrowthRun {
  int m = 0;
  double beta = 0.0, alpha = 0.0, omega = 0.0, wavenumber = 0.0;
  double amp_paper = 0.0, amp_used = 0.0;
  bool control = false;  // omega <= 0: non-growing control case
  RateFit fit;
  double rate_rel_err = 0.0;
  double ratio = 0.0;       // ||f(t*)-F||_{L1(ball)} / ||f0-F||_{W^{k,inf}}^theta
  double ratio_time = 0.0;
  std::vector<double> t_series, amp_series;
};

struct GrowthReport {
  Multipliers lambda;
  double margin = 0.0, alpha0 = 0.0;
  std::vector<GrowthRun> runs;
  int lin_m = 0;
  double lin_omega = 0.0, lin_measured = 0.0, lin_rel_err = 0.0;
  bool ratio_trend_increasing = false;  // ratio grows as beta decreases
};

// Per snapped mode m: perturb the equilibrium with the constructed mode,
// integrate the full nonlinear equation, fit the exponential rate on the
// pre-saturation window and evaluate the ill-posedness ratio; plus one
// linearized control run checking e^{omega t} directly.
GrowthReport growth_measurement(const CriticalPoint& critical, const ModelParams& params,
                                const PhaseGrid& grid, const GrowthConfig& cfg);

// Sum of sup norms of all mixed derivatives of total order <= k.
double wkinf_norm(const DistributionField& f, int k);

// L1 norm over the torus ball of radius delta centered at (x0, p0) (node
// coordinates; the remaining axes of a 2-D run are centered at 0).
double l1_ball_norm(const DistributionField& f, double delta, double x0 = 0.0, double p0 = 0.0);

}  // namespace bdb
