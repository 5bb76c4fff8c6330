#include "core/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "core/errors.hpp"

namespace bdb {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kBranchTol = 1e-13;
constexpr double kDegenerateTol = 1e-8;

}  // namespace

StabilityContext::StabilityContext(const Multipliers& lambda, const ModelParams& params,
                                   const PhaseGrid& grid)
    : lambda_(lambda), params_(params), dp_(grid.dp_measure()) {
  validate_params(params);
  const auto band = band_structure(params, grid);
  eps_ = band.eps;
  v1_ = band.u[0];
  f_ref_ = equilibrium_values(lambda, params, band);

  const std::size_t n = eps_.size();
  sigma_.resize(n);
  dp1_f_.resize(n);
  double nb = 0.0, kap = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sigma_[i] = f_ref_[i] * (1.0 - params.eta * f_ref_[i]);
    dp1_f_[i] = lambda.l1 * v1_[i] * sigma_[i];
    nb += f_ref_[i];
    kap += sigma_[i];
  }
  n_ref_ = nb * dp_;
  gamma_lambda_ = params.gamma * n_ref_ * (1.0 - params.eta * n_ref_);
  margin_ = params.U * lambda.l1 * kap * dp_ - 1.0;
  kernel_ = sensitivity_kernel(lambda, params, band, dp_);
}

double StabilityContext::critical_rhs(double alpha) const {
  double s = 0.0;
  for (std::size_t i = 0; i < eps_.size(); ++i) {
    const double v2 = v1_[i] * v1_[i];
    s += v2 / (v2 + alpha * alpha) * sigma_[i];
  }
  return params_.U * lambda_.l1 * s * dp_;
}

Mat2 StabilityContext::dispersion(double alpha, double beta) const {
  Mat2 b;
  for (std::size_t i = 0; i < eps_.size(); ++i) {
    const double h = 1.0 / (v1_[i] * v1_[i] + alpha * alpha);
    const double w1 = (params_.U * v1_[i] * dp1_f_[i] + beta * kernel_.g1[i]) * h;
    const double w2 = beta * kernel_.g2[i] * h;
    b.a11 += w1;
    b.a12 += w2;
    b.a21 += eps_[i] * w1;
    b.a22 += eps_[i] * w2;
  }
  b.a11 *= dp_;
  b.a12 *= dp_;
  b.a21 *= dp_;
  b.a22 *= dp_;
  return b;
}

Mat2 StabilityContext::dispersion_dalpha(double alpha, double beta) const {
  Mat2 b;
  for (std::size_t i = 0; i < eps_.size(); ++i) {
    const double h = 1.0 / (v1_[i] * v1_[i] + alpha * alpha);
    const double dh = -2.0 * alpha * h * h;
    const double w1 = (params_.U * v1_[i] * dp1_f_[i] + beta * kernel_.g1[i]) * dh;
    const double w2 = beta * kernel_.g2[i] * dh;
    b.a11 += w1;
    b.a12 += w2;
    b.a21 += eps_[i] * w1;
    b.a22 += eps_[i] * w2;
  }
  b.a11 *= dp_;
  b.a12 *= dp_;
  b.a21 *= dp_;
  b.a22 *= dp_;
  return b;
}

double StabilityContext::solve_branch_alpha(double beta, double alpha_seed) const {
  double a = alpha_seed;
  for (int it = 0; it < 80; ++it) {
    const Mat2 b = dispersion(a, beta);
    const double phi = b.det_minus_id();
    if (std::abs(phi) < kBranchTol) return a;
    const Mat2 db = dispersion_dalpha(a, beta);
    const double dphi = db.a11 * (b.a22 - 1.0) + (b.a11 - 1.0) * db.a22 -
                        db.a12 * b.a21 - b.a12 * db.a21;
    if (!(std::abs(dphi) > 0.0) || !std::isfinite(dphi)) break;
    const double step = phi / dphi;
    a -= step;
    if (!(a > 0.0) || !std::isfinite(a)) break;
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(a)) &&
        std::abs(dispersion(a, beta).det_minus_id()) < kBranchTol)
      return a;
  }
  const double resid = std::isfinite(a) ? dispersion(a, beta).det_minus_id()
                                        : std::numeric_limits<double>::quiet_NaN();
  if (std::isfinite(a) && std::abs(resid) < kBranchTol) return a;
  throw BranchLost("branch continuation failed at beta = " + std::to_string(beta) +
                   " (outside the continuation interval)");
}

double instability_margin(const Multipliers& lambda, const ModelParams& params,
                          const PhaseGrid& grid) {
  return params.U * kappa(lambda, params, grid) - 1.0;
}

Multipliers sweep_lambda(const ModelParams& params, const PhaseGrid& grid,
                         double l0_min, double l0_max, int l0_count,
                         double l1_min, double l1_max, int l1_count,
                         double* best_margin) {
  if (l0_count < 1 || l1_count < 1) throw InvalidArgument("sweep_lambda: counts must be >= 1");
  const auto band = band_structure(params, grid);
  const double dp = grid.dp_measure();
  Multipliers best{l0_min, l1_min};
  double best_m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < l0_count; ++i) {
    const double l0 = (l0_count == 1) ? l0_min : l0_min + (l0_max - l0_min) * i / (l0_count - 1);
    for (int j = 0; j < l1_count; ++j) {
      const double l1 = (l1_count == 1) ? l1_min : l1_min + (l1_max - l1_min) * j / (l1_count - 1);
      const double m = params.U * kappa(Multipliers{l0, l1}, params, band, dp) - 1.0;
      if (m > best_m) {
        best_m = m;
        best = Multipliers{l0, l1};
      }
    }
  }
  if (best_margin) *best_margin = best_m;
  return best;
}

CriticalPoint critical_alpha(const Multipliers& lambda, const ModelParams& params,
                             const PhaseGrid& grid) {
  StabilityContext ctx(lambda, params, grid);
  if (!(ctx.margin() > 0.0))
    throw NoRoot("critical_alpha: margin " + std::to_string(ctx.margin()) +
                 " <= 0, the condition RHS stays below 1 for every alpha");

  // RHS decreases from U*kappa > 1 to 0; grow the bracket until it crosses 1.
  double lo = 0.0, hi = 1.0;
  int guard = 0;
  while (ctx.critical_rhs(hi) > 1.0) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 600) throw NoRoot("critical_alpha: bracket growth failed");
  }
  while (hi - lo > 1e-15 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (ctx.critical_rhs(mid) > 1.0)
      lo = mid;
    else
      hi = mid;
  }
  CriticalPoint cp;
  cp.lambda = lambda;
  cp.alpha0 = 0.5 * (lo + hi);
  cp.margin = ctx.margin();
  return cp;
}

Mat2 dispersion_matrix(double alpha, double beta, const Multipliers& lambda,
                       const ModelParams& params, const PhaseGrid& grid) {
  if (alpha == 0.0) throw InvalidArgument("dispersion_matrix: alpha must be nonzero");
  return StabilityContext(lambda, params, grid).dispersion(alpha, beta);
}

std::vector<BranchPoint> branch_alpha(const CriticalPoint& critical,
                                      std::span<const double> betas,
                                      const ModelParams& params, const PhaseGrid& grid) {
  StabilityContext ctx(critical.lambda, params, grid);
  // continuation processes each sign outward from 0
  std::vector<std::size_t> order(betas.size());
  for (std::size_t i = 0; i < betas.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(betas[a]) < std::abs(betas[b]); });

  std::vector<BranchPoint> out(betas.size());
  double seed_pos = critical.alpha0, seed_neg = critical.alpha0;
  for (std::size_t idx : order) {
    const double beta = betas[idx];
    if (beta == 0.0) throw InvalidArgument("branch_alpha: beta values must exclude 0");
    double& seed = (beta > 0.0) ? seed_pos : seed_neg;
    const double a = ctx.solve_branch_alpha(beta, seed);
    seed = a;
    BranchPoint bp;
    bp.beta = beta;
    bp.alpha = a;
    bp.det_resid = ctx.dispersion(a, beta).det_minus_id();
    bp.wavenumber = ctx.wavenumber_of(a, beta);
    out[idx] = bp;
  }
  return out;
}

BranchPoint snap_beta_to_mode(const CriticalPoint& critical, int m,
                              const ModelParams& params, const PhaseGrid& grid) {
  if (m < 1) throw InvalidArgument("snap_beta_to_mode: m must be >= 1");
  StabilityContext ctx(critical.lambda, params, grid);
  const double gl = ctx.gamma_lambda();
  if (!(gl > 0.0))
    throw IncommensurableWavenumber(
        "snap_beta_to_mode: gamma_lambda = 0, the mode has no spatial wavenumber");

  const double target = kTwoPi * m / grid.lx;
  double beta = gl * critical.alpha0 / target;
  double alpha = ctx.solve_branch_alpha(beta, critical.alpha0);
  double r = gl * alpha / beta - target;
  for (int it = 0; it < 100 && std::abs(r) > 1e-12 * target; ++it) {
    // secant step on beta -> wavenumber(beta)
    const double beta2 = beta * (1.0 + 1e-8);
    const double alpha2 = ctx.solve_branch_alpha(beta2, alpha);
    const double r2 = gl * alpha2 / beta2 - target;
    const double denom = r2 - r;
    if (denom == 0.0) break;
    const double beta_next = beta - r * (beta2 - beta) / denom;
    if (!(beta_next > 0.0) || !std::isfinite(beta_next))
      throw BranchLost("snap_beta_to_mode: wavenumber solve left the branch at m = " +
                       std::to_string(m));
    beta = beta_next;
    alpha = ctx.solve_branch_alpha(beta, alpha);
    r = gl * alpha / beta - target;
  }
  if (std::abs(r) > 1e-8 * target)
    throw IncommensurableWavenumber("snap_beta_to_mode: could not match mode m = " +
                                    std::to_string(m));
  BranchPoint bp;
  bp.beta = beta;
  bp.alpha = alpha;
  bp.det_resid = ctx.dispersion(alpha, beta).det_minus_id();
  bp.mode_index = m;
  bp.wavenumber = ctx.wavenumber_of(alpha, beta);
  return bp;
}

UnstableMode unstable_mode(double alpha, double beta, const Multipliers& lambda,
                           const ModelParams& params, const PhaseGrid& grid) {
  if (beta == 0.0 || alpha == 0.0)
    throw InvalidArgument("unstable_mode: alpha and beta must be nonzero");
  StabilityContext ctx(lambda, params, grid);
  const Mat2 b = ctx.dispersion(alpha, beta);
  if (std::abs(b.det_minus_id()) > kDegenerateTol)
    throw DegenerateEigenvector("unstable_mode: B - Id has numerical rank 2 (off-branch input)");

  // null vector of B - Id from the better-conditioned row
  const double ra[2] = {-b.a12, b.a11 - 1.0};
  const double rb[2] = {1.0 - b.a22, b.a21};
  const double na = std::hypot(ra[0], ra[1]);
  const double nb = std::hypot(rb[0], rb[1]);
  if (na == 0.0 && nb == 0.0)
    throw DegenerateEigenvector("unstable_mode: eigenvector is undetermined");
  double nhat, ehat;
  if (nb >= na) {
    nhat = rb[0] / nb;
    ehat = rb[1] / nb;
  } else {
    nhat = ra[0] / na;
    ehat = ra[1] / na;
  }
  if (nhat < 0.0 || (nhat == 0.0 && ehat < 0.0)) {
    nhat = -nhat;
    ehat = -ehat;
  }

  UnstableMode mode;
  mode.alpha = alpha;
  mode.beta = beta;
  mode.nhat = nhat;
  mode.ehat = ehat;
  mode.omega = ctx.omega_of(alpha, beta);
  mode.wavenumber = ctx.wavenumber_of(alpha, beta);

  const auto& v1 = ctx.v1();
  const auto& dpf = ctx.dp1_f();
  const auto& k = ctx.kernel();
  mode.profile.resize(v1.size());
  const double boa = beta / alpha;
  for (std::size_t i = 0; i < v1.size(); ++i) {
    const std::complex<double> numer(params.U * dpf[i] * nhat,
                                     -boa * (k.g1[i] * nhat + k.g2[i] * ehat));
    mode.profile[i] = numer / std::complex<double>(v1[i], -alpha);
  }
  return mode;
}

double paper_amplitude(double beta, double c, double nu) {
  if (beta == 0.0) return 0.0;
  return beta * std::exp(-c * nu / std::abs(beta));
}

namespace {

// Checks phi against the box and returns the integer mode count.
long commensurable_mode(double phi, double lx) {
  const double m_real = phi * lx / kTwoPi;
  const double m_round = std::round(m_real);
  if (std::abs(m_real - m_round) > 1e-8)
    throw IncommensurableWavenumber("wavenumber phi*Lx/2pi = " + std::to_string(m_real) +
                                    " is not an integer");
  return static_cast<long>(m_round);
}

// Complex field g(x,p) = A(p) e^{i phi x_1} realized on the grid.
void realize_mode(const UnstableMode& mode, const PhaseGrid& grid,
                  DistributionField& re, DistributionField& im) {
  re = DistributionField(grid);
  im = DistributionField(grid);
  const std::size_t ps = grid.p_size();
  const std::size_t x_minor = grid.x_size() / grid.nx;  // x_1 is the major x axis
  for (int j = 0; j < grid.nx; ++j) {
    const double arg = mode.wavenumber * grid.x_axis[j];
    const double c = std::cos(arg), s = std::sin(arg);
    for (std::size_t r = 0; r < x_minor; ++r) {
      const std::size_t xf = static_cast<std::size_t>(j) * x_minor + r;
      double* re_row = re.v.data() + xf * ps;
      double* im_row = im.v.data() + xf * ps;
      for (std::size_t pf = 0; pf < ps; ++pf) {
        const std::complex<double> a = mode.profile[pf];
        re_row[pf] = a.real() * c - a.imag() * s;
        im_row[pf] = a.real() * s + a.imag() * c;
      }
    }
  }
}

}  // namespace

DistributionField perturbed_initial(const UnstableMode& mode, const Multipliers& lambda,
                                    double c, double nu, double amplitude_scale,
                                    const ModelParams& params, const PhaseGrid& grid) {
  return perturbed_initial_abs(mode, lambda, amplitude_scale * paper_amplitude(mode.beta, c, nu),
                               params, grid);
}

DistributionField perturbed_initial_abs(const UnstableMode& mode, const Multipliers& lambda,
                                        double amp, const ModelParams& params,
                                        const PhaseGrid& grid) {
  commensurable_mode(mode.wavenumber, grid.lx);
  const auto band = band_structure(params, grid);
  const auto f_ref = equilibrium_values(lambda, params, band);

  DistributionField f(grid);
  const std::size_t ps = grid.p_size();
  const std::size_t x_minor = grid.x_size() / grid.nx;
  for (int j = 0; j < grid.nx; ++j) {
    const double arg = mode.wavenumber * grid.x_axis[j];
    const double cs = std::cos(arg), sn = std::sin(arg);
    for (std::size_t r = 0; r < x_minor; ++r) {
      const std::size_t xf = static_cast<std::size_t>(j) * x_minor + r;
      double* row = f.v.data() + xf * ps;
      for (std::size_t pf = 0; pf < ps; ++pf)
        row[pf] = f_ref[pf] + amp * (mode.profile[pf].real() * cs - mode.profile[pf].imag() * sn);
    }
  }

  const double hi = (params.eta > 0.0) ? 1.0 / params.eta : std::numeric_limits<double>::infinity();
  for (double x : f.v)
    if (!(x >= 0.0) || !(x <= hi))
      throw Unphysical("perturbed_initial: amplitude too large, field leaves [0, 1/eta]");
  return f;
}

double linear_residual(const UnstableMode& mode, const Multipliers& lambda,
                       const ModelParams& params, const PhaseGrid& grid) {
  commensurable_mode(mode.wavenumber, grid.lx);
  StabilityContext ctx(lambda, params, grid);

  DistributionField re, im;
  realize_mode(mode, grid, re, im);

  const std::size_t ps = grid.p_size();
  const auto& v1 = ctx.v1();
  const auto& dpf = ctx.dp1_f();
  const auto& k = ctx.kernel();
  const double gl = ctx.gamma_lambda();
  const double a2ob = mode.alpha * mode.alpha / mode.beta;

  double resid_sq = 0.0;
  for (int part = 0; part < 2; ++part) {
    const DistributionField& g = (part == 0) ? re : im;
    DistributionField dxg = spectral_derivative(g, Axis{AxisKind::X, 0}, 1);
    SpatialField n = integrate_p(g);
    SpatialField E = integrate_p_weighted(g, ctx.eps());
    SpatialField dxn = spectral_derivative(n, 0, 1);
    for (std::size_t xf = 0; xf < grid.x_size(); ++xf) {
      const double* grow = g.v.data() + xf * ps;
      const double* dxrow = dxg.v.data() + xf * ps;
      for (std::size_t pf = 0; pf < ps; ++pf) {
        const double coll = gl * (k.g1[pf] * n.v[xf] + k.g2[pf] * E.v[xf] - a2ob * grow[pf]);
        const double r = v1[pf] * dxrow[pf] - params.U * dxn.v[xf] * dpf[pf] - coll;
        resid_sq += r * r;
      }
    }
  }
  return std::sqrt(resid_sq * grid.dx_measure() * grid.dp_measure());
}

double mode_l2(const UnstableMode& mode, const PhaseGrid& grid) {
  DistributionField re, im;
  realize_mode(mode, grid, re, im);
  double s = 0.0;
  for (std::size_t i = 0; i < re.v.size(); ++i)
    s += re.v[i] * re.v[i] + im.v[i] * im.v[i];
  return std::sqrt(s * grid.dx_measure() * grid.dp_measure());
}

DistributionField mode_field(const UnstableMode& mode, const PhaseGrid& grid) {
  commensurable_mode(mode.wavenumber, grid.lx);
  DistributionField re, im;
  realize_mode(mode, grid, re, im);
  return re;
}

}  // namespace bdb
