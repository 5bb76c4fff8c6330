#pragma once

#include <span>
#include <vector>

#include "core/grid.hpp"

namespace bdb {

// Truncation parameters of the analytic-norm series. All norms here are
// finite truncations: the series over derivative multi-indices (a,b) is cut
// at |a| <= K and |b| <= K. Inequality tests must compare at matched K so the
// truncation bias cancels on the favorable side. Guidance: K <= 8 at 256
// points per axis keeps the spectral derivative leaves meaningful.
struct NormProfile {
  double nu = 0.1;  // analyticity radius > 0
  double mu = 0.0;  // radius decay rate >= 0
  int K = 4;        // truncation order
  double T = 1.0;   // horizon; requires mu*T < nu
};

enum class PhaseNormVariant {
  double_bar,  // W^{1,inf}_x W^{1,1}_p leaves
  single_bar   // L^inf_x L^1_p leaves
};

// Truncated sum_{|a|,|b| <= K} nu^{|a+b|}/(a! b!) * leaf(d_x^a d_p^b f),
// with the sup over x taken as the max over grid nodes and the p-integral by
// torus quadrature. Summation order: ascending |a+b|, lexicographic within.
double phase_norm(const DistributionField& f, double nu, int K,
                  PhaseNormVariant variant = PhaseNormVariant::double_bar);

// Space-local seminorm anchored at one x node: same series with the
// p-integral of |d^a d^b f(x,.)| as leaf. The dotted variant subtracts the
// order-zero block. single_bar drops the W^{1,.} leaf sum.
double local_seminorm(const DistributionField& f, double nu, int K, std::size_t x_index,
                      PhaseNormVariant variant = PhaseNormVariant::double_bar,
                      bool dotted = false);
std::vector<double> local_seminorm_all(const DistributionField& f, double nu, int K,
                                       PhaseNormVariant variant = PhaseNormVariant::double_bar,
                                       bool dotted = false);

// max_i sum_{|b| <= K} nu^{|b|}/b! * ||d^b u_i||_{W^{1,inf}(T^d)} for a
// velocity field sampled per axis on the flat p-grid.
double velocity_norm(const std::vector<std::vector<double>>& u_axes, const PhaseGrid& grid,
                     double nu, int K);

struct NormSeries {
  std::vector<double> t;
  std::vector<double> norm_f;   // ||f(t)||_{C^{nu-mu t}} truncated at K
  std::vector<double> norm_df;  // radius-derivative series of the same truncation
  double value = 0.0;           // discrete ||f||_{nu,mu}
  double rhs_bound = 0.0;       // ||f(0)||_{C^nu} + int ||d_t f||_{C^{nu-mu t}} dt
  double slack = 0.0;           // rhs_bound - value
  bool satisfied = false;
};

// Evaluates both sides of the time-shifted norm inequality
//   ||f||_{nu,mu} <= ||f(0)||_{C^nu} + int_0^T ||d_t f(t)||_{C^{nu-mu t}} dt
// on sampled data. The radius factor (nu-mu*s)^n is integrated exactly per
// interval; the leaf data is interpolated linearly (trapezoid in the data).
// The Df series is truncated as the exact radius derivative of the truncated
// f series, which makes the identity for time-constant data hold to round-off.
// Throws ProfileInvalid if mu*T >= nu.
NormSeries weighted_tracker(const std::vector<DistributionField>& f_snapshots,
                            const std::vector<DistributionField>& dfdt_snapshots,
                            std::span<const double> times, const NormProfile& profile,
                            double slack_tol = 1e-6);

struct EnvelopeReport {
  std::vector<bool> order_ok;  // index 0 = derivative order 1
  bool all_ok = false;
};

// Checks |d^a n(x)| + |d^a E(x)| <= C0 * n(x)(1-eta n(x)) * a! * nu^{-a} for
// a = 1..K at every sample. n_derivs[a-1] and e_derivs[a-1] hold the order-a
// derivative samples (e_derivs may be empty when E vanishes identically).
EnvelopeReport envelope_check(std::span<const double> n_values,
                              const std::vector<std::vector<double>>& n_derivs,
                              const std::vector<std::vector<double>>& e_derivs,
                              double eta, double c0, double nu);

}  // namespace bdb
