#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bdb {

// Uniform tensor grid on T^d_x x T^d_p. The momentum torus is the unit torus
// (period 1, unit measure); the spatial period lx is configurable so that
// instability modes e^{i*phi*x_1} can be made resonant with the box.
// Node layout is row-major with x-axes major, p-axes minor.
struct PhaseGrid {
  int d = 1;
  int nx = 0;       // points per x-axis
  int np = 0;       // points per p-axis
  double lx = 1.0;  // x period; p period fixed to 1

  std::vector<double> x_axis;  // x_j = j*lx/nx
  std::vector<double> p_axis;  // p_k = k/np
  std::vector<double> kx;      // 2*pi*j/lx, fftfreq order
  std::vector<double> kp;      // 2*pi*j,    fftfreq order

  std::size_t x_size() const;  // nx^d
  std::size_t p_size() const;  // np^d
  std::size_t size() const;    // nx^d * np^d

  double dx_measure() const;  // (lx/nx)^d
  double dp_measure() const;  // (1/np)^d

  bool same_shape(const PhaseGrid& o) const {
    return d == o.d && nx == o.nx && np == o.np && lx == o.lx;
  }
};

// Validates d in {1,2}, nx/np powers of two >= 8, lx > 0; throws InvalidGrid.
PhaseGrid build_grid(int d, int nx, int np, double lx = 1.0);

enum class AxisKind { X, P };

// One concrete grid axis: (kind, index) with index < d.
struct Axis {
  AxisKind kind = AxisKind::X;
  int index = 0;
};

// Scalar field on the full phase grid.
struct DistributionField {
  PhaseGrid grid;
  std::vector<double> v;

  DistributionField() = default;
  explicit DistributionField(const PhaseGrid& g) : grid(g), v(g.size(), 0.0) {}

  double& at(std::size_t xflat, std::size_t pflat) {
    return v[xflat * grid.p_size() + pflat];
  }
  double at(std::size_t xflat, std::size_t pflat) const {
    return v[xflat * grid.p_size() + pflat];
  }
};

// Scalar field over the x-grid only (densities, potentials, accelerations).
struct SpatialField {
  PhaseGrid grid;
  std::vector<double> v;

  SpatialField() = default;
  explicit SpatialField(const PhaseGrid& g) : grid(g), v(g.x_size(), 0.0) {}
};

bool all_finite(std::span<const double> values);

// --- spectral differentiation ------------------------------------------------
// d^order/d(axis)^order via the Fourier multiplier (i*k)^order. Exact for
// band-limited data; the Nyquist mode is zeroed for odd orders to keep the
// result real. order >= 1.
DistributionField spectral_derivative(const DistributionField& f, Axis axis, int order);
SpatialField spectral_derivative(const SpatialField& f, int x_axis_index, int order);

// --- exact translation -------------------------------------------------------
// Returns field(.., xi - s, ..) along `axis`, where s varies over the
// complementary axes: shift_per_line[line] with `line` the row-major rank of
// the complementary multi-index (axis removed). Exact for band-limited data;
// real output enforced by conjugate symmetry.
DistributionField fourier_phase_shift(const DistributionField& f, Axis axis,
                                      std::span<const double> shift_per_line);

// --- torus quadrature (rectangle rule; spectrally accurate) -------------------
SpatialField integrate_p(const DistributionField& f);
// integral of weight(p)*f(x,p) dp per x; weight indexed by flat p index.
SpatialField integrate_p_weighted(const DistributionField& f, std::span<const double> weight);
double integrate_x(const SpatialField& f);
double integrate_phase(const DistributionField& f);  // over x and p
double l2_norm(const DistributionField& f);

// --- dealiasing ----------------------------------------------------------------
// 2/3-rule: zero all modes with |frequency index| > N/3 along every axis of
// the given kind.
void dealias(DistributionField& f, AxisKind kind);
void dealias(SpatialField& f);

}  // namespace bdb
