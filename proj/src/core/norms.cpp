#include "core/norms.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>

#include "core/errors.hpp"
#include "core/fft.hpp"

namespace bdb {
namespace {

struct MultiIndex {
  int c[2] = {0, 0};
  int sum = 0;
  double factorial = 1.0;
};

double fact(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// Multi-indices of dimension d with |a| <= K, ascending |a|, lexicographic
// within each total order.
std::vector<MultiIndex> multi_indices(int d, int K) {
  std::vector<MultiIndex> out;
  for (int total = 0; total <= K; ++total) {
    if (d == 1) {
      MultiIndex m;
      m.c[0] = total;
      m.sum = total;
      m.factorial = fact(total);
      out.push_back(m);
    } else {
      for (int a0 = 0; a0 <= total; ++a0) {
        MultiIndex m;
        m.c[0] = a0;
        m.c[1] = total - a0;
        m.sum = total;
        m.factorial = fact(a0) * fact(total - a0);
        out.push_back(m);
      }
    }
  }
  return out;
}

int find_index(const std::vector<MultiIndex>& list, int c0, int c1) {
  for (std::size_t i = 0; i < list.size(); ++i)
    if (list[i].c[0] == c0 && list[i].c[1] == c1) return static_cast<int>(i);
  return -1;
}

// All mixed spectral derivatives d_x^a d_p^b f for |a| <= max_a, |b| <= max_b,
// built by chaining first derivatives from lower entries.
class DerivTable {
public:
  DerivTable(const DistributionField& f, int max_a, int max_b)
      : xs_(multi_indices(f.grid.d, max_a)), ps_(multi_indices(f.grid.d, max_b)) {
    fields_.resize(xs_.size() * ps_.size());
    fields_[0] = f;
    // fill pure-p derivatives first, then extend in x
    for (std::size_t ib = 1; ib < ps_.size(); ++ib) {
      const auto& b = ps_[ib];
      int ax = (b.c[0] > 0) ? 0 : 1;
      int pc0 = b.c[0] - (ax == 0 ? 1 : 0);
      int pc1 = b.c[1] - (ax == 1 ? 1 : 0);
      const int prev = find_index(ps_, pc0, pc1);
      fields_[ib] = spectral_derivative(fields_[prev], Axis{AxisKind::P, ax}, 1);
    }
    for (std::size_t ia = 1; ia < xs_.size(); ++ia) {
      const auto& a = xs_[ia];
      int ax = (a.c[0] > 0) ? 0 : 1;
      int xc0 = a.c[0] - (ax == 0 ? 1 : 0);
      int xc1 = a.c[1] - (ax == 1 ? 1 : 0);
      const int prev = find_index(xs_, xc0, xc1);
      for (std::size_t ib = 0; ib < ps_.size(); ++ib)
        fields_[ia * ps_.size() + ib] =
            spectral_derivative(fields_[prev * ps_.size() + ib], Axis{AxisKind::X, ax}, 1);
    }
  }

  const std::vector<MultiIndex>& xs() const { return xs_; }
  const std::vector<MultiIndex>& ps() const { return ps_; }
  const DistributionField& get(std::size_t ia, std::size_t ib) const {
    return fields_[ia * ps_.size() + ib];
  }

private:
  std::vector<MultiIndex> xs_, ps_;
  std::vector<DistributionField> fields_;
};

double leaf_linf_l1(const DistributionField& f) {
  const std::size_t ps = f.grid.p_size();
  const double dp = f.grid.dp_measure();
  double best = 0.0;
  for (std::size_t xf = 0; xf < f.grid.x_size(); ++xf) {
    double s = 0.0;
    const double* row = f.v.data() + xf * ps;
    for (std::size_t pf = 0; pf < ps; ++pf) s += std::abs(row[pf]);
    best = std::max(best, s * dp);
  }
  return best;
}

// Tables of the L^inf_x L^1_p leaves of every derivative up to (max_a, max_b).
class LeafTable {
public:
  LeafTable(const DistributionField& f, int max_a, int max_b) : table_(f, max_a, max_b) {
    const std::size_t na = table_.xs().size(), nb = table_.ps().size();
    leaves_.resize(na * nb);
    for (std::size_t ia = 0; ia < na; ++ia)
      for (std::size_t ib = 0; ib < nb; ++ib)
        leaves_[ia * nb + ib] = leaf_linf_l1(table_.get(ia, ib));
  }

  const std::vector<MultiIndex>& xs() const { return table_.xs(); }
  const std::vector<MultiIndex>& ps() const { return table_.ps(); }

  double linf_l1(int ia, int ib) const { return leaves_[ia * table_.ps().size() + ib]; }

  // W^{1,inf}_x W^{1,1}_p leaf: the |i+j| <= 1 block of first derivatives.
  double w111(int ia, int ib, int d) const {
    const auto& a = xs()[ia];
    const auto& b = ps()[ib];
    double s = linf_l1(ia, ib);
    for (int ax = 0; ax < d; ++ax) {
      const int ja = find_index(xs(), a.c[0] + (ax == 0), a.c[1] + (ax == 1));
      s += linf_l1(ja, ib);
      const int jb = find_index(ps(), b.c[0] + (ax == 0), b.c[1] + (ax == 1));
      s += linf_l1(ia, jb);
    }
    return s;
  }

private:
  DerivTable table_;
  std::vector<double> leaves_;
};

// Collapses a leaf table into polynomial coefficients in the radius:
// P(l) = sum_n C[n] l^n with C[n] = sum_{|a+b|=n, |a|,|b|<=K} leaf/(a! b!).
std::vector<double> radius_polynomial(const LeafTable& t, int K, int d, bool w111_leaves) {
  std::vector<double> c(2 * K + 1, 0.0);
  for (std::size_t ia = 0; ia < t.xs().size(); ++ia) {
    const auto& a = t.xs()[ia];
    if (a.sum > K) continue;
    for (std::size_t ib = 0; ib < t.ps().size(); ++ib) {
      const auto& b = t.ps()[ib];
      if (b.sum > K) continue;
      const double leaf = w111_leaves ? t.w111(static_cast<int>(ia), static_cast<int>(ib), d)
                                      : t.linf_l1(static_cast<int>(ia), static_cast<int>(ib));
      c[a.sum + b.sum] += leaf / (a.factorial * b.factorial);
    }
  }
  return c;
}

double poly_eval(const std::vector<double>& c, double x) {
  double s = 0.0;
  for (std::size_t n = c.size(); n-- > 0;) s = s * x + c[n];
  return s;
}

double poly_deriv_eval(const std::vector<double>& c, double x) {
  double s = 0.0;
  for (std::size_t n = c.size(); n-- > 1;) s = s * x + static_cast<double>(n) * c[n];
  return s;
}

double ipow_d(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace

double phase_norm(const DistributionField& f, double nu, int K, PhaseNormVariant variant) {
  if (K < 0) throw InvalidArgument("phase_norm: K must be >= 0");
  if (nu < 0.0) throw InvalidArgument("phase_norm: nu must be >= 0");
  const int extra = (variant == PhaseNormVariant::double_bar) ? 1 : 0;
  LeafTable t(f, K + extra, K + extra);
  // ascending |a+b|, lexicographic within: multi_indices is ordered that way
  // per factor; accumulate per total order to keep the summation deterministic.
  double total = 0.0;
  for (int order = 0; order <= 2 * K; ++order) {
    double block = 0.0;
    for (std::size_t ia = 0; ia < t.xs().size(); ++ia) {
      const auto& a = t.xs()[ia];
      if (a.sum > K) continue;
      for (std::size_t ib = 0; ib < t.ps().size(); ++ib) {
        const auto& b = t.ps()[ib];
        if (b.sum > K || a.sum + b.sum != order) continue;
        const double leaf = (variant == PhaseNormVariant::double_bar)
                                ? t.w111(static_cast<int>(ia), static_cast<int>(ib), f.grid.d)
                                : t.linf_l1(static_cast<int>(ia), static_cast<int>(ib));
        block += leaf / (a.factorial * b.factorial);
      }
    }
    total += ipow_d(nu, order) * block;
  }
  return total;
}

std::vector<double> local_seminorm_all(const DistributionField& f, double nu, int K,
                                       PhaseNormVariant variant, bool dotted) {
  if (K < 0) throw InvalidArgument("local_seminorm: K must be >= 0");
  const int d = f.grid.d;
  const int extra = (variant == PhaseNormVariant::double_bar) ? 1 : 0;
  DerivTable table(f, K + extra, K + extra);

  const std::size_t xs = f.grid.x_size();
  const std::size_t ps = f.grid.p_size();
  const double dp = f.grid.dp_measure();

  // per-x p-integrals of |d^a d^b f|
  const std::size_t na = table.xs().size(), nb = table.ps().size();
  std::vector<double> l1(na * nb * xs);
  for (std::size_t ia = 0; ia < na; ++ia)
    for (std::size_t ib = 0; ib < nb; ++ib) {
      const auto& fld = table.get(ia, ib);
      for (std::size_t xf = 0; xf < xs; ++xf) {
        double s = 0.0;
        const double* row = fld.v.data() + xf * ps;
        for (std::size_t pf = 0; pf < ps; ++pf) s += std::abs(row[pf]);
        l1[(ia * nb + ib) * xs + xf] = s * dp;
      }
    }

  auto leaf_at = [&](int ia, int ib, std::size_t xf) -> double {
    if (variant == PhaseNormVariant::single_bar) return l1[(ia * nb + ib) * xs + xf];
    const auto& a = table.xs()[ia];
    const auto& b = table.ps()[ib];
    double s = l1[(ia * nb + ib) * xs + xf];
    for (int ax = 0; ax < d; ++ax) {
      const int ja = find_index(table.xs(), a.c[0] + (ax == 0), a.c[1] + (ax == 1));
      s += l1[(static_cast<std::size_t>(ja) * nb + ib) * xs + xf];
      const int jb = find_index(table.ps(), b.c[0] + (ax == 0), b.c[1] + (ax == 1));
      s += l1[(ia * nb + static_cast<std::size_t>(jb)) * xs + xf];
    }
    return s;
  };

  std::vector<double> out(xs, 0.0);
  for (std::size_t xf = 0; xf < xs; ++xf) {
    double total = 0.0;
    for (int order = dotted ? 1 : 0; order <= 2 * K; ++order) {
      double block = 0.0;
      for (std::size_t ia = 0; ia < na; ++ia) {
        const auto& a = table.xs()[ia];
        if (a.sum > K) continue;
        for (std::size_t ib = 0; ib < nb; ++ib) {
          const auto& b = table.ps()[ib];
          if (b.sum > K || a.sum + b.sum != order) continue;
          block += leaf_at(static_cast<int>(ia), static_cast<int>(ib), xf) /
                   (a.factorial * b.factorial);
        }
      }
      total += ipow_d(nu, order) * block;
    }
    out[xf] = total;
  }
  return out;
}

double local_seminorm(const DistributionField& f, double nu, int K, std::size_t x_index,
                      PhaseNormVariant variant, bool dotted) {
  if (x_index >= f.grid.x_size()) throw InvalidArgument("local_seminorm: x_index out of range");
  return local_seminorm_all(f, nu, K, variant, dotted)[x_index];
}

double velocity_norm(const std::vector<std::vector<double>>& u_axes, const PhaseGrid& grid,
                     double nu, int K) {
  if (u_axes.size() != static_cast<std::size_t>(grid.d))
    throw InvalidArgument("velocity_norm: one component per axis required");
  const std::size_t ps = grid.p_size();
  const auto idx = multi_indices(grid.d, K + 1);

  double best = 0.0;
  for (const auto& u : u_axes) {
    if (u.size() != ps) throw InvalidArgument("velocity_norm: component size mismatch");
    // spectral derivatives of a p-grid function, chained like DerivTable
    std::vector<std::vector<double>> derivs(idx.size());
    derivs[0] = u;
    for (std::size_t ib = 1; ib < idx.size(); ++ib) {
      const auto& b = idx[ib];
      const int ax = (b.c[0] > 0) ? 0 : 1;
      const int prev = find_index(idx, b.c[0] - (ax == 0), b.c[1] - (ax == 1));
      // derivative along p-axis `ax` of a pure p-grid array
      const std::size_t stride = (grid.d == 2 && ax == 0) ? grid.np : 1;
      const std::size_t len = grid.np;
      const std::size_t outer = ps / (len * stride);
      derivs[ib].assign(ps, 0.0);
      std::vector<std::complex<double>> line(len);
      for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < stride; ++i) {
          const std::size_t base = o * len * stride + i;
          for (std::size_t j = 0; j < len; ++j) line[j] = derivs[prev][base + j * stride];
          fft::forward(line.data(), len);
          for (std::size_t j = 0; j < len; ++j) {
            if (j == len / 2) {
              line[j] = 0.0;
            } else {
              line[j] *= std::complex<double>(0.0, grid.kp[j]);
            }
          }
          fft::inverse(line.data(), len);
          for (std::size_t j = 0; j < len; ++j) derivs[ib][base + j * stride] = line[j].real();
        }
    }

    auto sup = [&](const std::vector<double>& g) {
      double m = 0.0;
      for (double x : g) m = std::max(m, std::abs(x));
      return m;
    };
    auto w1inf = [&](std::size_t ib) {
      const auto& b = idx[ib];
      double s = sup(derivs[ib]);
      for (int ax = 0; ax < grid.d; ++ax) {
        const int j = find_index(idx, b.c[0] + (ax == 0), b.c[1] + (ax == 1));
        s += sup(derivs[static_cast<std::size_t>(j)]);
      }
      return s;
    };

    double total = 0.0;
    for (std::size_t ib = 0; ib < idx.size(); ++ib) {
      if (idx[ib].sum > K) continue;
      total += ipow_d(nu, idx[ib].sum) / idx[ib].factorial * w1inf(ib);
    }
    best = std::max(best, total);
  }
  return best;
}

NormSeries weighted_tracker(const std::vector<DistributionField>& f_snapshots,
                            const std::vector<DistributionField>& dfdt_snapshots,
                            std::span<const double> times, const NormProfile& profile,
                            double slack_tol) {
  const std::size_t S = f_snapshots.size();
  if (S == 0 || dfdt_snapshots.size() != S || times.size() != S)
    throw InvalidArgument("weighted_tracker: snapshot/series size mismatch");
  if (profile.K < 1 || !(profile.nu > 0.0) || profile.mu < 0.0)
    throw ProfileInvalid("weighted_tracker: need K >= 1, nu > 0, mu >= 0");
  const double T = times.back();
  if (profile.mu * T >= profile.nu)
    throw ProfileInvalid("weighted_tracker: mu*T >= nu leaves no radius at the horizon");

  const int d = f_snapshots[0].grid.d;
  const int K = profile.K;
  const double nu = profile.nu, mu = profile.mu;

  // per-snapshot radius polynomials
  std::vector<std::vector<double>> cf(S), cdt(S);
  for (std::size_t i = 0; i < S; ++i) {
    cf[i] = radius_polynomial(LeafTable(f_snapshots[i], K + 1, K + 1), K, d, true);
    cdt[i] = radius_polynomial(LeafTable(dfdt_snapshots[i], K + 1, K + 1), K, d, true);
  }

  NormSeries out;
  out.t.assign(times.begin(), times.end());
  out.norm_f.resize(S);
  out.norm_df.resize(S);
  for (std::size_t i = 0; i < S; ++i) {
    const double lam = nu - mu * times[i];
    out.norm_f[i] = poly_eval(cf[i], lam);
    out.norm_df[i] = poly_deriv_eval(cf[i], lam);
  }

  // Exact integrals of l(s)^n and l(s)^n (s-t0)/h over [t0,t1], l = nu-mu*s.
  auto int_pow = [&](double l0, double l1, int n) {
    if (mu == 0.0) return ipow_d(nu, n) * 0.0;  // unused in mu = 0 branches
    return (ipow_d(l0, n + 1) - ipow_d(l1, n + 1)) / (mu * (n + 1));
  };

  double lhs = out.norm_f[0];
  double running = 0.0;
  double rhs_int = 0.0;
  for (std::size_t i = 0; i + 1 < S; ++i) {
    const double t0 = times[i], t1 = times[i + 1];
    const double h = t1 - t0;
    const double l0 = nu - mu * t0, l1 = nu - mu * t1;

    // LHS decay term: int mu * sum_n n C_n(s) l(s)^{n-1} ds, C_n linear in s
    double piece_d = 0.0;
    if (mu > 0.0) {
      for (std::size_t n = 1; n < cf[i].size(); ++n) {
        const double w0 = cf[i][n], w1 = cf[i + 1][n];
        const double a0 = ipow_d(l0, static_cast<int>(n));
        const double a1 = ipow_d(l1, static_cast<int>(n));
        piece_d += a0 * w0 - a1 * w1 + (w1 - w0) / h * int_pow(l0, l1, static_cast<int>(n));
      }
    }
    running += piece_d;
    lhs = std::max(lhs, out.norm_f[i + 1] + running);

    // RHS source term: int sum_n C^dt_n(s) l(s)^n ds
    double piece_r = 0.0;
    for (std::size_t n = 0; n < cdt[i].size(); ++n) {
      const double w0 = cdt[i][n], w1 = cdt[i + 1][n];
      if (mu == 0.0) {
        piece_r += ipow_d(nu, static_cast<int>(n)) * h * 0.5 * (w0 + w1);
      } else {
        const double in = int_pow(l0, l1, static_cast<int>(n));
        const double jn = (l0 * in - int_pow(l0, l1, static_cast<int>(n) + 1)) / mu;
        piece_r += w0 * in + (w1 - w0) / h * jn;
      }
    }
    rhs_int += piece_r;
  }

  out.value = lhs;
  out.rhs_bound = poly_eval(cf[0], nu) + rhs_int;
  out.slack = out.rhs_bound - out.value;
  out.satisfied = out.slack >= -slack_tol;
  return out;
}

EnvelopeReport envelope_check(std::span<const double> n_values,
                              const std::vector<std::vector<double>>& n_derivs,
                              const std::vector<std::vector<double>>& e_derivs,
                              double eta, double c0, double nu) {
  if (!(nu > 0.0)) throw InvalidArgument("envelope_check: nu must be > 0");
  EnvelopeReport rep;
  rep.all_ok = true;
  for (std::size_t a = 1; a <= n_derivs.size(); ++a) {
    const auto& dn = n_derivs[a - 1];
    const std::vector<double>* de = (a <= e_derivs.size()) ? &e_derivs[a - 1] : nullptr;
    if (dn.size() != n_values.size() || (de && de->size() != n_values.size()))
      throw InvalidArgument("envelope_check: derivative table size mismatch");
    const double weight = fact(static_cast<int>(a)) / ipow_d(nu, static_cast<int>(a));
    bool ok = true;
    for (std::size_t i = 0; i < n_values.size(); ++i) {
      const double lhs = std::abs(dn[i]) + (de ? std::abs((*de)[i]) : 0.0);
      const double rhs = c0 * n_values[i] * (1.0 - eta * n_values[i]) * weight;
      if (lhs > rhs) {
        ok = false;
        break;
      }
    }
    rep.order_ok.push_back(ok);
    rep.all_ok = rep.all_ok && ok;
  }
  return rep;
}

}  // namespace bdb
