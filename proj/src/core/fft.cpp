#include "core/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace bdb::fft {
namespace {

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

std::mutex g_plan_mutex;
std::map<std::size_t, PlanPair>& plan_cache() {
  static std::map<std::size_t, PlanPair> cache;
  return cache;
}

// Plan creation mutates FFTW-global state and must be serialized; execution
// via fftw_execute_dft on caller buffers is thread-safe.
PlanPair plans_for(std::size_t n) {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto& cache = plan_cache();
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  fftw_complex* buf = fftw_alloc_complex(n);
  PlanPair p;
  p.fwd = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD,
                           FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.inv = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_BACKWARD,
                           FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buf);
  cache.emplace(n, p);
  return p;
}

}  // namespace

void forward(std::complex<double>* line, std::size_t n) {
  PlanPair p = plans_for(n);
  fftw_execute_dft(p.fwd, reinterpret_cast<fftw_complex*>(line),
                   reinterpret_cast<fftw_complex*>(line));
}

void inverse(std::complex<double>* line, std::size_t n) {
  PlanPair p = plans_for(n);
  fftw_execute_dft(p.inv, reinterpret_cast<fftw_complex*>(line),
                   reinterpret_cast<fftw_complex*>(line));
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) line[i] *= scale;
}

}  // namespace bdb::fft
