#pragma once

#include <complex>
#include <cstddef>

namespace bdb::fft {

// In-place complex transforms of a single line of length n. Plans are cached
// per length behind a mutex; execution is thread-safe and deterministic
// (FFTW_ESTIMATE plans, no wisdom, no runtime tuning).
//
// Convention: forward computes sum_j x_j e^{-2*pi*i*j*k/n} (unnormalized),
// inverse applies the opposite sign and divides by n, so inverse(forward(x)) == x.
void forward(std::complex<double>* line, std::size_t n);
void inverse(std::complex<double>* line, std::size_t n);

}  // namespace bdb::fft
