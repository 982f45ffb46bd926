#ifndef BINSIM_FFT_HPP
#define BINSIM_FFT_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace binsim {
namespace fft {

// Real-input FFT helpers backed by FFTW (double precision).  Plans are cached
// per size; plan creation is serialized, execution is thread-safe on caller
// buffers.

// Forward transform of a real sequence, one-sided result: n/2 + 1 bins.
// n must be even and >= 2; x is zero-padded or truncated is NOT done here,
// x.size() must equal n.
std::vector<std::complex<double>> rfft(const std::vector<double>& x, std::size_t n);

// Inverse of rfft: takes n/2 + 1 bins, returns n real samples scaled by 1/n.
// The imaginary parts of the DC and Nyquist bins are dropped, i.e. the
// spectrum is interpreted as the one-sided half of a Hermitian spectrum.
std::vector<double> irfft(const std::vector<std::complex<double>>& bins, std::size_t n);

std::size_t next_pow2(std::size_t n);

}  // namespace fft
}  // namespace binsim

#endif  // BINSIM_FFT_HPP
