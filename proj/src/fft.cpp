#include "binsim/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <unordered_map>

#include "binsim/errors.hpp"

namespace binsim {
namespace fft {

namespace {

std::mutex g_plan_mutex;
std::unordered_map<std::size_t, fftw_plan> g_r2c_plans;
std::unordered_map<std::size_t, fftw_plan> g_c2r_plans;

// Plans are created once per size on dummy buffers with FFTW_UNALIGNED so the
// new-array execute functions accept arbitrary heap pointers.  Cached plans
// live for the process lifetime.
fftw_plan r2c_plan(std::size_t n) {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto it = g_r2c_plans.find(n);
  if (it != g_r2c_plans.end()) return it->second;
  std::vector<double> in(n);
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_plan plan = fftw_plan_dft_r2c_1d(
      static_cast<int>(n), in.data(), reinterpret_cast<fftw_complex*>(out.data()),
      FFTW_ESTIMATE | FFTW_UNALIGNED);
  g_r2c_plans.emplace(n, plan);
  return plan;
}

fftw_plan c2r_plan(std::size_t n) {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto it = g_c2r_plans.find(n);
  if (it != g_c2r_plans.end()) return it->second;
  std::vector<std::complex<double>> in(n / 2 + 1);
  std::vector<double> out(n);
  fftw_plan plan = fftw_plan_dft_c2r_1d(
      static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()), out.data(),
      FFTW_ESTIMATE | FFTW_UNALIGNED);
  g_c2r_plans.emplace(n, plan);
  return plan;
}

}  // namespace

std::vector<std::complex<double>> rfft(const std::vector<double>& x, std::size_t n) {
  if (n < 2 || (n % 2) != 0)
    throw Error(ErrorKind::InvalidInput, "rfft: size must be even and >= 2");
  if (x.size() != n)
    throw Error(ErrorKind::InvalidInput, "rfft: input length does not match size");
  std::vector<double> in(x);  // FFTW may not preserve input
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_execute_dft_r2c(r2c_plan(n), in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> irfft(const std::vector<std::complex<double>>& bins, std::size_t n) {
  if (n < 2 || (n % 2) != 0)
    throw Error(ErrorKind::InvalidInput, "irfft: size must be even and >= 2");
  if (bins.size() != n / 2 + 1)
    throw Error(ErrorKind::InvalidInput, "irfft: bin count does not match size");
  std::vector<std::complex<double>> in(bins);
  // Self-conjugate bins of a real signal carry no imaginary part; dropping it
  // keeps the inverse well-defined for fractionally delayed spectra.
  in.front() = {in.front().real(), 0.0};
  in.back() = {in.back().real(), 0.0};
  std::vector<double> out(n);
  fftw_execute_dft_c2r(c2r_plan(n), reinterpret_cast<fftw_complex*>(in.data()),
                       out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= scale;
  return out;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace fft
}  // namespace binsim
