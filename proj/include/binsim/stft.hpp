#ifndef BINSIM_STFT_HPP
#define BINSIM_STFT_HPP

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "binsim/audio.hpp"

namespace binsim {

enum class WindowKind { Hann, SqrtHann, Rect };

std::string to_string(WindowKind kind);
WindowKind window_kind_from_string(const std::string& name);

// Analysis/synthesis configuration.  The pair must satisfy the weighted
// overlap-add variant of the constant-overlap-add property (the squared
// window tiles to a constant at the chosen hop) so the inverse transform is
// exact; validate() rejects pairs that do not.
struct StftConfig {
  std::size_t window_length = 512;
  std::size_t hop = 128;
  WindowKind window = WindowKind::Hann;

  void validate() const;
};

// Periodic window of the given kind.
std::vector<double> make_window(WindowKind kind, std::size_t length);

// Complex spectrogram of one channel, frame-major: bin(k, l) = data[l*K + k].
struct Spectrogram {
  std::size_t num_bins = 0;    // K = window_length/2 + 1
  std::size_t num_frames = 0;  // L
  std::vector<std::complex<double>> data;

  std::complex<double>& at(std::size_t k, std::size_t l) { return data[l * num_bins + k]; }
  const std::complex<double>& at(std::size_t k, std::size_t l) const {
    return data[l * num_bins + k];
  }
};

struct BinauralSpectrogram {
  Spectrogram left;
  Spectrogram right;
  StftConfig config;
  int sample_rate = 0;
  std::size_t num_samples = 0;  // original clip length, needed for inversion

  std::size_t num_bins() const { return left.num_bins; }
  std::size_t num_frames() const { return left.num_frames; }
};

// Forward STFT with centered frames: the signal is zero-padded by
// window_length/2 on both ends and frame l covers padded samples
// [l*hop, l*hop + window_length), so L = ceil(N / hop).
Spectrogram stft(const MonoClip& clip, const StftConfig& config);
BinauralSpectrogram stft(const BinauralClip& clip, const StftConfig& config);

// Weighted overlap-add inverse with per-sample window-energy normalization;
// exact left inverse of stft() for any valid config.
MonoClip istft(const Spectrogram& spec, const StftConfig& config, int sample_rate,
               std::size_t num_samples);
BinauralClip istft(const BinauralSpectrogram& spec);

// One-sided spectrum (fft_size/2 + 1 bins) of a zero-padded impulse response.
// Rejects responses longer than fft_size instead of truncating.
std::vector<std::complex<double>> ir_spectrum(const std::vector<double>& ir,
                                              std::size_t fft_size);

// Phase factors exp(-j*2*pi*k*tau/fft_size) for k = 0..fft_size/2.  Applying
// them to a one-sided spectrum delays the band-limited signal by tau samples.
std::vector<std::complex<double>> fractional_delay_phase(double tau_samples,
                                                         std::size_t fft_size);

// Delays a clip by tau samples (fractional allowed) via the frequency domain,
// padding enough that nothing wraps back into the output.
MonoClip delayed(const MonoClip& clip, double tau_samples);
BinauralClip delayed(const BinauralClip& clip, double tau_samples);

}  // namespace binsim

#endif  // BINSIM_STFT_HPP
