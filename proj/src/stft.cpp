#include "binsim/stft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "binsim/errors.hpp"
#include "binsim/fft.hpp"

namespace binsim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Interior ripple of the squared-window tiling at the given hop.  Zero ripple
// (up to rounding) means the weighted overlap-add inverse is exact with a
// constant normalizer; we accept tiny ripple since normalization is computed
// per sample anyway.
double wola_ripple(const std::vector<double>& window, std::size_t hop) {
  const std::size_t w = window.size();
  std::vector<double> acc(w, 0.0);
  for (std::size_t shift = 0; shift < w; shift += hop)
    for (std::size_t n = 0; n + shift < w; ++n) acc[n] += window[n + shift] * window[n + shift];
  // acc[0..hop) holds the steady-state tiling values for one hop period.
  double lo = acc[0], hi = acc[0];
  for (std::size_t n = 0; n < hop; ++n) {
    lo = std::min(lo, acc[n]);
    hi = std::max(hi, acc[n]);
  }
  if (hi <= 0.0) return 1.0;
  return (hi - lo) / hi;
}

}  // namespace

std::string to_string(WindowKind kind) {
  switch (kind) {
    case WindowKind::Hann: return "hann";
    case WindowKind::SqrtHann: return "sqrthann";
    case WindowKind::Rect: return "rect";
  }
  return "unknown";
}

WindowKind window_kind_from_string(const std::string& name) {
  if (name == "hann") return WindowKind::Hann;
  if (name == "sqrthann") return WindowKind::SqrtHann;
  if (name == "rect") return WindowKind::Rect;
  throw Error(ErrorKind::Config, "unknown window kind: " + name);
}

std::vector<double> make_window(WindowKind kind, std::size_t length) {
  std::vector<double> w(length, 1.0);
  switch (kind) {
    case WindowKind::Rect:
      break;
    case WindowKind::Hann:
      for (std::size_t n = 0; n < length; ++n)
        w[n] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(n) / static_cast<double>(length));
      break;
    case WindowKind::SqrtHann:
      for (std::size_t n = 0; n < length; ++n)
        w[n] = std::sqrt(0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(n) /
                                              static_cast<double>(length)));
      break;
  }
  return w;
}

void StftConfig::validate() const {
  if (window_length < 2 || (window_length % 2) != 0)
    throw Error(ErrorKind::Config, "StftConfig: window_length must be even and >= 2");
  if (hop == 0 || hop > window_length / 2)
    throw Error(ErrorKind::Config, "StftConfig: hop must be in (0, window_length/2]");
  if (window_length % hop != 0)
    throw Error(ErrorKind::Config, "StftConfig: hop must divide window_length");
  const auto w = make_window(window, window_length);
  if (wola_ripple(w, hop) > 1e-9)
    throw Error(ErrorKind::Config,
                "StftConfig: window/hop pair does not satisfy constant overlap-add");
}

Spectrogram stft(const MonoClip& clip, const StftConfig& config) {
  config.validate();
  if (clip.samples.empty())
    throw Error(ErrorKind::InvalidInput, "stft: empty clip");
  const std::size_t w = config.window_length;
  const std::size_t half = w / 2;
  const std::size_t n = clip.size();
  const std::size_t num_frames = (n + config.hop - 1) / config.hop;  // ceil(N/hop)
  const std::size_t num_bins = w / 2 + 1;
  const auto window = make_window(config.window, w);

  Spectrogram spec;
  spec.num_bins = num_bins;
  spec.num_frames = num_frames;
  spec.data.resize(num_bins * num_frames);

  std::vector<double> frame(w);
  for (std::size_t l = 0; l < num_frames; ++l) {
    const std::size_t start = l * config.hop;  // position in the padded signal
    for (std::size_t j = 0; j < w; ++j) {
      const std::size_t p = start + j;
      // padded sample p maps to original index p - half
      const double x = (p >= half && p - half < n) ? clip.samples[p - half] : 0.0;
      frame[j] = window[j] * x;
    }
    const auto bins = fft::rfft(frame, w);
    std::copy(bins.begin(), bins.end(), spec.data.begin() + static_cast<long>(l * num_bins));
  }
  return spec;
}

BinauralSpectrogram stft(const BinauralClip& clip, const StftConfig& config) {
  clip.validate();
  BinauralSpectrogram out;
  out.left = stft(clip.left, config);
  out.right = stft(clip.right, config);
  out.config = config;
  out.sample_rate = clip.sample_rate();
  out.num_samples = clip.size();
  return out;
}

MonoClip istft(const Spectrogram& spec, const StftConfig& config, int sample_rate,
               std::size_t num_samples) {
  config.validate();
  const std::size_t w = config.window_length;
  const std::size_t half = w / 2;
  if (spec.num_bins != w / 2 + 1)
    throw Error(ErrorKind::Config, "istft: bin count does not match config");
  const auto window = make_window(config.window, w);

  const std::size_t padded_len = (spec.num_frames > 0 ? (spec.num_frames - 1) * config.hop : 0) + w;
  std::vector<double> acc(padded_len, 0.0);
  std::vector<double> norm(padded_len, 0.0);

  std::vector<std::complex<double>> bins(spec.num_bins);
  for (std::size_t l = 0; l < spec.num_frames; ++l) {
    std::copy(spec.data.begin() + static_cast<long>(l * spec.num_bins),
              spec.data.begin() + static_cast<long>((l + 1) * spec.num_bins), bins.begin());
    const auto frame = fft::irfft(bins, w);
    const std::size_t start = l * config.hop;
    for (std::size_t j = 0; j < w; ++j) {
      acc[start + j] += window[j] * frame[j];
      norm[start + j] += window[j] * window[j];
    }
  }

  MonoClip out;
  out.sample_rate = sample_rate;
  out.samples.resize(num_samples, 0.0);
  for (std::size_t i = 0; i < num_samples; ++i) {
    const std::size_t p = i + half;
    if (p < padded_len && norm[p] > 1e-12) out.samples[i] = acc[p] / norm[p];
  }
  return out;
}

BinauralClip istft(const BinauralSpectrogram& spec) {
  BinauralClip out;
  out.left = istft(spec.left, spec.config, spec.sample_rate, spec.num_samples);
  out.right = istft(spec.right, spec.config, spec.sample_rate, spec.num_samples);
  return out;
}

std::vector<std::complex<double>> ir_spectrum(const std::vector<double>& ir,
                                              std::size_t fft_size) {
  if (ir.size() > fft_size)
    throw Error(ErrorKind::Sizing, "ir_spectrum: impulse response longer than fft_size (" +
                                       std::to_string(ir.size()) + " > " +
                                       std::to_string(fft_size) + ")");
  std::vector<double> padded(fft_size, 0.0);
  std::copy(ir.begin(), ir.end(), padded.begin());
  return fft::rfft(padded, fft_size);
}

std::vector<std::complex<double>> fractional_delay_phase(double tau_samples,
                                                         std::size_t fft_size) {
  if (tau_samples < 0.0)
    throw Error(ErrorKind::InvalidInput, "fractional_delay_phase: negative delay");
  if (fft_size < 2 || (fft_size % 2) != 0)
    throw Error(ErrorKind::InvalidInput, "fractional_delay_phase: fft_size must be even");
  const std::size_t num_bins = fft_size / 2 + 1;
  std::vector<std::complex<double>> phase(num_bins);
  for (std::size_t k = 0; k < num_bins; ++k) {
    const double angle = -kTwoPi * static_cast<double>(k) * tau_samples /
                         static_cast<double>(fft_size);
    phase[k] = {std::cos(angle), std::sin(angle)};
  }
  return phase;
}

MonoClip delayed(const MonoClip& clip, double tau_samples) {
  if (tau_samples < 0.0)
    throw Error(ErrorKind::InvalidInput, "delayed: negative delay");
  if (clip.samples.empty()) return clip;
  const std::size_t n = clip.size();
  const std::size_t fft_size =
      fft::next_pow2(n + static_cast<std::size_t>(std::ceil(tau_samples)) + 1024);
  auto spec = ir_spectrum(clip.samples, fft_size);
  const auto phase = fractional_delay_phase(tau_samples, fft_size);
  for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= phase[k];
  auto shifted = fft::irfft(spec, fft_size);
  MonoClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.assign(shifted.begin(), shifted.begin() + static_cast<long>(n));
  return out;
}

BinauralClip delayed(const BinauralClip& clip, double tau_samples) {
  return {delayed(clip.left, tau_samples), delayed(clip.right, tau_samples)};
}

}  // namespace binsim
