#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "binsim/fft.hpp"
#include "binsim/stft.hpp"
#include "support.hpp"

using namespace binsim;

namespace {

const StftConfig kDefaultConfig{512, 128, WindowKind::Hann};

BinauralClip noise_clip(std::uint64_t seed, std::size_t n, int fs = 16000) {
  return {testsup::white_noise(seed, n, fs), testsup::white_noise(seed + 1, n, fs)};
}

}  // namespace

TEST_CASE("stft shape: 5 s at 16 kHz with 512/128 gives 257 x 625") {
  const BinauralClip clip = noise_clip(1, 80000);
  const BinauralSpectrogram spec = stft(clip, kDefaultConfig);
  CHECK(spec.num_bins() == 257);
  CHECK(spec.num_frames() == 625);
  CHECK(spec.num_samples == 80000);
}

TEST_CASE("stft of all-zero clip is all-zero") {
  BinauralClip clip;
  clip.left = {std::vector<double>(4000, 0.0), 16000};
  clip.right = {std::vector<double>(4000, 0.0), 16000};
  const BinauralSpectrogram spec = stft(clip, kDefaultConfig);
  for (const auto& v : spec.left.data) CHECK(std::abs(v) == 0.0);
  for (const auto& v : spec.right.data) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("stft frame 0 of a unit impulse matches the direct DFT of the centered frame") {
  // With centered frames the impulse at n=0 sits at window index W/2, so the
  // rectangular-window bins have constant magnitude and alternating sign.
  StftConfig config{512, 256, WindowKind::Rect};
  MonoClip clip;
  clip.sample_rate = 16000;
  clip.samples.assign(2048, 0.0);
  clip.samples[0] = 1.0;
  const Spectrogram spec = stft(clip, config);

  std::vector<double> frame0(512, 0.0);
  frame0[256] = 1.0;  // padded position of sample 0
  const auto oracle = testsup::naive_dft(frame0, 512);
  for (std::size_t k = 0; k < oracle.size(); ++k) {
    CHECK(std::abs(spec.at(k, 0) - oracle[k]) < 1e-10);
    CHECK(std::abs(spec.at(k, 0)) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("istft reconstructs white noise below 1e-6 relative error") {
  const BinauralClip clip = noise_clip(7, 80000);
  const BinauralClip back = istft(stft(clip, kDefaultConfig));
  CHECK(testsup::relative_l2_error(clip.left.samples, back.left.samples) < 1e-6);
  CHECK(testsup::relative_l2_error(clip.right.samples, back.right.samples) < 1e-6);
}

TEST_CASE("istft of a zero spectrogram is a zero clip") {
  const BinauralClip clip = noise_clip(9, 8000);
  BinauralSpectrogram spec = stft(clip, kDefaultConfig);
  std::fill(spec.left.data.begin(), spec.left.data.end(), std::complex<double>{0.0, 0.0});
  std::fill(spec.right.data.begin(), spec.right.data.end(), std::complex<double>{0.0, 0.0});
  const BinauralClip back = istft(spec);
  for (double v : back.left.samples) CHECK(v == 0.0);
  for (double v : back.right.samples) CHECK(v == 0.0);
}

TEST_CASE("sine at an exact bin frequency round-trips below -80 dB") {
  const int fs = 16000;
  const std::size_t n = 16000;
  MonoClip sine;
  sine.sample_rate = fs;
  sine.samples.resize(n);
  const double freq = 1000.0;  // bin 32 of a 512-point window
  for (std::size_t i = 0; i < n; ++i)
    sine.samples[i] = std::sin(2.0 * std::numbers::pi * freq * i / fs);
  const BinauralClip clip{sine, sine};
  const BinauralClip back = istft(stft(clip, kDefaultConfig));
  CHECK(testsup::relative_l2_error(clip.left.samples, back.left.samples) < 1e-4);  // -80 dB
}

TEST_CASE("stft rejects empty clips and bad configs") {
  BinauralClip empty;
  empty.left.sample_rate = empty.right.sample_rate = 16000;
  CHECK_THROWS_AS(stft(empty, kDefaultConfig), Error);

  StftConfig bad_hop{512, 0, WindowKind::Hann};
  CHECK_THROWS_AS(bad_hop.validate(), Error);
  StftConfig hop_too_big{512, 512, WindowKind::Hann};  // no overlap coverage
  CHECK_THROWS_AS(hop_too_big.validate(), Error);
  StftConfig non_divisor{512, 96, WindowKind::Hann};
  CHECK_THROWS_AS(non_divisor.validate(), Error);
}

TEST_CASE("ir_spectrum: unit impulse gives the all-ones spectrum") {
  const auto bins = ir_spectrum({1.0}, 512);
  REQUIRE(bins.size() == 257);
  for (const auto& v : bins) CHECK(std::abs(v - std::complex<double>{1.0, 0.0}) < 1e-12);
}

TEST_CASE("ir_spectrum: shifted impulse carries the shift-theorem phase") {
  const std::size_t d = 5;
  std::vector<double> ir(64, 0.0);
  ir[d] = 1.0;
  const auto bins = ir_spectrum(ir, 256);
  for (std::size_t k = 0; k < bins.size(); ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k * d) / 256.0;
    CHECK(std::abs(bins[k] - std::complex<double>{std::cos(angle), std::sin(angle)}) < 1e-12);
  }
}

TEST_CASE("ir_spectrum matches the naive DFT oracle on a random 128-tap response") {
  const auto hrir = testsup::white_noise(3, 128, 16000);
  const auto bins = ir_spectrum(hrir.samples, 512);
  const auto oracle = testsup::naive_dft(hrir.samples, 512);
  for (std::size_t k = 0; k < bins.size(); ++k)
    CHECK(std::abs(bins[k] - oracle[k]) < 1e-10);
}

TEST_CASE("ir_spectrum refuses to truncate") {
  std::vector<double> ir(300, 0.1);
  CHECK_THROWS_AS(ir_spectrum(ir, 256), Error);
}

TEST_CASE("fractional_delay_phase: zero delay is all-ones") {
  const auto phase = fractional_delay_phase(0.0, 512);
  for (const auto& v : phase) CHECK(std::abs(v - std::complex<double>{1.0, 0.0}) < 1e-15);
}

TEST_CASE("fractional_delay_phase at integer delay equals the shifted-impulse spectrum") {
  std::vector<double> ir(128, 0.0);
  ir[80] = 1.0;
  const auto direct = ir_spectrum(ir, 512);
  const auto phase = fractional_delay_phase(80.0, 512);
  for (std::size_t k = 0; k < phase.size(); ++k) CHECK(std::abs(phase[k] - direct[k]) < 1e-12);
}

TEST_CASE("fractional delay of 3.5 samples lands at lag 3.5 by cross-correlation") {
  // Band-limited pulse, delayed in the frequency domain; the peak of the
  // cross-correlation against the original, refined by a parabolic fit, must
  // sit at the requested fractional lag.
  const std::size_t n = 1024;
  std::vector<double> pulse(n, 0.0);
  for (int i = -24; i <= 24; ++i) {
    const double t = static_cast<double>(i);
    const double x = 0.8 * t;  // cutoff at 0.4 fs
    const double sinc = (std::abs(x) < 1e-12)
                            ? 1.0
                            : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
    const double w = 0.5 + 0.5 * std::cos(std::numbers::pi * t / 25.0);
    pulse[static_cast<std::size_t>(128 + i)] = sinc * w;
  }

  const double tau = 3.5;
  auto spec = ir_spectrum(pulse, 2048);
  const auto phase = fractional_delay_phase(tau, 2048);
  for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= phase[k];
  const auto shifted = fft::irfft(spec, 2048);

  // cross-correlate around the expected lag
  auto xcorr = [&](int lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const long j = static_cast<long>(i) + lag;
      if (j >= 0 && j < static_cast<long>(shifted.size())) acc += pulse[i] * shifted[j];
    }
    return acc;
  };
  int best_lag = 0;
  double best = -1e300;
  for (int lag = -10; lag <= 10; ++lag) {
    const double c = xcorr(lag);
    if (c > best) {
      best = c;
      best_lag = lag;
    }
  }
  const double cm = xcorr(best_lag - 1), c0 = xcorr(best_lag), cp = xcorr(best_lag + 1);
  const double refined = best_lag + 0.5 * (cm - cp) / (cm - 2.0 * c0 + cp);
  CHECK(refined == doctest::Approx(tau).epsilon(0.0).scale(1.0).epsilon(0.05 / tau));
  CHECK(std::abs(refined - tau) < 0.05);
}

TEST_CASE("fractional_delay_phase rejects negative delays") {
  CHECK_THROWS_AS(fractional_delay_phase(-1.0, 512), Error);
}

TEST_CASE("stft linearity") {
  const BinauralClip x = noise_clip(11, 16000);
  const BinauralClip y = noise_clip(13, 16000);
  const double a = 0.7, b = -1.3;
  BinauralClip combo = x;
  for (std::size_t i = 0; i < combo.size(); ++i) {
    combo.left.samples[i] = a * x.left.samples[i] + b * y.left.samples[i];
    combo.right.samples[i] = a * x.right.samples[i] + b * y.right.samples[i];
  }
  const auto sx = stft(x, kDefaultConfig);
  const auto sy = stft(y, kDefaultConfig);
  const auto sc = stft(combo, kDefaultConfig);
  double max_err = 0.0, max_ref = 0.0;
  for (std::size_t i = 0; i < sc.left.data.size(); ++i) {
    max_err = std::max(max_err,
                       std::abs(sc.left.data[i] - (a * sx.left.data[i] + b * sy.left.data[i])));
    max_ref = std::max(max_ref, std::abs(sc.left.data[i]));
  }
  CHECK(max_err / max_ref < 1e-10);
}

TEST_CASE("Parseval: spectrogram energy matches time energy times the window constant") {
  // Interior-supported signal (a window length of zeros on both ends) so the
  // squared-window tiling constant (1.5 for Hann at hop W/4) applies exactly.
  const int fs = 16000;
  const std::size_t n = 16384;
  MonoClip clip = testsup::white_noise(17, n, fs);
  for (std::size_t i = 0; i < 512; ++i) {
    clip.samples[i] = 0.0;
    clip.samples[n - 1 - i] = 0.0;
  }
  const Spectrogram spec = stft(clip, kDefaultConfig);

  // One-sided spectral energy with the Hermitian double-count.
  double spec_energy = 0.0;
  for (std::size_t l = 0; l < spec.num_frames; ++l)
    for (std::size_t k = 0; k < spec.num_bins; ++k) {
      const double weight = (k == 0 || k == spec.num_bins - 1) ? 1.0 : 2.0;
      spec_energy += weight * std::norm(spec.at(k, l));
    }
  spec_energy /= 512.0;  // DFT energy normalization

  const double expected = 1.5 * energy(clip.samples);
  CHECK(spec_energy == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("fractional delay phases compose additively") {
  const auto p1 = fractional_delay_phase(11.25, 1024);
  const auto p2 = fractional_delay_phase(30.5, 1024);
  const auto p12 = fractional_delay_phase(41.75, 1024);
  for (std::size_t k = 0; k < p1.size(); ++k)
    CHECK(std::abs(p1[k] * p2[k] - p12[k]) < 1e-12);
}

TEST_CASE("perfect reconstruction across COLA configs") {
  for (const StftConfig config : {StftConfig{512, 128, WindowKind::Hann},
                                  StftConfig{512, 64, WindowKind::Hann},
                                  StftConfig{512, 256, WindowKind::SqrtHann},
                                  StftConfig{256, 64, WindowKind::Hann},
                                  StftConfig{512, 256, WindowKind::Rect}}) {
    const BinauralClip clip = noise_clip(19, 10000);
    const BinauralClip back = istft(stft(clip, config));
    CHECK(testsup::relative_l2_error(clip.left.samples, back.left.samples) < 1e-6);
  }
}

TEST_CASE("delayed() moves a clip by the requested fractional amount") {
  MonoClip clip = testsup::white_noise(23, 4000, 16000);
  // Band-limit the noise so the fractional shift is well-defined.
  auto spec = ir_spectrum(clip.samples, 8192);
  for (std::size_t k = 3600; k < spec.size(); ++k) spec[k] = 0.0;
  const auto limited = fft::irfft(spec, 8192);
  clip.samples.assign(limited.begin(), limited.begin() + 4000);

  const MonoClip moved = delayed(clip, 100.0);
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 100; i < 4000; ++i) {
    err += std::pow(moved.samples[i] - clip.samples[i - 100], 2);
    ref += std::pow(clip.samples[i - 100], 2);
  }
  CHECK(std::sqrt(err / ref) < 1e-9);
}
