#include "binsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "binsim/fft.hpp"
#include "binsim/scene.hpp"

namespace binsim {

namespace {

double si_sdr_channel(const std::vector<double>& target, const std::vector<double>& estimate,
                      bool& degenerate) {
  const double target_energy = energy(target);
  if (target_energy <= 0.0) {
    degenerate = true;
    return 0.0;
  }
  degenerate = false;
  double dot = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) dot += estimate[i] * target[i];
  const double alpha = dot / target_energy;
  const double signal_energy = alpha * alpha * target_energy;
  double residual_energy = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double r = estimate[i] - alpha * target[i];
    residual_energy += r * r;
  }
  if (signal_energy <= 0.0) return -kSiSdrCapDb;
  if (residual_energy <= signal_energy * 1e-10) return kSiSdrCapDb;
  return std::clamp(10.0 * std::log10(signal_energy / residual_energy), -kSiSdrCapDb,
                    kSiSdrCapDb);
}

}  // namespace

SiSdrResult si_sdr_binaural(const BinauralClip& target, const BinauralClip& estimate) {
  target.validate();
  estimate.validate();
  if (target.size() != estimate.size())
    throw Error(ErrorKind::InvalidInput, "si_sdr: length mismatch");

  SiSdrResult result;
  const double left = si_sdr_channel(target.left.samples, estimate.left.samples,
                                     result.left_degenerate);
  const double right = si_sdr_channel(target.right.samples, estimate.right.samples,
                                      result.right_degenerate);
  if (result.degenerate()) {
    result.value_db = 0.0;
  } else if (result.left_degenerate) {
    result.value_db = right;
  } else if (result.right_degenerate) {
    result.value_db = left;
  } else {
    result.value_db = 0.5 * (left + right);
  }
  return result;
}

double si_sdr_improvement(const BinauralClip& mixture, const BinauralClip& target,
                          const BinauralClip& estimate) {
  const SiSdrResult output = si_sdr_binaural(target, estimate);
  const SiSdrResult input = si_sdr_binaural(target, mixture);
  return output.value_db - input.value_db;
}

double mae_stft(const BinauralSpectrogram& target, const BinauralSpectrogram& estimate) {
  if (target.num_bins() != estimate.num_bins() || target.num_frames() != estimate.num_frames())
    throw Error(ErrorKind::InvalidInput, "mae_stft: shape mismatch");
  const std::size_t total = target.num_bins() * target.num_frames();
  if (total == 0) throw Error(ErrorKind::InvalidInput, "mae_stft: empty spectrogram");
  double sum = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    sum += std::abs(target.left.data[i] - estimate.left.data[i]);
    sum += std::abs(target.right.data[i] - estimate.right.data[i]);
  }
  return sum / static_cast<double>(total);
}

double CueHistogram::dominant_peak() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < weights.size(); ++i)
    if (weights[i] > weights[best]) best = i;
  return 0.5 * (bin_edges[best] + bin_edges[best + 1]);
}

double CueHistogram::total_weight() const {
  double sum = 0.0;
  for (double w : weights) sum += w;
  return sum;
}

namespace {

double erb_bandwidth(double fc) { return 24.7 * (0.00437 * fc + 1.0); }
double erb_number(double f) { return 21.4 * std::log10(1.0 + 0.00437 * f); }
double erb_to_hz(double e) { return (std::pow(10.0, e / 21.4) - 1.0) / 0.00437; }

// FIR gammatone (4th order envelope), peak-normalized in magnitude response.
std::vector<double> gammatone_fir(double fc, int sample_rate) {
  const std::size_t length = 1024;
  const double b = 1.019 * erb_bandwidth(fc);
  std::vector<double> g(length);
  for (std::size_t n = 0; n < length; ++n) {
    const double t = static_cast<double>(n) / sample_rate;
    g[n] = t * t * t * std::exp(-2.0 * std::numbers::pi * b * t) *
           std::cos(2.0 * std::numbers::pi * fc * t);
  }
  const std::size_t fft_size = 8192;
  const auto spectrum = ir_spectrum(g, fft_size);
  double peak = 0.0;
  for (const auto& v : spectrum) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (double& v : g) v /= peak;
  return g;
}

CueHistogram make_histogram(CueKind kind, double range, double bin_width) {
  // Bin centers sit on multiples of the width with one centered at zero, so
  // symmetric cues land in the middle bin rather than on an edge.
  CueHistogram h;
  h.kind = kind;
  const std::size_t bins =
      static_cast<std::size_t>(std::llround(2.0 * range / bin_width)) + 1;
  h.weights.assign(bins, 0.0);
  h.bin_edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i)
    h.bin_edges[i] = -range - 0.5 * bin_width + static_cast<double>(i) * bin_width;
  return h;
}

void add_to_histogram(CueHistogram& h, double value, double weight) {
  const double lo = h.bin_edges.front();
  const double width = h.bin_edges[1] - h.bin_edges[0];
  long bin = static_cast<long>(std::floor((value - lo) / width));
  bin = std::clamp(bin, 0L, static_cast<long>(h.weights.size()) - 1);
  h.weights[static_cast<std::size_t>(bin)] += weight;
  ++h.admitted_frames;
}

}  // namespace

CuePair cue_histograms(const BinauralClip& clip, const CueParams& params) {
  clip.validate();
  const int fs = clip.sample_rate();
  if (clip.size() < static_cast<std::size_t>(fs) / 2)
    throw Error(ErrorKind::InvalidInput, "cue_histograms: clip shorter than 0.5 s");

  const std::size_t frame_len =
      static_cast<std::size_t>(std::llround(params.frame_ms * fs / 1000.0));
  const std::size_t hop = static_cast<std::size_t>(std::llround(params.hop_ms * fs / 1000.0));
  const long max_lag = std::lround(params.itd_range_ms * fs / 1000.0);
  const std::size_t n = clip.size();

  CuePair cues{make_histogram(CueKind::Itd, params.itd_range_ms, params.itd_bin_ms),
               make_histogram(CueKind::Ild, params.ild_range_db, params.ild_bin_db)};

  const double e_lo = erb_number(params.band_lo_hz);
  const double e_hi = erb_number(params.band_hi_hz);

  for (int band = 0; band < params.num_bands; ++band) {
    const double fc = erb_to_hz(e_lo + (static_cast<double>(band) + 0.5) *
                                           (e_hi - e_lo) / params.num_bands);
    const auto fir = gammatone_fir(fc, fs);
    const auto left = convolve_truncated(clip.left.samples, fir, n);
    const auto right = convolve_truncated(clip.right.samples, fir, n);

    for (std::size_t start = 0; start + frame_len <= n; start += hop) {
      double el = 0.0, er = 0.0;
      for (std::size_t i = start; i < start + frame_len; ++i) {
        el += left[i] * left[i];
        er += right[i] * right[i];
      }
      if (el <= 0.0 || er <= 0.0) continue;

      // Normalized cross-correlation over the lag range; right-channel lag
      // positive when the left channel leads.
      std::vector<double> ncc(static_cast<std::size_t>(2 * max_lag + 1), -1.0);
      double best = -2.0;
      long best_lag = 0;
      for (long lag = -max_lag; lag <= max_lag; ++lag) {
        double dot = 0.0, er_shift = 0.0;
        for (std::size_t i = start; i < start + frame_len; ++i) {
          const long j = static_cast<long>(i) + lag;
          const double r = (j >= 0 && j < static_cast<long>(n)) ? right[static_cast<std::size_t>(j)] : 0.0;
          dot += left[i] * r;
          er_shift += r * r;
        }
        const double denom = std::sqrt(el * er_shift);
        const double c = denom > 0.0 ? dot / denom : 0.0;
        ncc[static_cast<std::size_t>(lag + max_lag)] = c;
        if (c > best) {
          best = c;
          best_lag = lag;
        }
      }
      if (best < params.coherence_threshold) continue;

      double refined_lag = static_cast<double>(best_lag);
      if (best_lag > -max_lag && best_lag < max_lag) {
        const double cm = ncc[static_cast<std::size_t>(best_lag - 1 + max_lag)];
        const double c0 = ncc[static_cast<std::size_t>(best_lag + max_lag)];
        const double cp = ncc[static_cast<std::size_t>(best_lag + 1 + max_lag)];
        const double denom = cm - 2.0 * c0 + cp;
        if (std::abs(denom) > 1e-12) {
          const double offset = 0.5 * (cm - cp) / denom;
          if (std::abs(offset) <= 0.5) refined_lag += offset;
        }
      }

      add_to_histogram(cues.itd, refined_lag / fs * 1000.0, best);
      add_to_histogram(cues.ild, 10.0 * std::log10(el / er), best);
    }
  }
  return cues;
}

CueDeviation cue_deviation(const BinauralClip& target, const BinauralClip& estimate,
                           const CueParams& params) {
  const CuePair t = cue_histograms(target, params);
  const CuePair e = cue_histograms(estimate, params);
  CueDeviation dev;
  if (t.itd.empty() || e.itd.empty() || t.ild.empty() || e.ild.empty()) {
    dev.degenerate = true;
    return dev;
  }
  dev.delta_itd_ms = std::abs(e.itd.dominant_peak() - t.itd.dominant_peak());
  dev.delta_ild_db = std::abs(e.ild.dominant_peak() - t.ild.dominant_peak());
  return dev;
}

MetricsReport compute_report(const BinauralClip& mixture, const BinauralClip& target,
                             const BinauralClip& estimate, const StftConfig& stft_config,
                             double direct_path_delay_samples, const CueParams& cue_params) {
  MetricsReport report;

  const SiSdrResult out_sdr = si_sdr_binaural(target, estimate);
  const SiSdrResult in_sdr = si_sdr_binaural(target, mixture);
  report.si_sdr_db = out_sdr.value_db;
  report.si_sdri_db = out_sdr.value_db - in_sdr.value_db;
  if (out_sdr.left_degenerate) report.degenerate_flags.push_back("silent_target_left");
  if (out_sdr.right_degenerate) report.degenerate_flags.push_back("silent_target_right");

  const BinauralSpectrogram target_spec = stft(target, stft_config);
  const BinauralSpectrogram estimate_spec = stft(estimate, stft_config);
  report.mae_stft = binsim::mae_stft(target_spec, estimate_spec);

  const CueDeviation dev = cue_deviation(target, estimate, cue_params);
  if (dev.degenerate) {
    report.degenerate_flags.push_back("empty_cue_histogram");
  } else {
    report.delta_itd_ms = dev.delta_itd_ms;
    report.delta_ild_db = dev.delta_ild_db;
  }

  if (direct_path_delay_samples > 0.0) {
    const BinauralClip target_dc = delayed(target, direct_path_delay_samples);
    const SiSdrResult out_dc = si_sdr_binaural(target_dc, estimate);
    const SiSdrResult in_dc = si_sdr_binaural(target_dc, mixture);
    report.si_sdr_dc_db = out_dc.value_db;
    report.si_sdri_dc_db = out_dc.value_db - in_dc.value_db;
  } else {
    report.si_sdr_dc_db = report.si_sdr_db;
    report.si_sdri_dc_db = report.si_sdri_db;
  }
  return report;
}

}  // namespace binsim
