#include "binsim/extract.hpp"

#include <algorithm>
#include <cmath>

namespace binsim {

namespace {

constexpr double kDeadBinRelative = 1e-12;

void check_clue(const BinauralSpectrogram& mix, const ExtractionClue& clue) {
  if (clue.left.size() != clue.right.size() || clue.left.empty())
    throw Error(ErrorKind::InvalidInput, "extract: malformed clue");
  if (clue.num_bins() != mix.num_bins())
    throw Error(ErrorKind::InvalidInput,
                "extract: clue bin count " + std::to_string(clue.num_bins()) +
                    " does not match spectrogram (" + std::to_string(mix.num_bins()) + ")");
}

double max_clue_energy(const ExtractionClue& clue) {
  double m = 0.0;
  for (std::size_t k = 0; k < clue.num_bins(); ++k)
    m = std::max(m, std::norm(clue.left[k]) + std::norm(clue.right[k]));
  return m;
}

BinauralSpectrogram empty_like(const BinauralSpectrogram& mix) {
  BinauralSpectrogram out;
  out.config = mix.config;
  out.sample_rate = mix.sample_rate;
  out.num_samples = mix.num_samples;
  out.left.num_bins = out.right.num_bins = mix.num_bins();
  out.left.num_frames = out.right.num_frames = mix.num_frames();
  out.left.data.assign(mix.num_bins() * mix.num_frames(), {0.0, 0.0});
  out.right.data.assign(mix.num_bins() * mix.num_frames(), {0.0, 0.0});
  return out;
}

}  // namespace

ExtractionClue clue_from_hrtf(const HrtfSet& set, const Direction& query,
                              std::size_t fft_size) {
  ClueSpectrum spec = get_clue(set, query, fft_size);
  ExtractionClue clue;
  clue.left = std::move(spec.left);
  clue.right = std::move(spec.right);
  clue.direction = spec.grid_direction;
  return clue;
}

ExtractionResult matched_filter_extract(const BinauralSpectrogram& mix,
                                        const ExtractionClue& clue) {
  check_clue(mix, clue);
  const std::size_t num_bins = mix.num_bins();
  const std::size_t num_frames = mix.num_frames();
  const double dead_threshold = kDeadBinRelative * max_clue_energy(clue);

  ExtractionResult result;
  result.method = "matched";
  result.estimate_spec = empty_like(mix);

  for (std::size_t k = 0; k < num_bins; ++k) {
    const std::complex<double> hl = clue.left[k];
    const std::complex<double> hr = clue.right[k];
    const double h_energy = std::norm(hl) + std::norm(hr);
    if (h_energy <= dead_threshold) {
      ++result.diagnostics.dead_bins;
      continue;
    }
    for (std::size_t l = 0; l < num_frames; ++l) {
      const std::complex<double> g =
          (std::conj(hl) * mix.left.at(k, l) + std::conj(hr) * mix.right.at(k, l)) / h_energy;
      result.estimate_spec.left.at(k, l) = g * hl;
      result.estimate_spec.right.at(k, l) = g * hr;
    }
  }

  result.estimate = istft(result.estimate_spec);
  return result;
}

ExtractionResult mvdr_extract(const BinauralSpectrogram& mix, const ExtractionClue& clue,
                              double loading) {
  check_clue(mix, clue);
  const std::size_t num_bins = mix.num_bins();
  const std::size_t num_frames = mix.num_frames();
  if (num_frames < 8)
    throw Error(ErrorKind::InvalidInput,
                "mvdr_extract: need >= 8 frames for covariance estimation");
  if (!(loading >= 0.0))
    throw Error(ErrorKind::InvalidInput, "mvdr_extract: loading must be >= 0");
  const double dead_threshold = kDeadBinRelative * max_clue_energy(clue);

  ExtractionResult result;
  result.method = "mvdr";
  result.diagnostics.loading = loading;
  result.estimate_spec = empty_like(mix);

  for (std::size_t k = 0; k < num_bins; ++k) {
    const std::complex<double> hl = clue.left[k];
    const std::complex<double> hr = clue.right[k];
    const double h_energy = std::norm(hl) + std::norm(hr);
    if (h_energy <= dead_threshold) {
      ++result.diagnostics.dead_bins;
      continue;
    }

    // Sample covariance of the 2-channel bin across frames.
    double p_ll = 0.0, p_rr = 0.0;
    std::complex<double> p_lr{0.0, 0.0};
    for (std::size_t l = 0; l < num_frames; ++l) {
      const std::complex<double> xl = mix.left.at(k, l);
      const std::complex<double> xr = mix.right.at(k, l);
      p_ll += std::norm(xl);
      p_rr += std::norm(xr);
      p_lr += xl * std::conj(xr);
    }
    const double inv_frames = 1.0 / static_cast<double>(num_frames);
    p_ll *= inv_frames;
    p_rr *= inv_frames;
    p_lr *= inv_frames;

    const double delta = loading * 0.5 * (p_ll + p_rr);  // eps * tr(Phi)/2
    const double a = p_ll + delta;
    const double c = p_rr + delta;
    const std::complex<double> b = p_lr;

    std::complex<double> wl, wr;
    bool solved = false;
    const double det = a * c - std::norm(b);
    if (det > 0.0 && std::isfinite(det)) {
      // u = Phi^{-1} h for the loaded 2x2 Hermitian covariance.
      const std::complex<double> ul = (c * hl - b * hr) / det;
      const std::complex<double> ur = (a * hr - std::conj(b) * hl) / det;
      const std::complex<double> denom = std::conj(hl) * ul + std::conj(hr) * ur;
      if (std::abs(denom) > 0.0 && std::isfinite(std::abs(denom))) {
        wl = ul / denom;
        wr = ur / denom;
        solved = true;
      }
    }
    if (!solved) {
      // Loaded covariance was numerically singular; matched filter direction.
      ++result.diagnostics.fallback_bins;
      wl = hl / h_energy;
      wr = hr / h_energy;
    }

    for (std::size_t l = 0; l < num_frames; ++l) {
      const std::complex<double> g =
          std::conj(wl) * mix.left.at(k, l) + std::conj(wr) * mix.right.at(k, l);
      result.estimate_spec.left.at(k, l) = g * hl;
      result.estimate_spec.right.at(k, l) = g * hr;
    }
  }

  result.estimate = istft(result.estimate_spec);
  return result;
}

ExtractionResult oracle_mask_extract(const BinauralSpectrogram& mix,
                                     const BinauralSpectrogram& target_spec) {
  if (target_spec.num_bins() != mix.num_bins() || target_spec.num_frames() != mix.num_frames())
    throw Error(ErrorKind::InvalidInput, "oracle_mask_extract: shape mismatch");

  ExtractionResult result;
  result.method = "oracle";
  result.estimate_spec = empty_like(mix);

  const std::size_t total = mix.num_bins() * mix.num_frames();
  for (std::size_t i = 0; i < total; ++i) {
    {
      const std::complex<double> x = mix.left.data[i];
      const std::complex<double> t = target_spec.left.data[i];
      const double mag_t = std::abs(t);
      const double mag_res = std::abs(x - t);
      const double denom = mag_t + mag_res;
      const double mask = denom > 0.0 ? std::clamp(mag_t / denom, 0.0, 1.0) : 0.0;
      result.estimate_spec.left.data[i] = mask * x;
    }
    {
      const std::complex<double> x = mix.right.data[i];
      const std::complex<double> t = target_spec.right.data[i];
      const double mag_t = std::abs(t);
      const double mag_res = std::abs(x - t);
      const double denom = mag_t + mag_res;
      const double mask = denom > 0.0 ? std::clamp(mag_t / denom, 0.0, 1.0) : 0.0;
      result.estimate_spec.right.data[i] = mask * x;
    }
  }

  result.estimate = istft(result.estimate_spec);
  return result;
}

}  // namespace binsim
