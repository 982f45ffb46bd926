#ifndef BINSIM_EXTRACT_HPP
#define BINSIM_EXTRACT_HPP

#include <string>
#include <vector>

#include "binsim/hrtf.hpp"
#include "binsim/stft.hpp"

namespace binsim {

// Per-bin binaural steering pair used as the extraction clue.  The bin count
// must match the spectrogram the extractor is applied to.
struct ExtractionClue {
  std::vector<std::complex<double>> left;
  std::vector<std::complex<double>> right;
  Direction direction;  // grid direction the clue came from

  std::size_t num_bins() const { return left.size(); }
};

ExtractionClue clue_from_hrtf(const HrtfSet& set, const Direction& query,
                              std::size_t fft_size);

struct ExtractionDiagnostics {
  std::size_t dead_bins = 0;      // clue energy below threshold, output zeroed
  std::size_t fallback_bins = 0;  // MVDR solve failed, matched filter used
  double loading = 0.0;           // relative diagonal loading actually applied
};

struct ExtractionResult {
  BinauralClip estimate;
  BinauralSpectrogram estimate_spec;  // the spectral output before inversion
  std::string method;
  ExtractionDiagnostics diagnostics;
};

// Per-bin scalar estimate g = h^H x / ||h||^2, re-spatialized through the clue
// (output = g * h), so the output's interaural relations equal the clue's by
// construction.  Bins whose clue energy is below 1e-12 of the maximum are
// zeroed and counted.
ExtractionResult matched_filter_extract(const BinauralSpectrogram& mix,
                                        const ExtractionClue& clue);

// Distortionless per-frequency 2x2 beamformer: Phi = (1/L) sum x x^H plus
// diagonal loading of `loading` times the average eigenvalue; w solves
// min w^H Phi w subject to w^H h = 1.  The scalar w^H x is re-spatialized
// through the clue like the matched filter.  Needs at least 8 frames.
ExtractionResult mvdr_extract(const BinauralSpectrogram& mix, const ExtractionClue& clue,
                              double loading = 1e-3);

// Upper-bound reference: per channel and bin, mask |t| / (|t| + |x - t|)
// applied to the mixture phase-preservingly.
ExtractionResult oracle_mask_extract(const BinauralSpectrogram& mix,
                                     const BinauralSpectrogram& target_spec);

}  // namespace binsim

#endif  // BINSIM_EXTRACT_HPP
