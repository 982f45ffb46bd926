#ifndef BINSIM_METRICS_HPP
#define BINSIM_METRICS_HPP

#include <optional>
#include <string>
#include <vector>

#include "binsim/audio.hpp"
#include "binsim/stft.hpp"

namespace binsim {

// Caps keep exact matches finite; +/-100 dB corresponds to a residual 10
// orders of magnitude below (or above) the projected signal.
constexpr double kSiSdrCapDb = 100.0;

struct SiSdrResult {
  double value_db = 0.0;           // mean over non-degenerate channels
  bool left_degenerate = false;    // silent target channel, excluded
  bool right_degenerate = false;

  bool degenerate() const { return left_degenerate && right_degenerate; }
};

// Scale-invariant SDR per channel (estimate projected onto the target),
// averaged over both ears.
SiSdrResult si_sdr_binaural(const BinauralClip& target, const BinauralClip& estimate);

// Output SI-SDR minus input SI-SDR.
double si_sdr_improvement(const BinauralClip& mixture, const BinauralClip& target,
                          const BinauralClip& estimate);

// Mean absolute spectral error: (1/KL) sum over bins and frames of the
// two-channel l1 norm with the complex modulus per entry.
double mae_stft(const BinauralSpectrogram& target, const BinauralSpectrogram& estimate);

// Binaural-cue extraction configuration; defaults are frozen for
// reproducibility and exposed for sensitivity studies.
struct CueParams {
  int num_bands = 24;
  double band_lo_hz = 80.0;
  double band_hi_hz = 7500.0;
  double frame_ms = 20.0;
  double hop_ms = 10.0;
  double coherence_threshold = 0.95;
  double itd_range_ms = 1.0;   // search and histogram range, +/-
  double itd_bin_ms = 0.025;
  double ild_range_db = 25.0;  // histogram range, +/-
  double ild_bin_db = 0.25;
};

enum class CueKind { Itd, Ild };

// Coherence-weighted histogram of per-band, per-frame cue estimates.
// Sign conventions: ITD positive when the left channel leads, ILD positive
// when the left channel is louder.
struct CueHistogram {
  CueKind kind = CueKind::Itd;
  std::vector<double> bin_edges;  // size weights.size() + 1
  std::vector<double> weights;
  std::size_t admitted_frames = 0;

  bool empty() const { return admitted_frames == 0; }
  double dominant_peak() const;  // center of the heaviest bin
  double total_weight() const;
};

struct CuePair {
  CueHistogram itd;  // milliseconds
  CueHistogram ild;  // dB
};

// Gammatone-band interaural analysis: per band and frame, ITD from the
// normalized interaural cross-correlation peak (parabolic refinement) and ILD
// from the band energy ratio; frames are admitted when coherence reaches the
// threshold and weighted by it.
CuePair cue_histograms(const BinauralClip& clip, const CueParams& params = {});

struct CueDeviation {
  double delta_itd_ms = 0.0;
  double delta_ild_db = 0.0;
  bool degenerate = false;  // one of the histograms was empty
};

CueDeviation cue_deviation(const BinauralClip& target, const BinauralClip& estimate,
                           const CueParams& params = {});

// Full per-scene report.  PESQ/NISQA are imported from external sidecars,
// never computed here.
struct MetricsReport {
  double si_sdr_db = 0.0;
  double si_sdri_db = 0.0;
  double mae_stft = 0.0;
  double delta_itd_ms = 0.0;
  double delta_ild_db = 0.0;
  // Diagnostics only: the reference is advanced by the known direct-path
  // delay before comparison, which the plain metrics deliberately do not do.
  double si_sdr_dc_db = 0.0;
  double si_sdri_dc_db = 0.0;
  std::vector<std::string> degenerate_flags;
  std::optional<double> pesq;
  std::optional<double> nisqa;
};

// Computes the full report for one extraction result.  `direct_path_delay`
// (samples) drives the delay-compensated diagnostic variant.
MetricsReport compute_report(const BinauralClip& mixture, const BinauralClip& target,
                             const BinauralClip& estimate, const StftConfig& stft_config,
                             double direct_path_delay_samples,
                             const CueParams& cue_params = {});

}  // namespace binsim

#endif  // BINSIM_METRICS_HPP
