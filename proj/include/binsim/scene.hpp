#ifndef BINSIM_SCENE_HPP
#define BINSIM_SCENE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "binsim/audio.hpp"
#include "binsim/room.hpp"

namespace binsim {

// One speaker: where it sits (head frame) and which dry signal it plays.
// The signal is referenced by id; the renderer resolves ids through a
// SignalProvider so scenes stay declarative.
struct SourceSpec {
  SphericalPos pos;
  std::string signal_id;
  std::uint64_t signal_offset = 0;  // samples skipped when the utterance is longer
};

// Declarative description of one mixture.  `sources` holds two speakers in
// the standard protocol; a single entry selects the degenerate single-source
// mode where sir_db is ignored.
struct SceneSpec {
  std::string scene_id;
  RoomSpec room;
  ListenerPose listener;
  std::vector<SourceSpec> sources;
  double sir_db = 0.0;  // energy of source 1 over source 2 at the ears
  int target_index = 1;  // 1-based
  double duration_s = 5.0;
  int sample_rate = 16000;
  std::uint64_t seed = 0;
  std::string hrtf_set_path;                  // empty when the set is passed in memory
  std::optional<double> separation_deg;       // set by sweep protocols

  void validate() const;
};

using SignalProvider = std::function<MonoClip(const std::string& signal_id)>;

struct SceneMetadata {
  double t60_s = 0.0;
  bool anechoic = false;
  double requested_sir_db = 0.0;
  double realized_sir_db = 0.0;
  double interferer_scale = 1.0;  // linear gain applied to source 2
  double reflection_coefficient = 0.0;
  std::string hrtf_subject;
  std::uint64_t seed = 0;
  std::vector<double> direct_path_delay_samples;  // per source
  std::vector<std::size_t> image_counts;          // per source
};

struct RenderedScene {
  BinauralClip mixture;
  std::vector<BinauralClip> targets;      // direct-path references, per source
  std::vector<BinauralClip> reverberant;  // per-source reverberant renders, SIR-scaled
  SceneMetadata metadata;
};

// Direct-path reference: dry signal convolved with the nearest-grid HRIR pair
// for the source direction.  No distance gain and no propagation delay are
// applied, so the reference is time-aligned with the dry signal, not with the
// mixture.
BinauralClip render_target(const SourceSpec& source, const HrtfSet& hrtf,
                           const MonoClip& dry, double duration_s, int sample_rate);

// Renders the reverberant mixture: per-source image expansion, BRIR synthesis,
// convolution, then SIR scaling of source 2 so the two reverberant renders'
// channel-summed energies realize spec.sir_db exactly.  Targets are rendered
// with the same scaling.
RenderedScene mix_scene(const SceneSpec& spec, const HrtfSet& hrtf,
                        const SignalProvider& provider);

// Full linear convolution, truncated to the first n samples.
std::vector<double> convolve_truncated(const std::vector<double>& x,
                                       const std::vector<double>& h, std::size_t n);

}  // namespace binsim

#endif  // BINSIM_SCENE_HPP
