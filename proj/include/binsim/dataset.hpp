#ifndef BINSIM_DATASET_HPP
#define BINSIM_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "binsim/rng.hpp"
#include "binsim/scene.hpp"

namespace binsim {

struct UtteranceRef {
  std::string id;              // path or opaque id resolved by the provider
  std::uint64_t num_samples = 0;
};

enum class SplitKind { Train, Test };

// Everything scene sampling draws from.  Ranges that the underlying protocol
// leaves open (positions, room sizes, listener placement) are defaults here
// and are recorded in the manifest so runs are self-describing.
struct DatasetProtocol {
  std::vector<UtteranceRef> utterances;
  std::vector<std::string> hrtf_sets;

  std::size_t num_mixtures = 50;
  SplitKind split = SplitKind::Train;
  double duration_s = 5.0;
  int sample_rate = 16000;

  double t60_min_s = 0.2, t60_max_s = 0.8;
  double sir_min_db = -5.0, sir_max_db = 5.0;
  double room_x_min = 4.0, room_x_max = 8.0;
  double room_y_min = 3.0, room_y_max = 6.0;
  double room_z_min = 2.5, room_z_max = 3.5;
  double radius_min_m = 1.0, radius_max_m = 2.5;
  double elevation_min_deg = -30.0, elevation_max_deg = 30.0;
  double min_separation_deg = 0.0;
  int max_order = 12;
  bool anechoic = false;
  double listener_wall_margin_m = 0.5;

  // Sweep mode: when non-empty, the two sources' azimuth difference is pinned
  // to each listed separation for scenes_per_separation mixtures each, and
  // num_mixtures is ignored.
  std::vector<double> sweep_separations_deg;
  std::size_t scenes_per_separation = 30;

  std::string scene_id_prefix = "scene";

  void validate() const;
};

// Protocol constraining the azimuth distance between the two speakers; by
// default 20 to 90 degrees in 10-degree steps, 30 mixtures each.
DatasetProtocol angular_sweep_protocol(const DatasetProtocol& base,
                                       std::vector<double> separations_deg = {},
                                       std::size_t scenes_per_separation = 30);

// Deterministic scene stream: the same (protocol, seed) pair yields a
// bit-identical sequence.  Test splits emit each mixture twice, once per
// target index.
std::vector<SceneSpec> sample_dataset(const DatasetProtocol& protocol, std::uint64_t seed);

// Speech-shaped test signal: tilted noise under a syllabic envelope.
MonoClip make_modulated_noise(std::uint64_t seed, std::size_t num_samples, int sample_rate);

}  // namespace binsim

#endif  // BINSIM_DATASET_HPP
