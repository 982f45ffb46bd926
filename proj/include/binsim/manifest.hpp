#ifndef BINSIM_MANIFEST_HPP
#define BINSIM_MANIFEST_HPP

#include <string>
#include <vector>

#include "binsim/dataset.hpp"
#include "binsim/scene.hpp"

namespace binsim {

// Realized per-scene values recorded after rendering.
struct RealizedScene {
  double sir_db = 0.0;
  double interferer_scale = 1.0;
  double reflection_coefficient = 0.0;
  std::vector<double> direct_path_delay_samples;
  std::vector<std::size_t> image_counts;
  std::string hrtf_subject;
  bool skipped = false;
  std::string skip_reason;
};

// One JSON line of the dataset manifest: the declarative scene, what was
// realized, and where the audio went (paths relative to the manifest).
struct ManifestRow {
  SceneSpec spec;
  RealizedScene realized;
  std::string mixture_path;
  std::vector<std::string> target_paths;
};

std::string row_to_json(const ManifestRow& row);
ManifestRow row_from_json(const std::string& line);

void write_manifest(const std::string& path, const std::vector<ManifestRow>& rows);
std::vector<ManifestRow> read_manifest(const std::string& path);

// Deterministic serialization of a scene stream; two streams are identical
// iff their serializations are byte-identical.
std::string serialize_scene_specs(const std::vector<SceneSpec>& specs);

// Protocol serialization for resolved-config snapshots.
std::string protocol_to_json(const DatasetProtocol& protocol);

}  // namespace binsim

#endif  // BINSIM_MANIFEST_HPP
