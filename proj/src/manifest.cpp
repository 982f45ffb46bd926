#include "binsim/manifest.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace binsim {

using nlohmann::json;

namespace {

json spec_to_json(const SceneSpec& spec) {
  json j;
  j["schema"] = "binsim.scene.v1";
  j["scene_id"] = spec.scene_id;
  j["target_index"] = spec.target_index;
  j["seed"] = spec.seed;
  j["sample_rate"] = spec.sample_rate;
  j["duration_s"] = spec.duration_s;
  j["sir_db"] = spec.sir_db;
  j["room"] = {{"lx", spec.room.dimensions_m.x},
               {"ly", spec.room.dimensions_m.y},
               {"lz", spec.room.dimensions_m.z},
               {"t60_s", spec.room.t60_s},
               {"anechoic", spec.room.anechoic},
               {"max_order", spec.room.max_order},
               {"speed_of_sound_mps", spec.room.speed_of_sound_mps}};
  j["listener"] = {{"x", spec.listener.position_m.x},
                   {"y", spec.listener.position_m.y},
                   {"z", spec.listener.position_m.z},
                   {"yaw_deg", spec.listener.yaw_deg}};
  auto& sources = j["sources"] = json::array();
  for (const auto& src : spec.sources)
    sources.push_back({{"azimuth_deg", src.pos.direction.azimuth_deg},
                       {"elevation_deg", src.pos.direction.elevation_deg},
                       {"radius_m", src.pos.radius_m},
                       {"signal_id", src.signal_id},
                       {"signal_offset", src.signal_offset}});
  j["hrtf_set"] = spec.hrtf_set_path;
  if (spec.separation_deg) j["separation_deg"] = *spec.separation_deg;
  return j;
}

SceneSpec spec_from_json(const json& j) {
  SceneSpec spec;
  spec.scene_id = j.at("scene_id").get<std::string>();
  spec.target_index = j.at("target_index").get<int>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  spec.sample_rate = j.at("sample_rate").get<int>();
  spec.duration_s = j.at("duration_s").get<double>();
  spec.sir_db = j.at("sir_db").get<double>();
  const auto& room = j.at("room");
  spec.room.dimensions_m = {room.at("lx").get<double>(), room.at("ly").get<double>(),
                            room.at("lz").get<double>()};
  spec.room.t60_s = room.at("t60_s").get<double>();
  spec.room.anechoic = room.at("anechoic").get<bool>();
  spec.room.max_order = room.at("max_order").get<int>();
  spec.room.speed_of_sound_mps = room.at("speed_of_sound_mps").get<double>();
  const auto& listener = j.at("listener");
  spec.listener.position_m = {listener.at("x").get<double>(), listener.at("y").get<double>(),
                              listener.at("z").get<double>()};
  spec.listener.yaw_deg = listener.at("yaw_deg").get<double>();
  for (const auto& s : j.at("sources")) {
    SourceSpec src;
    src.pos = SphericalPos(
        Direction(s.at("azimuth_deg").get<double>(), s.at("elevation_deg").get<double>()),
        s.at("radius_m").get<double>());
    src.signal_id = s.at("signal_id").get<std::string>();
    src.signal_offset = s.at("signal_offset").get<std::uint64_t>();
    spec.sources.push_back(std::move(src));
  }
  spec.hrtf_set_path = j.at("hrtf_set").get<std::string>();
  if (j.contains("separation_deg")) spec.separation_deg = j.at("separation_deg").get<double>();
  return spec;
}

}  // namespace

std::string row_to_json(const ManifestRow& row) {
  json j = spec_to_json(row.spec);
  json realized;
  realized["skipped"] = row.realized.skipped;
  if (row.realized.skipped) {
    realized["skip_reason"] = row.realized.skip_reason;
  } else {
    realized["sir_db"] = row.realized.sir_db;
    realized["interferer_scale"] = row.realized.interferer_scale;
    realized["reflection_coefficient"] = row.realized.reflection_coefficient;
    realized["direct_path_delay_samples"] = row.realized.direct_path_delay_samples;
    realized["image_counts"] = row.realized.image_counts;
    realized["hrtf_subject"] = row.realized.hrtf_subject;
  }
  j["realized"] = realized;
  if (!row.realized.skipped) {
    j["outputs"] = {{"mixture", row.mixture_path}, {"targets", row.target_paths}};
  }
  return j.dump();
}

ManifestRow row_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, std::string("manifest: parse error: ") + e.what());
  }
  try {
    ManifestRow row;
    row.spec = spec_from_json(j);
    const auto& realized = j.at("realized");
    row.realized.skipped = realized.at("skipped").get<bool>();
    if (row.realized.skipped) {
      row.realized.skip_reason = realized.value("skip_reason", "");
    } else {
      row.realized.sir_db = realized.at("sir_db").get<double>();
      row.realized.interferer_scale = realized.at("interferer_scale").get<double>();
      row.realized.reflection_coefficient = realized.at("reflection_coefficient").get<double>();
      row.realized.direct_path_delay_samples =
          realized.at("direct_path_delay_samples").get<std::vector<double>>();
      row.realized.image_counts = realized.at("image_counts").get<std::vector<std::size_t>>();
      row.realized.hrtf_subject = realized.at("hrtf_subject").get<std::string>();
      row.mixture_path = j.at("outputs").at("mixture").get<std::string>();
      row.target_paths = j.at("outputs").at("targets").get<std::vector<std::string>>();
    }
    return row;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, std::string("manifest: missing field: ") + e.what());
  }
}

void write_manifest(const std::string& path, const std::vector<ManifestRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidInput, "manifest: cannot write " + path);
  for (const auto& row : rows) out << row_to_json(row) << "\n";
}

std::vector<ManifestRow> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Missing, "manifest: cannot open " + path);
  std::vector<ManifestRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(row_from_json(line));
  }
  if (rows.empty()) throw Error(ErrorKind::Format, "manifest: no rows in " + path);
  return rows;
}

std::string serialize_scene_specs(const std::vector<SceneSpec>& specs) {
  std::ostringstream out;
  for (const auto& spec : specs) {
    ManifestRow row;
    row.spec = spec;
    row.realized.skipped = true;
    out << row_to_json(row) << "\n";
  }
  return out.str();
}

std::string protocol_to_json(const DatasetProtocol& p) {
  json j;
  j["num_utterances"] = p.utterances.size();
  j["hrtf_sets"] = p.hrtf_sets;
  j["num_mixtures"] = p.num_mixtures;
  j["split"] = p.split == SplitKind::Test ? "test" : "train";
  j["duration_s"] = p.duration_s;
  j["sample_rate"] = p.sample_rate;
  j["t60_range_s"] = {p.t60_min_s, p.t60_max_s};
  j["sir_range_db"] = {p.sir_min_db, p.sir_max_db};
  j["room_x_range_m"] = {p.room_x_min, p.room_x_max};
  j["room_y_range_m"] = {p.room_y_min, p.room_y_max};
  j["room_z_range_m"] = {p.room_z_min, p.room_z_max};
  j["radius_range_m"] = {p.radius_min_m, p.radius_max_m};
  j["elevation_range_deg"] = {p.elevation_min_deg, p.elevation_max_deg};
  j["min_separation_deg"] = p.min_separation_deg;
  j["max_order"] = p.max_order;
  j["anechoic"] = p.anechoic;
  j["listener_wall_margin_m"] = p.listener_wall_margin_m;
  j["sweep_separations_deg"] = p.sweep_separations_deg;
  j["scenes_per_separation"] = p.scenes_per_separation;
  j["scene_id_prefix"] = p.scene_id_prefix;
  return j.dump(2);
}

}  // namespace binsim
