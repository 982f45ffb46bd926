// binsim: batch front-end for the binaural scene simulator and
// target-speaker-extraction evaluation toolkit.
//
// Subcommands: hrtf (inspect|validate|synth), synth-speech, dataset, extract,
// eval.  Exit codes: 0 ok, 1 partial failures, 2 input/format error,
// 3 integrity error, 4 missing artifacts.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "binsim/dataset.hpp"
#include "binsim/extract.hpp"
#include "binsim/manifest.hpp"
#include "binsim/metrics.hpp"
#include "binsim/wav.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace binsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitInput = 2;
constexpr int kExitIntegrity = 3;
constexpr int kExitMissing = 4;

int exit_code_for(const Error& e) {
  return e.kind() == ErrorKind::Integrity ? kExitIntegrity : kExitInput;
}

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  const unsigned n_workers = std::min<unsigned>(jobs, static_cast<unsigned>(count));
  for (unsigned w = 0; w < n_workers; ++w)
    workers.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : workers) t.join();
}

void write_run_config(const fs::path& out_dir, const json& config) {
  std::ofstream out(out_dir / "run_config.json");
  out << config.dump(2) << "\n";
}

// HRTF set paths resolve as given, then relative to a base directory, then
// against $BINSIM_HRTF_DIR.
std::string resolve_hrtf_path(const std::string& path, const fs::path& base_dir) {
  if (fs::exists(path)) return path;
  const fs::path relative = base_dir / path;
  if (fs::exists(relative)) return relative.string();
  if (const char* env_dir = std::getenv("BINSIM_HRTF_DIR")) {
    const fs::path env_path = fs::path(env_dir) / path;
    if (fs::exists(env_path)) return env_path.string();
  }
  throw Error(ErrorKind::Missing, "HRTF set not found: " + path);
}

class HrtfCache {
 public:
  const HrtfSet& get(const std::string& path) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = sets_.find(path);
    if (it == sets_.end()) it = sets_.emplace(path, load_hrtf_set(path)).first;
    return it->second;
  }

 private:
  std::mutex mutex_;
  std::map<std::string, HrtfSet> sets_;
};

class SignalCache {
 public:
  explicit SignalCache(double normalize_rms) : normalize_rms_(normalize_rms) {}

  MonoClip get(const std::string& path) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = clips_.find(path);
    if (it == clips_.end()) {
      MonoClip clip = read_wav_mono(path);
      if (normalize_rms_ > 0.0) {
        const double r = rms(clip.samples);
        if (r > 0.0)
          for (double& v : clip.samples) v *= normalize_rms_ / r;
      }
      it = clips_.emplace(path, std::move(clip)).first;
    }
    return it->second;
  }

 private:
  std::mutex mutex_;
  double normalize_rms_;
  std::map<std::string, MonoClip> clips_;
};

// ---------------------------------------------------------------------------
// hrtf inspect / validate / synth

struct GridCoverage {
  double max_azimuth_err_deg = 180.0;
  double max_elevation_err_deg = 90.0;
};

GridCoverage grid_coverage(const HrtfSet& set) {
  GridCoverage cov;
  std::map<long, std::set<double>> rings;  // elevation (micro-deg) -> azimuths
  std::set<double> elevations;
  for (const auto& [dir, hrir] : set.entries) {
    rings[std::lround(dir.elevation_deg * 1e6)].insert(dir.azimuth_deg);
    elevations.insert(dir.elevation_deg);
  }

  double worst_gap = 0.0;
  for (const auto& [el, azimuths] : rings) {
    if (azimuths.size() < 2) {
      worst_gap = 360.0;
      continue;
    }
    std::vector<double> sorted(azimuths.begin(), azimuths.end());
    double gap = 360.0 - (sorted.back() - sorted.front());  // wrap-around gap
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
      gap = std::max(gap, sorted[i + 1] - sorted[i]);
    worst_gap = std::max(worst_gap, gap);
  }
  cov.max_azimuth_err_deg = worst_gap / 2.0;

  if (elevations.size() >= 2) {
    std::vector<double> sorted(elevations.begin(), elevations.end());
    double gap = 0.0;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
      gap = std::max(gap, sorted[i + 1] - sorted[i]);
    cov.max_elevation_err_deg = gap / 2.0;
  } else {
    cov.max_elevation_err_deg = 0.0;
  }
  return cov;
}

int cmd_hrtf_report(const std::string& path, bool validate_only) {
  const HrtfSet set = load_hrtf_set(path);  // throws on schema/integrity issues
  if (validate_only) {
    std::cout << "ok: " << set.entries.size() << " entries\n";
    return kExitOk;
  }
  const GridCoverage cov = grid_coverage(set);
  std::cout << "subject_id: " << set.subject_id << "\n"
            << "entries: " << set.entries.size() << "\n"
            << "sample_rate: " << set.sample_rate << " Hz\n"
            << "radius: " << set.radius_m << " m\n"
            << "ir_length: " << set.ir_length << " samples\n";
  char line[160];
  std::snprintf(line, sizeof(line),
                "max nearest-neighbor error: +/-%.1f deg azimuth, +/-%.1f deg elevation\n",
                cov.max_azimuth_err_deg, cov.max_elevation_err_deg);
  std::cout << line;
  return kExitOk;
}

int cmd_hrtf_synth(const std::string& out_path, const SyntheticHeadParams& params) {
  const HrtfSet set = make_synthetic_head_set(params);
  save_hrtf_set(set, out_path);
  std::cout << "wrote " << set.entries.size() << " entries to " << out_path << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// synth-speech

int cmd_synth_speech(const std::string& out_dir, std::size_t count, double duration_s,
                     int sample_rate, std::uint64_t seed) {
  fs::create_directories(out_dir);
  const std::size_t n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  for (std::size_t i = 0; i < count; ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "utt_%04zu.wav", i);
    const MonoClip clip = make_modulated_noise(splitmix64(seed + i), n, sample_rate);
    write_wav((fs::path(out_dir) / name).string(), clip);
  }
  json config{{"command", "synth-speech"}, {"count", count}, {"duration_s", duration_s},
              {"sample_rate", sample_rate}, {"seed", seed}};
  write_run_config(out_dir, config);
  std::cout << "wrote " << count << " utterances to " << out_dir << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// dataset

DatasetProtocol load_protocol(const std::string& protocol_path) {
  std::ifstream in(protocol_path);
  if (!in) throw Error(ErrorKind::Missing, "protocol: cannot open " + protocol_path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, std::string("protocol: parse error: ") + e.what());
  }
  const fs::path base_dir = fs::path(protocol_path).parent_path();

  DatasetProtocol p;
  p.sample_rate = j.value("sample_rate", 16000);
  p.duration_s = j.value("duration_s", 5.0);

  if (!j.contains("speech_dir"))
    throw Error(ErrorKind::Format, "protocol: missing 'speech_dir'");
  fs::path speech_dir = j.at("speech_dir").get<std::string>();
  if (speech_dir.is_relative() && !fs::exists(speech_dir)) speech_dir = base_dir / speech_dir;
  if (!fs::is_directory(speech_dir))
    throw Error(ErrorKind::Missing, "protocol: speech_dir not found: " + speech_dir.string());
  std::vector<std::string> wavs;
  for (const auto& entry : fs::directory_iterator(speech_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".wav")
      wavs.push_back(entry.path().string());
  std::sort(wavs.begin(), wavs.end());
  for (const auto& path : wavs) {
    const WavInfo info = wav_info(path);
    if (info.num_channels != 1)
      throw Error(ErrorKind::Format, "protocol: utterance is not mono: " + path);
    if (info.sample_rate != p.sample_rate)
      throw Error(ErrorKind::Format, "protocol: utterance sample rate mismatch: " + path);
    p.utterances.push_back({path, info.num_frames});
  }

  if (!j.contains("hrtf_sets"))
    throw Error(ErrorKind::Format, "protocol: missing 'hrtf_sets'");
  for (const auto& s : j.at("hrtf_sets"))
    p.hrtf_sets.push_back(resolve_hrtf_path(s.get<std::string>(), base_dir));

  p.num_mixtures = j.value("num_mixtures", p.num_mixtures);
  const std::string split = j.value("split", "train");
  if (split != "train" && split != "test")
    throw Error(ErrorKind::Format, "protocol: split must be 'train' or 'test'");
  p.split = split == "test" ? SplitKind::Test : SplitKind::Train;

  auto range = [&](const char* key, double& lo, double& hi) {
    if (!j.contains(key)) return;
    const auto& r = j.at(key);
    if (!r.is_array() || r.size() != 2)
      throw Error(ErrorKind::Format, std::string("protocol: ") + key + " must be [lo, hi]");
    lo = r[0].get<double>();
    hi = r[1].get<double>();
  };
  range("t60_range_s", p.t60_min_s, p.t60_max_s);
  range("sir_range_db", p.sir_min_db, p.sir_max_db);
  range("room_x_range_m", p.room_x_min, p.room_x_max);
  range("room_y_range_m", p.room_y_min, p.room_y_max);
  range("room_z_range_m", p.room_z_min, p.room_z_max);
  range("radius_range_m", p.radius_min_m, p.radius_max_m);
  range("elevation_range_deg", p.elevation_min_deg, p.elevation_max_deg);
  p.min_separation_deg = j.value("min_separation_deg", p.min_separation_deg);
  p.max_order = j.value("max_order", p.max_order);
  p.anechoic = j.value("anechoic", false);
  p.listener_wall_margin_m = j.value("listener_wall_margin_m", p.listener_wall_margin_m);
  if (j.contains("sweep_separations_deg"))
    p.sweep_separations_deg = j.at("sweep_separations_deg").get<std::vector<double>>();
  p.scenes_per_separation = j.value("scenes_per_separation", p.scenes_per_separation);
  p.scene_id_prefix = j.value("scene_id_prefix", p.scene_id_prefix);
  return p;
}

int cmd_dataset(const std::string& protocol_path, std::uint64_t seed,
                const std::string& out_dir, bool sweep, unsigned jobs, bool pcm16) {
  DatasetProtocol protocol = load_protocol(protocol_path);
  if (sweep)
    protocol = angular_sweep_protocol(protocol, protocol.sweep_separations_deg,
                                      protocol.scenes_per_separation);
  protocol.validate();

  const std::vector<SceneSpec> rows = sample_dataset(protocol, seed);

  // Rows referring to the same mixture (test splits) render once.
  std::vector<std::size_t> scene_of_row(rows.size());
  std::vector<std::size_t> scene_first_row;
  std::map<std::string, std::size_t> scene_index;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto [it, inserted] = scene_index.emplace(rows[i].scene_id, scene_first_row.size());
    if (inserted) scene_first_row.push_back(i);
    scene_of_row[i] = it->second;
  }

  fs::create_directories(fs::path(out_dir) / "audio");
  HrtfCache hrtf_cache;
  SignalCache signal_cache(0.05);  // utterances normalized to a common RMS
  const SignalProvider provider = [&](const std::string& id) { return signal_cache.get(id); };

  struct SceneOut {
    RealizedScene realized;
    std::string mixture_path;
    std::vector<std::string> target_paths;
  };
  std::vector<SceneOut> scene_out(scene_first_row.size());

  parallel_for(scene_first_row.size(), jobs, [&](std::size_t s) {
    const SceneSpec& spec = rows[scene_first_row[s]];
    SceneOut& out = scene_out[s];
    try {
      const RenderedScene rendered =
          mix_scene(spec, hrtf_cache.get(spec.hrtf_set_path), provider);
      out.realized.sir_db = rendered.metadata.realized_sir_db;
      out.realized.interferer_scale = rendered.metadata.interferer_scale;
      out.realized.reflection_coefficient = rendered.metadata.reflection_coefficient;
      out.realized.direct_path_delay_samples = rendered.metadata.direct_path_delay_samples;
      out.realized.image_counts = rendered.metadata.image_counts;
      out.realized.hrtf_subject = rendered.metadata.hrtf_subject;

      out.mixture_path = "audio/" + spec.scene_id + ".mix.wav";
      write_wav((fs::path(out_dir) / out.mixture_path).string(), rendered.mixture);
      for (std::size_t t = 0; t < rendered.targets.size(); ++t) {
        const std::string rel =
            "audio/" + spec.scene_id + ".t" + std::to_string(t + 1) + ".wav";
        write_wav((fs::path(out_dir) / rel).string(), rendered.targets[t]);
        out.target_paths.push_back(rel);
      }
      if (pcm16)
        write_wav((fs::path(out_dir) / ("audio/" + spec.scene_id + ".mix.pcm16.wav")).string(),
                  rendered.mixture, WavEncoding::Pcm16);
    } catch (const Error& e) {
      out.realized.skipped = true;
      out.realized.skip_reason = std::string(to_string(e.kind())) + ": " + e.what();
      std::cerr << "skip " << spec.scene_id << ": " << out.realized.skip_reason << "\n";
    }
  });

  std::vector<ManifestRow> manifest;
  manifest.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SceneOut& out = scene_out[scene_of_row[i]];
    ManifestRow row;
    row.spec = rows[i];
    row.realized = out.realized;
    row.mixture_path = out.mixture_path;
    row.target_paths = out.target_paths;
    manifest.push_back(std::move(row));
  }
  write_manifest((fs::path(out_dir) / "manifest.jsonl").string(), manifest);

  json config{{"command", "dataset"},
              {"protocol_file", protocol_path},
              {"seed", seed},
              {"sweep", sweep},
              {"pcm16", pcm16},
              {"jobs", jobs},
              {"utterance_rms", 0.05},
              {"protocol", json::parse(protocol_to_json(protocol))}};
  write_run_config(out_dir, config);

  std::size_t skipped = 0;
  for (const auto& s : scene_out) skipped += s.realized.skipped ? 1 : 0;
  std::cout << "rendered " << (scene_out.size() - skipped) << "/" << scene_out.size()
            << " scenes (" << manifest.size() << " extraction rows) into " << out_dir << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// extract

std::string row_tag(const ManifestRow& row) {
  return row.spec.scene_id + "_t" + std::to_string(row.spec.target_index);
}

int cmd_extract(const std::string& manifest_path, const std::string& method,
                const std::string& out_dir, const std::string& extern_cmd, double loading,
                std::size_t stft_window, std::size_t stft_hop, unsigned jobs) {
  if (method != "matched" && method != "mvdr" && method != "oracle" && method != "extern")
    throw Error(ErrorKind::InvalidInput, "extract: unknown method " + method);
  if (method == "extern" && extern_cmd.empty())
    throw Error(ErrorKind::InvalidInput, "extract: --extern-cmd required for method extern");

  const std::vector<ManifestRow> rows = read_manifest(manifest_path);
  const fs::path base_dir = fs::path(manifest_path).parent_path();
  const fs::path method_dir = fs::path(out_dir) / method;
  fs::create_directories(method_dir);

  StftConfig stft_config;
  stft_config.window_length = stft_window;
  stft_config.hop = stft_hop;
  stft_config.validate();

  HrtfCache hrtf_cache;
  std::atomic<std::size_t> failures{0};

  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    const ManifestRow& row = rows[i];
    if (row.realized.skipped) return;
    const std::string tag = row_tag(row);
    try {
      const std::size_t target_slot = static_cast<std::size_t>(row.spec.target_index - 1);
      const SourceSpec& target_src = row.spec.sources.at(target_slot);
      const std::string mixture_path = (base_dir / row.mixture_path).string();
      const std::string est_path = (method_dir / (tag + ".wav")).string();

      json diag{{"scene_id", row.spec.scene_id},
                {"target_index", row.spec.target_index},
                {"method", method}};

      if (method == "extern") {
        // Plug-in contract: <cmd> <mixture.wav> <clue.hrtfset.json> <estimate.wav>
        const HrtfSet& set =
            hrtf_cache.get(resolve_hrtf_path(row.spec.hrtf_set_path, base_dir));
        const auto [dir, index] = nearest_direction(set, target_src.pos.direction);
        HrtfSet excerpt;
        excerpt.sample_rate = set.sample_rate;
        excerpt.radius_m = set.radius_m;
        excerpt.subject_id = set.subject_id;
        excerpt.ir_length = set.ir_length;
        excerpt.entries.push_back({dir, set.entries[index].second});
        const std::string clue_path = (method_dir / (tag + ".clue.hrtfset.json")).string();
        save_hrtf_set(excerpt, clue_path);

        const std::string command = extern_cmd + " '" + mixture_path + "' '" + clue_path +
                                    "' '" + est_path + "'";
        const int rc = std::system(command.c_str());
        if (rc != 0 || !fs::exists(est_path))
          throw Error(ErrorKind::InvalidInput,
                      "extern command failed with status " + std::to_string(rc));
      } else {
        const BinauralClip mixture = read_wav_binaural(mixture_path);
        const BinauralSpectrogram mix_spec = stft(mixture, stft_config);
        ExtractionResult result;
        if (method == "oracle") {
          BinauralClip target =
              read_wav_binaural((base_dir / row.target_paths.at(target_slot)).string());
          // The mask is built against the delay-aligned reference so it tracks
          // the target content actually present in the mixture.
          const double tau = row.realized.direct_path_delay_samples.at(target_slot);
          target = delayed(target, tau);
          result = oracle_mask_extract(mix_spec, stft(target, stft_config));
        } else {
          const HrtfSet& set =
              hrtf_cache.get(resolve_hrtf_path(row.spec.hrtf_set_path, base_dir));
          const ExtractionClue clue =
              clue_from_hrtf(set, target_src.pos.direction, stft_config.window_length);
          result = (method == "matched") ? matched_filter_extract(mix_spec, clue)
                                         : mvdr_extract(mix_spec, clue, loading);
          diag["clue_azimuth_deg"] = clue.direction.azimuth_deg;
          diag["clue_elevation_deg"] = clue.direction.elevation_deg;
        }
        write_wav(est_path, result.estimate);
        diag["dead_bins"] = result.diagnostics.dead_bins;
        diag["fallback_bins"] = result.diagnostics.fallback_bins;
        diag["loading"] = result.diagnostics.loading;
      }

      std::ofstream diag_out(method_dir / (tag + ".diag.json"));
      diag_out << diag.dump() << "\n";
    } catch (const std::exception& e) {
      ++failures;
      std::cerr << "failed " << tag << ": " << e.what() << "\n";
    }
  });

  json config{{"command", "extract"}, {"manifest", manifest_path}, {"method", method},
              {"loading", loading},   {"stft_window", stft_window}, {"stft_hop", stft_hop}};
  write_run_config(out_dir, config);

  if (failures > 0) {
    std::cerr << failures << " rows failed\n";
    return kExitPartial;
  }
  std::cout << "extracted " << rows.size() << " rows with method " << method << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

struct Aggregate {
  std::size_t count = 0;
  double si_sdr = 0.0, si_sdri = 0.0, si_sdr_dc = 0.0, si_sdri_dc = 0.0;
  double mae = 0.0, ditd = 0.0, dild = 0.0;
  double pesq = 0.0, nisqa = 0.0;
  std::size_t pesq_count = 0, nisqa_count = 0;

  void add(const MetricsReport& r) {
    ++count;
    si_sdr += r.si_sdr_db;
    si_sdri += r.si_sdri_db;
    si_sdr_dc += r.si_sdr_dc_db;
    si_sdri_dc += r.si_sdri_dc_db;
    mae += r.mae_stft;
    ditd += r.delta_itd_ms;
    dild += r.delta_ild_db;
    if (r.pesq) {
      pesq += *r.pesq;
      ++pesq_count;
    }
    if (r.nisqa) {
      nisqa += *r.nisqa;
      ++nisqa_count;
    }
  }
};

json report_to_json(const std::string& scene_id, int target_index, const std::string& method,
                    const MetricsReport& r) {
  json j{{"scene_id", scene_id},
         {"target_index", target_index},
         {"method", method},
         {"si_sdr_db", r.si_sdr_db},
         {"si_sdri_db", r.si_sdri_db},
         {"mae_stft", r.mae_stft},
         {"delta_itd_ms", r.delta_itd_ms},
         {"delta_ild_db", r.delta_ild_db},
         {"delay_compensated",
          {{"si_sdr_db", r.si_sdr_dc_db}, {"si_sdri_db", r.si_sdri_dc_db}}},
         {"degenerate_flags", r.degenerate_flags}};
  json external = json::object();
  if (r.pesq) external["pesq"] = *r.pesq;
  if (r.nisqa) external["nisqa"] = *r.nisqa;
  j["external"] = external;
  return j;
}

int cmd_eval(const std::string& manifest_path, const std::string& estimates_dir,
             const std::string& out_dir, bool partial, bool skip_cues, double itd_range_ms,
             unsigned jobs) {
  const std::vector<ManifestRow> rows = read_manifest(manifest_path);
  const fs::path base_dir = fs::path(manifest_path).parent_path();

  std::vector<std::string> methods;
  for (const auto& entry : fs::directory_iterator(estimates_dir))
    if (entry.is_directory()) methods.push_back(entry.path().filename().string());
  std::sort(methods.begin(), methods.end());
  if (methods.empty())
    throw Error(ErrorKind::Missing, "eval: no method directories under " + estimates_dir);

  // Check estimates exist up front so the missing-artifact contract is clean.
  std::size_t missing = 0;
  for (const auto& method : methods)
    for (const auto& row : rows) {
      if (row.realized.skipped) continue;
      const fs::path est = fs::path(estimates_dir) / method / (row_tag(row) + ".wav");
      if (!fs::exists(est)) {
        ++missing;
        if (!partial) std::cerr << "missing estimate: " << est.string() << "\n";
      }
    }
  if (missing > 0 && !partial) return kExitMissing;

  StftConfig stft_config;  // 512-point window, 75% overlap
  CueParams cue_params;
  cue_params.itd_range_ms = itd_range_ms;

  struct Task {
    std::size_t row = 0;
    std::string method;
  };
  std::vector<Task> tasks;
  for (const auto& method : methods)
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (!rows[i].realized.skipped) tasks.push_back({i, method});

  for (const auto& method : methods) fs::create_directories(fs::path(out_dir) / method);

  std::map<std::string, Aggregate> by_method;
  std::map<std::pair<std::string, double>, Aggregate> by_separation;
  std::mutex agg_mutex;
  std::atomic<std::size_t> evaluated{0};
  std::atomic<std::size_t> failures{0};

  parallel_for(tasks.size(), jobs, [&](std::size_t t) {
    const ManifestRow& row = rows[tasks[t].row];
    const std::string& method = tasks[t].method;
    const std::string tag = row_tag(row);
    const fs::path est_path = fs::path(estimates_dir) / method / (tag + ".wav");
    if (!fs::exists(est_path)) return;  // only reachable with --partial
    try {
      const BinauralClip mixture = read_wav_binaural((base_dir / row.mixture_path).string());
      const std::size_t slot = static_cast<std::size_t>(row.spec.target_index - 1);
      const BinauralClip target =
          read_wav_binaural((base_dir / row.target_paths.at(slot)).string());
      const BinauralClip estimate = read_wav_binaural(est_path.string());
      if (estimate.size() != target.size())
        throw Error(ErrorKind::InvalidInput, "estimate length mismatch");
      const double tau = row.realized.direct_path_delay_samples.at(slot);

      MetricsReport report;
      if (skip_cues) {
        const SiSdrResult out_sdr = si_sdr_binaural(target, estimate);
        const SiSdrResult in_sdr = si_sdr_binaural(target, mixture);
        report.si_sdr_db = out_sdr.value_db;
        report.si_sdri_db = out_sdr.value_db - in_sdr.value_db;
        report.mae_stft = mae_stft(stft(target, stft_config), stft(estimate, stft_config));
        const BinauralClip target_dc = delayed(target, tau);
        report.si_sdr_dc_db = si_sdr_binaural(target_dc, estimate).value_db;
        report.si_sdri_dc_db =
            report.si_sdr_dc_db - si_sdr_binaural(target_dc, mixture).value_db;
      } else {
        report = compute_report(mixture, target, estimate, stft_config, tau, cue_params);
      }

      // External scores (PESQ/NISQA) are imported from sidecars, never computed.
      const fs::path sidecar = fs::path(estimates_dir) / method / (tag + ".external.json");
      if (fs::exists(sidecar)) {
        std::ifstream in(sidecar);
        json ext;
        in >> ext;
        if (ext.contains("pesq")) report.pesq = ext["pesq"].get<double>();
        if (ext.contains("nisqa")) report.nisqa = ext["nisqa"].get<double>();
      }

      std::ofstream out(fs::path(out_dir) / method / (tag + ".json"));
      out << report_to_json(row.spec.scene_id, row.spec.target_index, method, report).dump(2)
          << "\n";

      {
        std::lock_guard<std::mutex> lock(agg_mutex);
        by_method[method].add(report);
        if (row.spec.separation_deg)
          by_separation[{method, *row.spec.separation_deg}].add(report);
      }
      ++evaluated;
    } catch (const std::exception& e) {
      ++failures;
      std::cerr << "failed " << tag << " (" << method << "): " << e.what() << "\n";
    }
  });

  // Aggregate CSV: one overall row per method plus one row per (method,
  // separation) for sweep manifests.
  std::ofstream csv(fs::path(out_dir) / "aggregate.csv");
  csv << "method,separation_deg,num_rows,si_sdr_db,si_sdri_db,si_sdr_dc_db,si_sdri_dc_db,"
         "mae_stft,delta_itd_ms,delta_ild_db,pesq,nisqa\n";
  auto emit = [&](const std::string& method, const std::string& sep, const Aggregate& a) {
    if (a.count == 0) return;
    const double n = static_cast<double>(a.count);
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%s,%s,%zu,%.6f,%.6f,%.6f,%.6f,%.9f,%.6f,%.6f",
                  method.c_str(), sep.c_str(), a.count, a.si_sdr / n, a.si_sdri / n,
                  a.si_sdr_dc / n, a.si_sdri_dc / n, a.mae / n, a.ditd / n, a.dild / n);
    csv << buf;
    if (a.pesq_count > 0)
      csv << "," << a.pesq / static_cast<double>(a.pesq_count);
    else
      csv << ",";
    if (a.nisqa_count > 0)
      csv << "," << a.nisqa / static_cast<double>(a.nisqa_count);
    else
      csv << ",";
    csv << "\n";
  };
  for (const auto& [method, agg] : by_method) emit(method, "", agg);
  for (const auto& [key, agg] : by_separation) {
    char sep[32];
    std::snprintf(sep, sizeof(sep), "%.1f", key.second);
    emit(key.first, sep, agg);
  }
  csv.close();

  json config{{"command", "eval"},          {"manifest", manifest_path},
              {"estimates", estimates_dir}, {"partial", partial},
              {"skip_cues", skip_cues},     {"itd_range_ms", itd_range_ms},
              {"methods", methods}};
  write_run_config(out_dir, config);

  std::cout << "evaluated " << evaluated << " (row, method) pairs; aggregate at "
            << (fs::path(out_dir) / "aggregate.csv").string() << "\n";
  if (failures > 0) return kExitPartial;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"binaural scene simulation and target-speaker-extraction evaluation"};
  app.require_subcommand(1);

  // hrtf
  auto* hrtf = app.add_subcommand("hrtf", "inspect, validate or synthesize HRTF sets");
  hrtf->require_subcommand(1);
  std::string hrtf_path;
  auto* inspect = hrtf->add_subcommand("inspect", "print grid coverage and metadata");
  inspect->add_option("path", hrtf_path, "hrtfset manifest (json)")->required();
  auto* validate = hrtf->add_subcommand("validate", "schema and integrity check");
  validate->add_option("path", hrtf_path, "hrtfset manifest (json)")->required();

  SyntheticHeadParams synth_params;
  std::string synth_out;
  auto* synth = hrtf->add_subcommand("synth", "write a synthetic spherical-head set");
  synth->add_option("--out", synth_out, "output manifest path (.hrtfset.json)")->required();
  synth->add_option("--az-step", synth_params.azimuth_step_deg, "azimuth step, degrees");
  synth->add_option("--el-step", synth_params.elevation_step_deg, "elevation step, degrees");
  synth->add_option("--el-min", synth_params.elevation_min_deg, "minimum elevation");
  synth->add_option("--el-max", synth_params.elevation_max_deg, "maximum elevation");
  synth->add_option("--sample-rate", synth_params.sample_rate, "sample rate, Hz");
  synth->add_option("--ir-length", synth_params.ir_length, "impulse response length");
  synth->add_option("--subject", synth_params.subject_id, "subject label");

  // synth-speech
  std::string speech_out;
  std::size_t speech_count = 8;
  double speech_duration = 6.0;
  int speech_rate = 16000;
  std::uint64_t speech_seed = 1;
  auto* synth_speech = app.add_subcommand("synth-speech", "write speech-shaped test signals");
  synth_speech->add_option("--out", speech_out, "output directory")->required();
  synth_speech->add_option("--count", speech_count, "number of utterances");
  synth_speech->add_option("--duration", speech_duration, "seconds per utterance");
  synth_speech->add_option("--sample-rate", speech_rate, "sample rate, Hz");
  synth_speech->add_option("--seed", speech_seed, "generator seed");

  // dataset
  std::string protocol_path, dataset_out;
  std::uint64_t dataset_seed = 0;
  bool sweep = false, pcm16 = false;
  unsigned jobs = 1;
  auto* dataset = app.add_subcommand("dataset", "sample and render a scene dataset");
  dataset->add_option("--protocol", protocol_path, "protocol json")->required();
  dataset->add_option("--seed", dataset_seed, "global seed")->required();
  dataset->add_option("--out", dataset_out, "output directory")->required();
  dataset->add_flag("--sweep", sweep, "angular-separation sweep protocol");
  dataset->add_flag("--pcm16", pcm16, "also write pcm16 listening copies");
  dataset->add_option("--jobs", jobs, "parallel workers");

  // extract
  std::string manifest_path, method, extract_out, extern_cmd;
  double loading = 1e-3;
  std::size_t stft_window = 512, stft_hop = 128;
  auto* extract = app.add_subcommand("extract", "run an extraction method over a manifest");
  extract->add_option("--manifest", manifest_path, "dataset manifest")->required();
  extract->add_option("--method", method, "matched|mvdr|oracle|extern")->required();
  extract->add_option("--out", extract_out, "estimates directory")->required();
  extract->add_option("--extern-cmd", extern_cmd, "external extractor command");
  extract->add_option("--loading", loading, "MVDR diagonal loading (relative)");
  extract->add_option("--stft-window", stft_window, "analysis window length");
  extract->add_option("--stft-hop", stft_hop, "analysis hop");
  extract->add_option("--jobs", jobs, "parallel workers");

  // eval
  std::string eval_manifest, estimates_dir, eval_out;
  bool partial = false, skip_cues = false;
  double itd_range_ms = 1.0;
  auto* eval = app.add_subcommand("eval", "score estimates against targets");
  eval->add_option("--manifest", eval_manifest, "dataset manifest")->required();
  eval->add_option("--estimates", estimates_dir, "estimates directory")->required();
  eval->add_option("--out", eval_out, "reports directory")->required();
  eval->add_flag("--partial", partial, "tolerate missing estimates");
  eval->add_flag("--skip-cues", skip_cues, "skip ITD/ILD histograms (faster)");
  eval->add_option("--itd-range-ms", itd_range_ms, "ITD search/histogram range");
  eval->add_option("--jobs", jobs, "parallel workers");

  CLI11_PARSE(app, argc, argv);

  try {
    if (inspect->parsed()) return cmd_hrtf_report(hrtf_path, false);
    if (validate->parsed()) return cmd_hrtf_report(hrtf_path, true);
    if (synth->parsed()) return cmd_hrtf_synth(synth_out, synth_params);
    if (synth_speech->parsed())
      return cmd_synth_speech(speech_out, speech_count, speech_duration, speech_rate,
                              speech_seed);
    if (dataset->parsed())
      return cmd_dataset(protocol_path, dataset_seed, dataset_out, sweep, jobs, pcm16);
    if (extract->parsed())
      return cmd_extract(manifest_path, method, extract_out, extern_cmd, loading, stft_window,
                         stft_hop, jobs);
    if (eval->parsed())
      return cmd_eval(eval_manifest, estimates_dir, eval_out, partial, skip_cues,
                      itd_range_ms, jobs);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}
