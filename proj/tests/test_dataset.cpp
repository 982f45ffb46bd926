#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "binsim/dataset.hpp"
#include "binsim/manifest.hpp"
#include "binsim/room.hpp"
#include "support.hpp"

using namespace binsim;

namespace {

DatasetProtocol small_protocol() {
  DatasetProtocol p;
  for (int i = 0; i < 12; ++i)
    p.utterances.push_back({"utt_" + std::to_string(i), 96000});
  p.hrtf_sets = {"setA.hrtfset.json", "setB.hrtfset.json"};
  p.num_mixtures = 40;
  return p;
}

double circular_dist(double a, double b) {
  double d = std::fmod(std::abs(a - b), 360.0);
  return std::min(d, 360.0 - d);
}

}  // namespace

TEST_CASE("same seed yields byte-identical scene streams; different seeds differ") {
  const DatasetProtocol p = small_protocol();
  const auto a = sample_dataset(p, 123);
  const auto b = sample_dataset(p, 123);
  CHECK(serialize_scene_specs(a) == serialize_scene_specs(b));

  const auto c = sample_dataset(p, 124);
  CHECK(serialize_scene_specs(a) != serialize_scene_specs(c));
}

TEST_CASE("sampled parameters respect the protocol ranges; T60 statistics look uniform") {
  DatasetProtocol p = small_protocol();
  p.num_mixtures = 1000;
  const auto specs = sample_dataset(p, 9);

  double t60_min = 1e9, t60_max = -1e9, t60_sum = 0.0;
  std::size_t scenes = 0;
  std::set<std::string> seen;
  for (const auto& spec : specs) {
    if (!seen.insert(spec.scene_id).second) continue;
    ++scenes;
    t60_min = std::min(t60_min, spec.room.t60_s);
    t60_max = std::max(t60_max, spec.room.t60_s);
    t60_sum += spec.room.t60_s;
    CHECK(spec.sir_db >= -5.0);
    CHECK(spec.sir_db <= 5.0);
    for (const auto& src : spec.sources) {
      CHECK(src.pos.radius_m >= 1.0);
      CHECK(src.pos.radius_m <= 2.5);
      CHECK(src.pos.direction.elevation_deg >= -30.0);
      CHECK(src.pos.direction.elevation_deg <= 30.0);
      const Vec3 w = source_world_position(src.pos, spec.listener);
      CHECK(w.x > 0.0);
      CHECK(w.x < spec.room.dimensions_m.x);
      CHECK(w.y > 0.0);
      CHECK(w.y < spec.room.dimensions_m.y);
      CHECK(w.z > 0.0);
      CHECK(w.z < spec.room.dimensions_m.z);
    }
  }
  CHECK(scenes == 1000);
  CHECK(t60_min >= 0.2);
  CHECK(t60_max <= 0.8);
  const double mean = t60_sum / static_cast<double>(scenes);
  CHECK(mean > 0.45);
  CHECK(mean < 0.55);
}

TEST_CASE("test splits emit each mixture twice, target 1 then target 2") {
  DatasetProtocol p = small_protocol();
  p.split = SplitKind::Test;
  p.num_mixtures = 1000;
  const auto specs = sample_dataset(p, 4);
  REQUIRE(specs.size() == 2000);
  for (std::size_t i = 0; i < specs.size(); i += 2) {
    CHECK(specs[i].scene_id == specs[i + 1].scene_id);
    CHECK(specs[i].target_index == 1);
    CHECK(specs[i + 1].target_index == 2);
    CHECK(specs[i].sir_db == specs[i + 1].sir_db);
  }
}

TEST_CASE("train splits emit one row per mixture with a seeded target choice") {
  DatasetProtocol p = small_protocol();
  p.num_mixtures = 200;
  const auto specs = sample_dataset(p, 15);
  REQUIRE(specs.size() == 200);
  std::size_t second = 0;
  for (const auto& spec : specs) second += spec.target_index == 2 ? 1 : 0;
  CHECK(second > 40);  // both choices occur
  CHECK(second < 160);
}

TEST_CASE("default sweep: 8 separations x 30 scenes = 240 scenes, exact azimuth distances") {
  const DatasetProtocol sweep = angular_sweep_protocol(small_protocol());
  const auto specs = sample_dataset(sweep, 21);

  std::set<std::string> scenes;
  std::map<double, std::size_t> per_separation;
  for (const auto& spec : specs) {
    REQUIRE(spec.separation_deg.has_value());
    if (scenes.insert(spec.scene_id).second) ++per_separation[*spec.separation_deg];
    const double d = circular_dist(spec.sources[0].pos.direction.azimuth_deg,
                                   spec.sources[1].pos.direction.azimuth_deg);
    CHECK(d == doctest::Approx(*spec.separation_deg).epsilon(1e-12));
  }
  CHECK(scenes.size() == 240);
  CHECK(specs.size() == 480);  // both speakers evaluated per recording
  REQUIRE(per_separation.size() == 8);
  for (double sep = 20.0; sep <= 90.0; sep += 10.0) CHECK(per_separation.at(sep) == 30);
}

TEST_CASE("single-separation sweeps pin the azimuth distance exactly") {
  const DatasetProtocol sweep = angular_sweep_protocol(small_protocol(), {90.0}, 10);
  const auto specs = sample_dataset(sweep, 3);
  for (const auto& spec : specs) {
    const double d = circular_dist(spec.sources[0].pos.direction.azimuth_deg,
                                   spec.sources[1].pos.direction.azimuth_deg);
    CHECK(d == doctest::Approx(90.0).epsilon(1e-12));
  }
}

TEST_CASE("sweep streams regenerate bit-identically under a fixed seed") {
  const DatasetProtocol sweep = angular_sweep_protocol(small_protocol(), {20.0, 50.0}, 5);
  CHECK(serialize_scene_specs(sample_dataset(sweep, 77)) ==
        serialize_scene_specs(sample_dataset(sweep, 77)));
}

TEST_CASE("protocol validation rejects empty pools and bad separations") {
  DatasetProtocol p = small_protocol();
  p.utterances.clear();
  CHECK_THROWS_AS(p.validate(), Error);

  DatasetProtocol q = small_protocol();
  q.hrtf_sets.clear();
  CHECK_THROWS_AS(q.validate(), Error);

  CHECK_THROWS_AS(angular_sweep_protocol(small_protocol(), {200.0}, 5), Error);
  CHECK_THROWS_AS(angular_sweep_protocol(small_protocol(), {0.0}, 5), Error);
}

TEST_CASE("min separation constraint is honored when sampling freely") {
  DatasetProtocol p = small_protocol();
  p.min_separation_deg = 25.0;
  p.num_mixtures = 200;
  const auto specs = sample_dataset(p, 31);
  for (const auto& spec : specs) {
    const double d = circular_dist(spec.sources[0].pos.direction.azimuth_deg,
                                   spec.sources[1].pos.direction.azimuth_deg);
    CHECK(d >= 25.0);
  }
}

TEST_CASE("scene seeds derive from the scene id, independent of stream position") {
  DatasetProtocol p = small_protocol();
  const auto specs = sample_dataset(p, 555);
  for (const auto& spec : specs)
    CHECK(spec.seed == derive_seed(555, spec.scene_id));
}

TEST_CASE("modulated noise is deterministic, speech-leveled, and non-silent") {
  const MonoClip a = make_modulated_noise(42, 48000, 16000);
  const MonoClip b = make_modulated_noise(42, 48000, 16000);
  CHECK(a.samples == b.samples);
  CHECK(rms(a.samples) == doctest::Approx(0.05).epsilon(1e-9));

  const MonoClip c = make_modulated_noise(43, 48000, 16000);
  CHECK(a.samples != c.samples);
}

TEST_CASE("manifest rows survive a serialize/parse round trip") {
  DatasetProtocol p = small_protocol();
  p.split = SplitKind::Test;
  p.num_mixtures = 3;
  const auto specs = sample_dataset(p, 99);

  ManifestRow row;
  row.spec = specs[1];
  row.realized.sir_db = 1.25;
  row.realized.interferer_scale = 0.8;
  row.realized.reflection_coefficient = 0.9;
  row.realized.direct_path_delay_samples = {55.5, 77.25};
  row.realized.image_counts = {25, 25};
  row.realized.hrtf_subject = "subject";
  row.mixture_path = "audio/x.mix.wav";
  row.target_paths = {"audio/x.t1.wav", "audio/x.t2.wav"};

  const ManifestRow back = row_from_json(row_to_json(row));
  CHECK(row_to_json(back) == row_to_json(row));
  CHECK(back.spec.scene_id == row.spec.scene_id);
  CHECK(back.spec.sources[0].pos.direction.azimuth_deg ==
        row.spec.sources[0].pos.direction.azimuth_deg);
  CHECK(back.realized.direct_path_delay_samples == row.realized.direct_path_delay_samples);
}
