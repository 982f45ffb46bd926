#include "binsim/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace binsim {

namespace {

double circular_azimuth_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), 360.0);
  return std::min(d, 360.0 - d);
}

}  // namespace

void DatasetProtocol::validate() const {
  if (utterances.empty())
    throw Error(ErrorKind::Config, "protocol: utterance pool is empty");
  if (hrtf_sets.empty())
    throw Error(ErrorKind::Config, "protocol: HRTF set pool is empty");
  if (!(duration_s > 0.0) || sample_rate <= 0)
    throw Error(ErrorKind::Config, "protocol: bad duration or sample rate");
  if (sweep_separations_deg.empty() && num_mixtures == 0)
    throw Error(ErrorKind::Config, "protocol: num_mixtures must be positive");
  for (double sep : sweep_separations_deg)
    if (!(sep > 0.0) || sep > 180.0)
      throw Error(ErrorKind::Config, "protocol: separations must lie in (0, 180]");
  if (!sweep_separations_deg.empty() && scenes_per_separation == 0)
    throw Error(ErrorKind::Config, "protocol: scenes_per_separation must be positive");
  if (t60_min_s > t60_max_s || sir_min_db > sir_max_db || radius_min_m > radius_max_m)
    throw Error(ErrorKind::Config, "protocol: inverted range");
  if (!(radius_min_m > 0.0))
    throw Error(ErrorKind::Config, "protocol: radius must be positive");
}

DatasetProtocol angular_sweep_protocol(const DatasetProtocol& base,
                                       std::vector<double> separations_deg,
                                       std::size_t scenes_per_separation) {
  DatasetProtocol p = base;
  if (separations_deg.empty())
    for (double s = 20.0; s <= 90.0 + 1e-9; s += 10.0) separations_deg.push_back(s);
  p.sweep_separations_deg = std::move(separations_deg);
  p.scenes_per_separation = scenes_per_separation;
  p.split = SplitKind::Test;  // both speakers are evaluated per recording
  p.validate();
  return p;
}

namespace {

struct SceneDraw {
  RoomSpec room;
  ListenerPose listener;
  std::vector<SourceSpec> sources;
  double sir_db = 0.0;
};

// Draws one mixture.  All draws happen in a fixed order so the stream is
// reproducible; position sampling rejects draws that would put a source
// outside the room and retries deterministically.
SceneDraw draw_scene(const DatasetProtocol& proto, Rng& rng, double separation_deg) {
  SceneDraw d;
  d.room.dimensions_m = {rng.uniform(proto.room_x_min, proto.room_x_max),
                         rng.uniform(proto.room_y_min, proto.room_y_max),
                         rng.uniform(proto.room_z_min, proto.room_z_max)};
  d.room.t60_s = rng.uniform(proto.t60_min_s, proto.t60_max_s);
  d.room.anechoic = proto.anechoic;
  d.room.max_order = proto.max_order;

  const double m = proto.listener_wall_margin_m;
  d.listener.position_m = {rng.uniform(m, d.room.dimensions_m.x - m),
                           rng.uniform(m, d.room.dimensions_m.y - m),
                           rng.uniform(m, d.room.dimensions_m.z - m)};
  d.listener.yaw_deg = rng.uniform(0.0, 360.0);

  const std::size_t num_sources = 2;
  const double margin = 0.05;
  for (int attempt = 0; attempt < 256; ++attempt) {
    std::vector<SourceSpec> sources;
    double first_azimuth = 0.0;
    bool ok = true;
    for (std::size_t s = 0; s < num_sources; ++s) {
      const double radius = rng.uniform(proto.radius_min_m, proto.radius_max_m);
      const double elevation =
          rng.uniform(proto.elevation_min_deg, proto.elevation_max_deg);
      double azimuth;
      if (s == 0) {
        azimuth = rng.uniform(0.0, 360.0);
        first_azimuth = azimuth;
      } else if (separation_deg > 0.0) {
        azimuth = first_azimuth + (rng.next_bool() ? separation_deg : -separation_deg);
      } else {
        azimuth = rng.uniform(0.0, 360.0);
        if (proto.min_separation_deg > 0.0 &&
            circular_azimuth_distance(azimuth, first_azimuth) < proto.min_separation_deg) {
          ok = false;
          break;
        }
      }
      SourceSpec src;
      src.pos = SphericalPos(Direction(azimuth, elevation), radius);
      const Vec3 w = source_world_position(src.pos, d.listener);
      const Vec3& dim = d.room.dimensions_m;
      if (!(w.x > margin && w.x < dim.x - margin && w.y > margin && w.y < dim.y - margin &&
            w.z > margin && w.z < dim.z - margin)) {
        ok = false;
        break;
      }
      sources.push_back(std::move(src));
    }
    if (ok) {
      d.sources = std::move(sources);
      break;
    }
  }
  if (d.sources.size() != num_sources)
    throw Error(ErrorKind::Geometry,
                "sample_dataset: could not place sources inside the room");

  d.sir_db = rng.uniform(proto.sir_min_db, proto.sir_max_db);
  return d;
}

}  // namespace

std::vector<SceneSpec> sample_dataset(const DatasetProtocol& proto, std::uint64_t seed) {
  proto.validate();

  struct MixturePlan {
    double separation_deg = 0.0;  // 0 = unconstrained
    bool sweep = false;
  };
  std::vector<MixturePlan> plan;
  if (proto.sweep_separations_deg.empty()) {
    plan.assign(proto.num_mixtures, MixturePlan{});
  } else {
    for (double sep : proto.sweep_separations_deg)
      for (std::size_t i = 0; i < proto.scenes_per_separation; ++i)
        plan.push_back(MixturePlan{sep, true});
  }

  const std::uint64_t duration_samples =
      static_cast<std::uint64_t>(std::llround(proto.duration_s * proto.sample_rate));

  std::vector<SceneSpec> out;
  for (std::size_t idx = 0; idx < plan.size(); ++idx) {
    char id_buf[64];
    std::snprintf(id_buf, sizeof(id_buf), "%s_%06zu", proto.scene_id_prefix.c_str(), idx);
    const std::string scene_id = id_buf;
    const std::uint64_t scene_seed = derive_seed(seed, scene_id);
    Rng rng(scene_seed);

    SceneDraw d = draw_scene(proto, rng, plan[idx].separation_deg);

    // Utterances: two distinct picks, then a start offset when the file is
    // longer than the scene.
    const std::size_t n_utt = proto.utterances.size();
    const std::size_t u1 = static_cast<std::size_t>(rng.next_index(n_utt));
    std::size_t u2 = u1;
    if (n_utt > 1) {
      u2 = static_cast<std::size_t>(rng.next_index(n_utt - 1));
      if (u2 >= u1) ++u2;
    }
    const std::size_t picks[2] = {u1, u2};
    for (std::size_t s = 0; s < 2; ++s) {
      const UtteranceRef& utt = proto.utterances[picks[s]];
      d.sources[s].signal_id = utt.id;
      d.sources[s].signal_offset =
          (utt.num_samples > duration_samples)
              ? rng.next_index(utt.num_samples - duration_samples + 1)
              : 0;
    }

    const std::size_t hrtf_pick = static_cast<std::size_t>(rng.next_index(proto.hrtf_sets.size()));
    const bool train_target_is_second = rng.next_bool();

    SceneSpec base;
    base.scene_id = scene_id;
    base.room = d.room;
    base.listener = d.listener;
    base.sources = d.sources;
    base.sir_db = d.sir_db;
    base.duration_s = proto.duration_s;
    base.sample_rate = proto.sample_rate;
    base.seed = scene_seed;
    base.hrtf_set_path = proto.hrtf_sets[hrtf_pick];
    if (plan[idx].sweep) base.separation_deg = plan[idx].separation_deg;

    if (proto.split == SplitKind::Test) {
      base.target_index = 1;
      out.push_back(base);
      base.target_index = 2;
      out.push_back(base);
    } else {
      base.target_index = train_target_is_second ? 2 : 1;
      out.push_back(base);
    }
  }
  return out;
}

MonoClip make_modulated_noise(std::uint64_t seed, std::size_t num_samples, int sample_rate) {
  Rng rng(seed);
  MonoClip clip;
  clip.sample_rate = sample_rate;
  clip.samples.resize(num_samples);

  // Spectral tilt: two cascaded one-pole lowpasses over white noise, plus a
  // little broadband floor so high bands are not empty.
  const double fc = 450.0;
  const double a = std::exp(-2.0 * std::numbers::pi * fc / sample_rate);
  double s1 = 0.0, s2 = 0.0;

  // Syllabic envelope: a pair of slow sinusoids, half-wave rectified.
  const double f_env1 = rng.uniform(1.8, 3.2);
  const double f_env2 = rng.uniform(4.5, 7.0);
  const double p1 = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double p2 = rng.uniform(0.0, 2.0 * std::numbers::pi);

  for (std::size_t i = 0; i < num_samples; ++i) {
    const double white = 2.0 * rng.next_double() - 1.0;
    s1 = (1.0 - a) * white + a * s1;
    s2 = (1.0 - a) * s1 + a * s2;
    const double shaped = 6.0 * s2 + 0.05 * white;
    const double t = static_cast<double>(i) / sample_rate;
    double env = 0.15 + 0.55 * std::sin(2.0 * std::numbers::pi * f_env1 * t + p1) +
                 0.40 * std::sin(2.0 * std::numbers::pi * f_env2 * t + p2);
    env = std::max(0.0, env);
    clip.samples[i] = shaped * env * env;
  }

  const double r = rms(clip.samples);
  if (r > 0.0)
    for (double& v : clip.samples) v *= 0.05 / r;
  return clip;
}

}  // namespace binsim
