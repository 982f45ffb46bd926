#include "binsim/hrtf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>

#include <json.hpp>

#include "binsim/fft.hpp"
#include "binsim/stft.hpp"

namespace binsim {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kSpeedOfSound = 343.0;

double normalize_azimuth(double az) {
  double a = std::fmod(az, 360.0);
  if (a < 0.0) a += 360.0;
  return a;
}

}  // namespace

Direction::Direction(double azimuth, double elevation)
    : azimuth_deg(normalize_azimuth(azimuth)), elevation_deg(elevation) {
  if (!std::isfinite(azimuth) || !std::isfinite(elevation))
    throw Error(ErrorKind::InvalidInput, "Direction: non-finite angle");
  if (elevation < -90.0 || elevation > 90.0)
    throw Error(ErrorKind::InvalidInput, "Direction: elevation out of [-90, 90]");
}

SphericalPos::SphericalPos(Direction dir, double radius)
    : direction(dir), radius_m(radius) {
  if (!(radius > 0.0))
    throw Error(ErrorKind::InvalidInput, "SphericalPos: radius must be positive");
}

void Hrir::validate() const {
  if (left.empty() || right.empty())
    throw Error(ErrorKind::InvalidInput, "Hrir: empty channel");
  if (left.size() != right.size())
    throw Error(ErrorKind::InvalidInput, "Hrir: channel length mismatch");
  if (sample_rate <= 0)
    throw Error(ErrorKind::InvalidInput, "Hrir: sample_rate must be positive");
}

void HrtfSet::validate() const {
  if (entries.empty())
    throw Error(ErrorKind::Integrity, "HrtfSet: no entries");
  if (!(radius_m > 0.0))
    throw Error(ErrorKind::Integrity, "HrtfSet: radius must be positive");
  std::set<std::pair<double, double>> seen;
  for (const auto& [dir, hrir] : entries) {
    hrir.validate();
    if (hrir.sample_rate != sample_rate)
      throw Error(ErrorKind::Integrity, "HrtfSet: mixed sample rates");
    if (hrir.left.size() != ir_length)
      throw Error(ErrorKind::Integrity, "HrtfSet: mixed impulse-response lengths");
    if (!seen.emplace(dir.azimuth_deg, dir.elevation_deg).second)
      throw Error(ErrorKind::Integrity,
                  "HrtfSet: duplicate direction (az=" + std::to_string(dir.azimuth_deg) +
                      ", el=" + std::to_string(dir.elevation_deg) + ")");
  }
}

double angular_distance(const Direction& a, const Direction& b) {
  const double pa = a.elevation_deg * kDegToRad;
  const double pb = b.elevation_deg * kDegToRad;
  const double dt = (a.azimuth_deg - b.azimuth_deg) * kDegToRad;
  double c = std::sin(pa) * std::sin(pb) + std::cos(pa) * std::cos(pb) * std::cos(dt);
  c = std::clamp(c, -1.0, 1.0);
  return std::acos(c) * kRadToDeg;
}

std::pair<Direction, std::size_t> nearest_direction(const HrtfSet& set,
                                                    const Direction& query) {
  if (set.entries.empty())
    throw Error(ErrorKind::InvalidInput, "nearest_direction: empty set");
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < set.entries.size(); ++i) {
    const double d = angular_distance(set.entries[i].first, query);
    if (d < best_dist) {  // strict: ties keep the lowest index
      best_dist = d;
      best = i;
    }
  }
  return {set.entries[best].first, best};
}

ClueSpectrum get_clue(const HrtfSet& set, const Direction& query, std::size_t fft_size) {
  const auto [dir, index] = nearest_direction(set, query);
  const Hrir& hrir = set.entries[index].second;
  ClueSpectrum clue;
  clue.left = ir_spectrum(hrir.left, fft_size);
  clue.right = ir_spectrum(hrir.right, fft_size);
  clue.grid_direction = dir;
  clue.entry_index = index;
  return clue;
}

namespace {

std::string sibling_blob_path(const std::string& manifest_path) {
  // <name>.hrtfset.json -> <name>.hrtfset.f32
  const std::string suffix = ".json";
  if (manifest_path.size() > suffix.size() &&
      manifest_path.compare(manifest_path.size() - suffix.size(), suffix.size(), suffix) == 0)
    return manifest_path.substr(0, manifest_path.size() - suffix.size()) + ".f32";
  return manifest_path + ".f32";
}

template <typename T>
T require_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key))
    throw Error(ErrorKind::Format, std::string("hrtfset manifest: missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::Format, std::string("hrtfset manifest: bad type for field '") + key + "'");
  }
}

}  // namespace

HrtfSet load_hrtf_set(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in)
    throw Error(ErrorKind::Missing, "hrtfset: cannot open " + manifest_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, std::string("hrtfset manifest: parse error: ") + e.what());
  }

  HrtfSet set;
  set.subject_id = require_field<std::string>(j, "subject_id");
  set.sample_rate = require_field<int>(j, "sample_rate");
  set.radius_m = require_field<double>(j, "radius_m");
  set.ir_length = require_field<std::uint64_t>(j, "ir_length");
  if (set.sample_rate <= 0)
    throw Error(ErrorKind::Format, "hrtfset manifest: sample_rate must be positive");
  if (set.ir_length == 0)
    throw Error(ErrorKind::Format, "hrtfset manifest: ir_length must be positive");
  if (!j.contains("entries") || !j["entries"].is_array() || j["entries"].empty())
    throw Error(ErrorKind::Format, "hrtfset manifest: missing or empty 'entries'");

  const std::string blob_path = sibling_blob_path(manifest_path);
  std::ifstream blob(blob_path, std::ios::binary);
  if (!blob)
    throw Error(ErrorKind::Missing, "hrtfset: cannot open sample blob " + blob_path);
  blob.seekg(0, std::ios::end);
  const std::uint64_t blob_elems = static_cast<std::uint64_t>(blob.tellg()) / sizeof(float);

  set.entries.reserve(j["entries"].size());
  std::vector<float> buffer(2 * set.ir_length);
  std::size_t entry_no = 0;
  for (const auto& e : j["entries"]) {
    const double az = require_field<double>(e, "azimuth_deg");
    const double el = require_field<double>(e, "elevation_deg");
    const std::uint64_t offset = require_field<std::uint64_t>(e, "offset");
    if (el < -90.0 || el > 90.0)
      throw Error(ErrorKind::Format, "hrtfset manifest: entries[" + std::to_string(entry_no) +
                                         "].elevation_deg out of range");
    if (offset + 2 * set.ir_length > blob_elems)
      throw Error(ErrorKind::Format, "hrtfset manifest: entries[" + std::to_string(entry_no) +
                                         "].offset exceeds blob size");
    blob.seekg(static_cast<std::streamoff>(offset * sizeof(float)));
    blob.read(reinterpret_cast<char*>(buffer.data()),
              static_cast<std::streamsize>(buffer.size() * sizeof(float)));
    if (!blob)
      throw Error(ErrorKind::Format, "hrtfset: short read from sample blob");

    Hrir hrir;
    hrir.sample_rate = set.sample_rate;
    hrir.left.assign(buffer.begin(), buffer.begin() + static_cast<long>(set.ir_length));
    hrir.right.assign(buffer.begin() + static_cast<long>(set.ir_length), buffer.end());
    set.entries.emplace_back(Direction(az, el), std::move(hrir));
    ++entry_no;
  }

  set.validate();
  return set;
}

void save_hrtf_set(const HrtfSet& set, const std::string& manifest_path) {
  set.validate();
  const std::string blob_path = sibling_blob_path(manifest_path);

  nlohmann::json j;
  j["subject_id"] = set.subject_id;
  j["sample_rate"] = set.sample_rate;
  j["radius_m"] = set.radius_m;
  j["ir_length"] = set.ir_length;
  auto& entries = j["entries"] = nlohmann::json::array();

  std::ofstream blob(blob_path, std::ios::binary);
  if (!blob)
    throw Error(ErrorKind::InvalidInput, "hrtfset: cannot write " + blob_path);
  std::uint64_t offset = 0;
  std::vector<float> buffer;
  for (const auto& [dir, hrir] : set.entries) {
    buffer.clear();
    for (double v : hrir.left) buffer.push_back(static_cast<float>(v));
    for (double v : hrir.right) buffer.push_back(static_cast<float>(v));
    blob.write(reinterpret_cast<const char*>(buffer.data()),
               static_cast<std::streamsize>(buffer.size() * sizeof(float)));
    entries.push_back({{"azimuth_deg", dir.azimuth_deg},
                       {"elevation_deg", dir.elevation_deg},
                       {"offset", offset}});
    offset += buffer.size();
  }
  blob.close();

  std::ofstream out(manifest_path);
  if (!out)
    throw Error(ErrorKind::InvalidInput, "hrtfset: cannot write " + manifest_path);
  out << j.dump(2) << "\n";
}

HrtfSet make_synthetic_head_set(const SyntheticHeadParams& params) {
  if (params.ir_length < 32 || (params.ir_length % 2) != 0)
    throw Error(ErrorKind::InvalidInput, "synthetic head: ir_length must be even and >= 32");
  HrtfSet set;
  set.sample_rate = params.sample_rate;
  set.radius_m = params.radius_m;
  set.subject_id = params.subject_id;
  set.ir_length = params.ir_length;

  // Pulses are built in the frequency domain with a raised-cosine band edge
  // (flat to 0.35 fs, zero above 0.44 fs), so fractional interaural delays
  // stay band-limited and the IRs carry no energy at the Nyquist edge.
  const std::size_t num_bins = params.ir_length / 2 + 1;
  std::vector<double> band_gain(num_bins);
  for (std::size_t k = 0; k < num_bins; ++k) {
    const double f = static_cast<double>(k) / static_cast<double>(params.ir_length);
    if (f <= 0.35)
      band_gain[k] = 1.0;
    else if (f >= 0.44)
      band_gain[k] = 0.0;
    else
      band_gain[k] = 0.5 + 0.5 * std::cos(std::numbers::pi * (f - 0.35) / 0.09);
  }
  auto place_pulse = [&](std::vector<double>& ir, double delay, double gain) {
    std::vector<std::complex<double>> spectrum(num_bins);
    for (std::size_t k = 0; k < num_bins; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) * delay /
                           static_cast<double>(params.ir_length);
      spectrum[k] = gain * band_gain[k] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    ir = fft::irfft(spectrum, params.ir_length);
  };

  const double base_delay = static_cast<double>(params.ir_length) / 4.0;
  for (double el = params.elevation_min_deg; el <= params.elevation_max_deg + 1e-9;
       el += params.elevation_step_deg) {
    for (double az = 0.0; az < 360.0 - 1e-9; az += params.azimuth_step_deg) {
      const double theta = az * kDegToRad;
      const double phi = el * kDegToRad;
      const double lateral = std::sin(theta) * std::cos(phi);  // +1 = hard left
      const double gamma = std::asin(std::clamp(lateral, -1.0, 1.0));
      // Woodworth interaural delay, split symmetrically around the base delay.
      const double itd_s =
          params.head_radius_m / kSpeedOfSound * (gamma + std::sin(gamma));
      const double itd_samples = itd_s * params.sample_rate;
      const double ild_db = params.max_ild_db * std::sin(gamma);
      const double gain_l = std::pow(10.0, ild_db / 40.0);
      const double gain_r = std::pow(10.0, -ild_db / 40.0);

      Hrir hrir;
      hrir.sample_rate = params.sample_rate;
      place_pulse(hrir.left, base_delay - itd_samples / 2.0, gain_l);
      place_pulse(hrir.right, base_delay + itd_samples / 2.0, gain_r);
      set.entries.emplace_back(Direction(az, el), std::move(hrir));
    }
  }
  set.validate();
  return set;
}

}  // namespace binsim
