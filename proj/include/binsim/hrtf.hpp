#ifndef BINSIM_HRTF_HPP
#define BINSIM_HRTF_HPP

#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "binsim/errors.hpp"

namespace binsim {

// Direction on the measurement sphere.  Azimuth is measured counterclockwise
// from straight ahead (0 = front, 90 = left) and normalized into [0, 360);
// elevation is measured from the horizontal plane, in [-90, +90].
struct Direction {
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;

  Direction() = default;
  Direction(double azimuth, double elevation);
};

struct SphericalPos {
  Direction direction;
  double radius_m = 1.0;

  SphericalPos() = default;
  SphericalPos(Direction dir, double radius);
};

// Impulse-response pair for one direction.
struct Hrir {
  std::vector<double> left;
  std::vector<double> right;
  int sample_rate = 0;

  void validate() const;
};

// Immutable directional grid of HRIR pairs at a single radius.
struct HrtfSet {
  std::vector<std::pair<Direction, Hrir>> entries;
  int sample_rate = 0;
  double radius_m = 0.0;
  std::string subject_id;
  std::size_t ir_length = 0;

  void validate() const;
};

// Great-circle angle between two directions, in degrees, in [0, 180].
double angular_distance(const Direction& a, const Direction& b);

// Index and direction of the grid entry closest to the query (great-circle
// metric, ties broken by lowest index).
std::pair<Direction, std::size_t> nearest_direction(const HrtfSet& set,
                                                    const Direction& query);

// One-sided spectra (fft_size/2 + 1 bins per ear) of the nearest-neighbor
// HRIR pair; this is the spatial conditioning signal handed to extractors.
struct ClueSpectrum {
  std::vector<std::complex<double>> left;
  std::vector<std::complex<double>> right;
  Direction grid_direction;
  std::size_t entry_index = 0;
};

ClueSpectrum get_clue(const HrtfSet& set, const Direction& query, std::size_t fft_size);

// Interchange format: `<name>.hrtfset.json` manifest next to a flat
// little-endian float32 blob `<name>.hrtfset.f32`.  Offsets in the manifest
// are element counts into the blob; each entry stores ir_length left samples
// followed by ir_length right samples.
HrtfSet load_hrtf_set(const std::string& manifest_path);
void save_hrtf_set(const HrtfSet& set, const std::string& manifest_path);

// Synthetic spherical-head measurement grid: Woodworth-style interaural
// delays and a broadband level shadow, band-limited pulses.  Not a measured
// dataset; exists so the toolkit can be exercised end to end without one.
struct SyntheticHeadParams {
  double azimuth_step_deg = 15.0;
  double elevation_step_deg = 15.0;
  double elevation_min_deg = -45.0;
  double elevation_max_deg = 45.0;
  int sample_rate = 16000;
  std::size_t ir_length = 128;
  double head_radius_m = 0.0875;
  double radius_m = 1.5;
  double max_ild_db = 8.0;
  std::string subject_id = "synthetic-head";
};

HrtfSet make_synthetic_head_set(const SyntheticHeadParams& params);

}  // namespace binsim

#endif  // BINSIM_HRTF_HPP
