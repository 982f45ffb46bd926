#ifndef BINSIM_ROOM_HPP
#define BINSIM_ROOM_HPP

#include <array>
#include <cstddef>
#include <vector>

#include "binsim/hrtf.hpp"

namespace binsim {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

// Shoebox room.  t60_s is ignored when anechoic is set.
struct RoomSpec {
  Vec3 dimensions_m{6.0, 5.0, 3.0};
  double t60_s = 0.5;
  bool anechoic = false;
  int max_order = 12;
  double speed_of_sound_mps = 343.0;

  void validate() const;
  double volume() const;
  double surface_area() const;
};

// World-frame listener pose; yaw rotates the head counterclockwise (seen from
// above) so that yaw 0 faces +x.
struct ListenerPose {
  Vec3 position_m{0.0, 0.0, 0.0};
  double yaw_deg = 0.0;
};

// One mirrored source: arrival direction in the head frame, propagation gain,
// delay in samples (fractional), and the number of wall reflections.
struct ImageSource {
  Direction direction;
  double gain = 0.0;
  double delay_samples = 0.0;
  int order = 0;
};

using ImageSourceList = std::vector<ImageSource>;

struct Brir {
  std::vector<double> left;
  std::vector<double> right;
  int sample_rate = 0;
};

// Uniform wall reflection coefficient from the Sabine relation
// (A = 0.161 V / T60, a = A / S, beta = sqrt(1 - a)).  Throws when the room
// cannot physically realize the requested decay (a >= 1).  Anechoic rooms
// return 0.
double reflection_coefficient(const RoomSpec& room);

// Direct propagation path of a source given in the head frame: inverse
// distance gain, delay r/c in samples, direction passed through.
ImageSource direct_path(const SphericalPos& source, double speed_of_sound_mps,
                        int sample_rate);

// Full image expansion up to room.max_order (sum of per-axis reflection
// counts).  The source is specified in the listener's head frame; its world
// position must lie strictly inside the room.
ImageSourceList expand_images(const RoomSpec& room, const SphericalPos& source,
                              const ListenerPose& listener, int sample_rate);

// Frequency-domain accumulation of gain x delay-phase x HRIR spectrum over all
// images (the same gain/delay applied to both ears), inverse-transformed to a
// time-domain response of fft_size samples.
Brir synthesize_brir(const ImageSourceList& images, const HrtfSet& hrtf,
                     std::size_t fft_size);

// World position of a head-frame source, given the listener pose.
Vec3 source_world_position(const SphericalPos& source, const ListenerPose& listener);

}  // namespace binsim

#endif  // BINSIM_ROOM_HPP
