#include "binsim/room.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "binsim/fft.hpp"
#include "binsim/stft.hpp"

namespace binsim {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

Vec3 head_to_world(const Vec3& head_vec, double yaw_deg) {
  const double c = std::cos(yaw_deg * kDegToRad);
  const double s = std::sin(yaw_deg * kDegToRad);
  return {c * head_vec.x - s * head_vec.y, s * head_vec.x + c * head_vec.y, head_vec.z};
}

Vec3 world_to_head(const Vec3& world_vec, double yaw_deg) {
  return head_to_world(world_vec, -yaw_deg);
}

Vec3 unit_vector(const Direction& dir) {
  const double t = dir.azimuth_deg * kDegToRad;
  const double p = dir.elevation_deg * kDegToRad;
  return {std::cos(p) * std::cos(t), std::cos(p) * std::sin(t), std::sin(p)};
}

Direction vector_to_direction(const Vec3& v) {
  const double horiz = std::hypot(v.x, v.y);
  const double az = std::atan2(v.y, v.x) * kRadToDeg;
  const double el = std::atan2(v.z, horiz) * kRadToDeg;
  return Direction(az, std::clamp(el, -90.0, 90.0));
}

// Mirrored coordinate along one axis for image index i: even indices keep the
// source coordinate, odd indices reflect it; |i| is the reflection count.
double image_coordinate(int i, double room_len, double source_coord) {
  if (i % 2 == 0) return static_cast<double>(i) * room_len + source_coord;
  return static_cast<double>(i + 1) * room_len - source_coord;
}

}  // namespace

void RoomSpec::validate() const {
  if (!(dimensions_m.x > 0.0 && dimensions_m.y > 0.0 && dimensions_m.z > 0.0))
    throw Error(ErrorKind::InvalidInput, "RoomSpec: dimensions must be positive");
  if (!anechoic && !(t60_s > 0.0))
    throw Error(ErrorKind::InvalidInput, "RoomSpec: t60 must be positive unless anechoic");
  if (max_order < 0)
    throw Error(ErrorKind::InvalidInput, "RoomSpec: max_order must be >= 0");
  if (!(speed_of_sound_mps > 0.0))
    throw Error(ErrorKind::InvalidInput, "RoomSpec: speed of sound must be positive");
}

double RoomSpec::volume() const {
  return dimensions_m.x * dimensions_m.y * dimensions_m.z;
}

double RoomSpec::surface_area() const {
  const auto& d = dimensions_m;
  return 2.0 * (d.x * d.y + d.x * d.z + d.y * d.z);
}

double reflection_coefficient(const RoomSpec& room) {
  room.validate();
  if (room.anechoic) return 0.0;
  const double absorption_area = 0.161 * room.volume() / room.t60_s;
  const double a = absorption_area / room.surface_area();
  if (a >= 1.0)
    throw Error(ErrorKind::Infeasible,
                "reflection_coefficient: requested T60 needs average absorption >= 1 "
                "(room too small or T60 too short)");
  return std::sqrt(1.0 - a);
}

ImageSource direct_path(const SphericalPos& source, double speed_of_sound_mps,
                        int sample_rate) {
  if (!(source.radius_m > 0.0))
    throw Error(ErrorKind::InvalidInput, "direct_path: zero radius");
  ImageSource img;
  img.direction = source.direction;
  img.order = 0;
  img.gain = 1.0 / source.radius_m;
  img.delay_samples = source.radius_m / speed_of_sound_mps * sample_rate;
  return img;
}

Vec3 source_world_position(const SphericalPos& source, const ListenerPose& listener) {
  const Vec3 head = unit_vector(source.direction);
  const Vec3 world = head_to_world(head, listener.yaw_deg);
  return {listener.position_m.x + source.radius_m * world.x,
          listener.position_m.y + source.radius_m * world.y,
          listener.position_m.z + source.radius_m * world.z};
}

ImageSourceList expand_images(const RoomSpec& room, const SphericalPos& source,
                              const ListenerPose& listener, int sample_rate) {
  room.validate();
  if (sample_rate <= 0)
    throw Error(ErrorKind::InvalidInput, "expand_images: bad sample rate");

  const Vec3 s = source_world_position(source, listener);
  const Vec3& d = room.dimensions_m;
  const Vec3& l = listener.position_m;
  const bool inside = s.x > 0.0 && s.x < d.x && s.y > 0.0 && s.y < d.y && s.z > 0.0 && s.z < d.z;
  if (!inside)
    throw Error(ErrorKind::Geometry, "expand_images: source lies outside the room");
  {
    const double dist = std::sqrt((s.x - l.x) * (s.x - l.x) + (s.y - l.y) * (s.y - l.y) +
                                  (s.z - l.z) * (s.z - l.z));
    if (dist < 1e-6)
      throw Error(ErrorKind::Geometry, "expand_images: source coincides with listener");
  }

  const double beta = reflection_coefficient(room);
  const int max_order = room.anechoic ? 0 : room.max_order;

  ImageSourceList images;
  for (int i = -max_order; i <= max_order; ++i) {
    const int rem_i = max_order - std::abs(i);
    for (int j = -rem_i; j <= rem_i; ++j) {
      const int rem_j = rem_i - std::abs(j);
      for (int k = -rem_j; k <= rem_j; ++k) {
        const Vec3 img_pos{image_coordinate(i, d.x, s.x), image_coordinate(j, d.y, s.y),
                           image_coordinate(k, d.z, s.z)};
        const Vec3 v{img_pos.x - l.x, img_pos.y - l.y, img_pos.z - l.z};
        const double dist = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
        const int order = std::abs(i) + std::abs(j) + std::abs(k);

        ImageSource img;
        img.direction = vector_to_direction(world_to_head(v, listener.yaw_deg));
        img.order = order;
        img.gain = std::pow(beta, order) / dist;
        img.delay_samples = dist / room.speed_of_sound_mps * sample_rate;
        images.push_back(img);
      }
    }
  }
  return images;
}

Brir synthesize_brir(const ImageSourceList& images, const HrtfSet& hrtf,
                     std::size_t fft_size) {
  if (images.empty())
    throw Error(ErrorKind::InvalidInput, "synthesize_brir: no images");
  const std::size_t ir_len = hrtf.ir_length;
  double max_delay = 0.0;
  for (const auto& img : images) max_delay = std::max(max_delay, img.delay_samples);
  if (static_cast<std::size_t>(std::ceil(max_delay)) + ir_len > fft_size)
    throw Error(ErrorKind::Sizing,
                "synthesize_brir: fft_size too small for max delay + HRIR length; "
                "increase fft_size");

  const std::size_t num_bins = fft_size / 2 + 1;
  std::vector<std::complex<double>> acc_l(num_bins, {0.0, 0.0});
  std::vector<std::complex<double>> acc_r(num_bins, {0.0, 0.0});

  // HRIR spectra are cached per grid entry; scenes touch few distinct
  // directions compared to the image count.
  std::unordered_map<std::size_t,
                     std::pair<std::vector<std::complex<double>>, std::vector<std::complex<double>>>>
      spectra;

  for (const auto& img : images) {
    const auto [dir, index] = nearest_direction(hrtf, img.direction);
    (void)dir;
    auto it = spectra.find(index);
    if (it == spectra.end()) {
      const Hrir& hrir = hrtf.entries[index].second;
      it = spectra.emplace(index, std::make_pair(ir_spectrum(hrir.left, fft_size),
                                                  ir_spectrum(hrir.right, fft_size)))
               .first;
    }
    const auto& [spec_l, spec_r] = it->second;
    const double w0 = -2.0 * std::numbers::pi * img.delay_samples / static_cast<double>(fft_size);
    for (std::size_t k = 0; k < num_bins; ++k) {
      const double angle = w0 * static_cast<double>(k);
      const std::complex<double> factor =
          img.gain * std::complex<double>(std::cos(angle), std::sin(angle));
      acc_l[k] += factor * spec_l[k];
      acc_r[k] += factor * spec_r[k];
    }
  }

  Brir brir;
  brir.sample_rate = hrtf.sample_rate;
  brir.left = fft::irfft(acc_l, fft_size);
  brir.right = fft::irfft(acc_r, fft_size);
  return brir;
}

}  // namespace binsim
