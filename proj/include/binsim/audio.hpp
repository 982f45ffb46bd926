#ifndef BINSIM_AUDIO_HPP
#define BINSIM_AUDIO_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "binsim/errors.hpp"

namespace binsim {

// Single-channel time signal.  Samples are dimensionless amplitudes; all
// internal processing is double precision.
struct MonoClip {
  std::vector<double> samples;
  int sample_rate = 0;

  std::size_t size() const { return samples.size(); }

  void validate() const {
    if (sample_rate <= 0)
      throw Error(ErrorKind::InvalidInput, "MonoClip: sample_rate must be positive");
    for (double s : samples)
      if (!std::isfinite(s))
        throw Error(ErrorKind::InvalidInput, "MonoClip: non-finite sample");
  }
};

// Two-channel (left/right ear) time signal.
struct BinauralClip {
  MonoClip left;
  MonoClip right;

  std::size_t size() const { return left.size(); }
  int sample_rate() const { return left.sample_rate; }

  void validate() const {
    left.validate();
    right.validate();
    if (left.sample_rate != right.sample_rate)
      throw Error(ErrorKind::InvalidInput, "BinauralClip: sample_rate mismatch");
    if (left.size() != right.size())
      throw Error(ErrorKind::InvalidInput, "BinauralClip: channel length mismatch");
  }
};

inline double energy(const std::vector<double>& x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

inline double energy(const BinauralClip& clip) {
  return energy(clip.left.samples) + energy(clip.right.samples);
}

inline double rms(const std::vector<double>& x) {
  return x.empty() ? 0.0 : std::sqrt(energy(x) / static_cast<double>(x.size()));
}

// Pads with trailing zeros or truncates so the clip has exactly n samples.
inline void fit_length(MonoClip& clip, std::size_t n) {
  clip.samples.resize(n, 0.0);
}

inline void fit_length(BinauralClip& clip, std::size_t n) {
  fit_length(clip.left, n);
  fit_length(clip.right, n);
}

}  // namespace binsim

#endif  // BINSIM_AUDIO_HPP
