// Shared test utilities: independent oracles (naive DFT, image-lattice
// enumeration, closed-form MVDR leakage, Schroeder decay, band-limited
// shifting) and small signal/set builders.  Everything here must stay
// independent of the library code paths it is used to check.

#ifndef BINSIM_TESTS_SUPPORT_HPP
#define BINSIM_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "binsim/audio.hpp"
#include "binsim/hrtf.hpp"
#include "binsim/rng.hpp"
#include "binsim/room.hpp"

namespace testsup {

using cplx = std::complex<double>;

// O(N^2) one-sided DFT of a zero-padded sequence.
inline std::vector<cplx> naive_dft(const std::vector<double>& x, std::size_t fft_size) {
  std::vector<cplx> bins(fft_size / 2 + 1);
  for (std::size_t k = 0; k < bins.size(); ++k) {
    cplx acc{0.0, 0.0};
    for (std::size_t n = 0; n < x.size(); ++n) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) *
                           static_cast<double>(n) / static_cast<double>(fft_size);
      acc += x[n] * cplx{std::cos(angle), std::sin(angle)};
    }
    bins[k] = acc;
  }
  return bins;
}

// Allen & Berkley style lattice enumeration: images at 2nL + x and 2nL - x
// per axis with reflection counts |2n| and |2n - 1|.  A different loop
// structure and arithmetic from the implementation's single-index form.
struct OracleImage {
  double pos[3];
  int order;
  double distance;
  double gain;
};

inline std::vector<OracleImage> oracle_images(const binsim::RoomSpec& room,
                                              const binsim::Vec3& source,
                                              const binsim::Vec3& listener, double beta) {
  const double dims[3] = {room.dimensions_m.x, room.dimensions_m.y, room.dimensions_m.z};
  const double src[3] = {source.x, source.y, source.z};
  const double lis[3] = {listener.x, listener.y, listener.z};
  const int max_order = room.max_order;

  struct AxisImage {
    double pos;
    int count;
  };
  std::vector<std::vector<AxisImage>> axis(3);
  for (int a = 0; a < 3; ++a) {
    for (int n = -max_order; n <= max_order; ++n) {
      const AxisImage plus{2.0 * n * dims[a] + src[a], std::abs(2 * n)};
      if (plus.count <= max_order) axis[a].push_back(plus);
      const AxisImage minus{2.0 * n * dims[a] - src[a], std::abs(2 * n - 1)};
      if (minus.count <= max_order) axis[a].push_back(minus);
    }
  }

  std::vector<OracleImage> out;
  for (const auto& ix : axis[0])
    for (const auto& iy : axis[1])
      for (const auto& iz : axis[2]) {
        const int order = ix.count + iy.count + iz.count;
        if (order > max_order) continue;
        OracleImage img;
        img.pos[0] = ix.pos;
        img.pos[1] = iy.pos;
        img.pos[2] = iz.pos;
        img.order = order;
        img.distance = std::sqrt(std::pow(ix.pos - lis[0], 2) + std::pow(iy.pos - lis[1], 2) +
                                 std::pow(iz.pos - lis[2], 2));
        img.gain = std::pow(beta, order) / img.distance;
        out.push_back(img);
      }
  return out;
}

// Closed-form leaked-interferer power for the loaded 2x2 MVDR solution, via
// Sherman-Morrison on the interferer-plus-loading matrix (the target term
// cannot change the weight direction).  Returns |w^H h2|^2 with w^H h1 = 1.
inline double mvdr_leakage_power(const cplx h1[2], const cplx h2[2], double p2, double delta) {
  const double h2_norm = std::norm(h2[0]) + std::norm(h2[1]);
  const cplx h2h1 = std::conj(h2[0]) * h1[0] + std::conj(h2[1]) * h1[1];
  const double denom2 = delta + p2 * h2_norm;
  cplx u[2];
  for (int i = 0; i < 2; ++i)
    u[i] = (h1[i] - h2[i] * (p2 * h2h1 / denom2)) / delta;
  const cplx h1u = std::conj(h1[0]) * u[0] + std::conj(h1[1]) * u[1];
  const cplx uh2 = std::conj(u[0]) * h2[0] + std::conj(u[1]) * h2[1];
  const cplx g2 = uh2 / h1u.real();
  return std::norm(g2);
}

// Schroeder backward integration; T60 from a least-squares fit of the decay
// curve between -5 and -25 dB (times 3 for the 60 dB extrapolation).
inline double schroeder_t60(const binsim::Brir& brir) {
  const std::size_t n = brir.left.size();
  std::vector<double> tail_energy(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;)
    tail_energy[i] = tail_energy[i + 1] + brir.left[i] * brir.left[i] +
                     brir.right[i] * brir.right[i];
  const double total = tail_energy[0];
  if (total <= 0.0) return 0.0;

  std::vector<double> t, db;
  for (std::size_t i = 0; i < n; ++i) {
    if (tail_energy[i] <= 0.0) break;
    const double level = 10.0 * std::log10(tail_energy[i] / total);
    if (level > -5.0) continue;
    if (level < -25.0) break;
    t.push_back(static_cast<double>(i) / brir.sample_rate);
    db.push_back(level);
  }
  if (t.size() < 8) return 0.0;
  double st = 0, sd = 0, stt = 0, std_ = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sd += db[i];
    stt += t[i] * t[i];
    std_ += t[i] * db[i];
  }
  const double m = static_cast<double>(t.size());
  const double slope = (m * std_ - st * sd) / (m * stt - st * st);  // dB per second
  if (!(slope < 0.0)) return 0.0;
  return -60.0 / slope;
}

// Band-limited fractional shift: windowed-sinc interpolation (Blackman-Harris
// window, wide support) summed in the time domain.
inline std::vector<double> sinc_shift(const std::vector<double>& x, double tau,
                                      std::size_t out_len) {
  constexpr int kHalfWidth = 256;
  auto kernel = [](double u) {
    if (std::abs(u) > kHalfWidth) return 0.0;
    const double s = (std::abs(u) < 1e-12)
                         ? 1.0
                         : std::sin(std::numbers::pi * u) / (std::numbers::pi * u);
    const double xw = (u + kHalfWidth) / (2.0 * kHalfWidth);
    const double w = 0.35875 - 0.48829 * std::cos(2.0 * std::numbers::pi * xw) +
                     0.14128 * std::cos(4.0 * std::numbers::pi * xw) -
                     0.01168 * std::cos(6.0 * std::numbers::pi * xw);
    return s * w;
  };
  std::vector<double> out(out_len, 0.0);
  for (std::size_t m = 0; m < x.size(); ++m) {
    if (x[m] == 0.0) continue;
    const double center = static_cast<double>(m) + tau;
    const long lo = std::lround(std::floor(center)) - kHalfWidth;
    const long hi = std::lround(std::ceil(center)) + kHalfWidth;
    for (long i = std::max(0L, lo); i <= hi && i < static_cast<long>(out_len); ++i)
      out[static_cast<std::size_t>(i)] += x[m] * kernel(static_cast<double>(i) - center);
  }
  return out;
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
    return r;
  };
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  return cov / std::sqrt(va * vb);
}

// --- signal and set builders ------------------------------------------------

inline binsim::MonoClip white_noise(std::uint64_t seed, std::size_t n, int fs,
                                    double amplitude = 0.5) {
  binsim::Rng rng(seed);
  binsim::MonoClip clip;
  clip.sample_rate = fs;
  clip.samples.resize(n);
  for (auto& s : clip.samples) s = amplitude * (2.0 * rng.next_double() - 1.0);
  return clip;
}

inline binsim::BinauralClip binaural(const binsim::MonoClip& left,
                                     const binsim::MonoClip& right) {
  return binsim::BinauralClip{left, right};
}

// Grid of identical single-impulse HRIRs (identity system on both ears).
inline binsim::HrtfSet impulse_pair_set(double az_step_deg, int fs = 16000,
                                        std::size_t ir_len = 64) {
  binsim::HrtfSet set;
  set.sample_rate = fs;
  set.radius_m = 1.5;
  set.subject_id = "impulse-pair";
  set.ir_length = ir_len;
  for (double az = 0.0; az < 360.0 - 1e-9; az += az_step_deg) {
    binsim::Hrir hrir;
    hrir.sample_rate = fs;
    hrir.left.assign(ir_len, 0.0);
    hrir.right.assign(ir_len, 0.0);
    hrir.left[0] = 1.0;
    hrir.right[0] = 1.0;
    set.entries.emplace_back(binsim::Direction(az, 0.0), hrir);
  }
  set.validate();
  return set;
}

// Grid of random smooth HRIRs (for spectrum-oracle tests).
inline binsim::HrtfSet random_set(std::uint64_t seed, double az_step_deg, int fs = 16000,
                                  std::size_t ir_len = 128) {
  binsim::Rng rng(seed);
  binsim::HrtfSet set;
  set.sample_rate = fs;
  set.radius_m = 1.5;
  set.subject_id = "random";
  set.ir_length = ir_len;
  for (double az = 0.0; az < 360.0 - 1e-9; az += az_step_deg) {
    binsim::Hrir hrir;
    hrir.sample_rate = fs;
    hrir.left.resize(ir_len);
    hrir.right.resize(ir_len);
    for (std::size_t i = 0; i < ir_len; ++i) {
      const double decay = std::exp(-5.0 * static_cast<double>(i) / ir_len);
      hrir.left[i] = decay * (2.0 * rng.next_double() - 1.0);
      hrir.right[i] = decay * (2.0 * rng.next_double() - 1.0);
    }
    set.entries.emplace_back(binsim::Direction(az, 0.0), hrir);
  }
  set.validate();
  return set;
}

inline double relative_l2_error(const std::vector<double>& ref, const std::vector<double>& got) {
  double err = 0.0, norm = 0.0;
  const std::size_t n = std::min(ref.size(), got.size());
  for (std::size_t i = 0; i < n; ++i) {
    err += (ref[i] - got[i]) * (ref[i] - got[i]);
    norm += ref[i] * ref[i];
  }
  for (std::size_t i = n; i < ref.size(); ++i) norm += ref[i] * ref[i];
  for (std::size_t i = n; i < got.size(); ++i) err += got[i] * got[i];
  return norm > 0.0 ? std::sqrt(err / norm) : std::sqrt(err);
}

}  // namespace testsup

#endif  // BINSIM_TESTS_SUPPORT_HPP
