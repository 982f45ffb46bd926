#include "binsim/scene.hpp"

#include <algorithm>
#include <cmath>

#include "binsim/fft.hpp"
#include "binsim/stft.hpp"

namespace binsim {

void SceneSpec::validate() const {
  room.validate();
  if (sources.empty() || sources.size() > 2)
    throw Error(ErrorKind::InvalidInput, "SceneSpec: expected 1 or 2 sources");
  if (!std::isfinite(sir_db))
    throw Error(ErrorKind::InvalidInput, "SceneSpec: sir_db must be finite");
  if (!(duration_s > 0.0))
    throw Error(ErrorKind::InvalidInput, "SceneSpec: duration must be positive");
  if (sample_rate <= 0)
    throw Error(ErrorKind::InvalidInput, "SceneSpec: sample_rate must be positive");
  if (target_index < 1 || target_index > static_cast<int>(sources.size()))
    throw Error(ErrorKind::InvalidInput, "SceneSpec: target_index out of range");
  for (const auto& src : sources)
    if (!(src.pos.radius_m > 0.0))
      throw Error(ErrorKind::InvalidInput, "SceneSpec: source radius must be positive");
}

std::vector<double> convolve_truncated(const std::vector<double>& x,
                                       const std::vector<double>& h, std::size_t n) {
  if (x.empty() || h.empty()) return std::vector<double>(n, 0.0);
  const std::size_t full = x.size() + h.size() - 1;
  const std::size_t fft_size = fft::next_pow2(full);
  auto xs = ir_spectrum(x, fft_size);
  const auto hs = ir_spectrum(h, fft_size);
  for (std::size_t k = 0; k < xs.size(); ++k) xs[k] *= hs[k];
  auto y = fft::irfft(xs, fft_size);
  y.resize(std::min(n, y.size()));
  y.resize(n, 0.0);
  return y;
}

namespace {

MonoClip prepare_dry(const SignalProvider& provider, const SourceSpec& src,
                     std::size_t num_samples, int sample_rate) {
  MonoClip dry = provider(src.signal_id);
  dry.validate();
  if (dry.sample_rate != sample_rate)
    throw Error(ErrorKind::InvalidInput,
                "mix_scene: signal '" + src.signal_id + "' sample rate " +
                    std::to_string(dry.sample_rate) + " does not match scene rate " +
                    std::to_string(sample_rate));
  if (src.signal_offset > 0 && src.signal_offset < dry.samples.size())
    dry.samples.erase(dry.samples.begin(),
                      dry.samples.begin() + static_cast<long>(src.signal_offset));
  fit_length(dry, num_samples);
  return dry;
}

BinauralClip convolve_binaural(const MonoClip& dry, const std::vector<double>& ir_left,
                               const std::vector<double>& ir_right, std::size_t n) {
  BinauralClip out;
  out.left = {convolve_truncated(dry.samples, ir_left, n), dry.sample_rate};
  out.right = {convolve_truncated(dry.samples, ir_right, n), dry.sample_rate};
  return out;
}

std::size_t brir_fft_size(const ImageSourceList& images, std::size_t ir_length) {
  double max_delay = 0.0;
  for (const auto& img : images) max_delay = std::max(max_delay, img.delay_samples);
  // Headroom keeps the fractional-delay tails from wrapping into the onset.
  return fft::next_pow2(static_cast<std::size_t>(std::ceil(max_delay)) + ir_length + 1024);
}

void scale_clip(BinauralClip& clip, double gain) {
  for (double& v : clip.left.samples) v *= gain;
  for (double& v : clip.right.samples) v *= gain;
}

}  // namespace

BinauralClip render_target(const SourceSpec& source, const HrtfSet& hrtf,
                           const MonoClip& dry, double duration_s, int sample_rate) {
  if (sample_rate <= 0 || !(duration_s > 0.0))
    throw Error(ErrorKind::InvalidInput, "render_target: bad duration or sample rate");
  const std::size_t n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  const auto [dir, index] = nearest_direction(hrtf, source.pos.direction);
  (void)dir;
  const Hrir& hrir = hrtf.entries[index].second;
  MonoClip fitted = dry;
  fit_length(fitted, n);
  return convolve_binaural(fitted, hrir.left, hrir.right, n);
}

RenderedScene mix_scene(const SceneSpec& spec, const HrtfSet& hrtf,
                        const SignalProvider& provider) {
  spec.validate();
  if (hrtf.sample_rate != spec.sample_rate)
    throw Error(ErrorKind::InvalidInput, "mix_scene: HRTF sample rate does not match scene");
  const std::size_t n =
      static_cast<std::size_t>(std::llround(spec.duration_s * spec.sample_rate));

  RenderedScene out;
  out.metadata.t60_s = spec.room.anechoic ? 0.0 : spec.room.t60_s;
  out.metadata.anechoic = spec.room.anechoic;
  out.metadata.requested_sir_db = spec.sir_db;
  out.metadata.reflection_coefficient = reflection_coefficient(spec.room);
  out.metadata.hrtf_subject = hrtf.subject_id;
  out.metadata.seed = spec.seed;

  std::vector<BinauralClip> renders;
  for (const auto& src : spec.sources) {
    const MonoClip dry = prepare_dry(provider, src, n, spec.sample_rate);
    if (rms(dry.samples) <= 0.0)
      throw Error(ErrorKind::InvalidInput,
                  "mix_scene: silent source '" + src.signal_id + "' cannot realize an SIR");

    const auto images = expand_images(spec.room, src.pos, spec.listener, spec.sample_rate);
    const Brir brir = synthesize_brir(images, hrtf, brir_fft_size(images, hrtf.ir_length));
    renders.push_back(convolve_binaural(dry, brir.left, brir.right, n));

    out.targets.push_back(render_target(src, hrtf, dry, spec.duration_s, spec.sample_rate));
    out.metadata.image_counts.push_back(images.size());
    for (const auto& img : images)
      if (img.order == 0) out.metadata.direct_path_delay_samples.push_back(img.delay_samples);
  }

  double interferer_scale = 1.0;
  if (spec.sources.size() == 2) {
    const double e1 = energy(renders[0]);
    const double e2 = energy(renders[1]);
    if (e1 <= 0.0 || e2 <= 0.0)
      throw Error(ErrorKind::InvalidInput, "mix_scene: silent render cannot realize an SIR");
    interferer_scale = std::sqrt(e1 / (e2 * std::pow(10.0, spec.sir_db / 10.0)));
    scale_clip(renders[1], interferer_scale);
    scale_clip(out.targets[1], interferer_scale);
    out.metadata.realized_sir_db = 10.0 * std::log10(e1 / energy(renders[1]));
  } else {
    out.metadata.realized_sir_db = spec.sir_db;
  }
  out.metadata.interferer_scale = interferer_scale;

  out.mixture.left = {std::vector<double>(n, 0.0), spec.sample_rate};
  out.mixture.right = {std::vector<double>(n, 0.0), spec.sample_rate};
  for (const auto& r : renders) {
    for (std::size_t i = 0; i < n; ++i) {
      out.mixture.left.samples[i] += r.left.samples[i];
      out.mixture.right.samples[i] += r.right.samples[i];
    }
  }
  out.reverberant = std::move(renders);

  // Additivity self-check: the mixture must be the exact sum of the scaled
  // per-source renders.
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double sum_l = 0.0, sum_r = 0.0;
    for (const auto& r : out.reverberant) {
      sum_l += r.left.samples[i];
      sum_r += r.right.samples[i];
    }
    err += std::pow(out.mixture.left.samples[i] - sum_l, 2) +
           std::pow(out.mixture.right.samples[i] - sum_r, 2);
    ref += sum_l * sum_l + sum_r * sum_r;
  }
  if (ref > 0.0 && std::sqrt(err / ref) > 1e-9)
    throw Error(ErrorKind::InvalidInput, "mix_scene: additivity self-check failed");

  return out;
}

}  // namespace binsim
