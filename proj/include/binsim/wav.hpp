#ifndef BINSIM_WAV_HPP
#define BINSIM_WAV_HPP

#include <cstdint>
#include <string>

#include "binsim/audio.hpp"

namespace binsim {

// Minimal RIFF/WAVE reader and writer.  Writing uses IEEE float32 by default
// (the pipeline's interchange precision); pcm16 is offered for listening
// copies only.  Reading accepts float32, float64 and pcm16, mono or stereo.

struct WavData {
  std::vector<std::vector<double>> channels;
  int sample_rate = 0;
};

WavData read_wav(const std::string& path);

// Header-only probe; does not decode samples.
struct WavInfo {
  int sample_rate = 0;
  int num_channels = 0;
  std::uint64_t num_frames = 0;
};

WavInfo wav_info(const std::string& path);

MonoClip read_wav_mono(const std::string& path);        // rejects multichannel
BinauralClip read_wav_binaural(const std::string& path); // requires 2 channels

enum class WavEncoding { Float32, Pcm16 };

void write_wav(const std::string& path, const BinauralClip& clip,
               WavEncoding encoding = WavEncoding::Float32);
void write_wav(const std::string& path, const MonoClip& clip,
               WavEncoding encoding = WavEncoding::Float32);

}  // namespace binsim

#endif  // BINSIM_WAV_HPP
