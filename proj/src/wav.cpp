#include "binsim/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "binsim/errors.hpp"

namespace binsim {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T read_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    value |= static_cast<T>(bytes[i]) << (8 * i);
  return value;
}

template <typename T>
void write_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i)
    bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

float bits_to_float(std::uint32_t bits) {
  float f;
  std::memcpy(&f, &bits, sizeof(f));
  return f;
}

std::uint32_t float_to_bits(float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof(bits));
  return bits;
}

double bits_to_double(std::uint64_t bits) {
  double d;
  std::memcpy(&d, &bits, sizeof(d));
  return d;
}

}  // namespace

WavData read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Missing, "wav: cannot open " + path);

  char riff[4], wave[4];
  in.read(riff, 4);
  read_le<std::uint32_t>(in);
  in.read(wave, 4);
  if (!in || std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(wave, "WAVE", 4) != 0)
    throw Error(ErrorKind::Format, "wav: not a RIFF/WAVE file: " + path);

  std::uint16_t format = 0, num_channels = 0, bits_per_sample = 0;
  std::uint32_t sample_rate = 0;
  bool got_fmt = false;
  WavData data;

  while (in) {
    char id[4];
    in.read(id, 4);
    if (!in) break;
    const std::uint32_t size = read_le<std::uint32_t>(in);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      format = read_le<std::uint16_t>(in);
      num_channels = read_le<std::uint16_t>(in);
      sample_rate = read_le<std::uint32_t>(in);
      read_le<std::uint32_t>(in);  // byte rate
      read_le<std::uint16_t>(in);  // block align
      bits_per_sample = read_le<std::uint16_t>(in);
      if (format == kFormatExtensible && size >= 40) {
        read_le<std::uint16_t>(in);  // cbSize
        read_le<std::uint16_t>(in);  // valid bits
        read_le<std::uint32_t>(in);  // channel mask
        format = read_le<std::uint16_t>(in);  // first two bytes of the sub-format GUID
        in.seekg(14, std::ios::cur);
        if (size > 40) in.seekg(size - 40, std::ios::cur);
      } else if (size > 16) {
        in.seekg(size - 16, std::ios::cur);
      }
      got_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!got_fmt) throw Error(ErrorKind::Format, "wav: data chunk before fmt: " + path);
      if (num_channels == 0) throw Error(ErrorKind::Format, "wav: zero channels: " + path);
      const std::uint32_t bytes_per_sample = bits_per_sample / 8;
      if (bytes_per_sample == 0) throw Error(ErrorKind::Format, "wav: zero sample width");
      const std::uint32_t num_frames = size / (bytes_per_sample * num_channels);
      data.channels.assign(num_channels, std::vector<double>(num_frames));
      for (std::uint32_t f = 0; f < num_frames; ++f) {
        for (std::uint16_t c = 0; c < num_channels; ++c) {
          double v = 0.0;
          if (format == kFormatFloat && bits_per_sample == 32) {
            v = bits_to_float(read_le<std::uint32_t>(in));
          } else if (format == kFormatFloat && bits_per_sample == 64) {
            v = bits_to_double(read_le<std::uint64_t>(in));
          } else if (format == kFormatPcm && bits_per_sample == 16) {
            v = static_cast<double>(static_cast<std::int16_t>(read_le<std::uint16_t>(in))) /
                32768.0;
          } else {
            throw Error(ErrorKind::Format,
                        "wav: unsupported encoding (format " + std::to_string(format) + ", " +
                            std::to_string(bits_per_sample) + " bits): " + path);
          }
          data.channels[c][f] = v;
        }
      }
      if (size % 2 == 1) in.seekg(1, std::ios::cur);
    } else {
      in.seekg(size + (size % 2), std::ios::cur);
    }
  }

  if (!got_fmt || data.channels.empty())
    throw Error(ErrorKind::Format, "wav: missing fmt or data chunk: " + path);
  data.sample_rate = static_cast<int>(sample_rate);
  return data;
}

WavInfo wav_info(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Missing, "wav: cannot open " + path);

  char riff[4], wave[4];
  in.read(riff, 4);
  read_le<std::uint32_t>(in);
  in.read(wave, 4);
  if (!in || std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(wave, "WAVE", 4) != 0)
    throw Error(ErrorKind::Format, "wav: not a RIFF/WAVE file: " + path);

  WavInfo info;
  std::uint16_t bits_per_sample = 0;
  while (in) {
    char id[4];
    in.read(id, 4);
    if (!in) break;
    const std::uint32_t size = read_le<std::uint32_t>(in);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      read_le<std::uint16_t>(in);  // format tag
      info.num_channels = read_le<std::uint16_t>(in);
      info.sample_rate = static_cast<int>(read_le<std::uint32_t>(in));
      read_le<std::uint32_t>(in);
      read_le<std::uint16_t>(in);
      bits_per_sample = read_le<std::uint16_t>(in);
      if (size > 16) in.seekg(size - 16, std::ios::cur);
    } else if (std::memcmp(id, "data", 4) == 0) {
      const std::uint32_t denom =
          static_cast<std::uint32_t>(info.num_channels) * (bits_per_sample / 8);
      if (denom == 0) throw Error(ErrorKind::Format, "wav: data before fmt: " + path);
      info.num_frames = size / denom;
      return info;
    } else {
      in.seekg(size + (size % 2), std::ios::cur);
    }
  }
  throw Error(ErrorKind::Format, "wav: missing data chunk: " + path);
}

MonoClip read_wav_mono(const std::string& path) {
  WavData data = read_wav(path);
  if (data.channels.size() != 1)
    throw Error(ErrorKind::Format, "wav: expected mono, got " +
                                       std::to_string(data.channels.size()) +
                                       " channels: " + path);
  return {std::move(data.channels[0]), data.sample_rate};
}

BinauralClip read_wav_binaural(const std::string& path) {
  WavData data = read_wav(path);
  if (data.channels.size() != 2)
    throw Error(ErrorKind::Format, "wav: expected stereo, got " +
                                       std::to_string(data.channels.size()) +
                                       " channels: " + path);
  BinauralClip clip{{std::move(data.channels[0]), data.sample_rate},
                    {std::move(data.channels[1]), data.sample_rate}};
  clip.validate();
  return clip;
}

namespace {

void write_wav_impl(const std::string& path, const std::vector<const std::vector<double>*>& chans,
                    int sample_rate, WavEncoding encoding) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidInput, "wav: cannot write " + path);

  const std::uint16_t num_channels = static_cast<std::uint16_t>(chans.size());
  const std::uint32_t num_frames = static_cast<std::uint32_t>(chans[0]->size());
  const bool is_float = encoding == WavEncoding::Float32;
  const std::uint16_t bits = is_float ? 32 : 16;
  const std::uint32_t bytes_per_frame = num_channels * bits / 8;
  const std::uint32_t data_size = num_frames * bytes_per_frame;

  out.write("RIFF", 4);
  write_le<std::uint32_t>(out, 36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_le<std::uint32_t>(out, 16);
  write_le<std::uint16_t>(out, is_float ? kFormatFloat : kFormatPcm);
  write_le<std::uint16_t>(out, num_channels);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(sample_rate));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(sample_rate) * bytes_per_frame);
  write_le<std::uint16_t>(out, static_cast<std::uint16_t>(bytes_per_frame));
  write_le<std::uint16_t>(out, bits);
  out.write("data", 4);
  write_le<std::uint32_t>(out, data_size);

  for (std::uint32_t f = 0; f < num_frames; ++f) {
    for (const auto* ch : chans) {
      const double v = (*ch)[f];
      if (is_float) {
        write_le<std::uint32_t>(out, float_to_bits(static_cast<float>(v)));
      } else {
        const double clamped = std::clamp(v, -1.0, 1.0);
        const int scaled = static_cast<int>(std::lrint(clamped * 32767.0));
        write_le<std::uint16_t>(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
      }
    }
  }
}

}  // namespace

void write_wav(const std::string& path, const BinauralClip& clip, WavEncoding encoding) {
  clip.validate();
  write_wav_impl(path, {&clip.left.samples, &clip.right.samples}, clip.sample_rate(), encoding);
}

void write_wav(const std::string& path, const MonoClip& clip, WavEncoding encoding) {
  clip.validate();
  write_wav_impl(path, {&clip.samples}, clip.sample_rate, encoding);
}

}  // namespace binsim
