// Copyright 2026 The retmsep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "retmsep/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "retmsep/errors.hpp"

namespace retmsep {
namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::string codec_name(std::uint16_t code) {
  switch (code) {
    case kFormatPcm: return "PCM";
    case kFormatFloat: return "IEEE float";
    case 0x0002: return "ADPCM";
    case 0x0006: return "A-law";
    case 0x0007: return "mu-law";
    case 0x0055: return "MP3";
    default: return "format 0x" + std::to_string(code);
  }
}

struct ByteReader {
  const std::vector<char>& buf;
  std::size_t pos = 0;
  const std::string& file;

  void require(std::size_t n) const {
    if (pos + n > buf.size()) {
      throw InputError("truncated WAV file: " + file);
    }
  }
  std::uint32_t u32() {
    require(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i]))
           << (8 * i);
    pos += 4;
    return v;
  }
  std::uint16_t u16() {
    require(2);
    std::uint16_t v = 0;
    for (int i = 0; i < 2; ++i)
      v |= static_cast<std::uint16_t>(static_cast<unsigned char>(buf[pos + i]))
           << (8 * i);
    pos += 2;
    return v;
  }
  std::string tag() {
    require(4);
    std::string t(buf.data() + pos, 4);
    pos += 4;
    return t;
  }
};

void put_u32(std::vector<char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u16(std::vector<char>& out, std::uint16_t v) {
  for (int i = 0; i < 2; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_tag(std::vector<char>& out, const char* t) {
  out.insert(out.end(), t, t + 4);
}

// Zeroth-order modified Bessel function, power series.
double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double x2 = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= x2 / (k * k);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = M_PI * x;
  return std::sin(px) / px;
}

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open WAV file: " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  const std::string file = path.string();
  ByteReader r{buf, 0, file};

  if (r.tag() != "RIFF") throw InputError("not a RIFF file: " + file);
  r.u32();  // riff size; trust chunk walk instead
  if (r.tag() != "WAVE") throw InputError("not a WAVE file: " + file);

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t data_pos = 0, data_len = 0;
  bool have_data = false;

  while (r.pos + 8 <= buf.size()) {
    const std::string id = r.tag();
    const std::uint32_t size = r.u32();
    if (id == "fmt ") {
      const std::size_t fmt_end = r.pos + size;
      format = r.u16();
      channels = r.u16();
      rate = r.u32();
      r.u32();  // byte rate
      r.u16();  // block align
      bits = r.u16();
      if (format == kFormatExtensible) {
        if (size < 40) throw InputError("truncated WAV file: " + file);
        r.u16();  // cbSize
        r.u16();  // valid bits
        r.u32();  // channel mask
        format = r.u16();  // first two bytes of the subformat GUID
      }
      r.pos = fmt_end;
      have_fmt = true;
    } else if (id == "data") {
      data_pos = r.pos;
      data_len = size;
      have_data = true;
      if (data_pos + data_len > buf.size()) {
        throw InputError("truncated WAV file: " + file);
      }
      r.pos += size;
    } else {
      r.require(size);
      r.pos += size;
    }
    if (r.pos % 2 == 1) ++r.pos;  // chunks are word aligned
  }

  if (!have_fmt || !have_data) {
    throw InputError("missing fmt/data chunk in WAV file: " + file);
  }
  if (channels == 0 || rate == 0) {
    throw InputError("invalid WAV header in " + file);
  }

  int bytes_per_sample = 0;
  if (format == kFormatPcm && bits == 16) {
    bytes_per_sample = 2;
  } else if (format == kFormatPcm && bits == 24) {
    bytes_per_sample = 3;
  } else if (format == kFormatFloat && bits == 32) {
    bytes_per_sample = 4;
  } else {
    throw InputError("unsupported WAV codec in " + file + ": " +
                     codec_name(format) + " at " + std::to_string(bits) +
                     " bits");
  }

  const std::size_t frame_bytes =
      static_cast<std::size_t>(bytes_per_sample) * channels;
  const std::size_t frames = frame_bytes ? data_len / frame_bytes : 0;

  AudioBuffer audio;
  audio.sample_rate = rate;
  audio.samples.resize(channels, static_cast<Eigen::Index>(frames));

  const unsigned char* p =
      reinterpret_cast<const unsigned char*>(buf.data()) + data_pos;
  for (std::size_t n = 0; n < frames; ++n) {
    for (int c = 0; c < channels; ++c) {
      double v = 0.0;
      if (bytes_per_sample == 2) {
        const std::int16_t s = static_cast<std::int16_t>(p[0] | (p[1] << 8));
        v = s / 32768.0;
        p += 2;
      } else if (bytes_per_sample == 3) {
        std::int32_t s = p[0] | (p[1] << 8) | (p[2] << 16);
        if (s & 0x800000) s |= ~0xFFFFFF;  // sign extend
        v = s / 8388608.0;
        p += 3;
      } else {
        float f;
        std::memcpy(&f, p, 4);
        v = f;
        p += 4;
      }
      audio.samples(c, static_cast<Eigen::Index>(n)) = v;
    }
  }
  return audio;
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio,
               SampleFormat format) {
  if (audio.channels() < 1) {
    throw ContractViolation("write_wav: buffer must have at least one channel");
  }
  if (audio.sample_rate <= 0) {
    throw ContractViolation("write_wav: sample rate must be positive");
  }
  if (!audio.samples.allFinite()) {
    throw ContractViolation("write_wav: non-finite samples");
  }

  const int channels = audio.channels();
  const long frames = audio.length();
  const std::uint32_t rate = static_cast<std::uint32_t>(audio.sample_rate);
  const int bytes_per_sample = format == SampleFormat::Pcm16 ? 2 : 4;
  const std::uint16_t fmt_code =
      format == SampleFormat::Pcm16 ? kFormatPcm : kFormatFloat;
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(frames) * channels * bytes_per_sample;
  const bool with_fact = format == SampleFormat::Float32;

  std::vector<char> out;
  out.reserve(data_bytes + 64);
  put_tag(out, "RIFF");
  put_u32(out, 4 + (8 + 16) + (with_fact ? 8 + 4 : 0) + 8 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, fmt_code);
  put_u16(out, static_cast<std::uint16_t>(channels));
  put_u32(out, rate);
  put_u32(out, rate * channels * bytes_per_sample);
  put_u16(out, static_cast<std::uint16_t>(channels * bytes_per_sample));
  put_u16(out, static_cast<std::uint16_t>(8 * bytes_per_sample));
  if (with_fact) {
    put_tag(out, "fact");
    put_u32(out, 4);
    put_u32(out, static_cast<std::uint32_t>(frames));
  }
  put_tag(out, "data");
  put_u32(out, data_bytes);

  for (long n = 0; n < frames; ++n) {
    for (int c = 0; c < channels; ++c) {
      const double v = audio.samples(c, n);
      if (format == SampleFormat::Pcm16) {
        const double scaled = std::clamp(v, -1.0, 32767.0 / 32768.0) * 32768.0;
        const std::int16_t s =
            static_cast<std::int16_t>(std::lround(scaled) > 32767
                                          ? 32767
                                          : std::lround(scaled));
        put_u16(out, static_cast<std::uint16_t>(s));
      } else {
        const float f = static_cast<float>(v);
        std::uint32_t bitsv;
        std::memcpy(&bitsv, &f, 4);
        put_u32(out, bitsv);
      }
    }
  }

  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open for writing: " + path.string());
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw InputError("write failed: " + path.string());
}

AudioBuffer resample(const AudioBuffer& audio, double target_rate) {
  if (target_rate <= 0) {
    throw ContractViolation("resample: target rate must be positive");
  }
  if (audio.sample_rate <= 0) {
    throw ContractViolation("resample: source rate must be positive");
  }
  if (audio.sample_rate == target_rate) return audio;

  const double ratio = target_rate / audio.sample_rate;
  const long in_len = audio.length();
  const long out_len = static_cast<long>(std::floor(in_len * ratio));
  // Cutoff at the narrower Nyquist; Kaiser beta 8.6 keeps the stopband
  // below -80 dB with 64 taps.
  const double fc = 0.95 * std::min(1.0, ratio);
  const int half_width = 32;
  const double beta = 8.6;
  const double i0_beta = bessel_i0(beta);

  AudioBuffer out;
  out.sample_rate = target_rate;
  out.samples.setZero(audio.channels(), out_len);

  for (int c = 0; c < audio.channels(); ++c) {
    for (long n = 0; n < out_len; ++n) {
      const double t = n / ratio;
      const long j0 = static_cast<long>(std::ceil(t)) - half_width;
      const long j1 = static_cast<long>(std::floor(t)) + half_width;
      double acc = 0.0;
      for (long j = std::max<long>(0, j0); j <= std::min(in_len - 1, j1); ++j) {
        const double u = (j - t) / half_width;  // in [-1, 1]
        const double w = bessel_i0(beta * std::sqrt(1.0 - u * u)) / i0_beta;
        acc += audio.samples(c, j) * fc * sinc(fc * (j - t)) * w;
      }
      out.samples(c, n) = acc;
    }
  }
  return out;
}

}  // namespace retmsep
