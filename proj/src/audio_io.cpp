// Copyright 2026 The tonemorph Authors
// SPDX-License-Identifier: Apache-2.0

#include "tonemorph/audio_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>
#include <string>

#include "tonemorph/error.hpp"

namespace tonemorph {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t load_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t load_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void store_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void store_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

bool tag_is(const std::uint8_t* p, const char* tag) {
  return std::memcmp(p, tag, 4) == 0;
}

double decode_sample(const std::uint8_t* p, std::uint16_t format, int bits) {
  if (format == kFormatFloat) {
    const float f = std::bit_cast<float>(load_u32(p));
    return static_cast<double>(f);
  }
  if (bits == 16) {
    const auto v = static_cast<std::int16_t>(load_u16(p));
    return static_cast<double>(v) / 32768.0;
  }
  // 24-bit, sign-extended from the top byte.
  std::int32_t v = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
  if (v & 0x800000) v -= 0x1000000;
  return static_cast<double>(v) / 8388608.0;
}

double kaiser(double x, double beta) {
  // x in [-1, 1]
  const double arg = std::max(0.0, 1.0 - x * x);
  return std::cyl_bessel_i(0.0, beta * std::sqrt(arg)) / std::cyl_bessel_i(0.0, beta);
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

void AudioClip::validate() const {
  if (sample_rate_hz <= 0) {
    throw Error(Errc::InvalidRate, "sample rate must be positive");
  }
  if (samples.empty()) throw Error(Errc::EmptyAudio, "clip has no samples");
  for (double s : samples) {
    if (!std::isfinite(s)) throw Error(Errc::InvalidArgument, "non-finite sample");
  }
}

AudioClip decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !tag_is(bytes.data(), "RIFF") ||
      !tag_is(bytes.data() + 8, "WAVE")) {
    throw Error(Errc::UnsupportedFormat, "not a RIFF/WAVE stream");
  }

  bool have_fmt = false;
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
  std::uint16_t block_align = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = load_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (tag_is(chunk, "fmt ")) {
      if (size < 16 || body + size > bytes.size()) {
        throw Error(Errc::CorruptHeader, "truncated fmt chunk");
      }
      const std::uint8_t* f = bytes.data() + body;
      format = load_u16(f);
      channels = load_u16(f + 2);
      rate = load_u32(f + 4);
      block_align = load_u16(f + 12);
      bits = load_u16(f + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw Error(Errc::CorruptHeader, "truncated extensible fmt");
        format = load_u16(f + 24);
      }
      have_fmt = true;
    } else if (tag_is(chunk, "data")) {
      if (!have_fmt) throw Error(Errc::CorruptHeader, "data chunk before fmt chunk");
      data = bytes.data() + body;
      // Tolerate writers that leave a placeholder size in streamed files.
      data_size = std::min<std::size_t>(size, bytes.size() - body);
      break;
    }
    pos = body + size + (size & 1u);
  }

  if (!have_fmt) throw Error(Errc::CorruptHeader, "missing fmt chunk");
  if (format != kFormatPcm && format != kFormatFloat) {
    throw Error(Errc::UnsupportedFormat, "codec tag " + std::to_string(format));
  }
  if (channels < 1 || channels > 2) {
    throw Error(Errc::UnsupportedFormat, std::to_string(channels) + " channels");
  }
  const bool pcm_ok = format == kFormatPcm && (bits == 16 || bits == 24);
  const bool float_ok = format == kFormatFloat && bits == 32;
  if (!pcm_ok && !float_ok) {
    throw Error(Errc::UnsupportedFormat, std::to_string(bits) + "-bit samples");
  }
  const std::size_t bytes_per_sample = bits / 8u;
  if (rate == 0 || block_align != bytes_per_sample * channels) {
    throw Error(Errc::CorruptHeader, "inconsistent rate or block alignment");
  }
  if (data == nullptr) throw Error(Errc::CorruptHeader, "missing data chunk");

  const std::size_t frames = data_size / block_align;
  if (frames == 0) throw Error(Errc::EmptyAudio, "data chunk holds no frames");

  AudioClip clip;
  clip.sample_rate_hz = static_cast<int>(rate);
  clip.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const std::uint8_t* frame = data + i * block_align;
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      acc += decode_sample(frame + c * bytes_per_sample, format, bits);
    }
    clip.samples[i] = channels == 2 ? 0.5 * acc : acc;
  }
  clip.validate();
  return clip;
}

std::vector<std::uint8_t> encode_wav(const AudioClip& clip) {
  clip.validate();
  const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 4);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  store_tag(out, "RIFF");
  store_u32(out, 36 + data_bytes);
  store_tag(out, "WAVE");
  store_tag(out, "fmt ");
  store_u32(out, 16);
  store_u16(out, kFormatFloat);
  store_u16(out, 1);
  store_u32(out, static_cast<std::uint32_t>(clip.sample_rate_hz));
  store_u32(out, static_cast<std::uint32_t>(clip.sample_rate_hz) * 4);
  store_u16(out, 4);
  store_u16(out, 32);
  store_tag(out, "data");
  store_u32(out, data_bytes);
  for (double s : clip.samples) {
    store_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
  }
  return out;
}

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

void write_wav(const AudioClip& clip, const std::filesystem::path& path) {
  const auto bytes = encode_wav(clip);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoError, "short write to " + path.string());
}

AudioClip resample(const AudioClip& clip, int target_sr_hz) {
  if (target_sr_hz <= 0) throw Error(Errc::InvalidRate, "target rate must be positive");
  clip.validate();
  if (target_sr_hz == clip.sample_rate_hz) return clip;

  constexpr double kBeta = 8.6;
  constexpr int kTapsPerPhase = 64;

  const long g = std::gcd(static_cast<long>(clip.sample_rate_hz), static_cast<long>(target_sr_hz));
  const long up = target_sr_hz / g;
  const long down = clip.sample_rate_hz / g;
  const double cutoff = std::min(1.0, static_cast<double>(up) / static_cast<double>(down));
  const double half_width = 0.5 * kTapsPerPhase / cutoff;  // in input samples
  const long reach = static_cast<long>(std::ceil(half_width));
  const long taps = 2 * reach;

  const auto n_in = static_cast<long>(clip.samples.size());
  const auto n_out = static_cast<long>(std::llround(
      static_cast<double>(n_in) * target_sr_hz / clip.sample_rate_hz));

  // Taps for phase p cover input offsets j in [-reach + 1, reach] relative to
  // floor(t); each phase is normalized to unit DC gain.
  auto phase_taps = [&](long phase, double* dst) {
    const double frac = static_cast<double>(phase) / static_cast<double>(up);
    double sum = 0.0;
    for (long j = -reach + 1; j <= reach; ++j) {
      const double tau = frac - static_cast<double>(j);
      double h = 0.0;
      if (std::abs(tau) < half_width) {
        h = cutoff * sinc(cutoff * tau) * kaiser(tau / half_width, kBeta);
      }
      dst[j + reach - 1] = h;
      sum += h;
    }
    if (sum != 0.0) {
      for (long i = 0; i < taps; ++i) dst[i] /= sum;
    }
  };

  constexpr long kMaxTabulatedPhases = 8192;
  const bool tabulate = up <= kMaxTabulatedPhases;
  std::vector<double> table;
  if (tabulate) {
    table.resize(static_cast<std::size_t>(up * taps));
    for (long p = 0; p < up; ++p) phase_taps(p, table.data() + p * taps);
  }
  std::vector<double> scratch(tabulate ? 0 : static_cast<std::size_t>(taps));

  AudioClip out;
  out.sample_rate_hz = target_sr_hz;
  out.samples.resize(static_cast<std::size_t>(std::max(n_out, 1L)));
  for (long n = 0; n < static_cast<long>(out.samples.size()); ++n) {
    const long pos = n * down;
    const long base = pos / up;
    const long phase = pos % up;
    const double* h = nullptr;
    if (tabulate) {
      h = table.data() + phase * taps;
    } else {
      phase_taps(phase, scratch.data());
      h = scratch.data();
    }
    double acc = 0.0;
    for (long i = 0; i < taps; ++i) {
      const long k = base - reach + 1 + i;
      if (k >= 0 && k < n_in) acc += h[i] * clip.samples[static_cast<std::size_t>(k)];
    }
    out.samples[static_cast<std::size_t>(n)] = acc;
  }
  return out;
}

AudioClip peak_normalize(const AudioClip& clip, double peak) {
  double max_abs = 0.0;
  for (double s : clip.samples) max_abs = std::max(max_abs, std::abs(s));
  AudioClip out = clip;
  if (max_abs == 0.0) return out;
  const double gain = peak / max_abs;
  for (double& s : out.samples) s *= gain;
  return out;
}

}  // namespace tonemorph
