// Copyright 2026 The tonemorph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace tonemorph {

/// Mono waveform. Samples are nominally in [-1, 1] but never clipped.
struct AudioClip {
  std::vector<double> samples;
  int sample_rate_hz = 44100;

  std::size_t size() const noexcept { return samples.size(); }
  double duration_s() const noexcept {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }

  /// Throws EmptyAudio / InvalidRate / InvalidArgument on a broken invariant.
  void validate() const;
};

// RIFF/WAVE. Decoding accepts PCM16, PCM24 and float32 with one or two
// channels (stereo is averaged). Encoding always produces mono float32.
AudioClip decode_wav(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_wav(const AudioClip& clip);

AudioClip read_wav(const std::filesystem::path& path);
void write_wav(const AudioClip& clip, const std::filesystem::path& path);

/// Band-limited rational resampling with a Kaiser-windowed sinc (beta 8.6,
/// 64 taps per phase at the lower of the two rates). Output length is
/// round(len * target / source); equal rates return the input untouched.
AudioClip resample(const AudioClip& clip, int target_sr_hz);

/// Scales so that max |sample| == peak. Silent clips are returned as is.
AudioClip peak_normalize(const AudioClip& clip, double peak = 1.0);

}  // namespace tonemorph
