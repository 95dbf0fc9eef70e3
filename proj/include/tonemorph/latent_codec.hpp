// Copyright 2026 The tonemorph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "tonemorph/audio_io.hpp"
#include "tonemorph/grid.hpp"
#include "tonemorph/spectral.hpp"

namespace tonemorph {

struct CodecConfig {
  int sample_rate_hz = 44100;
  std::size_t fft_size = 2048;
  std::size_t hop_size = 512;
  std::size_t win_length = 2048;
  std::size_t n_mels = 128;
  double log_floor = 1e-5;
  int gl_iterations = 64;
  /// Griffin-Lim starts from zero phase unless a seed is given.
  std::optional<std::uint64_t> random_phase_seed;

  StftConfig stft_config() const { return {fft_size, hop_size, win_length}; }
  double log_floor_value() const;
  /// Throws ConfigInvalid.
  void validate() const;

  /// Equality of everything that shapes the latent (not the decoder knobs).
  bool same_latent_space(const CodecConfig& other) const noexcept;
};

/// Log-mel latent: values(t, b) = log(max(mel magnitude, log_floor)).
struct MelLatent {
  Grid<double> values;  // T x B
  CodecConfig config;
  std::size_t original_len = 0;

  std::size_t frames() const noexcept { return values.rows; }
  std::size_t bands() const noexcept { return values.cols; }
};

MelLatent encode(const AudioClip& clip, const CodecConfig& cfg);
AudioClip decode(const MelLatent& latent);

struct GriffinLimResult {
  AudioClip audio;
  /// inconsistency[n] = || |STFT(x_n)| - target ||_F for n = 0..iters, where
  /// x_0 is the zero-phase (or seeded random-phase) synthesis.
  std::vector<double> inconsistency;
};

/// Classical alternating projection. `original_len` of 0 means (T - 1) * hop.
GriffinLimResult griffin_lim_traced(const MagnitudeSpectrogram& mags, int iters,
                                    std::size_t original_len = 0,
                                    std::optional<std::uint64_t> random_phase_seed = {});
AudioClip griffin_lim(const MagnitudeSpectrogram& mags, int iters,
                      std::size_t original_len = 0,
                      std::optional<std::uint64_t> random_phase_seed = {});

/// Moore-Penrose pseudo-inverse (K x B) of the B x K filterbank weights.
/// Throws SingularFilterbank when rank < B.
Grid<double> mel_pseudo_inverse(const MelFilterbank& fb);

/// Filterbank and inverse for a codec configuration, built once per process.
struct MelBasis {
  MelFilterbank filterbank;
  Grid<double> inverse;
};
std::shared_ptr<const MelBasis> mel_basis(const CodecConfig& cfg);

// Binary container: "MLAT", u16 version, u32 T, u32 B, u32 sample_rate,
// u32 fft, u32 hop, u32 win, f64 log_floor, u64 original_len, then T * B
// little-endian f32 values, frame-major.
std::vector<std::uint8_t> serialize_latent(const MelLatent& latent);
MelLatent deserialize_latent(std::span<const std::uint8_t> bytes);
void save_latent(const MelLatent& latent, const std::filesystem::path& path);
MelLatent load_latent(const std::filesystem::path& path);

}  // namespace tonemorph
