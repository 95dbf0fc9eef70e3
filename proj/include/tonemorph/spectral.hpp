// Copyright 2026 The tonemorph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "tonemorph/audio_io.hpp"
#include "tonemorph/grid.hpp"

namespace tonemorph {

/// Hann-windowed STFT framing. A window shorter than the FFT is zero-padded
/// symmetrically up to fft_size.
struct StftConfig {
  std::size_t fft_size = 2048;
  std::size_t hop_size = 512;
  std::size_t win_length = 2048;

  std::size_t bins() const noexcept { return fft_size / 2 + 1; }
  /// Throws ConfigInvalid.
  void validate() const;

  friend bool operator==(const StftConfig&, const StftConfig&) = default;
};

/// The three analysis resolutions used for spectral-convergence scoring,
/// in reporting order: 1024/160/600, 2048/240/1200, 512/50/240.
inline constexpr std::array<StftConfig, 3> kScConfigs{{
    {1024, 160, 600},
    {2048, 240, 1200},
    {512, 50, 240},
}};

struct ComplexSpectrogram {
  StftConfig config;
  int sample_rate_hz = 0;
  std::size_t original_len = 0;
  Grid<std::complex<double>> frames;  // T x K
};

struct MagnitudeSpectrogram {
  StftConfig config;
  int sample_rate_hz = 0;
  std::size_t original_len = 0;
  Grid<double> mags;  // T x K
};

/// Frame count for a signal of `len` samples: 1 + floor(len / hop).
std::size_t frame_count(std::size_t len, const StftConfig& cfg);

/// Periodic Hann of win_length, centred inside fft_size zeros.
std::vector<double> analysis_window(const StftConfig& cfg);

ComplexSpectrogram stft(const AudioClip& clip, const StftConfig& cfg);
AudioClip istft(const ComplexSpectrogram& spec);
MagnitudeSpectrogram magnitude(const ComplexSpectrogram& spec);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

struct MelFilterbank {
  Grid<double> weights;  // B x K
  int sample_rate_hz = 0;
  std::size_t fft_size = 0;
  double fmin_hz = 0.0;
  double fmax_hz = 0.0;
  std::vector<double> edges_hz;  // B + 2 points; band b peaks at edges_hz[b + 1]

  std::size_t bands() const noexcept { return weights.rows; }
  double center_hz(std::size_t band) const { return edges_hz[band + 1]; }
  /// Continuous triangle response of one band at an arbitrary frequency.
  double response(std::size_t band, double hz) const;
};

MelFilterbank build_mel(int sample_rate_hz, std::size_t fft_size, std::size_t n_bands,
                        double fmin_hz, double fmax_hz);

/// mags (T x K) times weights^T -> T x B.
Grid<double> apply_mel(const MagnitudeSpectrogram& mags, const MelFilterbank& fb);

namespace detail {

// Griffin-Lim works directly on the centre-padded signal so that each
// overlap-add is the exact least-squares inverse of the framing.

/// Reflect-pads by fft_size / 2 on both sides.
std::vector<double> reflect_pad(std::span<const double> x, std::size_t pad);

/// Frames of an already padded signal: frame m starts at m * hop.
Grid<std::complex<double>> analyze_padded(std::span<const double> padded,
                                          const StftConfig& cfg, std::size_t n_frames);

/// Least-squares overlap-add over the whole padded support. Positions where
/// the window-square envelope is below 1e-8 are set to zero and reported
/// through `envelope`, if given.
std::vector<double> overlap_add(const Grid<std::complex<double>>& frames,
                                const StftConfig& cfg,
                                std::vector<double>* envelope = nullptr);

}  // namespace detail

}  // namespace tonemorph
