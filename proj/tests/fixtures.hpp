// Copyright 2026 The tonemorph Authors
// SPDX-License-Identifier: Apache-2.0

// Synthetic signals shared by the test suites.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tonemorph/audio_io.hpp"
#include "tonemorph/interp.hpp"

namespace tonemorph::testing {

inline AudioClip silence(double seconds, int sr) {
  AudioClip clip;
  clip.sample_rate_hz = sr;
  clip.samples.assign(static_cast<std::size_t>(std::llround(seconds * sr)), 0.0);
  return clip;
}

inline AudioClip white_noise(std::uint64_t seed, double seconds, int sr, double amp = 0.5) {
  AudioClip clip = silence(seconds, sr);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-amp, amp);
  for (double& s : clip.samples) s = dist(rng);
  return clip;
}

inline AudioClip sine(double hz, double seconds, int sr, double amp = 0.5, double phase = 0.0) {
  AudioClip clip = silence(seconds, sr);
  for (std::size_t n = 0; n < clip.size(); ++n) {
    clip.samples[n] = amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(n) / sr + phase);
  }
  return clip;
}

/// Sum of partials h * f0 with amplitude 1/h^rolloff, slowly decaying, peak ~0.5.
inline AudioClip harmonic_tone(double f0, int partials, double seconds, int sr,
                               double rolloff = 1.0, double decay_s = 1.5) {
  AudioClip clip = silence(seconds, sr);
  double norm = 0.0;
  for (int h = 1; h <= partials; ++h) norm += 1.0 / std::pow(h, rolloff);
  for (std::size_t n = 0; n < clip.size(); ++n) {
    const double t = static_cast<double>(n) / sr;
    double acc = 0.0;
    for (int h = 1; h <= partials; ++h) {
      if (h * f0 >= 0.5 * sr) break;
      acc += std::sin(2.0 * std::numbers::pi * h * f0 * t) / std::pow(h, rolloff);
    }
    clip.samples[n] = 0.5 * std::exp(-t / decay_s) * acc / norm;
  }
  return clip;
}

inline constexpr double kSteady = 1e9;

inline constexpr std::array<double, 5> kCalibrationPitches{440.0, 493.88, 554.37, 659.26, 880.0};

/// The five-tone codec calibration set: three 1/h partials, steady, 2 s at
/// 44.1 kHz, at A4 B4 C#5 E5 A5.
inline std::vector<AudioClip> harmonic_fixture_set() {
  std::vector<AudioClip> out;
  for (double f0 : kCalibrationPitches) out.push_back(harmonic_tone(f0, 3, 2.0, 44100, 1.0, kSteady));
  return out;
}

inline AudioClip impulse(std::size_t len, std::size_t at, int sr, double amp = 1.0) {
  AudioClip clip;
  clip.sample_rate_hz = sr;
  clip.samples.assign(len, 0.0);
  clip.samples[at] = amp;
  return clip;
}

inline double relative_l2(std::span<const double> ref, std::span<const double> est) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    num += (ref[i] - est[i]) * (ref[i] - est[i]);
    den += ref[i] * ref[i];
  }
  return std::sqrt(num / den);
}

/// Direct O(N^2) DFT magnitude of a real signal; independent of the FFT path.
inline std::vector<double> dft_magnitude(std::span<const double> x, std::size_t bins) {
  std::vector<double> out(bins);
  const double n = static_cast<double>(x.size());
  for (std::size_t k = 0; k < bins; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      acc += x[i] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * i % x.size()) / n);
    }
    out[k] = std::abs(acc);
  }
  return out;
}

inline LatentVector random_vector(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> dist(0.0, 1.0);
  LatentVector v;
  v.data.resize(dim);
  for (double& x : v.data) x = dist(rng);
  return v;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tonemorph_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace tonemorph::testing
