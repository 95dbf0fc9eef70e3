// Copyright 2026 The tonemorph Authors
// SPDX-License-Identifier: Apache-2.0

#include "tonemorph/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "tonemorph/error.hpp"

namespace tonemorph {

namespace {

constexpr double kEnvelopeFloor = 1e-8;

// Index into x as if it were reflected (without repeating the edge sample)
// indefinitely in both directions.
std::size_t reflect_index(long i, long n) {
  if (n == 1) return 0;
  const long period = 2 * (n - 1);
  long m = i % period;
  if (m < 0) m += period;
  return static_cast<std::size_t>(m < n ? m : period - m);
}

}  // namespace

void StftConfig::validate() const {
  if (fft_size < 2 || !std::has_single_bit(fft_size)) {
    throw Error(Errc::ConfigInvalid, "fft_size must be a power of two");
  }
  if (hop_size == 0 || hop_size > win_length || win_length > fft_size) {
    throw Error(Errc::ConfigInvalid, "need 0 < hop <= win_length <= fft_size, got " +
                                         std::to_string(hop_size) + "/" +
                                         std::to_string(win_length) + "/" +
                                         std::to_string(fft_size));
  }
}

std::size_t frame_count(std::size_t len, const StftConfig& cfg) {
  return 1 + len / cfg.hop_size;
}

std::vector<double> analysis_window(const StftConfig& cfg) {
  std::vector<double> w(cfg.fft_size, 0.0);
  const std::size_t offset = (cfg.fft_size - cfg.win_length) / 2;
  const double n = static_cast<double>(cfg.win_length);
  for (std::size_t i = 0; i < cfg.win_length; ++i) {
    w[offset + i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / n);
  }
  return w;
}

namespace detail {

std::vector<double> reflect_pad(std::span<const double> x, std::size_t pad) {
  const auto n = static_cast<long>(x.size());
  std::vector<double> out(x.size() + 2 * pad);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = x[reflect_index(static_cast<long>(i) - static_cast<long>(pad), n)];
  }
  return out;
}

Grid<std::complex<double>> analyze_padded(std::span<const double> padded, const StftConfig& cfg,
                                          std::size_t n_frames) {
  const RealFft fft(cfg.fft_size);
  const auto window = analysis_window(cfg);
  Grid<std::complex<double>> frames(n_frames, cfg.bins());
  std::vector<double> buf(cfg.fft_size);
  for (std::size_t m = 0; m < n_frames; ++m) {
    const std::size_t start = m * cfg.hop_size;
    for (std::size_t i = 0; i < cfg.fft_size; ++i) {
      const std::size_t j = start + i;
      buf[i] = j < padded.size() ? padded[j] * window[i] : 0.0;
    }
    fft.forward(buf, frames.row(m));
  }
  return frames;
}

std::vector<double> overlap_add(const Grid<std::complex<double>>& frames, const StftConfig& cfg,
                                std::vector<double>* envelope) {
  const RealFft fft(cfg.fft_size);
  const auto window = analysis_window(cfg);
  const std::size_t len =
      frames.rows == 0 ? 0 : cfg.fft_size + (frames.rows - 1) * cfg.hop_size;
  std::vector<double> out(len, 0.0);
  std::vector<double> env(len, 0.0);
  std::vector<double> buf(cfg.fft_size);
  for (std::size_t m = 0; m < frames.rows; ++m) {
    fft.inverse(frames.row(m), buf);
    const std::size_t start = m * cfg.hop_size;
    for (std::size_t i = 0; i < cfg.fft_size; ++i) {
      out[start + i] += window[i] * buf[i];
      env[start + i] += window[i] * window[i];
    }
  }
  for (std::size_t i = 0; i < len; ++i) {
    out[i] = env[i] >= kEnvelopeFloor ? out[i] / env[i] : 0.0;
  }
  if (envelope != nullptr) *envelope = std::move(env);
  return out;
}

}  // namespace detail

ComplexSpectrogram stft(const AudioClip& clip, const StftConfig& cfg) {
  cfg.validate();
  clip.validate();
  const std::size_t pad = cfg.fft_size / 2;
  const auto padded = detail::reflect_pad(clip.samples, pad);
  ComplexSpectrogram spec;
  spec.config = cfg;
  spec.sample_rate_hz = clip.sample_rate_hz;
  spec.original_len = clip.size();
  spec.frames = detail::analyze_padded(padded, cfg, frame_count(clip.size(), cfg));
  return spec;
}

AudioClip istft(const ComplexSpectrogram& spec) {
  spec.config.validate();
  if (spec.frames.cols != spec.config.bins()) {
    throw Error(Errc::ShapeMismatch, "spectrogram bin count does not match fft_size");
  }
  std::vector<double> env;
  const auto full = detail::overlap_add(spec.frames, spec.config, &env);
  const std::size_t pad = spec.config.fft_size / 2;
  if (pad + spec.original_len > full.size()) {
    throw Error(Errc::NonCola, "frames do not cover the original signal length");
  }
  for (std::size_t i = pad; i < pad + spec.original_len; ++i) {
    if (env[i] < kEnvelopeFloor) {
      throw Error(Errc::NonCola, "window-square envelope vanishes at sample " +
                                     std::to_string(i - pad));
    }
  }
  AudioClip out;
  out.sample_rate_hz = spec.sample_rate_hz;
  out.samples.assign(full.begin() + static_cast<long>(pad),
                     full.begin() + static_cast<long>(pad + spec.original_len));
  return out;
}

MagnitudeSpectrogram magnitude(const ComplexSpectrogram& spec) {
  MagnitudeSpectrogram out;
  out.config = spec.config;
  out.sample_rate_hz = spec.sample_rate_hz;
  out.original_len = spec.original_len;
  out.mags = Grid<double>(spec.frames.rows, spec.frames.cols);
  std::transform(spec.frames.data.begin(), spec.frames.data.end(), out.mags.data.begin(),
                 [](const std::complex<double>& z) { return std::abs(z); });
  return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

double MelFilterbank::response(std::size_t band, double hz) const {
  const double lo = edges_hz[band];
  const double mid = edges_hz[band + 1];
  const double hi = edges_hz[band + 2];
  if (hz <= lo || hz >= hi) return 0.0;
  if (hz == mid) return 1.0;
  return hz < mid ? (hz - lo) / (mid - lo) : (hi - hz) / (hi - mid);
}

MelFilterbank build_mel(int sample_rate_hz, std::size_t fft_size, std::size_t n_bands,
                        double fmin_hz, double fmax_hz) {
  if (sample_rate_hz <= 0 || fft_size < 2) {
    throw Error(Errc::InvalidRange, "sample rate and fft size must be positive");
  }
  if (n_bands < 2 || !(fmin_hz >= 0.0) || !(fmin_hz < fmax_hz) ||
      fmax_hz > 0.5 * sample_rate_hz) {
    throw Error(Errc::InvalidRange, "need n_bands >= 2 and 0 <= fmin < fmax <= sr/2");
  }
  MelFilterbank fb;
  fb.sample_rate_hz = sample_rate_hz;
  fb.fft_size = fft_size;
  fb.fmin_hz = fmin_hz;
  fb.fmax_hz = fmax_hz;

  const double mel_lo = hz_to_mel(fmin_hz);
  const double mel_hi = hz_to_mel(fmax_hz);
  fb.edges_hz.resize(n_bands + 2);
  for (std::size_t i = 0; i < n_bands + 2; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n_bands + 1);
    fb.edges_hz[i] = mel_to_hz(mel_lo + t * (mel_hi - mel_lo));
  }
  fb.edges_hz.front() = fmin_hz;
  fb.edges_hz.back() = fmax_hz;

  const std::size_t bins = fft_size / 2 + 1;
  fb.weights = Grid<double>(n_bands, bins);
  for (std::size_t b = 0; b < n_bands; ++b) {
    for (std::size_t k = 0; k < bins; ++k) {
      const double hz = static_cast<double>(k) * sample_rate_hz / static_cast<double>(fft_size);
      fb.weights(b, k) = fb.response(b, hz);
    }
  }
  return fb;
}

Grid<double> apply_mel(const MagnitudeSpectrogram& mags, const MelFilterbank& fb) {
  if (fb.weights.cols != mags.mags.cols || fb.fft_size != mags.config.fft_size) {
    throw Error(Errc::ShapeMismatch, "filterbank built for a different fft size");
  }
  if (fb.sample_rate_hz != mags.sample_rate_hz) {
    throw Error(Errc::ShapeMismatch, "filterbank built for a different sample rate");
  }
  const std::size_t bands = fb.bands();
  Grid<double> out(mags.mags.rows, bands);
  for (std::size_t t = 0; t < mags.mags.rows; ++t) {
    const auto frame = mags.mags.row(t);
    for (std::size_t b = 0; b < bands; ++b) {
      const auto w = fb.weights.row(b);
      double acc = 0.0;
      for (std::size_t k = 0; k < frame.size(); ++k) acc += w[k] * frame[k];
      out(t, b) = acc;
    }
  }
  return out;
}

}  // namespace tonemorph
