// Copyright 2026 The tonemorph Authors
// SPDX-License-Identifier: Apache-2.0

#include "tonemorph/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tonemorph/error.hpp"
#include "tonemorph/interp.hpp"

namespace tonemorph {

double spectral_convergence(const Grid<double>& estimate, const Grid<double>& target) {
  if (!estimate.same_shape(target)) throw Error(Errc::ShapeMismatch, "spectrogram shapes differ");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < target.data.size(); ++i) {
    const double d = target.data[i] - estimate.data[i];
    num += d * d;
    den += target.data[i] * target.data[i];
  }
  if (!(den > 0.0)) throw Error(Errc::ZeroTarget, "target spectrogram is all zero");
  return std::sqrt(num) / std::sqrt(den);
}

double spectral_convergence(const MagnitudeSpectrogram& estimate,
                            const MagnitudeSpectrogram& target) {
  if (!(estimate.config == target.config)) {
    throw Error(Errc::ShapeMismatch, "spectrograms use different STFT configurations");
  }
  return spectral_convergence(estimate.mags, target.mags);
}

ScReport multi_res_sc(const AudioClip& reference, const AudioClip& estimate) {
  if (reference.sample_rate_hz != estimate.sample_rate_hz) {
    throw Error(Errc::RateMismatch, "reference and estimate sample rates differ");
  }
  const std::size_t len = std::max(reference.size(), estimate.size());
  AudioClip ref = reference;
  AudioClip est = estimate;
  ref.samples.resize(len, 0.0);
  est.samples.resize(len, 0.0);

  ScReport report;
  for (const StftConfig& cfg : kScConfigs) {
    const auto target = magnitude(stft(ref, cfg));
    const auto approx = magnitude(stft(est, cfg));
    report.per_resolution.push_back({cfg, spectral_convergence(approx, target)});
  }
  double sum = 0.0;
  for (const auto& r : report.per_resolution) sum += r.sc;
  report.mean = sum / static_cast<double>(report.per_resolution.size());
  return report;
}

Aggregate aggregate(std::span<const double> values) {
  if (values.empty()) throw Error(Errc::EmptyInput, "nothing to aggregate");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  Aggregate out;
  out.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  const std::size_t mid = sorted.size() / 2;
  out.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return out;
}

Aggregate aggregate(std::span<const ScReport> reports) {
  std::vector<double> means;
  means.reserve(reports.size());
  for (const auto& r : reports) means.push_back(r.mean);
  return aggregate(std::span<const double>(means));
}

double latent_angle(const MelLatent& a, const MelLatent& b) {
  if (!a.values.same_shape(b.values)) throw Error(Errc::ShapeMismatch, "latent shapes differ");
  return angle_between(normalize(flatten(a)).unit, normalize(flatten(b)).unit);
}

LatentDiagnostics latent_diagnostics(const MelLatent& l0, const MelLatent& l1,
                                     const MelLatent& morphed, double alpha) {
  LatentDiagnostics d;
  d.theta0 = latent_angle(l0, l1);
  d.angle_to_a = latent_angle(morphed, l0);
  d.angle_to_b = latent_angle(morphed, l1);
  d.expected_a = alpha * d.theta0;
  return d;
}

}  // namespace tonemorph
