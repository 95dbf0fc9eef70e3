// Copyright 2026 The tonemorph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "tonemorph/audio_io.hpp"
#include "tonemorph/latent_codec.hpp"
#include "tonemorph/spectral.hpp"

namespace tonemorph {

/// Spectral convergence: ||M_t - M_r||_F / ||M_t||_F on linear magnitudes.
/// Throws ShapeMismatch, ZeroTarget.
double spectral_convergence(const Grid<double>& estimate, const Grid<double>& target);
double spectral_convergence(const MagnitudeSpectrogram& estimate,
                            const MagnitudeSpectrogram& target);

struct ScResolutionResult {
  StftConfig config;
  double sc = 0.0;
};

struct ScReport {
  std::vector<ScResolutionResult> per_resolution;
  double mean = 0.0;
};

/// SC at the three scoring resolutions. The shorter clip is zero-padded to the
/// longer one. Throws RateMismatch, ZeroTarget.
ScReport multi_res_sc(const AudioClip& reference, const AudioClip& estimate);

struct Aggregate {
  double mean = 0.0;
  double median = 0.0;
};

/// Mean and median of the per-pair means. Throws EmptyInput.
Aggregate aggregate(std::span<const ScReport> reports);
Aggregate aggregate(std::span<const double> values);

struct LatentDiagnostics {
  double angle_to_a = 0.0;
  double angle_to_b = 0.0;
  double expected_a = 0.0;  // alpha * theta0
  double theta0 = 0.0;
};

/// Angles between the morphed latent and each endpoint in interpolation
/// coordinates. Throws ShapeMismatch, ZeroVector.
LatentDiagnostics latent_diagnostics(const MelLatent& l0, const MelLatent& l1,
                                     const MelLatent& morphed, double alpha);

/// Angle between two latents' interpolation directions.
double latent_angle(const MelLatent& a, const MelLatent& b);

}  // namespace tonemorph
