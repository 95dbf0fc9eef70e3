// Copyright 2026 The tonemorph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "tonemorph/audio_io.hpp"
#include "tonemorph/latent_codec.hpp"

namespace tonemorph {

struct LatentVector {
  std::vector<double> data;

  std::size_t dim() const noexcept { return data.size(); }
};

struct Normalized {
  LatentVector unit;
  double norm = 0.0;
};

/// v / ||v||. Throws ZeroVector.
Normalized normalize(const LatentVector& v);

double dot(const LatentVector& a, const LatentVector& b);
double norm(const LatentVector& v);

/// Angle in [0, pi] between two unit vectors (within 1e-9 of unit norm,
/// else NotUnit). Evaluated as 2 atan2(|u0 - u1|, |u0 + u1|), which equals
/// arccos(u0 . u1) but keeps full precision near 0 and pi.
double angle_between(const LatentVector& u0, const LatentVector& u1);

/// (1 - alpha) a + alpha b. Throws DimMismatch / InvalidArgument.
LatentVector lerp(const LatentVector& a, const LatentVector& b, double alpha);

inline constexpr double kDefaultSmallAngle = 1e-4;

/// Great-circle interpolation between the directions of v0 and v1. The result
/// is always unit length. Angles below `small_angle` fall back to normalized
/// LERP; angles within `small_angle` of pi raise AntipodalAmbiguous.
LatentVector slerp(const LatentVector& v0, const LatentVector& v1, double alpha,
                   double small_angle = kDefaultSmallAngle);

/// Per-band statistics over time frames (population std).
struct ChannelStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

ChannelStats channel_stats(const MelLatent& latent);
ChannelStats lerp(const ChannelStats& a, const ChannelStats& b, double alpha);

inline constexpr double kDefaultSigmaFloor = 1e-8;

/// Re-standardizes each band of x to the target mean / std. Bands whose own
/// std is below sigma_floor become the target mean.
MelLatent adain(const MelLatent& x, const ChannelStats& target,
                double sigma_floor = kDefaultSigmaFloor);

enum class NormPolicy { LerpNorm, KeepA, KeepB };

struct MorphSpec {
  double alpha = 0.5;
  bool use_adain = false;
  double small_angle = kDefaultSmallAngle;
  NormPolicy norm_policy = NormPolicy::LerpNorm;

  void validate() const;
};

/// The interpolation coordinates of a latent: its values measured from the
/// log floor, flattened frame-major. Every coordinate is >= 0, so convex
/// spherical combinations never cross the floor.
LatentVector flatten(const MelLatent& latent);
/// Inverse of flatten with the shape and config of `like`.
MelLatent unflatten(const LatentVector& v, const MelLatent& like);

/// Keeps the first `frames` frames; original_len shrinks to match.
MelLatent trim_frames(const MelLatent& latent, std::size_t frames, std::size_t original_len);

/// Both latents cut to the shorter one.
std::pair<MelLatent, MelLatent> align_latents(const MelLatent& a, const MelLatent& b);

/// SLERP of the two latents' directions with a reattached norm, then
/// optional AdaIN towards the alpha-interpolated band statistics. Endpoints
/// (alpha 0 or 1 without AdaIN) and identical inputs return an exact copy.
MelLatent morph_latent(const MelLatent& l0, const MelLatent& l1, const MorphSpec& spec);

/// alpha_i = i / (steps - 1), both ends included.
std::vector<double> alpha_grid(int steps);

/// Resample + encode + align two clips. Throws TooShort below two frames.
std::pair<MelLatent, MelLatent> encode_pair(const AudioClip& a, const AudioClip& b,
                                            const CodecConfig& cfg);

/// Decoded morphs at alpha_grid(steps); spec.alpha is ignored.
std::vector<AudioClip> morph_trajectory(const AudioClip& a, const AudioClip& b, int steps,
                                        const MorphSpec& spec, const CodecConfig& cfg);

}  // namespace tonemorph
