// Copyright 2026 The tonemorph Authors
// SPDX-License-Identifier: Apache-2.0

#include "tonemorph/interp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tonemorph/error.hpp"

namespace tonemorph {

namespace {

constexpr double kUnitTolerance = 1e-9;

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(Errc::InvalidArgument, "alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
}

void check_dims(const LatentVector& a, const LatentVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(Errc::DimMismatch,
                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
}

void check_same_space(const MelLatent& a, const MelLatent& b) {
  if (!a.config.same_latent_space(b.config)) {
    throw Error(Errc::ConfigMismatch, "latents come from different codec configurations");
  }
  if (!a.values.same_shape(b.values)) {
    throw Error(Errc::ShapeMismatch, "latent shapes differ");
  }
}

}  // namespace

double dot(const LatentVector& a, const LatentVector& b) {
  check_dims(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) acc += a.data[i] * b.data[i];
  return acc;
}

double norm(const LatentVector& v) {
  double acc = 0.0;
  for (double x : v.data) acc += x * x;
  return std::sqrt(acc);
}

Normalized normalize(const LatentVector& v) {
  const double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(Errc::ZeroVector, "cannot normalize a zero or non-finite vector");
  }
  Normalized out;
  out.norm = n;
  out.unit.data.resize(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) out.unit.data[i] = v.data[i] / n;
  return out;
}

double angle_between(const LatentVector& u0, const LatentVector& u1) {
  check_dims(u0, u1);
  if (std::abs(norm(u0) - 1.0) > kUnitTolerance || std::abs(norm(u1) - 1.0) > kUnitTolerance) {
    throw Error(Errc::NotUnit, "angle_between expects unit vectors");
  }
  double diff = 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < u0.dim(); ++i) {
    const double d = u0.data[i] - u1.data[i];
    const double s = u0.data[i] + u1.data[i];
    diff += d * d;
    sum += s * s;
  }
  return 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
}

LatentVector lerp(const LatentVector& a, const LatentVector& b, double alpha) {
  check_dims(a, b);
  check_alpha(alpha);
  LatentVector out;
  out.data.resize(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    out.data[i] = (1.0 - alpha) * a.data[i] + alpha * b.data[i];
  }
  return out;
}

LatentVector slerp(const LatentVector& v0, const LatentVector& v1, double alpha,
                   double small_angle) {
  check_dims(v0, v1);
  check_alpha(alpha);
  if (!(small_angle > 0.0)) throw Error(Errc::InvalidArgument, "small_angle must be > 0");
  // One reduction pass gathers |a|^2, |b|^2 and a.b (four partial sums per
  // reduction keep the adds pipelined). Away from theta = 0 and pi the
  // half-angle form of the cosine is accurate to ~1e-12; close to either end
  // the unit difference / sum norms are accumulated explicitly, as in
  // angle_between.
  const std::size_t n = v0.dim();
  const double* a = v0.data.data();
  const double* b = v1.data.data();
  double paa[4] = {};
  double pbb[4] = {};
  double pab[4] = {};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (std::size_t k = 0; k < 4; ++k) {
      paa[k] += a[i + k] * a[i + k];
      pbb[k] += b[i + k] * b[i + k];
      pab[k] += a[i + k] * b[i + k];
    }
  }
  for (; i < n; ++i) {
    paa[0] += a[i] * a[i];
    pbb[0] += b[i] * b[i];
    pab[0] += a[i] * b[i];
  }
  const double n0 = std::sqrt((paa[0] + paa[1]) + (paa[2] + paa[3]));
  const double n1 = std::sqrt((pbb[0] + pbb[1]) + (pbb[2] + pbb[3]));
  if (!(n0 > 0.0) || !(n1 > 0.0) || !std::isfinite(n0) || !std::isfinite(n1)) {
    throw Error(Errc::ZeroVector, "cannot normalize a zero or non-finite vector");
  }
  const double r0 = 1.0 / n0;
  const double r1 = 1.0 / n1;
  const double c = std::clamp(((pab[0] + pab[1]) + (pab[2] + pab[3])) * r0 * r1, -1.0, 1.0);
  double diff = 2.0 - 2.0 * c;
  double sum = 2.0 + 2.0 * c;
  if (std::min(diff, sum) < 2e-4) {
    double pd[4] = {};
    double ps[4] = {};
    for (i = 0; i + 4 <= n; i += 4) {
      for (std::size_t k = 0; k < 4; ++k) {
        const double x = a[i + k] * r0;
        const double y = b[i + k] * r1;
        pd[k] += (x - y) * (x - y);
        ps[k] += (x + y) * (x + y);
      }
    }
    for (; i < n; ++i) {
      const double x = a[i] * r0;
      const double y = b[i] * r1;
      pd[0] += (x - y) * (x - y);
      ps[0] += (x + y) * (x + y);
    }
    diff = (pd[0] + pd[1]) + (pd[2] + pd[3]);
    sum = (ps[0] + ps[1]) + (ps[2] + ps[3]);
  }
  const double theta = 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));

  if (theta > std::numbers::pi - small_angle) {
    throw Error(Errc::AntipodalAmbiguous, "endpoints are (nearly) opposite; geodesic undefined");
  }
  LatentVector out;
  out.data.resize(n);
  if (theta < small_angle) {
    for (i = 0; i < n; ++i) out.data[i] = (1.0 - alpha) * (a[i] * r0) + alpha * (b[i] * r1);
    return normalize(out).unit;
  }
  const double s = std::sin(theta);
  const double c0 = std::sin((1.0 - alpha) * theta) / s;
  const double c1 = std::sin(alpha * theta) / s;
  const double k0 = c0 * r0;
  const double k1 = c1 * r1;
  for (i = 0; i < n; ++i) out.data[i] = k0 * a[i] + k1 * b[i];
  return out;
}

ChannelStats channel_stats(const MelLatent& latent) {
  const std::size_t frames = latent.frames();
  const std::size_t bands = latent.bands();
  if (frames == 0) throw Error(Errc::TooShort, "latent has no frames");
  ChannelStats stats;
  stats.mean.assign(bands, 0.0);
  stats.stddev.assign(bands, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t b = 0; b < bands; ++b) stats.mean[b] += latent.values(t, b);
  }
  for (double& m : stats.mean) m /= static_cast<double>(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t b = 0; b < bands; ++b) {
      const double d = latent.values(t, b) - stats.mean[b];
      stats.stddev[b] += d * d;
    }
  }
  for (double& s : stats.stddev) s = std::sqrt(s / static_cast<double>(frames));
  return stats;
}

ChannelStats lerp(const ChannelStats& a, const ChannelStats& b, double alpha) {
  check_alpha(alpha);
  if (a.mean.size() != b.mean.size() || a.stddev.size() != b.stddev.size()) {
    throw Error(Errc::BandMismatch, "statistics cover different band counts");
  }
  ChannelStats out;
  out.mean.resize(a.mean.size());
  out.stddev.resize(a.stddev.size());
  for (std::size_t i = 0; i < a.mean.size(); ++i) {
    out.mean[i] = (1.0 - alpha) * a.mean[i] + alpha * b.mean[i];
    out.stddev[i] = (1.0 - alpha) * a.stddev[i] + alpha * b.stddev[i];
  }
  return out;
}

MelLatent adain(const MelLatent& x, const ChannelStats& target, double sigma_floor) {
  const std::size_t bands = x.bands();
  if (target.mean.size() != bands || target.stddev.size() != bands) {
    throw Error(Errc::BandMismatch, "target statistics have " +
                                        std::to_string(target.mean.size()) + " bands, latent has " +
                                        std::to_string(bands));
  }
  const ChannelStats own = channel_stats(x);
  MelLatent out = x;
  for (std::size_t b = 0; b < bands; ++b) {
    const bool degenerate = own.stddev[b] < sigma_floor;
    const double gain = degenerate ? 0.0 : target.stddev[b] / own.stddev[b];
    for (std::size_t t = 0; t < x.frames(); ++t) {
      out.values(t, b) = degenerate ? target.mean[b]
                                    : gain * (x.values(t, b) - own.mean[b]) + target.mean[b];
    }
  }
  return out;
}

void MorphSpec::validate() const {
  check_alpha(alpha);
  if (!(small_angle > 0.0)) throw Error(Errc::InvalidArgument, "small_angle must be > 0");
}

LatentVector flatten(const MelLatent& latent) {
  const double floor = latent.config.log_floor_value();
  LatentVector v;
  v.data.resize(latent.values.data.size());
  for (std::size_t i = 0; i < v.dim(); ++i) v.data[i] = latent.values.data[i] - floor;
  return v;
}

MelLatent unflatten(const LatentVector& v, const MelLatent& like) {
  if (v.dim() != like.values.data.size()) {
    throw Error(Errc::ShapeMismatch, "vector length does not match latent shape");
  }
  const double floor = like.config.log_floor_value();
  MelLatent out = like;
  for (std::size_t i = 0; i < v.dim(); ++i) out.values.data[i] = v.data[i] + floor;
  return out;
}

MelLatent trim_frames(const MelLatent& latent, std::size_t frames, std::size_t original_len) {
  if (frames == 0 || frames > latent.frames()) {
    throw Error(Errc::ShapeMismatch, "cannot trim to " + std::to_string(frames) + " frames");
  }
  MelLatent out;
  out.config = latent.config;
  out.original_len = std::min(original_len, latent.original_len);
  out.values = Grid<double>(frames, latent.bands());
  std::copy_n(latent.values.data.begin(), frames * latent.bands(), out.values.data.begin());
  return out;
}

std::pair<MelLatent, MelLatent> align_latents(const MelLatent& a, const MelLatent& b) {
  if (!a.config.same_latent_space(b.config)) {
    throw Error(Errc::ConfigMismatch, "latents come from different codec configurations");
  }
  const std::size_t frames = std::min(a.frames(), b.frames());
  const std::size_t len = std::min(a.original_len, b.original_len);
  return {trim_frames(a, frames, len), trim_frames(b, frames, len)};
}

MelLatent morph_latent(const MelLatent& l0, const MelLatent& l1, const MorphSpec& spec) {
  spec.validate();
  check_same_space(l0, l1);

  MelLatent out;
  const bool identical = l0.values == l1.values;
  if (spec.alpha == 0.0 || identical) {
    out = l0;
  } else if (spec.alpha == 1.0) {
    out = l1;
  } else {
    const LatentVector v0 = flatten(l0);
    const LatentVector v1 = flatten(l1);
    const double n0 = norm(v0);
    const double n1 = norm(v1);
    LatentVector mixed;
    if (n0 == 0.0 || n1 == 0.0) {
      // One endpoint sits at the floor everywhere: no direction to rotate
      // from, so the path is the straight line towards the other endpoint.
      mixed = lerp(v0, v1, spec.alpha);
    } else {
      mixed = slerp(v0, v1, spec.alpha, spec.small_angle);
      double scale = 0.0;
      switch (spec.norm_policy) {
        case NormPolicy::LerpNorm: scale = (1.0 - spec.alpha) * n0 + spec.alpha * n1; break;
        case NormPolicy::KeepA: scale = n0; break;
        case NormPolicy::KeepB: scale = n1; break;
      }
      for (double& x : mixed.data) x *= scale;
    }
    out = unflatten(mixed, l0);
  }
  out.original_len = std::min(l0.original_len, l1.original_len);

  if (spec.use_adain && !identical) {
    const ChannelStats target = lerp(channel_stats(l0), channel_stats(l1), spec.alpha);
    out = adain(out, target);
  }
  const double floor = out.config.log_floor_value();
  for (double& v : out.values.data) v = std::max(v, floor);
  return out;
}

std::vector<double> alpha_grid(int steps) {
  if (steps < 2) throw Error(Errc::InvalidArgument, "need at least two steps");
  std::vector<double> alphas(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    alphas[static_cast<std::size_t>(i)] = static_cast<double>(i) / static_cast<double>(steps - 1);
  }
  return alphas;
}

std::pair<MelLatent, MelLatent> encode_pair(const AudioClip& a, const AudioClip& b,
                                            const CodecConfig& cfg) {
  const MelLatent la = encode(resample(a, cfg.sample_rate_hz), cfg);
  const MelLatent lb = encode(resample(b, cfg.sample_rate_hz), cfg);
  if (la.frames() < 2 || lb.frames() < 2) {
    throw Error(Errc::TooShort, "each clip must span at least two frames");
  }
  return align_latents(la, lb);
}

std::vector<AudioClip> morph_trajectory(const AudioClip& a, const AudioClip& b, int steps,
                                        const MorphSpec& spec, const CodecConfig& cfg) {
  const auto alphas = alpha_grid(steps);
  const auto [la, lb] = encode_pair(a, b, cfg);
  std::vector<AudioClip> out;
  out.reserve(alphas.size());
  for (double alpha : alphas) {
    MorphSpec step = spec;
    step.alpha = alpha;
    out.push_back(decode(morph_latent(la, lb, step)));
  }
  return out;
}

}  // namespace tonemorph
