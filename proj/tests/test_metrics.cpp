// Copyright 2026 The tonemorph Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "tonemorph/error.hpp"
#include "tonemorph/interp.hpp"
#include "tonemorph/metrics.hpp"

using namespace tonemorph;

namespace {

Grid<double> random_mags(std::uint64_t seed, std::size_t rows, std::size_t cols) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  Grid<double> g(rows, cols);
  for (double& v : g.data) v = u(rng);
  return g;
}

Grid<double> scaled(const Grid<double>& g, double c) {
  Grid<double> out = g;
  for (double& v : out.data) v *= c;
  return out;
}

// Frobenius-ratio oracle written out longhand.
double sc_oracle(const Grid<double>& est, const Grid<double>& tgt) {
  long double num = 0.0L;
  long double den = 0.0L;
  for (std::size_t i = 0; i < tgt.data.size(); ++i) {
    const long double d = static_cast<long double>(tgt.data[i]) - est.data[i];
    num += d * d;
    den += static_cast<long double>(tgt.data[i]) * tgt.data[i];
  }
  return static_cast<double>(std::sqrt(num / den));
}

MelLatent random_latent(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-9.0, 1.0);
  MelLatent l;
  l.config.n_mels = 10;
  l.values = Grid<double>(7, 10);
  for (double& v : l.values.data) v = u(rng);
  return l;
}

}  // namespace

TEST_CASE("spectral convergence closed forms") {
  const auto m = random_mags(1, 20, 33);
  CHECK(spectral_convergence(m, m) == 0.0);
  CHECK(spectral_convergence(Grid<double>(20, 33, 0.0), m) == 1.0);
  CHECK(std::abs(spectral_convergence(scaled(m, 2.0), m) - 1.0) < 1e-12);
  for (double c : {0.0, 0.25, 0.5, 2.0, 3.0}) {
    CHECK(std::abs(spectral_convergence(scaled(m, c), m) - std::abs(c - 1.0)) < 1e-12);
  }
}

TEST_CASE("spectral convergence agrees with the oracle and its invariants") {
  const auto t = random_mags(2, 15, 40);
  const auto r = random_mags(3, 15, 40);
  const double sc = spectral_convergence(r, t);
  CHECK(std::abs(sc - sc_oracle(r, t)) < 1e-12);
  CHECK(std::abs(spectral_convergence(scaled(r, 4.5), scaled(t, 4.5)) - sc) < 1e-12);
  double nr = 0.0;
  double nt = 0.0;
  for (std::size_t i = 0; i < t.data.size(); ++i) {
    nr += r.data[i] * r.data[i];
    nt += t.data[i] * t.data[i];
  }
  CHECK(sc <= (std::sqrt(nr) + std::sqrt(nt)) / std::sqrt(nt));
}

TEST_CASE("spectral convergence errors") {
  const auto m = random_mags(4, 4, 5);
  try {
    spectral_convergence(random_mags(4, 4, 6), m);
    FAIL("expected ShapeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ShapeMismatch);
  }
  try {
    spectral_convergence(m, Grid<double>(4, 5, 0.0));
    FAIL("expected ZeroTarget");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ZeroTarget);
  }
}

TEST_CASE("multi-resolution report") {
  const auto ref = testing::white_noise(9, 0.5, 44100);

  SUBCASE("self comparison is zero") {
    const auto rep = multi_res_sc(ref, ref);
    REQUIRE(rep.per_resolution.size() == 3);
    CHECK(rep.per_resolution[0].config == StftConfig{1024, 160, 600});
    CHECK(rep.per_resolution[1].config == StftConfig{2048, 240, 1200});
    CHECK(rep.per_resolution[2].config == StftConfig{512, 50, 240});
    for (const auto& r : rep.per_resolution) CHECK(r.sc == 0.0);
    CHECK(rep.mean == 0.0);
  }
  SUBCASE("silence scores one") {
    const auto rep = multi_res_sc(ref, testing::silence(0.5, 44100));
    for (const auto& r : rep.per_resolution) CHECK(r.sc == 1.0);
  }
  SUBCASE("half scale scores one half") {
    AudioClip half = ref;
    for (double& s : half.samples) s *= 0.5;
    const auto rep = multi_res_sc(ref, half);
    double sum = 0.0;
    for (const auto& r : rep.per_resolution) {
      CHECK(std::abs(r.sc - 0.5) < 1e-12);
      sum += r.sc;
    }
    CHECK(std::abs(rep.mean - sum / 3.0) < 1e-12);
  }
  SUBCASE("shorter estimate is zero-padded") {
    AudioClip cut = ref;
    cut.samples.resize(ref.size() / 2);
    AudioClip padded = cut;
    padded.samples.resize(ref.size(), 0.0);
    CHECK(multi_res_sc(ref, cut).mean == multi_res_sc(ref, padded).mean);
  }
  SUBCASE("errors") {
    try {
      multi_res_sc(ref, testing::silence(0.5, 22050));
      FAIL("expected RateMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::RateMismatch);
    }
    try {
      multi_res_sc(testing::silence(0.5, 44100), ref);
      FAIL("expected ZeroTarget");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::ZeroTarget);
    }
  }
}

TEST_CASE("aggregate") {
  const std::vector<double> one{0.3};
  CHECK(aggregate(std::span<const double>(one)).mean == 0.3);
  CHECK(aggregate(std::span<const double>(one)).median == 0.3);

  const std::vector<double> three{0.9, 0.1, 0.2};
  const auto a3 = aggregate(std::span<const double>(three));
  CHECK(std::abs(a3.mean - 0.4) < 1e-15);
  CHECK(a3.median == 0.2);

  const std::vector<double> two{0.3, 0.1};
  CHECK(std::abs(aggregate(std::span<const double>(two)).median - 0.2) < 1e-15);

  std::vector<ScReport> reports(4);
  const double means[4] = {0.5, 0.1, 0.4, 0.2};
  for (std::size_t i = 0; i < 4; ++i) reports[i].mean = means[i];
  const auto ar = aggregate(std::span<const ScReport>(reports));
  CHECK(std::abs(ar.mean - 0.3) < 1e-15);
  CHECK(std::abs(ar.median - 0.3) < 1e-15);

  try {
    aggregate(std::span<const double>());
    FAIL("expected EmptyInput");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyInput);
  }
}

TEST_CASE("latent diagnostics") {
  const auto l0 = random_latent(41);
  const auto l1 = random_latent(42);

  const auto at0 = latent_diagnostics(l0, l1, l0, 0.0);
  CHECK(at0.angle_to_a == 0.0);
  CHECK(at0.expected_a == 0.0);

  MorphSpec spec;
  spec.alpha = 0.5;
  const auto mid = latent_diagnostics(l0, l1, morph_latent(l0, l1, spec), 0.5);
  CHECK(std::abs(mid.angle_to_a - mid.angle_to_b) < 1e-9);

  spec.alpha = 0.25;
  const auto q = latent_diagnostics(l0, l1, morph_latent(l0, l1, spec), 0.25);
  const auto v0 = flatten(l0);
  const auto v1 = flatten(l1);
  const double theta0 = std::acos(dot(v0, v1) / (norm(v0) * norm(v1)));
  CHECK(std::abs(q.theta0 - theta0) < 1e-12);
  CHECK(std::abs(q.expected_a - 0.25 * theta0) < 1e-15);
  CHECK(std::abs(q.angle_to_a - 0.25 * theta0) < 1e-9);
  CHECK(std::abs(q.angle_to_b - 0.75 * theta0) < 1e-9);

  auto other = l1;
  other.values = Grid<double>(3, 10, 0.0);
  CHECK_THROWS_AS(latent_diagnostics(l0, other, l0, 0.5), Error);
}
