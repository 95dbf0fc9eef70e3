// Copyright 2026 The tonemorph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace tonemorph::detail {

/// Real-to-complex transform of one size, backed by a shared FFTW plan.
/// Plans are created once per size under a lock; execution is reentrant.
class RealFft {
 public:
  explicit RealFft(std::size_t n);

  std::size_t size() const noexcept { return n_; }

  /// out.size() == n / 2 + 1, unnormalized.
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  /// Hermitian half-spectrum to n real samples, scaled by 1 / n.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

 private:
  std::size_t n_;
  void* forward_plan_;
  void* inverse_plan_;
  mutable std::vector<std::complex<double>> scratch_;
};

}  // namespace tonemorph::detail
