// Copyright 2026 The tonemorph Authors
// SPDX-License-Identifier: Apache-2.0

#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <utility>

namespace tonemorph::detail {

namespace {

struct PlanPair {
  fftw_plan forward;
  fftw_plan inverse;
};

// Plans live for the whole process; FFTW's planner is not thread-safe, so
// every plan is made under this lock and only executed afterwards.
PlanPair plans_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, PlanPair> plans;
  std::lock_guard lock(mutex);
  if (auto it = plans.find(n); it != plans.end()) return it->second;

  std::vector<double> real(n);
  std::vector<std::complex<double>> spec(n / 2 + 1);
  const int size = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair pair{
      fftw_plan_dft_r2c_1d(size, real.data(),
                           reinterpret_cast<fftw_complex*>(spec.data()), flags),
      fftw_plan_dft_c2r_1d(size, reinterpret_cast<fftw_complex*>(spec.data()),
                           real.data(), flags | FFTW_DESTROY_INPUT),
  };
  plans.emplace(n, pair);
  return pair;
}

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n), scratch_(n / 2 + 1) {
  const PlanPair pair = plans_for(n);
  forward_plan_ = pair.forward;
  inverse_plan_ = pair.inverse;
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  // r2c with new-array execute never writes its input.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
  std::copy(in.begin(), in.end(), scratch_.begin());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(scratch_.data()), out.data());
  const double scale = 1.0 / static_cast<double>(n_);
  for (double& v : out) v *= scale;
}

}  // namespace tonemorph::detail
