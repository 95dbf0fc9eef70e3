// Copyright 2026 The tonemorph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tonemorph {

enum class Errc {
  UnsupportedFormat,
  CorruptHeader,
  EmptyAudio,
  IoError,
  InvalidRate,
  ConfigInvalid,
  NonCola,
  InvalidRange,
  ShapeMismatch,
  RateMismatch,
  SingularFilterbank,
  ZeroVector,
  NotUnit,
  DimMismatch,
  AntipodalAmbiguous,
  BandMismatch,
  ConfigMismatch,
  TooShort,
  ZeroTarget,
  EmptyInput,
  InvalidArgument,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure in the library surfaces as this exception; `code()` is the
/// machine-readable reason and `what()` carries "<Name>: detail".
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace tonemorph
