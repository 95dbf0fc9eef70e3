// Copyright 2026 The tonemorph Authors
// SPDX-License-Identifier: Apache-2.0

#include "tonemorph/error.hpp"

namespace tonemorph {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::CorruptHeader: return "CorruptHeader";
    case Errc::EmptyAudio: return "EmptyAudio";
    case Errc::IoError: return "IoError";
    case Errc::InvalidRate: return "InvalidRate";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::NonCola: return "NonCola";
    case Errc::InvalidRange: return "InvalidRange";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::RateMismatch: return "RateMismatch";
    case Errc::SingularFilterbank: return "SingularFilterbank";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::NotUnit: return "NotUnit";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::AntipodalAmbiguous: return "AntipodalAmbiguous";
    case Errc::BandMismatch: return "BandMismatch";
    case Errc::ConfigMismatch: return "ConfigMismatch";
    case Errc::TooShort: return "TooShort";
    case Errc::ZeroTarget: return "ZeroTarget";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
      code_(code) {}

}  // namespace tonemorph
