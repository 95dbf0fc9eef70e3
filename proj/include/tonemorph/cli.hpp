// Copyright 2026 The tonemorph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tonemorph/latent_codec.hpp"

namespace tonemorph {

inline constexpr std::string_view kVersion = "0.1.0";

inline constexpr std::array<std::string_view, 5> kCanonicalTasks{
    "clean-to-high-gain", "clean-to-low-gain", "low-to-high-gain",
    "clean-to-modulation", "modulation-to-high-gain"};

// What cmd_eval scores for each pair:
//   Reconstruct  source vs decode(encode(source))
//   Endpoints    each original vs its alpha=0 / alpha=1 morph render, averaged
//   Direct       source vs target as stored (target treated as the estimate)
enum class EvalMode { Reconstruct, Endpoints, Direct };

struct ManifestPair {
  std::string id;
  std::filesystem::path source_path;
  std::filesystem::path target_path;
};

struct ManifestTask {
  std::string name;
  std::vector<ManifestPair> pairs;
};

struct TaskManifest {
  std::vector<ManifestTask> tasks;
  EvalMode mode = EvalMode::Reconstruct;
  CodecConfig codec;  // sample_rate_hz doubles as the evaluation rate
};

/// Parses a JSON manifest. Relative paths resolve against the manifest's
/// directory. Throws ConfigInvalid on malformed content or duplicate ids,
/// IoError when the file cannot be read.
TaskManifest load_manifest(const std::filesystem::path& path);

/// Entry point shared by the tonemorph binary and the tests. `args` excludes
/// the program name. Returns 0 on success, 1 on pipeline errors and 2 on
/// bad flags or malformed input.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tonemorph
