// Copyright 2026 The tonemorph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>

#include "tonemorph/latent_codec.hpp"

namespace tonemorph {

struct ServiceOptions {
  std::size_t max_sessions = 32;
  double max_clip_seconds = 30.0;
  std::filesystem::path static_dir;  // empty: no UI assets
  CodecConfig codec;                 // per-session overrides start from here
};

/// HTTP facade over the morph pipeline:
///   GET    /api/health
///   POST   /api/session                     multipart file_a, file_b [, sr, mels, gl_iters]
///   GET    /api/session/{id}/morph          ?alpha=F&adain=on|off  -> audio/wav
///   GET    /api/session/{id}/diagnostics    ?alpha=F&adain=on|off
///   GET    /api/session/{id}/spectrogram    ?alpha=F&adain=on|off
///   DELETE /api/session/{id}
/// Static files from `static_dir` are served at /.
class MorphServer {
 public:
  explicit MorphServer(ServiceOptions options);
  ~MorphServer();
  MorphServer(const MorphServer&) = delete;
  MorphServer& operator=(const MorphServer&) = delete;

  /// Binds the listening socket; port 0 picks an ephemeral port. Returns the
  /// bound port. Throws IoError when the address is unavailable.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Call bind() first.
  void run();
  void stop();
  bool running() const;

  std::size_t session_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tonemorph
