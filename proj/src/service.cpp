// Copyright 2026 The tonemorph Authors
// SPDX-License-Identifier: Apache-2.0

#include "tonemorph/service.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>

#include "tonemorph/audio_io.hpp"
#include "tonemorph/cli.hpp"
#include "tonemorph/error.hpp"
#include "tonemorph/interp.hpp"
#include "tonemorph/metrics.hpp"

namespace tonemorph {

using nlohmann::json;

namespace {

struct Render {
  MelLatent latent;
  AudioClip audio;
  std::string wav;
};

// Immutable after creation apart from the render cache, which only ever
// holds values equal to a fresh recomputation.
struct Session {
  MelLatent latent_a;
  MelLatent latent_b;
  std::optional<double> theta0;  // empty when an endpoint is silent
  double duration_s = 0.0;
  std::chrono::steady_clock::time_point created_at;
  std::shared_ptr<const Render> endpoint_a;
  std::shared_ptr<const Render> endpoint_b;

  mutable std::mutex cache_mutex;
  mutable std::map<std::pair<long, bool>, std::shared_ptr<const Render>> cache;
};

struct HttpError {
  int status;
  std::string error;
  std::string detail;
};

std::string to_string(const std::vector<std::uint8_t>& bytes) {
  return {bytes.begin(), bytes.end()};
}

std::shared_ptr<const Render> render(MelLatent latent) {
  auto r = std::make_shared<Render>();
  r->audio = decode(latent);
  r->wav = to_string(encode_wav(r->audio));
  r->latent = std::move(latent);
  return r;
}

std::string new_session_id() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                static_cast<unsigned long long>(rng()));
  return buf;
}

// Alpha quantized to 1/1000; the quantized value is also what is rendered so
// a cache hit and a fresh computation agree bit for bit.
long parse_alpha(const httplib::Request& req) {
  if (!req.has_param("alpha")) throw HttpError{400, "InvalidArgument", "missing alpha"};
  const std::string s = req.get_param_value("alpha");
  double alpha = 0.0;
  std::size_t used = 0;
  try {
    alpha = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty() || !std::isfinite(alpha)) {
    throw HttpError{400, "InvalidArgument", "alpha is not a number"};
  }
  if (alpha < 0.0 || alpha > 1.0) throw HttpError{400, "InvalidArgument", "alpha must lie in [0, 1]"};
  return std::lround(alpha * 1000.0);
}

bool parse_adain(const httplib::Request& req) {
  if (!req.has_param("adain")) return false;
  const std::string s = req.get_param_value("adain");
  if (s == "on") return true;
  if (s == "off") return false;
  throw HttpError{400, "InvalidArgument", "adain must be on or off"};
}

std::size_t form_size(const httplib::Request& req, const char* name, std::size_t fallback) {
  if (!req.has_file(name)) return fallback;
  const std::string s = req.get_file_value(name).content;
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used == s.size() && v >= 0) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  throw HttpError{400, "InvalidArgument", std::string("bad value for ") + name};
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

int status_for(Errc code) {
  switch (code) {
    case Errc::UnsupportedFormat:
    case Errc::CorruptHeader:
    case Errc::EmptyAudio:
    case Errc::InvalidRate:
    case Errc::ConfigInvalid:
    case Errc::TooShort:
    case Errc::InvalidArgument:
      return 400;
    default:
      return 500;
  }
}

}  // namespace

struct MorphServer::Impl {
  ServiceOptions options;
  httplib::Server http;

  mutable std::shared_mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<const Session>> sessions;

  explicit Impl(ServiceOptions opts) : options(std::move(opts)) { routes(); }

  std::shared_ptr<const Session> find(const std::string& id) const {
    std::shared_lock lock(sessions_mutex);
    const auto it = sessions.find(id);
    if (it == sessions.end()) throw HttpError{404, "UnknownSession", "no session " + id};
    return it->second;
  }

  std::size_t count() const {
    std::shared_lock lock(sessions_mutex);
    return sessions.size();
  }

  std::shared_ptr<const Render> morph(const Session& s, long q, bool adain) const {
    const std::pair key{q, adain};
    {
      std::lock_guard lock(s.cache_mutex);
      if (const auto it = s.cache.find(key); it != s.cache.end()) return it->second;
    }
    MorphSpec spec;
    spec.alpha = static_cast<double>(q) / 1000.0;
    spec.use_adain = adain;
    auto r = render(morph_latent(s.latent_a, s.latent_b, spec));
    std::lock_guard lock(s.cache_mutex);
    return s.cache.try_emplace(key, std::move(r)).first->second;
  }

  void create_session(const httplib::Request& req, httplib::Response& res) {
    if (count() >= options.max_sessions) {
      throw HttpError{429, "SessionLimit", "session limit reached"};
    }
    if (!req.has_file("file_a") || !req.has_file("file_b")) {
      throw HttpError{400, "InvalidArgument", "file_a and file_b are required"};
    }
    CodecConfig cfg = options.codec;
    cfg.sample_rate_hz = static_cast<int>(form_size(req, "sr", static_cast<std::size_t>(cfg.sample_rate_hz)));
    cfg.n_mels = form_size(req, "mels", cfg.n_mels);
    cfg.gl_iterations = static_cast<int>(form_size(req, "gl_iters", static_cast<std::size_t>(cfg.gl_iterations)));
    if (cfg.sample_rate_hz != 16000 && cfg.sample_rate_hz != 44100) {
      throw HttpError{400, "InvalidRate", "sr must be 16000 or 44100"};
    }
    cfg.validate();

    auto load = [&](const char* field) {
      const std::string& body = req.get_file_value(field).content;
      const auto* p = reinterpret_cast<const std::uint8_t*>(body.data());
      AudioClip clip = decode_wav(std::span<const std::uint8_t>(p, body.size()));
      if (clip.duration_s() > options.max_clip_seconds) {
        throw HttpError{413, "ClipTooLong", std::string(field) + " is longer than the clip limit"};
      }
      return clip;
    };
    const AudioClip a = load("file_a");
    const AudioClip b = load("file_b");

    auto s = std::make_shared<Session>();
    std::tie(s->latent_a, s->latent_b) = encode_pair(a, b, cfg);
    try {
      s->theta0 = latent_angle(s->latent_a, s->latent_b);
    } catch (const Error& e) {
      if (e.code() != Errc::ZeroVector) throw;
    }
    s->duration_s = static_cast<double>(s->latent_a.original_len) / cfg.sample_rate_hz;
    s->created_at = std::chrono::steady_clock::now();
    s->endpoint_a = render(s->latent_a);
    s->endpoint_b = render(s->latent_b);
    // The alpha=0 / alpha=1 renders are exactly the endpoint reconstructions.
    s->cache.emplace(std::pair{0L, false}, s->endpoint_a);
    s->cache.emplace(std::pair{1000L, false}, s->endpoint_b);

    const std::string id = new_session_id();
    {
      std::unique_lock lock(sessions_mutex);
      if (sessions.size() >= options.max_sessions) {
        throw HttpError{429, "SessionLimit", "session limit reached"};
      }
      sessions.emplace(id, s);
    }
    send_json(res, 200,
              {{"session_id", id},
               {"frames", s->latent_a.frames()},
               {"bands", s->latent_a.bands()},
               {"theta0", s->theta0 ? json(*s->theta0) : json(nullptr)},
               {"duration_s", s->duration_s}});
  }

  void diagnostics(const Session& s, long q, bool adain, httplib::Response& res) const {
    const auto r = morph(s, q, adain);
    const double alpha = static_cast<double>(q) / 1000.0;
    json body{{"alpha", alpha}, {"adain", adain}};
    if (s.theta0) {
      const auto d = latent_diagnostics(s.latent_a, s.latent_b, r->latent, alpha);
      body["angle_to_a"] = d.angle_to_a;
      body["angle_to_b"] = d.angle_to_b;
      body["expected_a"] = d.expected_a;
      body["theta0"] = d.theta0;
    } else {
      body["angle_to_a"] = body["angle_to_b"] = body["expected_a"] = body["theta0"] = nullptr;
    }
    auto sc_to = [&](const Render& endpoint) -> json {
      try {
        return multi_res_sc(endpoint.audio, r->audio).mean;
      } catch (const Error& e) {
        if (e.code() != Errc::ZeroTarget) throw;
        return nullptr;
      }
    };
    body["sc_to_a"] = sc_to(*s.endpoint_a);
    body["sc_to_b"] = sc_to(*s.endpoint_b);
    send_json(res, 200, body);
  }

  void spectrogram(const Session& s, long q, bool adain, httplib::Response& res) const {
    const auto r = morph(s, q, adain);
    send_json(res, 200,
              {{"alpha", static_cast<double>(q) / 1000.0},
               {"t", r->latent.frames()},
               {"b", r->latent.bands()},
               {"log_floor", r->latent.config.log_floor_value()},
               {"values", r->latent.values.data}});
  }

  // Wraps a handler so library and HTTP errors become JSON error bodies.
  template <typename Fn>
  httplib::Server::Handler guarded(Fn fn) {
    return [this, fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const HttpError& e) {
        send_json(res, e.status, {{"error", e.error}, {"detail", e.detail}});
      } catch (const Error& e) {
        send_json(res, status_for(e.code()), {{"error", errc_name(e.code())}, {"detail", e.what()}});
      } catch (const std::exception& e) {
        send_json(res, 500, {{"error", "Internal"}, {"detail", e.what()}});
      }
    };
  }

  void routes() {
    http.set_payload_max_length(512u << 20);

    http.Get("/api/health", guarded([](const httplib::Request&, httplib::Response& res) {
               send_json(res, 200, {{"status", "ok"}, {"version", kVersion}});
             }));
    http.Post("/api/session", guarded([this](const httplib::Request& req, httplib::Response& res) {
                create_session(req, res);
              }));
    http.Get(R"(/api/session/([^/]+)/morph)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               const auto s = find(req.matches[1]);
               const auto r = morph(*s, parse_alpha(req), parse_adain(req));
               res.set_content(r->wav, "audio/wav");
             }));
    http.Get(R"(/api/session/([^/]+)/diagnostics)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               const auto s = find(req.matches[1]);
               diagnostics(*s, parse_alpha(req), parse_adain(req), res);
             }));
    http.Get(R"(/api/session/([^/]+)/spectrogram)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               const auto s = find(req.matches[1]);
               spectrogram(*s, parse_alpha(req), parse_adain(req), res);
             }));
    http.Delete(R"(/api/session/([^/]+))",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  std::unique_lock lock(sessions_mutex);
                  if (sessions.erase(req.matches[1]) == 0) {
                    throw HttpError{404, "UnknownSession", "no session " + std::string(req.matches[1])};
                  }
                  send_json(res, 200, {{"deleted", std::string(req.matches[1])}});
                }));

    if (!options.static_dir.empty()) http.set_mount_point("/", options.static_dir.string());
  }
};

MorphServer::MorphServer(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

MorphServer::~MorphServer() { stop(); }

int MorphServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->http.bind_to_any_port(host)
                              : (impl_->http.bind_to_port(host, port) ? port : -1);
  if (bound <= 0) {
    throw Error(Errc::IoError, "cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void MorphServer::run() { impl_->http.listen_after_bind(); }

void MorphServer::stop() {
  impl_->http.stop();
  std::unique_lock lock(impl_->sessions_mutex);
  impl_->sessions.clear();
}

bool MorphServer::running() const { return impl_->http.is_running(); }

std::size_t MorphServer::session_count() const { return impl_->count(); }

}  // namespace tonemorph
