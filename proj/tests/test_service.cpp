// Copyright 2026 The tonemorph Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <thread>

#include "fixtures.hpp"
#include "tonemorph/interp.hpp"
#include "tonemorph/service.hpp"

using namespace tonemorph;
using nlohmann::json;

namespace {

// Server on an ephemeral port, torn down with the fixture.
struct Running {
  MorphServer server;
  int port = 0;
  std::thread thread;

  explicit Running(ServiceOptions opts) : server(std::move(opts)) {
    port = server.bind("127.0.0.1", 0);
    thread = std::thread([this] { server.run(); });
    while (!server.running()) std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  ~Running() {
    server.stop();
    thread.join();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(120, 0);
    return c;
  }
};

std::string wav_bytes(const AudioClip& clip) {
  const auto b = encode_wav(clip);
  return {b.begin(), b.end()};
}

// What the server sees after the float32 upload.
AudioClip uploaded(const AudioClip& clip) { return decode_wav(encode_wav(clip)); }

httplib::Result create(httplib::Client& c, const std::string& a, const std::string& b,
                       httplib::MultipartFormDataItems extra = {}) {
  httplib::MultipartFormDataItems items{{"file_a", a, "a.wav", "audio/wav"},
                                        {"file_b", b, "b.wav", "audio/wav"}};
  items.insert(items.end(), extra.begin(), extra.end());
  return c.Post("/api/session", items);
}

ServiceOptions fast_options() {
  ServiceOptions o;
  o.codec.gl_iterations = 4;
  return o;
}

}  // namespace

TEST_CASE("health") {
  Running srv(fast_options());
  auto c = srv.client();
  const auto res = c.Get("/api/health");
  REQUIRE(res);
  CHECK(res->status == 200);
  const json j = json::parse(res->body);
  CHECK(j["status"] == "ok");
  CHECK(j["version"].is_string());
}

TEST_CASE("session lifecycle") {
  Running srv(fast_options());
  auto c = srv.client();
  const auto a = uploaded(testing::harmonic_tone(220.0, 4, 0.6, 44100));
  const auto b = uploaded(testing::harmonic_tone(330.0, 6, 0.4, 22050, 0.5));

  const auto res = create(c, wav_bytes(a), wav_bytes(b));
  REQUIRE(res);
  REQUIRE(res->status == 200);
  const json s = json::parse(res->body);
  const std::string id = s["session_id"];
  const std::string base = "/api/session/" + id;

  // Frame count follows the trim rule: the shorter encode wins.
  CodecConfig cfg;
  cfg.gl_iterations = 4;
  const auto la = encode(a, cfg);
  const auto lb = encode(resample(b, 44100), cfg);
  CHECK(s["frames"] == std::min(la.frames(), lb.frames()));
  CHECK(s["bands"] == 128);
  const double theta0 = s["theta0"];
  CHECK(theta0 > 0.0);

  SUBCASE("alpha 0 is the endpoint reconstruction") {
    const auto [ta, tb] = encode_pair(a, b, cfg);
    const auto m = c.Get(base + "/morph?alpha=0&adain=off");
    REQUIRE(m);
    CHECK(m->status == 200);
    CHECK(m->get_header_value("Content-Type") == "audio/wav");
    CHECK(m->body == wav_bytes(decode(ta)));
  }
  SUBCASE("repeated and cached requests are identical to fresh renders") {
    const auto m1 = c.Get(base + "/morph?alpha=0.5");
    const auto m2 = c.Get(base + "/morph?alpha=0.5");
    const auto m3 = c.Get(base + "/morph?alpha=0.5004");  // same 1/1000 bucket
    REQUIRE((m1 && m2 && m3));
    CHECK(m1->body == m2->body);
    CHECK(m1->body == m3->body);
    const auto [ta, tb] = encode_pair(a, b, cfg);
    MorphSpec spec;
    spec.alpha = 0.5;
    CHECK(m1->body == wav_bytes(decode(morph_latent(ta, tb, spec))));
    const auto with_adain = c.Get(base + "/morph?alpha=0.5&adain=on");
    REQUIRE(with_adain);
    CHECK(with_adain->body != m1->body);
  }
  SUBCASE("diagnostics") {
    const json d0 = json::parse(c.Get(base + "/diagnostics?alpha=0")->body);
    CHECK(d0["angle_to_a"].get<double>() == 0.0);
    CHECK(d0["sc_to_a"].get<double>() == 0.0);
    const json dh = json::parse(c.Get(base + "/diagnostics?alpha=0.5")->body);
    CHECK(std::abs(dh["angle_to_a"].get<double>() - dh["angle_to_b"].get<double>()) < 1e-9);
    const json dq = json::parse(c.Get(base + "/diagnostics?alpha=0.25")->body);
    CHECK(std::abs(dq["angle_to_a"].get<double>() - 0.25 * theta0) < 1e-9);
    CHECK(std::abs(dq["expected_a"].get<double>() - 0.25 * theta0) < 1e-15);
    CHECK(dq["sc_to_a"].get<double>() > 0.0);
    CHECK(dq["sc_to_b"].get<double>() > 0.0);
  }
  SUBCASE("spectrogram") {
    const auto [ta, tb] = encode_pair(a, b, cfg);
    const json sp = json::parse(c.Get(base + "/spectrogram?alpha=0")->body);
    CHECK(sp["t"] == s["frames"]);
    CHECK(sp["b"] == s["bands"]);
    CHECK(sp["values"].get<std::vector<double>>() == ta.values.data);
  }
  SUBCASE("bad requests") {
    CHECK(c.Get(base + "/morph?alpha=1.2")->status == 400);
    CHECK(c.Get(base + "/morph?alpha=-0.1")->status == 400);
    CHECK(c.Get(base + "/morph?alpha=abc")->status == 400);
    CHECK(c.Get(base + "/morph")->status == 400);
    CHECK(c.Get(base + "/morph?alpha=0.5&adain=maybe")->status == 400);
    CHECK(c.Get(base + "/diagnostics?alpha=2")->status == 400);
    CHECK(c.Get(base + "/spectrogram?alpha=nan")->status == 400);
    CHECK(c.Get("/api/session/deadbeef/morph?alpha=0.5")->status == 404);
    CHECK(c.Get("/api/session/deadbeef/diagnostics?alpha=0.5")->status == 404);
  }
  SUBCASE("delete") {
    CHECK(srv.server.session_count() == 1);
    CHECK(c.Delete(base)->status == 200);
    CHECK(srv.server.session_count() == 0);
    CHECK(c.Get(base + "/morph?alpha=0.5")->status == 404);
    CHECK(c.Delete(base)->status == 404);
  }
}

TEST_CASE("session creation errors") {
  ServiceOptions opts = fast_options();
  opts.max_sessions = 1;
  opts.max_clip_seconds = 1.0;
  Running srv(opts);
  auto c = srv.client();
  const std::string tone = wav_bytes(testing::harmonic_tone(220.0, 3, 0.3, 44100));

  const auto junk = create(c, "this is not audio", tone);
  REQUIRE(junk);
  CHECK(junk->status == 400);
  CHECK(json::parse(junk->body)["error"] == "UnsupportedFormat");

  const auto longer = create(c, tone, wav_bytes(testing::silence(1.5, 16000)));
  REQUIRE(longer);
  CHECK(longer->status == 413);

  CHECK(c.Post("/api/session", httplib::MultipartFormDataItems{{"file_a", tone, "a.wav", "audio/wav"}})->status == 400);
  CHECK(create(c, tone, tone, {{"sr", "22050", "", ""}})->status == 400);

  const auto same = create(c, tone, tone);
  REQUIRE(same);
  REQUIRE(same->status == 200);
  CHECK(json::parse(same->body)["theta0"].get<double>() == 0.0);

  CHECK(create(c, tone, tone)->status == 429);
}

TEST_CASE("16 kHz session override") {
  Running srv(fast_options());
  auto c = srv.client();
  const std::string a = wav_bytes(testing::harmonic_tone(220.0, 3, 0.5, 44100));
  const std::string b = wav_bytes(testing::harmonic_tone(330.0, 3, 0.5, 16000));
  const auto res = create(c, a, b, {{"sr", "16000", "", ""}, {"mels", "64", "", ""}});
  REQUIRE(res);
  REQUIRE(res->status == 200);
  const json s = json::parse(res->body);
  CHECK(s["bands"] == 64);
  CHECK(std::abs(s["duration_s"].get<double>() - 0.5) < 1e-9);
}

TEST_CASE("concurrent morph requests agree") {
  Running srv(fast_options());
  auto c = srv.client();
  const auto res = create(c, wav_bytes(testing::harmonic_tone(196.0, 4, 0.4, 44100)),
                          wav_bytes(testing::harmonic_tone(247.0, 5, 0.4, 44100)));
  REQUIRE(res);
  const std::string id = json::parse(res->body)["session_id"];
  std::vector<std::string> bodies(6);
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    threads.emplace_back([&, i] {
      auto local = srv.client();
      const auto r = local.Get("/api/session/" + id + "/morph?alpha=0.3" + (i % 2 ? "&adain=on" : ""));
      if (r) bodies[i] = r->body;
    });
  }
  for (auto& t : threads) t.join();
  for (std::size_t i = 2; i < bodies.size(); ++i) CHECK(bodies[i] == bodies[i % 2]);
  CHECK_FALSE(bodies[0].empty());
}

TEST_CASE("static assets") {
  const auto dir = testing::scratch_dir("static");
  std::ofstream(dir / "index.html") << "<p>tonemorph</p>";
  ServiceOptions opts = fast_options();
  opts.static_dir = dir;
  Running srv(opts);
  auto c = srv.client();
  const auto res = c.Get("/index.html");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->body == "<p>tonemorph</p>");
}
