// Copyright 2026 The tonemorph Authors
// SPDX-License-Identifier: Apache-2.0

#include "tonemorph/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <thread>

#include "parallel.hpp"
#include "tonemorph/audio_io.hpp"
#include "tonemorph/error.hpp"
#include "tonemorph/interp.hpp"
#include "tonemorph/metrics.hpp"
#include "tonemorph/service.hpp"

namespace tonemorph {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Thrown for input problems that deserve exit code 2 rather than 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CodecFlags {
  int sample_rate = 44100;
  std::size_t mels = 128;
  int gl_iters = 64;
  bool normalize_peak = false;

  CodecConfig config() const {
    CodecConfig cfg;
    cfg.sample_rate_hz = sample_rate;
    cfg.n_mels = mels;
    cfg.gl_iterations = gl_iters;
    return cfg;
  }
};

const std::map<std::string, bool> kOnOff{{"on", true}, {"off", false}};
const std::map<std::string, NormPolicy> kPolicies{
    {"lerp-norm", NormPolicy::LerpNorm}, {"keep-a", NormPolicy::KeepA}, {"keep-b", NormPolicy::KeepB}};

std::string policy_name(NormPolicy p) {
  for (const auto& [name, value] : kPolicies) {
    if (value == p) return name;
  }
  return "?";
}

void add_codec_flags(CLI::App* cmd, CodecFlags& f) {
  cmd->add_option("--sr", f.sample_rate, "Codec sample rate")
      ->check(CLI::IsMember({16000, 44100}))
      ->capture_default_str();
  cmd->add_option("--mels", f.mels, "Mel bands")->check(CLI::Range(8, 512))->capture_default_str();
  cmd->add_option("--gl-iters", f.gl_iters, "Griffin-Lim iterations")
      ->check(CLI::Range(0, 10000))
      ->capture_default_str();
  cmd->add_option("--normalize-peak", f.normalize_peak, "Peak-normalize inputs before encoding")
      ->transform(CLI::CheckedTransformer(kOnOff))
      ->default_str("off");
}

AudioClip load_input(const fs::path& path, const CodecFlags& f) {
  AudioClip clip = read_wav(path);
  if (f.normalize_peak) clip = peak_normalize(clip);
  return clip;
}

json codec_json(const CodecConfig& cfg) {
  return {{"sample_rate_hz", cfg.sample_rate_hz}, {"fft_size", cfg.fft_size},
          {"hop_size", cfg.hop_size},             {"win_length", cfg.win_length},
          {"n_mels", cfg.n_mels},                 {"log_floor", cfg.log_floor},
          {"gl_iterations", cfg.gl_iterations}};
}

json sc_json(const ScReport& rep) {
  json j;
  for (const auto& r : rep.per_resolution) j["sc_" + std::to_string(r.config.fft_size)] = r.sc;
  j["mean"] = rep.mean;
  return j;
}

std::string alpha_filename(double alpha) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "morph_%.3f.wav", alpha);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw Error(Errc::IoError, "cannot write " + path.string());
}

// ---------------------------------------------------------------- morph

struct MorphArgs {
  fs::path a, b, out_dir;
  std::optional<double> alpha;
  std::optional<int> steps;
  bool adain = false;
  NormPolicy policy = NormPolicy::LerpNorm;
  CodecFlags codec;
};

int cmd_morph(const MorphArgs& args, std::ostream& out) {
  const CodecConfig cfg = args.codec.config();
  const auto [la, lb] = encode_pair(load_input(args.a, args.codec), load_input(args.b, args.codec), cfg);
  const std::vector<double> alphas = args.steps ? alpha_grid(*args.steps) : std::vector{*args.alpha};

  // A silent endpoint has no direction, so angles are reported as null.
  std::optional<double> theta0;
  try {
    theta0 = latent_angle(la, lb);
  } catch (const Error& e) {
    if (e.code() != Errc::ZeroVector) throw;
  }

  fs::create_directories(args.out_dir);
  std::vector<json> rows(alphas.size());
  detail::parallel_for(alphas.size(), [&](std::size_t i) {
    MorphSpec spec;
    spec.alpha = alphas[i];
    spec.use_adain = args.adain;
    spec.norm_policy = args.policy;
    const MelLatent morphed = morph_latent(la, lb, spec);
    const std::string name = alpha_filename(alphas[i]);
    write_wav(decode(morphed), args.out_dir / name);
    json row{{"alpha", alphas[i]}, {"file", name}};
    if (theta0) {
      const auto d = latent_diagnostics(la, lb, morphed, alphas[i]);
      row["angle_to_a"] = d.angle_to_a;
      row["angle_to_b"] = d.angle_to_b;
      row["expected_a"] = d.expected_a;
    } else {
      row["angle_to_a"] = row["angle_to_b"] = row["expected_a"] = nullptr;
    }
    rows[i] = std::move(row);
  });

  json manifest{
      {"command", "morph"},
      {"version", kVersion},
      {"inputs", {{"a", fs::absolute(args.a).string()}, {"b", fs::absolute(args.b).string()}}},
      {"codec", codec_json(cfg)},
      {"morph",
       {{"adain", args.adain},
        {"norm_policy", policy_name(args.policy)},
        {"small_angle", kDefaultSmallAngle},
        {"normalize_peak", args.codec.normalize_peak},
        {"alphas", alphas}}},
      {"latent", {{"frames", la.frames()}, {"bands", la.bands()}, {"original_len", la.original_len}}},
      {"theta0", theta0 ? json(*theta0) : json(nullptr)},
      {"steps", rows},
  };
  write_text(args.out_dir / "run_manifest.json", manifest.dump(2) + "\n");
  out << "wrote " << alphas.size() << " file(s) to " << args.out_dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------- reconstruct

struct ReconstructArgs {
  fs::path in, out;
  CodecFlags codec;
};

int cmd_reconstruct(const ReconstructArgs& args, std::ostream& out) {
  const CodecConfig cfg = args.codec.config();
  const AudioClip src = resample(load_input(args.in, args.codec), cfg.sample_rate_hz);
  const AudioClip rec = decode(encode(src, cfg));
  if (args.out.has_parent_path()) fs::create_directories(args.out.parent_path());
  write_wav(rec, args.out);

  json report{{"input", args.in.string()}, {"output", args.out.string()}};
  try {
    report["sc"] = sc_json(multi_res_sc(src, rec));
  } catch (const Error& e) {
    if (e.code() != Errc::ZeroTarget) throw;
    report["note"] = "ZeroTarget: input is silent, spectral convergence is undefined";
  }
  out << report.dump(2) << "\n";
  return 0;
}

// ----------------------------------------------------------------- eval

EvalMode parse_mode(const std::string& s) {
  if (s == "reconstruct") return EvalMode::Reconstruct;
  if (s == "endpoints") return EvalMode::Endpoints;
  if (s == "direct") return EvalMode::Direct;
  throw Error(Errc::ConfigInvalid, "unknown mode '" + s + "'");
}

AudioClip truncated(AudioClip clip, std::size_t len) {
  if (clip.size() > len) clip.samples.resize(len);
  return clip;
}

ScReport average_reports(const ScReport& x, const ScReport& y) {
  ScReport r = x;
  r.mean = 0.0;
  for (std::size_t i = 0; i < r.per_resolution.size(); ++i) {
    r.per_resolution[i].sc = 0.5 * (x.per_resolution[i].sc + y.per_resolution[i].sc);
    r.mean += r.per_resolution[i].sc;
  }
  r.mean /= static_cast<double>(r.per_resolution.size());
  return r;
}

ScReport score_pair(const ManifestPair& pair, const TaskManifest& m) {
  const CodecConfig& cfg = m.codec;
  switch (m.mode) {
    case EvalMode::Reconstruct: {
      const AudioClip src = resample(read_wav(pair.source_path), cfg.sample_rate_hz);
      return multi_res_sc(src, decode(encode(src, cfg)));
    }
    case EvalMode::Direct: {
      const AudioClip src = resample(read_wav(pair.source_path), cfg.sample_rate_hz);
      const AudioClip tgt = resample(read_wav(pair.target_path), cfg.sample_rate_hz);
      return multi_res_sc(src, tgt);
    }
    case EvalMode::Endpoints: {
      const AudioClip a = resample(read_wav(pair.source_path), cfg.sample_rate_hz);
      const AudioClip b = resample(read_wav(pair.target_path), cfg.sample_rate_hz);
      const auto [la, lb] = encode_pair(a, b, cfg);
      MorphSpec spec;
      spec.alpha = 0.0;
      const AudioClip ra = decode(morph_latent(la, lb, spec));
      spec.alpha = 1.0;
      const AudioClip rb = decode(morph_latent(la, lb, spec));
      // Originals are cut to the shared (trimmed) length the renders cover.
      return average_reports(multi_res_sc(truncated(a, ra.size()), ra),
                             multi_res_sc(truncated(b, rb.size()), rb));
    }
  }
  throw Error(Errc::InvalidArgument, "unhandled mode");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int cmd_eval(const fs::path& manifest_path, const fs::path& out_path, std::ostream& out,
             std::ostream& err) {
  const std::string ext = out_path.extension().string();
  if (ext != ".json" && ext != ".csv") throw UsageError("--out must end in .json or .csv");

  TaskManifest m;
  try {
    m = load_manifest(manifest_path);
  } catch (const Error& e) {
    if (e.code() == Errc::ConfigInvalid) throw UsageError(e.what());
    throw;
  }

  struct Job {
    std::size_t task;
    const ManifestPair* pair;
  };
  std::vector<Job> jobs;
  for (std::size_t t = 0; t < m.tasks.size(); ++t) {
    for (const auto& p : m.tasks[t].pairs) jobs.push_back({t, &p});
  }
  if (jobs.empty()) throw UsageError("empty manifest");

  std::set<fs::path> missing;
  for (const auto& j : jobs) {
    if (!fs::exists(j.pair->source_path)) missing.insert(j.pair->source_path);
    if (m.mode != EvalMode::Reconstruct && !fs::exists(j.pair->target_path)) {
      missing.insert(j.pair->target_path);
    }
  }
  if (!missing.empty()) {
    for (const auto& p : missing) err << "missing: " << p.string() << "\n";
    err << "error: " << missing.size() << " referenced file(s) not found\n";
    return 1;
  }

  std::vector<ScReport> reports(jobs.size());
  detail::parallel_for(jobs.size(), [&](std::size_t i) {
    try {
      reports[i] = score_pair(*jobs[i].pair, m);
    } catch (const Error& e) {
      throw Error(e.code(), m.tasks[jobs[i].task].name + "/" + jobs[i].pair->id + ": " + e.what());
    }
  });

  const Aggregate overall = aggregate(std::span<const ScReport>(reports));
  json pairs = json::array();
  json tasks = json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    json row = sc_json(reports[i]);
    row["task"] = m.tasks[jobs[i].task].name;
    row["id"] = jobs[i].pair->id;
    pairs.push_back(std::move(row));
  }
  for (std::size_t t = 0; t < m.tasks.size(); ++t) {
    std::vector<ScReport> mine;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      if (jobs[i].task == t) mine.push_back(reports[i]);
    }
    if (mine.empty()) continue;
    const Aggregate a = aggregate(std::span<const ScReport>(mine));
    tasks.push_back({{"name", m.tasks[t].name}, {"pairs", mine.size()}, {"mean", a.mean},
                     {"median", a.median}});
  }

  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  if (ext == ".json") {
    json report{{"pairs", pairs}, {"tasks", tasks}, {"dataset_mean", overall.mean},
                {"dataset_median", overall.median}};
    write_text(out_path, report.dump(2) + "\n");
  } else {
    std::string csv = "task,id,sc_1024,sc_2048,sc_512,mean\n";
    for (const auto& row : pairs) {
      csv += row["task"].get<std::string>() + "," + row["id"].get<std::string>() + "," +
             fmt(row["sc_1024"]) + "," + fmt(row["sc_2048"]) + "," + fmt(row["sc_512"]) + "," +
             fmt(row["mean"]) + "\n";
    }
    csv += "dataset,mean,,,," + fmt(overall.mean) + "\n";
    csv += "dataset,median,,,," + fmt(overall.median) + "\n";
    write_text(out_path, csv);
  }
  out << "pairs=" << jobs.size() << " dataset_mean=" << fmt(overall.mean)
      << " dataset_median=" << fmt(overall.median) << "\n";
  return 0;
}

// ---------------------------------------------------------------- serve

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

int cmd_serve(const std::string& host, int port, const fs::path& static_dir,
              std::size_t max_sessions, std::ostream& out) {
  if (!static_dir.empty() && !fs::is_directory(static_dir)) {
    throw UsageError("--static: not a directory: " + static_dir.string());
  }
  ServiceOptions opts;
  opts.max_sessions = max_sessions;
  opts.static_dir = static_dir;
  MorphServer server(opts);
  const int bound = server.bind(host, port);
  out << bound << std::endl;

  g_interrupted = false;
  auto prev_int = std::signal(SIGINT, on_signal);
  auto prev_term = std::signal(SIGTERM, on_signal);
  std::thread watcher([&] {
    while (!g_interrupted && !server.running()) std::this_thread::sleep_for(std::chrono::milliseconds(10));
    while (!g_interrupted && server.running()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    server.stop();
  });
  server.run();
  g_interrupted = true;
  watcher.join();
  std::signal(SIGINT, prev_int);
  std::signal(SIGTERM, prev_term);
  return 0;
}

}  // namespace

TaskManifest load_manifest(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::IoError, "cannot open manifest " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigInvalid, std::string("manifest is not valid JSON: ") + e.what());
  }

  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    const fs::path q(p);
    return q.is_absolute() ? q : base / q;
  };

  TaskManifest m;
  try {
    if (!j.is_object()) throw Error(Errc::ConfigInvalid, "manifest must be a JSON object");
    m.mode = parse_mode(j.value("mode", std::string("reconstruct")));
    m.codec.sample_rate_hz = j.value("sample_rate", m.codec.sample_rate_hz);
    if (j.contains("codec")) {
      const json& c = j.at("codec");
      m.codec.n_mels = c.value("mels", m.codec.n_mels);
      m.codec.gl_iterations = c.value("gl_iters", m.codec.gl_iterations);
      m.codec.fft_size = c.value("fft", m.codec.fft_size);
      m.codec.hop_size = c.value("hop", m.codec.hop_size);
      m.codec.win_length = c.value("win", m.codec.win_length);
    }
    m.codec.validate();
    for (const json& jt : j.value("tasks", json::array())) {
      ManifestTask task;
      task.name = jt.at("name").get<std::string>();
      std::set<std::string> ids;
      for (const json& jp : jt.value("pairs", json::array())) {
        ManifestPair pair;
        pair.id = jp.at("id").get<std::string>();
        if (!ids.insert(pair.id).second) {
          throw Error(Errc::ConfigInvalid, "duplicate pair id '" + pair.id + "' in task " + task.name);
        }
        pair.source_path = resolve(jp.at("source_path").get<std::string>());
        pair.target_path = resolve(jp.value("target_path", jp.at("source_path").get<std::string>()));
        task.pairs.push_back(std::move(pair));
      }
      m.tasks.push_back(std::move(task));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigInvalid, std::string("malformed manifest: ") + e.what());
  }
  return m;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Guitar tone morphing by spherical interpolation of log-mel latents", "tonemorph"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  MorphArgs morph;
  auto* m = app.add_subcommand("morph", "Render morphs between two clips");
  m->add_option("--a", morph.a, "First clip (alpha = 0)")->required()->check(CLI::ExistingFile);
  m->add_option("--b", morph.b, "Second clip (alpha = 1)")->required()->check(CLI::ExistingFile);
  auto* alpha_opt = m->add_option("--alpha", morph.alpha, "Single interpolation weight")
                        ->check(CLI::Range(0.0, 1.0));
  auto* steps_opt = m->add_option("--steps", morph.steps, "Inclusive alpha grid size")
                        ->check(CLI::Range(2, 1001));
  alpha_opt->excludes(steps_opt);
  m->add_option("--out", morph.out_dir, "Output directory")->required();
  m->add_option("--adain", morph.adain, "AdaIN towards interpolated band statistics")
      ->transform(CLI::CheckedTransformer(kOnOff))
      ->default_str("off");
  m->add_option("--norm-policy", morph.policy, "Latent norm of the morph")
      ->transform(CLI::CheckedTransformer(kPolicies))
      ->default_str("lerp-norm");
  add_codec_flags(m, morph.codec);

  ReconstructArgs rec;
  auto* r = app.add_subcommand("reconstruct", "Codec round trip with SC report");
  r->add_option("--in", rec.in, "Input WAV")->required()->check(CLI::ExistingFile);
  r->add_option("--out", rec.out, "Output WAV")->required();
  add_codec_flags(r, rec.codec);

  fs::path manifest_path, eval_out;
  auto* e = app.add_subcommand("eval", "Batch spectral-convergence evaluation");
  e->add_option("--manifest", manifest_path, "Task manifest (JSON)")->required();
  e->add_option("--out", eval_out, "Report path (.json or .csv)")->required();

  std::string host = "127.0.0.1";
  int port = 8080;
  fs::path static_dir;
  std::size_t max_sessions = 32;
  auto* s = app.add_subcommand("serve", "Run the HTTP service");
  s->add_option("--host", host, "Bind address")->capture_default_str();
  s->add_option("--port", port, "Port (0 = ephemeral)")->check(CLI::Range(0, 65535))->capture_default_str();
  s->add_option("--static", static_dir, "UI asset directory served at /");
  s->add_option("--max-sessions", max_sessions, "Concurrent session limit")
      ->check(CLI::Range(1, 100000))
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*m) {
      if (!morph.alpha && !morph.steps) throw UsageError("morph: one of --alpha or --steps is required");
      return cmd_morph(morph, out);
    }
    if (*r) return cmd_reconstruct(rec, out);
    if (*e) return cmd_eval(manifest_path, eval_out, out, err);
    if (*s) return cmd_serve(host, port, static_dir, max_sessions, out);
  } catch (const UsageError& ue) {
    err << "error: " << ue.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace tonemorph
