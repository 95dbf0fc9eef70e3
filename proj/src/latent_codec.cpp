// Copyright 2026 The tonemorph Authors
// SPDX-License-Identifier: Apache-2.0

#include "tonemorph/latent_codec.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <string>
#include <tuple>

#include "tonemorph/error.hpp"

namespace tonemorph {

namespace {

constexpr std::uint16_t kLatentVersion = 1;
constexpr std::size_t kLatentHeaderBytes = 4 + 2 + 6 * 4 + 8 + 8;

double frobenius_distance(const Grid<std::complex<double>>& spec, const Grid<double>& target) {
  double acc = 0.0;
  for (std::size_t i = 0; i < target.data.size(); ++i) {
    const double d = std::abs(spec.data[i]) - target.data[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
}

template <typename T>
T get(const std::uint8_t*& p) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(static_cast<U>(p[i]) << (8 * i));
  p += sizeof(T);
  return std::bit_cast<T>(bits);
}

}  // namespace

double CodecConfig::log_floor_value() const { return std::log(log_floor); }

void CodecConfig::validate() const {
  if (sample_rate_hz <= 0) throw Error(Errc::ConfigInvalid, "sample rate must be positive");
  stft_config().validate();
  if (n_mels < 2) throw Error(Errc::ConfigInvalid, "need at least two mel bands");
  if (!(log_floor > 0.0) || !std::isfinite(log_floor)) {
    throw Error(Errc::ConfigInvalid, "log floor must be positive and finite");
  }
  if (gl_iterations < 0) throw Error(Errc::ConfigInvalid, "gl_iterations must be >= 0");
}

bool CodecConfig::same_latent_space(const CodecConfig& other) const noexcept {
  return sample_rate_hz == other.sample_rate_hz && fft_size == other.fft_size &&
         hop_size == other.hop_size && win_length == other.win_length &&
         n_mels == other.n_mels && log_floor == other.log_floor;
}

Grid<double> mel_pseudo_inverse(const MelFilterbank& fb) {
  const auto bands = static_cast<Eigen::Index>(fb.weights.rows);
  const auto bins = static_cast<Eigen::Index>(fb.weights.cols);
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> w(fb.weights.data.data(), bands, bins);

  const Eigen::BDCSVD<Eigen::MatrixXd> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  const double tol = static_cast<double>(std::max(bands, bins)) *
                     std::numeric_limits<double>::epsilon() * sigma(0);
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (!(sigma(i) > tol)) {
      throw Error(Errc::SingularFilterbank,
                  "filterbank rank " + std::to_string(i) + " < " + std::to_string(bands));
    }
  }
  const Eigen::MatrixXd pinv =
      svd.matrixV() * sigma.cwiseInverse().asDiagonal() * svd.matrixU().transpose();

  Grid<double> out(fb.weights.cols, fb.weights.rows);
  for (Eigen::Index k = 0; k < bins; ++k) {
    for (Eigen::Index b = 0; b < bands; ++b) {
      out(static_cast<std::size_t>(k), static_cast<std::size_t>(b)) = pinv(k, b);
    }
  }
  return out;
}

std::shared_ptr<const MelBasis> mel_basis(const CodecConfig& cfg) {
  using Key = std::tuple<int, std::size_t, std::size_t>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const MelBasis>> cache;

  const Key key{cfg.sample_rate_hz, cfg.fft_size, cfg.n_mels};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto basis = std::make_shared<MelBasis>();
  basis->filterbank =
      build_mel(cfg.sample_rate_hz, cfg.fft_size, cfg.n_mels, 0.0, 0.5 * cfg.sample_rate_hz);
  basis->inverse = mel_pseudo_inverse(basis->filterbank);

  std::lock_guard lock(mutex);
  // A concurrent builder may have won; its result is identical, keep it.
  auto [it, inserted] = cache.emplace(key, std::move(basis));
  return it->second;
}

MelLatent encode(const AudioClip& clip, const CodecConfig& cfg) {
  cfg.validate();
  if (clip.sample_rate_hz != cfg.sample_rate_hz) {
    throw Error(Errc::RateMismatch, "clip is " + std::to_string(clip.sample_rate_hz) +
                                        " Hz, codec expects " +
                                        std::to_string(cfg.sample_rate_hz) + " Hz");
  }
  const auto basis = mel_basis(cfg);
  const auto mags = magnitude(stft(clip, cfg.stft_config()));
  auto mel = apply_mel(mags, basis->filterbank);

  MelLatent latent;
  latent.config = cfg;
  latent.original_len = clip.size();
  for (double& v : mel.data) v = std::log(std::max(v, cfg.log_floor));
  latent.values = std::move(mel);
  return latent;
}

GriffinLimResult griffin_lim_traced(const MagnitudeSpectrogram& mags, int iters,
                                    std::size_t original_len,
                                    std::optional<std::uint64_t> random_phase_seed) {
  const StftConfig& cfg = mags.config;
  cfg.validate();
  if (mags.mags.cols != cfg.bins() || mags.mags.rows == 0) {
    throw Error(Errc::ShapeMismatch, "magnitudes do not match the STFT configuration");
  }
  const std::size_t n_frames = mags.mags.rows;
  if (original_len == 0) original_len = (n_frames - 1) * cfg.hop_size;
  const std::size_t pad = cfg.fft_size / 2;

  Grid<std::complex<double>> spec(n_frames, cfg.bins());
  if (random_phase_seed) {
    std::mt19937_64 rng(*random_phase_seed);
    std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
    for (std::size_t i = 0; i < spec.data.size(); ++i) {
      spec.data[i] = std::polar(mags.mags.data[i], phase(rng));
    }
  } else {
    for (std::size_t i = 0; i < spec.data.size(); ++i) spec.data[i] = mags.mags.data[i];
  }

  GriffinLimResult result;
  result.inconsistency.reserve(static_cast<std::size_t>(iters) + 1);
  auto signal = detail::overlap_add(spec, cfg);
  for (int n = 0;; ++n) {
    const auto rebuilt = detail::analyze_padded(signal, cfg, n_frames);
    result.inconsistency.push_back(frobenius_distance(rebuilt, mags.mags));
    if (n == iters) break;
    for (std::size_t i = 0; i < spec.data.size(); ++i) {
      const std::complex<double> z = rebuilt.data[i];
      const double r = std::abs(z);
      spec.data[i] = r > 0.0 ? mags.mags.data[i] * (z / r) : std::complex<double>(mags.mags.data[i]);
    }
    signal = detail::overlap_add(spec, cfg);
  }

  result.audio.sample_rate_hz = mags.sample_rate_hz;
  result.audio.samples.assign(original_len, 0.0);
  for (std::size_t i = 0; i < original_len && pad + i < signal.size(); ++i) {
    result.audio.samples[i] = signal[pad + i];
  }
  return result;
}

AudioClip griffin_lim(const MagnitudeSpectrogram& mags, int iters, std::size_t original_len,
                      std::optional<std::uint64_t> random_phase_seed) {
  return griffin_lim_traced(mags, iters, original_len, random_phase_seed).audio;
}

AudioClip decode(const MelLatent& latent) {
  const CodecConfig& cfg = latent.config;
  cfg.validate();
  if (latent.bands() != cfg.n_mels || latent.frames() == 0) {
    throw Error(Errc::ShapeMismatch, "latent shape does not match its configuration");
  }
  const auto basis = mel_basis(cfg);
  const Grid<double>& inv = basis->inverse;  // K x B
  const std::size_t bins = inv.rows;
  const std::size_t bands = inv.cols;

  MagnitudeSpectrogram mags;
  mags.config = cfg.stft_config();
  mags.sample_rate_hz = cfg.sample_rate_hz;
  mags.original_len = latent.original_len;
  mags.mags = Grid<double>(latent.frames(), bins);
  std::vector<double> mel(bands);
  for (std::size_t t = 0; t < latent.frames(); ++t) {
    const auto row = latent.values.row(t);
    for (std::size_t b = 0; b < bands; ++b) mel[b] = std::exp(row[b]);
    for (std::size_t k = 0; k < bins; ++k) {
      const auto w = inv.row(k);
      double acc = 0.0;
      for (std::size_t b = 0; b < bands; ++b) acc += w[b] * mel[b];
      mags.mags(t, k) = std::max(acc, 0.0);
    }
  }
  return griffin_lim(mags, cfg.gl_iterations, latent.original_len, cfg.random_phase_seed);
}

std::vector<std::uint8_t> serialize_latent(const MelLatent& latent) {
  const CodecConfig& cfg = latent.config;
  std::vector<std::uint8_t> out;
  out.reserve(kLatentHeaderBytes + latent.values.data.size() * 4);
  for (char c : {'M', 'L', 'A', 'T'}) out.push_back(static_cast<std::uint8_t>(c));
  put<std::uint16_t>(out, kLatentVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(latent.frames()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(latent.bands()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.sample_rate_hz));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.fft_size));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.hop_size));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.win_length));
  put<double>(out, cfg.log_floor);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(latent.original_len));
  for (double v : latent.values.data) put<float>(out, static_cast<float>(v));
  return out;
}

MelLatent deserialize_latent(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kLatentHeaderBytes || std::memcmp(bytes.data(), "MLAT", 4) != 0) {
    throw Error(Errc::CorruptHeader, "not an MLAT latent container");
  }
  const std::uint8_t* p = bytes.data() + 4;
  const auto version = get<std::uint16_t>(p);
  if (version != kLatentVersion) {
    throw Error(Errc::UnsupportedFormat, "latent version " + std::to_string(version));
  }
  const auto frames = get<std::uint32_t>(p);
  const auto bands = get<std::uint32_t>(p);
  MelLatent latent;
  CodecConfig& cfg = latent.config;
  cfg.sample_rate_hz = static_cast<int>(get<std::uint32_t>(p));
  cfg.fft_size = get<std::uint32_t>(p);
  cfg.hop_size = get<std::uint32_t>(p);
  cfg.win_length = get<std::uint32_t>(p);
  cfg.log_floor = get<double>(p);
  cfg.n_mels = bands;
  latent.original_len = static_cast<std::size_t>(get<std::uint64_t>(p));
  cfg.validate();

  const std::size_t count = static_cast<std::size_t>(frames) * bands;
  if (frames == 0 || bytes.size() != kLatentHeaderBytes + count * 4) {
    throw Error(Errc::CorruptHeader, "latent payload size does not match header");
  }
  // The f32 image of log(floor) may sit a hair below the f64 floor.
  const double floor_value = cfg.log_floor_value();
  latent.values = Grid<double>(frames, bands);
  for (double& v : latent.values.data) {
    const auto f = static_cast<double>(get<float>(p));
    if (!std::isfinite(f)) throw Error(Errc::CorruptHeader, "non-finite latent value");
    v = std::max(f, floor_value);
  }
  return latent;
}

void save_latent(const MelLatent& latent, const std::filesystem::path& path) {
  const auto bytes = serialize_latent(latent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoError, "short write to " + path.string());
}

MelLatent load_latent(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_latent(bytes);
}

}  // namespace tonemorph
