#include "eqlab/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "eqlab/signals.hpp"

namespace eqlab {

ChannelProfile normalize_power(const Eigen::VectorXd& taps, std::string label) {
  const double power = taps.squaredNorm();
  if (!(power > 0.0)) throw std::invalid_argument("degenerate channel: all-zero taps");
  return ChannelProfile{taps / std::sqrt(power), std::move(label)};
}

ChannelProfile normalize_power(const std::vector<double>& taps, std::string label) {
  return normalize_power(
      Eigen::Map<const Eigen::VectorXd>(taps.data(), static_cast<Eigen::Index>(taps.size())),
      std::move(label));
}

MarkovChannel::MarkovChannel(ChannelProfile start, double sigma_q2, bool renormalize)
    : taps_(std::move(start.taps)),
      sigma_q2_(sigma_q2),
      renormalize_(renormalize),
      half_width_(std::sqrt(3.0 * sigma_q2)) {
  if (sigma_q2 < 0.0) throw std::invalid_argument("MarkovChannel: negative process noise variance");
}

void MarkovChannel::step(SeededRng& rng) {
  if (sigma_q2_ == 0.0) return;
  for (Eigen::Index i = 0; i < taps_.size(); ++i) {
    taps_[i] += half_width_ * (2.0 * rng.uniform() - 1.0);
  }
  if (renormalize_) {
    const double power = taps_.squaredNorm();
    if (power > 0.0) taps_ /= std::sqrt(power);
  }
}

JakesTapGenerator::JakesTapGenerator(double doppler_hz, double sample_rate_hz, double mean_power,
                                     int n_sines, SeededRng& rng, Mode mode)
    : doppler_hz_(doppler_hz),
      sample_rate_hz_(sample_rate_hz),
      mean_power_(mean_power),
      mode_(mode) {
  if (doppler_hz < 0.0) throw std::invalid_argument("JakesTapGenerator: negative Doppler");
  if (n_sines < 1) throw std::invalid_argument("JakesTapGenerator: need at least one sinusoid");
  if (sample_rate_hz <= 0.0) throw std::invalid_argument("JakesTapGenerator: sample rate must be positive");
  omega_.resize(n_sines);
  phase_i_.resize(n_sines);
  phase_q_.resize(n_sines);
  // Arrival angles at midpoint nodes of (0, pi/2); the resulting quadrature
  // autocorrelation (1/M) sum cos(2 pi fd cos(a_m) tau) is a quadrature rule
  // for J0(2 pi fd tau).
  for (int m = 0; m < n_sines; ++m) {
    const double alpha = std::numbers::pi * (m + 0.5) / (2.0 * n_sines);
    omega_[m] = 2.0 * std::numbers::pi * doppler_hz * std::cos(alpha) / sample_rate_hz;
    phase_i_[m] = 2.0 * std::numbers::pi * rng.uniform() - std::numbers::pi;
    phase_q_[m] = 2.0 * std::numbers::pi * rng.uniform() - std::numbers::pi;
  }
  // each quadrature component has unit power; the envelope then has mean
  // square 2, so scale by sqrt(mean_power / 2)
  amplitude_ = std::sqrt(2.0 / n_sines);
}

std::pair<double, double> JakesTapGenerator::quadrature(std::int64_t t) const {
  double ci = 0.0, cq = 0.0;
  for (std::size_t m = 0; m < omega_.size(); ++m) {
    const double wt = omega_[m] * static_cast<double>(t);
    ci += std::cos(wt + phase_i_[m]);
    cq += std::cos(wt + phase_q_[m]);
  }
  return {amplitude_ * ci, amplitude_ * cq};
}

double JakesTapGenerator::envelope(std::int64_t t) const {
  const auto [ci, cq] = quadrature(t);
  return std::sqrt(mean_power_ * (ci * ci + cq * cq) / 2.0);
}

double JakesTapGenerator::gain(std::int64_t t) const {
  const auto [ci, cq] = quadrature(t);
  const double env = std::sqrt(mean_power_ * (ci * ci + cq * cq) / 2.0);
  if (mode_ == Mode::Magnitude) return env;
  return ci < 0.0 ? -env : env;
}

namespace {

class StaticProvider final : public ChannelProvider {
 public:
  explicit StaticProvider(ChannelProfile profile) : taps_(std::move(profile.taps)) {}
  const Eigen::VectorXd& taps_at(std::int64_t) override { return taps_; }
  int length() const override { return static_cast<int>(taps_.size()); }

 private:
  Eigen::VectorXd taps_;
};

class MarkovProvider final : public ChannelProvider {
 public:
  MarkovProvider(const MarkovSpec& spec, std::uint64_t seed, std::uint64_t stream)
      : channel_(spec.start, spec.sigma_q2, spec.renormalize), rng_(seed, stream) {}

  const Eigen::VectorXd& taps_at(std::int64_t n) override {
    while (last_ < n) {
      channel_.step(rng_);
      ++last_;
    }
    return channel_.taps();
  }
  int length() const override { return static_cast<int>(channel_.taps().size()); }

 private:
  MarkovChannel channel_;
  SeededRng rng_;
  std::int64_t last_ = 0;
};

class FadedProvider final : public ChannelProvider {
 public:
  FadedProvider(const FadedProfileSpec& spec, std::uint64_t seed, std::uint64_t stream) {
    SeededRng rng(seed, stream);
    taps_.resize(spec.mean_powers.size());
    gens_.reserve(static_cast<std::size_t>(spec.mean_powers.size()));
    for (Eigen::Index i = 0; i < spec.mean_powers.size(); ++i) {
      gens_.emplace_back(spec.doppler_hz, spec.sample_rate_hz, spec.mean_powers[i],
                         spec.n_sines, rng, spec.mode);
    }
  }

  const Eigen::VectorXd& taps_at(std::int64_t n) override {
    if (n != cached_) {
      for (std::size_t i = 0; i < gens_.size(); ++i) {
        taps_[static_cast<Eigen::Index>(i)] = gens_[i].gain(n);
      }
      cached_ = n;
    }
    return taps_;
  }
  int length() const override { return static_cast<int>(taps_.size()); }

 private:
  std::vector<JakesTapGenerator> gens_;
  Eigen::VectorXd taps_;
  std::int64_t cached_ = -1;
};

}  // namespace

int channel_spec_length(const ChannelSpec& spec) {
  return std::visit(
      [](const auto& s) -> int {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ChannelProfile>) {
          return s.length();
        } else if constexpr (std::is_same_v<T, MarkovSpec>) {
          return s.start.length();
        } else {
          return static_cast<int>(s.mean_powers.size());
        }
      },
      spec);
}

std::unique_ptr<ChannelProvider> make_channel_provider(const ChannelSpec& spec,
                                                       std::uint64_t seed,
                                                       std::uint64_t stream) {
  return std::visit(
      [&](const auto& s) -> std::unique_ptr<ChannelProvider> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ChannelProfile>) {
          return std::make_unique<StaticProvider>(s);
        } else if constexpr (std::is_same_v<T, MarkovSpec>) {
          return std::make_unique<MarkovProvider>(s, seed, stream);
        } else {
          return std::make_unique<FadedProvider>(s, seed, stream);
        }
      },
      spec);
}

std::int64_t ScenarioScript::total_duration() const {
  std::int64_t total = 0;
  for (const auto& s : segments) total += s.duration;
  return total;
}

int ScenarioScript::max_channel_length() const {
  int len = 0;
  for (const auto& s : segments) len = std::max(len, channel_spec_length(s.channel));
  return len;
}

ScenarioScript ScenarioScript::single(ChannelSpec channel, double ebno_db, std::int64_t duration) {
  ScenarioScript script;
  script.segments.push_back({duration, std::move(channel), ebno_db});
  return script;
}

ScenarioProvider::ScenarioProvider(const ScenarioScript& script, std::uint64_t seed,
                                   std::uint64_t stream, double symbol_power) {
  if (script.segments.empty()) throw std::invalid_argument("ScenarioProvider: empty script");
  std::int64_t at = 0;
  std::uint64_t index = 0;
  for (const auto& seg : script.segments) {
    if (seg.duration <= 0) throw std::invalid_argument("ScenarioProvider: segment duration must be positive");
    Segment s;
    s.begin = at;
    s.end = at + seg.duration;
    // each segment gets a distinct sub-stream so switching instants do not
    // re-correlate channel evolutions
    s.provider = make_channel_provider(seg.channel, seed, stream * 1024 + index);
    s.noise_variance = noise_variance_from_ebno(seg.ebno_db, symbol_power);
    max_len_ = std::max(max_len_, s.provider->length());
    segments_.push_back(std::move(s));
    at = segments_.back().end;
    ++index;
  }
  total_ = at;
}

ScenarioProvider::Sample ScenarioProvider::at(std::int64_t n) {
  if (n < 0 || n >= total_) throw std::out_of_range("ScenarioProvider: sample index out of range");
  while (current_ + 1 < segments_.size() && n >= segments_[current_].end) ++current_;
  auto& seg = segments_[current_];
  if (n < seg.begin) throw std::logic_error("ScenarioProvider: sample indices must be non-decreasing");
  return Sample{&seg.provider->taps_at(n - seg.begin), seg.noise_variance};
}

FadedProfileSpec cost207_tu_reduced(double doppler_hz) {
  // 11 taps at 3.84 Msamples/s cover a 2.6 us excess delay; mean powers
  // decay exponentially with a 1 us time constant and sum to one.
  constexpr int kTaps = 11;
  constexpr double kRate = 3.84e6;
  constexpr double kDecay = 1.0e-6;
  Eigen::VectorXd powers(kTaps);
  for (int k = 0; k < kTaps; ++k) powers[k] = std::exp(-(k / kRate) / kDecay);
  powers /= powers.sum();
  FadedProfileSpec spec;
  spec.mean_powers = powers;
  spec.doppler_hz = doppler_hz;
  spec.sample_rate_hz = kRate;
  spec.label = "cost207-tu-reduced";
  return spec;
}

ChannelProfile builtin_profile(const std::string& name) {
  // Representative reconstructions, not measured data: model1 is a short
  // line-of-sight channel, model2 a frozen draw of the reduced COST207-TU
  // fading profile, model3 a five-tap response with an exact in-band null
  // and the main path delayed two samples, urban11 an 11-tap urban profile
  // with a rapidly decaying tail.
  if (name == "model1") return normalize_power(std::vector<double>{1.0, 0.4}, "model1");
  if (name == "model2") {
    return normalize_power(std::vector<double>{0.4613, -0.2253, 0.2992, -0.458, 0.2558, 0.2477,
                                               -0.2037, -0.3755, -0.1421, 0.285, 0.1627},
                           "model2");
  }
  if (name == "model3") {
    return normalize_power(std::vector<double>{0.15, 0.5, 0.7, 0.5, 0.15}, "model3");
  }
  if (name == "urban11") {
    return normalize_power(std::vector<double>{0.85, -0.405, 0.28, -0.19, 0.13, 0.088, -0.06,
                                               0.041, -0.028, 0.019, 0.013},
                           "urban11");
  }
  throw std::invalid_argument("unknown built-in profile: " + name);
}

std::vector<std::string> builtin_profile_names() {
  return {"model1", "model2", "model3", "urban11"};
}

}  // namespace eqlab
