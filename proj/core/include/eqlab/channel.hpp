#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "eqlab/rng.hpp"

namespace eqlab {

/// Static channel impulse response, normalised to unit power response.
struct ChannelProfile {
  Eigen::VectorXd taps;
  std::string label;

  int length() const { return static_cast<int>(taps.size()); }
};

/// Scales taps to unit total power.  Throws on an all-zero input.
ChannelProfile normalize_power(const Eigen::VectorXd& taps, std::string label = {});
ChannelProfile normalize_power(const std::vector<double>& taps, std::string label = {});

/// First-order random-walk channel: every tap is perturbed each step by an
/// independent zero-mean uniform variable of variance sigma_q^2.  With
/// `renormalize` the taps are rescaled to unit power after each step, which
/// keeps the received power constant at sigma_d^2 + sigma_v^2.
class MarkovChannel {
 public:
  MarkovChannel(ChannelProfile start, double sigma_q2, bool renormalize = true);

  void step(SeededRng& rng);

  const Eigen::VectorXd& taps() const { return taps_; }
  double sigma_q2() const { return sigma_q2_; }
  bool renormalize() const { return renormalize_; }

 private:
  Eigen::VectorXd taps_;
  double sigma_q2_;
  bool renormalize_;
  double half_width_;  // uniform perturbation is +/- sqrt(3 sigma_q^2)
};

/// Rayleigh fading tap via a sum of sinusoids.
///
/// Two quadrature components are built from n_sines cosines each, with
/// arrival angles at midpoint-rule nodes in (0, pi/2) and independent random
/// phases, so the quadrature autocorrelation approaches J0(2 pi fd tau) and
/// the envelope is Rayleigh.  The default real-valued combination is the
/// envelope signed by the in-phase component; Magnitude mode drops the sign.
/// fd = 0 freezes the tap at its t = 0 value.
class JakesTapGenerator {
 public:
  enum class Mode { Signed, Magnitude };

  JakesTapGenerator(double doppler_hz, double sample_rate_hz, double mean_power,
                    int n_sines, SeededRng& rng, Mode mode = Mode::Signed);

  /// Real tap value at sample index t.
  double gain(std::int64_t t) const;

  double envelope(std::int64_t t) const;

  /// Underlying unit-power quadrature pair at sample index t.
  std::pair<double, double> quadrature(std::int64_t t) const;

  double doppler_hz() const { return doppler_hz_; }
  double mean_power() const { return mean_power_; }

  static constexpr int kDefaultSines = 8;

 private:
  double doppler_hz_;
  double sample_rate_hz_;
  double mean_power_;
  Mode mode_;
  std::vector<double> omega_;    // rad per sample
  std::vector<double> phase_i_;
  std::vector<double> phase_q_;
  double amplitude_;
};

/// Specification of a multipath profile whose taps fade independently.
struct FadedProfileSpec {
  Eigen::VectorXd mean_powers;  // per-tap mean power, sums to 1
  double doppler_hz = 0.0;
  double sample_rate_hz = 3.84e6;
  int n_sines = JakesTapGenerator::kDefaultSines;
  JakesTapGenerator::Mode mode = JakesTapGenerator::Mode::Signed;
  std::string label;
};

/// Specification of a Markov-evolving channel.
struct MarkovSpec {
  ChannelProfile start;
  double sigma_q2 = 0.0;
  bool renormalize = true;
};

/// A channel is either frozen, Markov-evolving, or Rayleigh-faded.
using ChannelSpec = std::variant<ChannelProfile, MarkovSpec, FadedProfileSpec>;

int channel_spec_length(const ChannelSpec& spec);

/// Per-symbol tap source.  `taps_at` must be called with non-decreasing
/// sample indices; stateful models advance internally.
class ChannelProvider {
 public:
  virtual ~ChannelProvider() = default;
  virtual const Eigen::VectorXd& taps_at(std::int64_t n) = 0;
  virtual int length() const = 0;
};

std::unique_ptr<ChannelProvider> make_channel_provider(const ChannelSpec& spec,
                                                       std::uint64_t seed,
                                                       std::uint64_t stream);

/// One scripted interval: a channel and a noise level for `duration` samples.
struct ScenarioSegment {
  std::int64_t duration = 0;
  ChannelSpec channel;
  double ebno_db = 0.0;
};

struct ScenarioScript {
  std::vector<ScenarioSegment> segments;

  std::int64_t total_duration() const;
  int max_channel_length() const;

  static ScenarioScript single(ChannelSpec channel, double ebno_db, std::int64_t duration);
};

/// Instantiated script: channel taps and noise variance per sample index.
/// Switches are instantaneous at segment boundaries.
class ScenarioProvider {
 public:
  ScenarioProvider(const ScenarioScript& script, std::uint64_t seed, std::uint64_t stream,
                   double symbol_power = 1.0);

  struct Sample {
    const Eigen::VectorXd* taps;
    double noise_variance;
  };

  /// Sample index must be non-decreasing and below the total duration.
  Sample at(std::int64_t n);

  std::int64_t total_duration() const { return total_; }
  int max_channel_length() const { return max_len_; }

 private:
  struct Segment {
    std::int64_t begin;
    std::int64_t end;
    std::unique_ptr<ChannelProvider> provider;
    double noise_variance;
  };
  std::vector<Segment> segments_;
  std::size_t current_ = 0;
  std::int64_t total_ = 0;
  int max_len_ = 0;
};

/// Reduced COST207 typical-urban profile: 11 bit-spaced taps at
/// 3.84 Msamples/s with exponentially decaying mean powers, each tap
/// independently Rayleigh-faded at the given Doppler spread.
FadedProfileSpec cost207_tu_reduced(double doppler_hz);

/// Built-in static profiles ("model1", "model2", "model3", "urban11").
/// These reconstruct the structural facts of the reference channels and are
/// not measured data.
ChannelProfile builtin_profile(const std::string& name);
std::vector<std::string> builtin_profile_names();

/// Loads a channel spec from a JSON profile file (see core/data for the
/// schema: "taps" for static profiles, "mean_powers" + "doppler_hz" for
/// faded ones).
ChannelSpec load_profile_file(const std::string& path);

}  // namespace eqlab
