#include "eqlab/config_io.hpp"

#include <fstream>
#include <stdexcept>

namespace eqlab {

namespace {

ChannelProfile static_part(const nlohmann::json& j) {
  if (j.contains("profile")) return builtin_profile(j.at("profile").get<std::string>());
  if (j.contains("taps")) {
    const auto taps = j.at("taps").get<std::vector<double>>();
    if (j.value("normalize", true)) return normalize_power(taps);
    ChannelProfile p;
    p.taps = Eigen::Map<const Eigen::VectorXd>(taps.data(), static_cast<Eigen::Index>(taps.size()));
    return p;
  }
  throw std::invalid_argument("channel: needs \"profile\", \"taps\", \"file\", "
                              "\"mean_powers\" or \"cost207_doppler_hz\"");
}

}  // namespace

ChannelSpec parse_channel_spec(const nlohmann::json& j) {
  if (j.is_string()) {
    // convenience: a bare string is a built-in name or a profile file path
    const auto name = j.get<std::string>();
    try {
      return builtin_profile(name);
    } catch (const std::invalid_argument&) {
      return load_profile_file(name);
    }
  }
  if (j.contains("file")) return load_profile_file(j.at("file").get<std::string>());
  if (j.contains("cost207_doppler_hz")) {
    return cost207_tu_reduced(j.at("cost207_doppler_hz").get<double>());
  }
  if (j.contains("mean_powers")) {
    FadedProfileSpec spec;
    const auto powers = j.at("mean_powers").get<std::vector<double>>();
    spec.mean_powers =
        Eigen::Map<const Eigen::VectorXd>(powers.data(), static_cast<Eigen::Index>(powers.size()));
    const double total = spec.mean_powers.sum();
    if (!(total > 0.0)) throw std::invalid_argument("channel: mean powers must be positive");
    spec.mean_powers /= total;
    spec.doppler_hz = j.value("doppler_hz", 0.0);
    spec.sample_rate_hz = j.value("sample_rate_hz", 3.84e6);
    spec.n_sines = j.value("n_sines", static_cast<int>(JakesTapGenerator::kDefaultSines));
    return spec;
  }
  ChannelProfile profile = static_part(j);
  if (j.contains("markov")) {
    const auto& m = j.at("markov");
    MarkovSpec spec;
    spec.start = std::move(profile);
    spec.sigma_q2 = m.value("sigma_q2", 0.0);
    spec.renormalize = m.value("renormalize", true);
    return spec;
  }
  return profile;
}

SimulationConfig parse_simulation_config(const nlohmann::json& j) {
  SimulationConfig cfg;

  if (!j.contains("scenario")) throw std::invalid_argument("config: missing \"scenario\"");
  for (const auto& seg : j.at("scenario")) {
    ScenarioSegment s;
    s.duration = seg.at("duration").get<std::int64_t>();
    s.ebno_db = seg.at("ebno_db").get<double>();
    s.channel = parse_channel_spec(seg.at("channel"));
    cfg.scenario.segments.push_back(std::move(s));
  }

  if (j.contains("equalizer")) {
    const auto& e = j.at("equalizer");
    cfg.eq.kind = equalizer_kind_from_string(e.value("kind", std::string("le")));
    cfg.eq.delay = e.value("delay", cfg.eq.delay);
    cfg.eq.taps = e.value("taps", cfg.eq.taps);
    cfg.eq.taps_per_segment = e.value("taps_per_segment", cfg.eq.taps_per_segment);
    cfg.eq.max_segments = e.value("max_segments", cfg.eq.max_segments);
    cfg.eq.initial_segments = e.value("initial_segments", cfg.eq.initial_segments);
    cfg.eq.le_control.alpha_up = e.value("alpha_up", cfg.eq.le_control.alpha_up);
    cfg.eq.le_control.alpha_dw = e.value("alpha_dw", cfg.eq.le_control.alpha_dw);
    cfg.eq.le_control.beta = e.value("beta", cfg.eq.le_control.beta);
    cfg.eq.le_control.mse_floor = e.value("mse_floor", cfg.eq.le_control.mse_floor);
    cfg.eq.le_control.hold = e.value("hold", cfg.eq.le_control.hold);
    cfg.eq.n_f = e.value("n_f", cfg.eq.n_f);
    cfg.eq.n_b = e.value("n_b", cfg.eq.n_b);
    cfg.eq.n_b_min = e.value("n_b_min", cfg.eq.n_b_min);
    cfg.eq.n_b_max = e.value("n_b_max", cfg.eq.n_b_max);
    cfg.eq.fbf_control.chi = e.value("chi", cfg.eq.fbf_control.chi);
    cfg.eq.fbf_control.window = e.value("window", cfg.eq.fbf_control.window);
    cfg.eq.fbf_control.probe_period = e.value("probe_period", cfg.eq.fbf_control.probe_period);
  }

  if (j.contains("algorithm")) {
    const auto& a = j.at("algorithm");
    cfg.algo.name = algorithm_from_string(a.value("name", std::string("lms")));
    cfg.algo.mu = a.value("mu", cfg.algo.mu);
    cfg.algo.mu_tilde = a.value("mu_tilde", cfg.algo.mu_tilde);
    cfg.algo.eps = a.value("eps", cfg.algo.eps);
    cfg.algo.rho = a.value("rho", cfg.algo.rho);
    cfg.algo.a = a.value("a", cfg.algo.a);
    cfg.algo.initial_mu = a.value("initial_mu", cfg.algo.initial_mu);
    cfg.algo.mu_max = a.value("mu_max", cfg.algo.mu_max);
    cfg.algo.lambda = a.value("lambda", cfg.algo.lambda);
    cfg.algo.delta = a.value("delta", cfg.algo.delta);
  }

  if (j.contains("training")) {
    const auto& t = j.at("training");
    cfg.training.continuous = t.value("continuous", false);
    cfg.training.train_len = t.value("train_len", cfg.training.train_len);
    cfg.training.frame_len = t.value("frame_len", cfg.training.frame_len);
  }

  if (j.contains("metrics")) {
    const auto& m = j.at("metrics");
    cfg.metrics.mse_window = m.value("mse_window", cfg.metrics.mse_window);
    cfg.metrics.ber_warmup = m.value("ber_warmup", cfg.metrics.ber_warmup);
    cfg.metrics.decimation = m.value("decimation", cfg.metrics.decimation);
    cfg.metrics.mmse_every = m.value("mmse_every", cfg.metrics.mmse_every);
  }

  cfg.run_length = j.value("run_length", cfg.run_length);
  cfg.ensemble = j.value("ensemble", cfg.ensemble);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.threads = j.value("threads", cfg.threads);
  return cfg;
}

SimulationConfig load_simulation_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  return parse_simulation_config(j);
}

}  // namespace eqlab
