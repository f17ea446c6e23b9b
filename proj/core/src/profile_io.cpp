#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "eqlab/channel.hpp"

namespace eqlab {

// Profile file schema (JSON):
//   static : {"name": "...", "version": 1, "taps": [..], "normalize": true}
//   markov : as static plus {"markov": {"sigma_q2": 1e-6, "renormalize": true}}
//   faded  : {"name": "...", "version": 1, "mean_powers": [..],
//             "doppler_hz": 100.0, "sample_rate_hz": 3.84e6, "n_sines": 8}
ChannelSpec load_profile_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profile file: " + path);
  nlohmann::json j;
  in >> j;

  const std::string label = j.value("name", path);

  if (j.contains("mean_powers")) {
    FadedProfileSpec spec;
    const auto powers = j.at("mean_powers").get<std::vector<double>>();
    spec.mean_powers =
        Eigen::Map<const Eigen::VectorXd>(powers.data(), static_cast<Eigen::Index>(powers.size()));
    const double total = spec.mean_powers.sum();
    if (!(total > 0.0)) throw std::runtime_error("profile " + path + ": mean powers must be positive");
    spec.mean_powers /= total;
    spec.doppler_hz = j.value("doppler_hz", 0.0);
    spec.sample_rate_hz = j.value("sample_rate_hz", 3.84e6);
    spec.n_sines = j.value("n_sines", static_cast<int>(JakesTapGenerator::kDefaultSines));
    spec.label = label;
    return spec;
  }

  if (!j.contains("taps")) throw std::runtime_error("profile " + path + ": needs \"taps\" or \"mean_powers\"");
  const auto taps = j.at("taps").get<std::vector<double>>();
  ChannelProfile profile;
  if (j.value("normalize", true)) {
    profile = normalize_power(taps, label);
  } else {
    profile.taps = Eigen::Map<const Eigen::VectorXd>(taps.data(), static_cast<Eigen::Index>(taps.size()));
    profile.label = label;
  }

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

}  // namespace eqlab
