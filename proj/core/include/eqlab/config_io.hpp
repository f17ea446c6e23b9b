#pragma once

#include <string>

#include <json.hpp>

#include "eqlab/sim.hpp"

namespace eqlab {

/// Channel element of the config schema.  One of:
///   {"profile": "model2"}                        built-in profile
///   {"taps": [..]}                               inline static profile
///   {"file": "path.json"}                        profile file
///   {"mean_powers": [..], "doppler_hz": ..}      inline faded profile
///   {"cost207_doppler_hz": 100.0}                reduced COST207-TU
/// A static profile may add {"markov": {"sigma_q2": .., "renormalize": ..}}.
ChannelSpec parse_channel_spec(const nlohmann::json& j);

SimulationConfig parse_simulation_config(const nlohmann::json& j);

SimulationConfig load_simulation_config(const std::string& path);

}  // namespace eqlab
