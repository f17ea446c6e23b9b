#pragma once

#include <cstdint>
#include <vector>

#include "eqlab/rng.hpp"

namespace eqlab {

/// Equiprobable antipodal (+/-1) symbol sequence.
struct SymbolStream {
  std::vector<double> values;
  double symbol_power = 1.0;  // every value squared is exactly 1
};

/// Real white Gaussian noise sequence.
struct NoiseStream {
  std::vector<double> values;
  double variance = 0.0;
};

SymbolStream generate_symbols(std::int64_t count, SeededRng& rng);

NoiseStream generate_noise(std::int64_t count, double noise_variance, SeededRng& rng);

/// Noise variance for a given E/No in dB at the equaliser input,
/// assuming a unit-power channel: sigma_v^2 = sigma_d^2 * 10^(-ebno/10).
double noise_variance_from_ebno(double ebno_db, double symbol_power = 1.0);

}  // namespace eqlab
