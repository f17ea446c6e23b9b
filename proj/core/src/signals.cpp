#include "eqlab/signals.hpp"

#include <cmath>
#include <stdexcept>

namespace eqlab {

SymbolStream generate_symbols(std::int64_t count, SeededRng& rng) {
  if (count < 0) throw std::invalid_argument("generate_symbols: negative count");
  SymbolStream s;
  s.values.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) s.values.push_back(rng.symbol());
  return s;
}

NoiseStream generate_noise(std::int64_t count, double noise_variance, SeededRng& rng) {
  if (count < 0) throw std::invalid_argument("generate_noise: negative count");
  if (noise_variance < 0.0) throw std::invalid_argument("generate_noise: negative variance");
  NoiseStream n;
  n.variance = noise_variance;
  n.values.assign(static_cast<std::size_t>(count), 0.0);
  if (noise_variance > 0.0) {
    const double sigma = std::sqrt(noise_variance);
    for (auto& v : n.values) v = sigma * rng.gaussian();
  }
  return n;
}

double noise_variance_from_ebno(double ebno_db, double symbol_power) {
  if (symbol_power <= 0.0) throw std::invalid_argument("noise_variance_from_ebno: symbol power must be positive");
  return symbol_power * std::pow(10.0, -ebno_db / 10.0);
}

}  // namespace eqlab
