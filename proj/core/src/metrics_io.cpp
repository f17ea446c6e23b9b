#include "eqlab/metrics_io.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include <json.hpp>

namespace eqlab {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

namespace {

void put_field(std::ostream& os, double value) {
  if (!std::isnan(value)) os << format_double(value);
}

}  // namespace

void write_metrics_csv(const MetricsRecord& m, const MetricsConfig& metrics, std::ostream& os) {
  const bool with_mmse = !m.mmse_db.empty();
  os << "sample,e2_mean,windowed_mse_db,length,cum_products,cum_additions";
  if (with_mmse) os << ",mmse_db";
  os << "\n";
  for (std::size_t n = 0; n < m.mean_e2.size(); n += static_cast<std::size_t>(metrics.decimation)) {
    os << n << ',' << format_double(m.mean_e2[n]) << ',';
    put_field(os, m.windowed_mse_db[n]);
    os << ',' << format_double(m.mean_length[n]) << ',' << m.cum_products[n] << ','
       << m.cum_additions[n];
    if (with_mmse) {
      os << ',';
      put_field(os, m.mmse_db[n]);
    }
    os << "\n";
  }
}

void write_summary_json(const MetricsRecord& m, const SimulationConfig& cfg, std::ostream& os) {
  nlohmann::json j;
  j["equalizer"] = to_string(cfg.eq.kind);
  j["algorithm"] = to_string(cfg.algo.name);
  j["samples"] = m.mean_e2.size();
  j["ensemble"] = cfg.ensemble;
  j["seed"] = cfg.seed;
  j["steady_mse"] = m.steady_mse;
  j["steady_mse_db"] = m.steady_mse_db;
  j["bit_errors"] = m.bit_errors;
  j["bits"] = m.bits;
  j["ber"] = m.bits ? static_cast<double>(m.bit_errors) / static_cast<double>(m.bits) : 0.0;
  j["settled_length"] = m.settled_length;
  j["average_length"] = m.average_length;
  j["total_products"] = m.total_products;
  j["total_additions"] = m.total_additions;
  if (!m.events.empty()) {
    auto& ev = j["events"] = nlohmann::json::array();
    for (const auto& e : m.events) {
      ev.push_back({{"run", e.run}, {"sample", e.sample}, {"what", e.what}});
    }
  }
  os << j.dump(2) << "\n";
}

void write_sweep_csv(const std::vector<SweepPoint>& points, std::ostream& os) {
  os << "length,steady_mse,steady_mse_db\n";
  for (const auto& p : points) {
    os << p.length << ',' << format_double(p.steady_mse) << ','
       << format_double(p.steady_mse_db) << "\n";
  }
}

}  // namespace eqlab
