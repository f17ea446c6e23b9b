#pragma once

#include <iosfwd>
#include <string>

#include "eqlab/sim.hpp"

namespace eqlab {

/// Per-sample trace as CSV with a header row:
/// sample,e2_mean,windowed_mse_db,length,cum_products,cum_additions[,mmse_db]
/// Rows follow the configured decimation.  NaNs print as empty fields and
/// doubles use a fixed "%.10g" format, so identical configs and seeds give
/// byte-identical files.
void write_metrics_csv(const MetricsRecord& m, const MetricsConfig& metrics, std::ostream& os);

/// One-object JSON summary: steady MSE, BER, length and operation totals.
void write_summary_json(const MetricsRecord& m, const SimulationConfig& cfg, std::ostream& os);

/// CSV table for a fixed-length sweep: length,steady_mse,steady_mse_db.
void write_sweep_csv(const std::vector<SweepPoint>& points, std::ostream& os);

std::string format_double(double value);

}  // namespace eqlab
