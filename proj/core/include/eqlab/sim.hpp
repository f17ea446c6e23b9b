#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "eqlab/channel.hpp"
#include "eqlab/equalizer.hpp"

namespace eqlab {

enum class EqualizerKind { FixedLe, VariableLe, FixedDfe, VariableFbfDfe };
enum class Algorithm { Lms, Nlms, Vslms, Rls };

const char* to_string(EqualizerKind kind);
const char* to_string(Algorithm algo);
EqualizerKind equalizer_kind_from_string(const std::string& s);
Algorithm algorithm_from_string(const std::string& s);

struct AlgorithmConfig {
  Algorithm name = Algorithm::Lms;
  double mu = 0.01;         // LMS step
  double mu_tilde = 0.5;    // NLMS normalised step
  double eps = 1e-6;        // NLMS regulariser
  double rho = 1e-4;        // VSLMS error-power gain
  double a = 0.99;          // VSLMS step forgetting factor
  double initial_mu = 0.0;  // VSLMS start step; 0 = half the stability bound
  double mu_max = 0.0;      // VSLMS ceiling; 0 = stability bound only
  double lambda = 1.0;      // RLS forgetting factor
  double delta = 0.01;      // RLS soft-constrained init constant
};

struct EqualizerConfig {
  EqualizerKind kind = EqualizerKind::FixedLe;
  int delay = 0;

  // linear equaliser
  int taps = 21;             // fixed LE
  int taps_per_segment = 3;  // variable LE
  int max_segments = 10;
  int initial_segments = 3;
  LeLengthController::Config le_control;

  // decision feedback equaliser
  int n_f = 6;
  int n_b = 2;
  int n_b_min = 2;
  int n_b_max = 25;
  FbfLengthController::Config fbf_control;

  bool is_le() const { return kind == EqualizerKind::FixedLe || kind == EqualizerKind::VariableLe; }
  bool is_variable() const {
    return kind == EqualizerKind::VariableLe || kind == EqualizerKind::VariableFbfDfe;
  }
};

/// train_len known symbols at the start of every frame_len-symbol frame;
/// outside the training window the reference is the detector output.
struct TrainingSchedule {
  bool continuous = true;
  int train_len = 200;
  int frame_len = 2000;

  bool is_training(std::int64_t n) const {
    return continuous || (n % frame_len) < train_len;
  }
};

struct MetricsConfig {
  int mse_window = 2000;        // boxcar window for the MSE trace
  std::int64_t ber_warmup = 0;  // decisions before this sample are not counted
  int decimation = 1;           // CSV row stride
  int mmse_every = 0;           // >0: per-snapshot Wiener MMSE trace cadence
};

struct SimulationConfig {
  ScenarioScript scenario;
  EqualizerConfig eq;
  AlgorithmConfig algo;
  TrainingSchedule training;
  std::int64_t run_length = 0;  // 0 = whole scenario
  int ensemble = 1;
  std::uint64_t seed = 1;
  MetricsConfig metrics;
  int threads = 0;  // parallel ensemble runs; 0 = hardware concurrency
};

/// Structural validation; returns human-readable warnings for soft issues
/// (an LMS step above the stability bound, for instance).  Throws on hard
/// configuration errors.
std::vector<std::string> validate_config(const SimulationConfig& cfg);

struct RunEvent {
  int run = 0;
  std::int64_t sample = 0;
  std::string what;
};

struct MetricsRecord {
  std::vector<double> mean_e2;          // ensemble mean squared error per sample
  std::vector<double> windowed_mse_db;  // NaN until one full window is seen
  std::vector<double> mean_length;      // mean active taps per sample
  std::vector<std::uint64_t> cum_products;  // ensemble totals, cumulative
  std::vector<std::uint64_t> cum_additions;
  std::vector<double> mmse_db;          // NaN except at the trace cadence

  std::uint64_t bit_errors = 0;
  std::uint64_t bits = 0;

  double steady_mse = 0.0;     // mean e^2 over the final 20% of the run
  double steady_mse_db = 0.0;
  double settled_length = 0.0;  // mean taps over the final 20%
  double average_length = 0.0;  // mean taps over the whole run
  std::uint64_t total_products = 0;
  std::uint64_t total_additions = 0;
  std::vector<RunEvent> events;  // RLS divergence restarts and the like
};

MetricsRecord run_experiment(const SimulationConfig& cfg);

struct SweepPoint {
  int length = 0;
  double steady_mse = 0.0;
  double steady_mse_db = 0.0;
};

/// One run_experiment per length (LE taps, or feedback taps for a DFE),
/// recording the converged MSE level.
std::vector<SweepPoint> sweep_fixed_lengths(const SimulationConfig& cfg,
                                            const std::vector<int>& lengths);

/// Trailing boxcar of the squared error in dB, defined from the first full
/// window onward (NaN before).
std::vector<double> windowed_mse(std::span<const double> errors_sq, int window);

struct BerResult {
  std::uint64_t errors = 0;
  std::uint64_t bits = 0;
  double rate = 0.0;
};

/// Sign mismatches between decisions and the true delayed symbols, counted
/// from warm_up onward.  Throws when no bits remain.
BerResult ber(std::span<const double> decisions, std::span<const double> truth,
              std::int64_t warm_up);

/// Per-iteration cost overhead of the online length controller.
enum class ControllerOverhead { None, LeBasic, LeRobust, Fbf };

struct OpCounts {
  std::uint64_t products = 0;
  std::uint64_t additions = 0;
};

/// Closed-form operation totals for a run with the given per-iteration
/// filter length trace: the LMS family costs 2M products (3M for NLMS, plus
/// the step update for VSLMS), RLS costs 2M^2, and the controller adds its
/// fixed per-iteration overhead.
OpCounts count_operations(Algorithm algo, ControllerOverhead ctl, std::span<const int> length_trace);

OpCounts per_iteration_cost(Algorithm algo, ControllerOverhead ctl, int taps);

ControllerOverhead controller_overhead(const EqualizerConfig& eq);

}  // namespace eqlab
