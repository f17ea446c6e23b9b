// Command line front end: run simulations, sweep equaliser lengths, and
// evaluate the closed-form MSE predictions and Wiener solutions.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "eqlab/config_io.hpp"
#include "eqlab/signals.hpp"
#include "eqlab/metrics_io.hpp"
#include "eqlab/sim.hpp"
#include "eqlab/wiener.hpp"

namespace {

using namespace eqlab;

ChannelSpec channel_from_string(const std::string& name_or_path) {
  try {
    return builtin_profile(name_or_path);
  } catch (const std::invalid_argument&) {
    return load_profile_file(name_or_path);
  }
}

ChannelProfile profile_from_string(const std::string& name_or_path) {
  ChannelSpec spec = channel_from_string(name_or_path);
  if (auto* p = std::get_if<ChannelProfile>(&spec)) return std::move(*p);
  if (auto* m = std::get_if<MarkovSpec>(&spec)) return std::move(m->start);
  throw std::invalid_argument("a static channel profile is required here");
}

struct CommonFlags {
  std::optional<std::string> config_path;
  std::optional<std::string> channel;
  std::optional<double> ebno;
  std::optional<std::int64_t> run_length;
  std::optional<int> ensemble;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> eq_kind;
  std::optional<int> taps;
  std::optional<int> delay;
  std::optional<int> taps_per_segment;
  std::optional<int> max_segments;
  std::optional<int> initial_segments;
  std::optional<double> alpha_up, alpha_dw, beta, mse_floor;
  std::optional<int> hold;
  std::optional<int> n_f, n_b, n_b_min, n_b_max;
  std::optional<double> chi;
  std::optional<int> window, probe_period;
  std::optional<std::string> algorithm;
  std::optional<double> mu, mu_tilde, eps, rho, a, initial_mu, lambda, delta;
  std::optional<int> train_len, frame_len;
  bool continuous_training = false;
  std::optional<int> mse_window, decimation, mmse_every;
  std::optional<std::int64_t> ber_warmup;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON simulation config (see README)");
  cmd->add_option("--channel", f.channel, "built-in profile name or profile file (single-segment scenario)");
  cmd->add_option("--ebno", f.ebno, "E/No in dB for every scenario segment");
  cmd->add_option("--run-length", f.run_length, "samples per run");
  cmd->add_option("--ensemble", f.ensemble, "independent runs to average");
  cmd->add_option("--seed", f.seed, "base seed");
  cmd->add_option("--threads", f.threads, "parallel runs (0 = hardware)");
  cmd->add_option("--eq", f.eq_kind, "equalizer kind: le, vl-le, dfe, vl-fbf-dfe");
  cmd->add_option("--taps", f.taps, "fixed LE length");
  cmd->add_option("--delay", f.delay, "decision delay D");
  cmd->add_option("--taps-per-segment", f.taps_per_segment, "VL LE segment length P");
  cmd->add_option("--max-segments", f.max_segments, "VL LE maximum segments K");
  cmd->add_option("--initial-segments", f.initial_segments, "VL LE starting segments");
  cmd->add_option("--alpha-up", f.alpha_up, "VL LE expansion threshold");
  cmd->add_option("--alpha-dw", f.alpha_dw, "VL LE contraction threshold");
  cmd->add_option("--beta", f.beta, "VL LE ASE forgetting factor");
  cmd->add_option("--mse-floor", f.mse_floor, "VL LE expansion floor (0 disables)");
  cmd->add_option("--hold", f.hold, "VL LE freeze after a length change");
  cmd->add_option("--nf", f.n_f, "DFE feedforward taps");
  cmd->add_option("--nb", f.n_b, "DFE feedback taps (initial for vl-fbf-dfe)");
  cmd->add_option("--nb-min", f.n_b_min, "minimum feedback taps");
  cmd->add_option("--nb-max", f.n_b_max, "maximum feedback taps");
  cmd->add_option("--chi", f.chi, "FBF significance ratio");
  cmd->add_option("--window", f.window, "FBF averaging window W");
  cmd->add_option("--probe-period", f.probe_period, "FBF sparse probe period (0 disables)");
  cmd->add_option("--algorithm", f.algorithm, "lms, nlms, vslms or rls");
  cmd->add_option("--mu", f.mu, "LMS step size");
  cmd->add_option("--mu-tilde", f.mu_tilde, "NLMS normalised step");
  cmd->add_option("--eps", f.eps, "NLMS regulariser");
  cmd->add_option("--rho", f.rho, "VSLMS error-power gain");
  cmd->add_option("--a", f.a, "VSLMS step forgetting factor");
  cmd->add_option("--initial-mu", f.initial_mu, "VSLMS starting step");
  cmd->add_option("--lambda", f.lambda, "RLS forgetting factor");
  cmd->add_option("--delta", f.delta, "RLS initialisation constant");
  cmd->add_option("--train-len", f.train_len, "training symbols per frame");
  cmd->add_option("--frame-len", f.frame_len, "frame length in symbols");
  cmd->add_flag("--continuous-training", f.continuous_training, "train on every symbol");
  cmd->add_option("--mse-window", f.mse_window, "windowed MSE length");
  cmd->add_option("--ber-warmup", f.ber_warmup, "decisions skipped before BER counting");
  cmd->add_option("--decimation", f.decimation, "CSV row stride");
  cmd->add_option("--mmse-trace", f.mmse_every, "Wiener MMSE trace cadence (0 disables)");
}

SimulationConfig build_config(const CommonFlags& f) {
  SimulationConfig cfg;
  if (f.config_path) {
    cfg = load_simulation_config(*f.config_path);
  } else {
    cfg.training.continuous = true;
    cfg.run_length = 0;
    ScenarioSegment seg;
    seg.duration = f.run_length.value_or(100000);
    seg.ebno_db = f.ebno.value_or(25.0);
    seg.channel = f.channel ? channel_from_string(*f.channel) : builtin_profile("model2");
    cfg.scenario.segments.push_back(std::move(seg));
  }
  if (f.channel && f.config_path) {
    for (auto& seg : cfg.scenario.segments) seg.channel = channel_from_string(*f.channel);
  }
  if (f.ebno) {
    for (auto& seg : cfg.scenario.segments) seg.ebno_db = *f.ebno;
  }
  if (f.run_length) {
    cfg.run_length = *f.run_length;
    if (cfg.scenario.segments.size() == 1 &&
        cfg.scenario.segments[0].duration < *f.run_length) {
      cfg.scenario.segments[0].duration = *f.run_length;
    }
  }
  if (f.ensemble) cfg.ensemble = *f.ensemble;
  if (f.seed) cfg.seed = *f.seed;
  if (f.threads) cfg.threads = *f.threads;
  if (f.eq_kind) cfg.eq.kind = equalizer_kind_from_string(*f.eq_kind);
  if (f.taps) cfg.eq.taps = *f.taps;
  if (f.delay) cfg.eq.delay = *f.delay;
  if (f.taps_per_segment) cfg.eq.taps_per_segment = *f.taps_per_segment;
  if (f.max_segments) cfg.eq.max_segments = *f.max_segments;
  if (f.initial_segments) cfg.eq.initial_segments = *f.initial_segments;
  if (f.alpha_up) cfg.eq.le_control.alpha_up = *f.alpha_up;
  if (f.alpha_dw) cfg.eq.le_control.alpha_dw = *f.alpha_dw;
  if (f.beta) cfg.eq.le_control.beta = *f.beta;
  if (f.mse_floor) cfg.eq.le_control.mse_floor = *f.mse_floor;
  if (f.hold) cfg.eq.le_control.hold = *f.hold;
  if (f.n_f) cfg.eq.n_f = *f.n_f;
  if (f.n_b) cfg.eq.n_b = *f.n_b;
  if (f.n_b_min) cfg.eq.n_b_min = *f.n_b_min;
  if (f.n_b_max) cfg.eq.n_b_max = *f.n_b_max;
  if (f.chi) cfg.eq.fbf_control.chi = *f.chi;
  if (f.window) cfg.eq.fbf_control.window = *f.window;
  if (f.probe_period) cfg.eq.fbf_control.probe_period = *f.probe_period;
  if (f.algorithm) cfg.algo.name = algorithm_from_string(*f.algorithm);
  if (f.mu) cfg.algo.mu = *f.mu;
  if (f.mu_tilde) cfg.algo.mu_tilde = *f.mu_tilde;
  if (f.eps) cfg.algo.eps = *f.eps;
  if (f.rho) cfg.algo.rho = *f.rho;
  if (f.a) cfg.algo.a = *f.a;
  if (f.initial_mu) cfg.algo.initial_mu = *f.initial_mu;
  if (f.lambda) cfg.algo.lambda = *f.lambda;
  if (f.delta) cfg.algo.delta = *f.delta;
  if (f.continuous_training) cfg.training.continuous = true;
  if (f.train_len || f.frame_len) {
    cfg.training.continuous = false;
    if (f.train_len) cfg.training.train_len = *f.train_len;
    if (f.frame_len) cfg.training.frame_len = *f.frame_len;
  }
  if (f.mse_window) cfg.metrics.mse_window = *f.mse_window;
  if (f.ber_warmup) cfg.metrics.ber_warmup = *f.ber_warmup;
  if (f.decimation) cfg.metrics.decimation = *f.decimation;
  if (f.mmse_every) cfg.metrics.mmse_every = *f.mmse_every;
  return cfg;
}

int cmd_run(const CommonFlags& flags, const std::string& out_path,
            const std::string& summary_path) {
  SimulationConfig cfg = build_config(flags);
  for (const auto& w : validate_config(cfg)) std::cerr << "warning: " << w << "\n";
  const MetricsRecord m = run_experiment(cfg);
  for (const auto& ev : m.events) {
    std::cerr << "event: run " << ev.run << " sample " << ev.sample << ": " << ev.what << "\n";
  }
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return 1;
    }
    write_metrics_csv(m, cfg.metrics, out);
  }
  std::ostringstream summary;
  write_summary_json(m, cfg, summary);
  if (!summary_path.empty()) {
    std::ofstream out(summary_path);
    if (!out) {
      std::cerr << "error: cannot write " << summary_path << "\n";
      return 1;
    }
    out << summary.str();
  }
  std::cout << summary.str();
  return 0;
}

int cmd_sweep(const CommonFlags& flags, const std::vector<int>& lengths,
              const std::string& out_path) {
  SimulationConfig cfg = build_config(flags);
  if (lengths.empty()) {
    std::cerr << "error: sweep needs --lengths\n";
    return 1;
  }
  const auto points = sweep_fixed_lengths(cfg, lengths);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    write_sweep_csv(points, out);
  }
  write_sweep_csv(points, std::cout);
  return 0;
}

struct PredictFlags {
  std::string formula;
  double mmse = 0.0;
  int taps = 1;
  int n_f = 1;
  int n_b = 0;
  int channel_taps = 1;
  double sd2 = 1.0;
  double sv2 = 0.0;
  std::optional<double> ebno;
  double sq2 = 0.0;
  double mu = 0.01;
  double lambda = 0.99;
  double lambda_av = 0.0;
  double lambda_max = 0.0;
  double mse_now = 0.0;
  int iteration = 0;
};

int cmd_predict(const PredictFlags& f) {
  PredictionInputs in;
  in.mmse = f.mmse;
  in.taps = f.taps;
  in.n_f = f.n_f;
  in.n_b = f.n_b;
  in.channel_taps = f.channel_taps;
  in.symbol_power = f.sd2;
  in.noise_variance = f.ebno ? noise_variance_from_ebno(*f.ebno, f.sd2) : f.sv2;
  in.process_noise = f.sq2;
  in.mu = f.mu;
  in.lambda = f.lambda;

  double value = 0.0;
  bool is_mse = true;
  if (f.formula == "lms-le") {
    value = predict_mse_lms_le(in);
  } else if (f.formula == "rls-le") {
    value = predict_mse_rls_le(in);
  } else if (f.formula == "lms-dfe") {
    value = predict_mse_lms_dfe(in);
  } else if (f.formula == "rls-dfe") {
    value = predict_mse_rls_dfe(in);
  } else if (f.formula == "mu-opt") {
    value = optimum_mu(in);
    is_mse = false;
  } else if (f.formula == "lambda-opt") {
    value = optimum_lambda(in);
    is_mse = false;
  } else if (f.formula == "lms-transient") {
    value = lms_transient_bound(f.taps, f.mu, f.mmse, f.sd2, in.noise_variance, f.lambda_av,
                                f.lambda_max, f.mse_now);
  } else if (f.formula == "rls-transient") {
    value = rls_transient_mse(f.taps, f.mmse, f.iteration);
  } else {
    std::cerr << "error: unknown formula " << f.formula << "\n";
    return 1;
  }
  std::cout << format_double(value);
  if (is_mse && value > 0.0) std::cout << "  (" << format_double(10.0 * std::log10(value)) << " dB)";
  std::cout << "\n";
  return 0;
}

struct WienerFlags {
  std::string channel = "model2";
  double sd2 = 1.0;
  double sv2 = 0.0;
  std::optional<double> ebno;
  int taps = 21;
  int delay = -1;
  int n_f = 0;
  int n_b = 0;
  bool show_weights = false;
  bool delay_sweep = false;
  std::string length_sweep;  // "start:stop[:step]"
};

int cmd_wiener(const WienerFlags& f) {
  const ChannelProfile channel = profile_from_string(f.channel);
  const double sv2 = f.ebno ? noise_variance_from_ebno(*f.ebno, f.sd2) : f.sv2;
  const bool dfe = f.n_f > 0 && f.n_b > 0;
  const int default_delay = dfe ? optimal_dfe_delay(channel, f.n_f)
                                : std::min(f.taps - 1, channel.length() - 1 + (f.taps - 1) / 2);

  auto solve_at = [&](int taps_or_nf, int n_b, int delay) {
    const CorrelationSystem sys =
        n_b > 0 ? build_dfe_correlations(channel, sv2, taps_or_nf, n_b, delay, f.sd2)
                : build_le_correlations(channel, sv2, taps_or_nf, delay, f.sd2);
    WienerSolution sol = wiener_solve(sys);
    return std::pair{sol, eigenvalue_spread(sys.R)};
  };

  if (f.delay_sweep) {
    std::cout << "delay,mmse,mmse_db,eigen_spread\n";
    const int n = channel.length();
    const int max_delay = dfe ? n + f.n_f - 2 : f.taps + n - 2;
    for (int d = 0; d <= max_delay; ++d) {
      try {
        const auto [sol, spread] = solve_at(dfe ? f.n_f : f.taps, dfe ? f.n_b : 0, d);
        std::cout << d << ',' << format_double(sol.mmse) << ','
                  << format_double(10.0 * std::log10(std::max(sol.mmse, 1e-300))) << ','
                  << format_double(spread) << "\n";
      } catch (const IllConditioned&) {
        std::cout << d << ",,,\n";
      }
    }
    return 0;
  }

  if (!f.length_sweep.empty()) {
    int start = 0, stop = 0, step = 1;
    char sep;
    std::istringstream ss(f.length_sweep);
    ss >> start >> sep >> stop;
    if (ss.peek() == ':') ss >> sep >> step;
    std::cout << "length,mmse,mmse_db\n";
    for (int m = start; m <= stop; m += step) {
      const int d = f.delay >= 0 ? f.delay : std::min(m - 1, default_delay);
      try {
        const auto [sol, spread] = solve_at(dfe ? f.n_f : m, dfe ? m : 0, d);
        std::cout << m << ',' << format_double(sol.mmse) << ','
                  << format_double(10.0 * std::log10(std::max(sol.mmse, 1e-300))) << "\n";
      } catch (const IllConditioned&) {
        std::cout << m << ",,\n";
      }
    }
    return 0;
  }

  const int delay = f.delay >= 0 ? f.delay : default_delay;
  const auto [sol, spread] = solve_at(dfe ? f.n_f : f.taps, dfe ? f.n_b : 0, delay);
  std::cout << "channel: " << channel.label << " (" << channel.length() << " taps)\n";
  std::cout << "layout: " << (dfe ? "dfe" : "le") << " delay=" << delay;
  if (dfe) {
    std::cout << " n_f=" << f.n_f << " n_b=" << f.n_b;
  } else {
    std::cout << " taps=" << f.taps;
  }
  std::cout << "\nnoise variance: " << format_double(sv2) << "\n";
  std::cout << "mmse: " << format_double(sol.mmse) << " ("
            << format_double(10.0 * std::log10(std::max(sol.mmse, 1e-300))) << " dB)\n";
  std::cout << "eigenvalue spread: " << format_double(spread) << "\n";
  if (f.show_weights) {
    std::cout << "weights:";
    for (Eigen::Index i = 0; i < sol.w.size(); ++i) std::cout << ' ' << format_double(sol.w[i]);
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive equaliser simulation lab"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  std::string run_out, run_summary;
  auto* run = app.add_subcommand("run", "run one simulation config");
  add_common_flags(run, run_flags);
  run->add_option("--out", run_out, "per-sample CSV trace path");
  run->add_option("--summary", run_summary, "JSON summary path");

  CommonFlags sweep_flags;
  std::vector<int> sweep_lengths;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "steady MSE over fixed equaliser lengths");
  add_common_flags(sweep, sweep_flags);
  sweep->add_option("--lengths", sweep_lengths, "lengths to simulate")->delimiter(',');
  sweep->add_option("--out", sweep_out, "sweep CSV path");

  PredictFlags pf;
  auto* predict = app.add_subcommand("predict", "closed-form steady-state MSE predictions");
  predict->add_option("--formula", pf.formula,
                      "lms-le, rls-le, lms-dfe, rls-dfe, mu-opt, lambda-opt, "
                      "lms-transient, rls-transient")
      ->required();
  predict->add_option("--mmse", pf.mmse, "minimum MSE of the Wiener solution");
  predict->add_option("--taps", pf.taps, "equaliser length M");
  predict->add_option("--nf", pf.n_f, "DFE feedforward taps");
  predict->add_option("--nb", pf.n_b, "DFE feedback taps");
  predict->add_option("--channel-taps", pf.channel_taps, "channel length N");
  predict->add_option("--sd2", pf.sd2, "symbol power");
  predict->add_option("--sv2", pf.sv2, "noise variance");
  predict->add_option("--ebno", pf.ebno, "E/No in dB (alternative to --sv2)");
  predict->add_option("--sq2", pf.sq2, "Markov process noise variance");
  predict->add_option("--mu", pf.mu, "LMS step size");
  predict->add_option("--lambda", pf.lambda, "RLS forgetting factor");
  predict->add_option("--lambda-av", pf.lambda_av, "average eigenvalue (transient)");
  predict->add_option("--lambda-max", pf.lambda_max, "largest eigenvalue (transient)");
  predict->add_option("--mse-now", pf.mse_now, "current MSE (transient)");
  predict->add_option("--iteration", pf.iteration, "iteration index (rls-transient)");

  WienerFlags wf;
  auto* wiener = app.add_subcommand("wiener", "Wiener solution, MMSE and eigenvalue spread");
  wiener->add_option("--channel", wf.channel, "built-in profile name or profile file");
  wiener->add_option("--sd2", wf.sd2, "symbol power");
  wiener->add_option("--sv2", wf.sv2, "noise variance");
  wiener->add_option("--ebno", wf.ebno, "E/No in dB (alternative to --sv2)");
  wiener->add_option("--taps", wf.taps, "LE length");
  wiener->add_option("--delay", wf.delay, "decision delay (-1 = default rule)");
  wiener->add_option("--nf", wf.n_f, "DFE feedforward taps");
  wiener->add_option("--nb", wf.n_b, "DFE feedback taps");
  wiener->add_flag("--weights", wf.show_weights, "print the optimal weights");
  wiener->add_flag("--delay-sweep", wf.delay_sweep, "table of MMSE and spread per delay");
  wiener->add_option("--length-sweep", wf.length_sweep,
                     "start:stop[:step] table of MMSE per length (LE taps or DFE n_b)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_flags, run_out, run_summary);
    if (sweep->parsed()) return cmd_sweep(sweep_flags, sweep_lengths, sweep_out);
    if (predict->parsed()) return cmd_predict(pf);
    if (wiener->parsed()) return cmd_wiener(wf);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
