#include "eqlab/sim.hpp"

#include <algorithm>
#include <atomic>
#include <optional>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "eqlab/rng.hpp"
#include "eqlab/wiener.hpp"

namespace eqlab {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double to_db(double x) { return 10.0 * std::log10(std::max(x, 1e-300)); }

struct RunResult {
  std::vector<double> e2;
  std::vector<int> length;
  std::vector<double> mmse;
  std::uint64_t bit_errors = 0;
  std::uint64_t bits = 0;
  std::vector<RunEvent> events;
};

AlgoState make_algo_state(const AlgorithmConfig& cfg, int taps) {
  switch (cfg.name) {
    case Algorithm::Lms:
      return LmsState(taps, cfg.mu);
    case Algorithm::Nlms:
      return NlmsState(taps, cfg.mu_tilde, cfg.eps);
    case Algorithm::Vslms:
      return VslmsState(taps, cfg.rho, cfg.a, cfg.initial_mu, cfg.mu_max);
    case Algorithm::Rls:
      return rls_init(taps, cfg.delta, cfg.lambda);
  }
  throw std::logic_error("make_algo_state: unknown algorithm");
}

// Shrinks or zero-extends the weight vector of an LMS-family state.
void resize_gradient_weights(AlgoState& state, int new_taps) {
  Eigen::VectorXd& w = algo_weights(state);
  const int old_taps = static_cast<int>(w.size());
  Eigen::VectorXd next = Eigen::VectorXd::Zero(new_taps);
  next.head(std::min(old_taps, new_taps)) = w.head(std::min(old_taps, new_taps));
  w = std::move(next);
}

// Stability re-check after a length change (the LMS family only).
void reclamp_step(AlgoState& state, int taps, double input_power) {
  const double bound = max_stable_mu(taps, input_power);
  if (auto* lms = std::get_if<LmsState>(&state)) {
    lms->mu = std::min(lms->mu, bound);
  } else if (auto* vs = std::get_if<VslmsState>(&state)) {
    vs->mu = std::min(vs->mu, bound);
  }
}

class Runner {
 public:
  Runner(const SimulationConfig& cfg, int run_index)
      : cfg_(cfg),
        run_(run_index),
        symbol_rng_(cfg.seed, 4ULL * static_cast<std::uint64_t>(run_index) + 1),
        noise_rng_(cfg.seed, 4ULL * static_cast<std::uint64_t>(run_index) + 2),
        scenario_(cfg.scenario, cfg.seed, 4ULL * static_cast<std::uint64_t>(run_index) + 3) {}

  RunResult run() {
    const std::int64_t total =
        cfg_.run_length > 0 ? cfg_.run_length : scenario_.total_duration();
    const int channel_len = scenario_.max_channel_length();
    const int delay = cfg_.eq.delay;
    // history long enough for the channel span, the delayed reference and
    // the longest feedback window
    const int hist_len = std::max({channel_len, delay + 1, delay + 1 + cfg_.eq.n_b_max + 1});
    Eigen::VectorXd symbols = Eigen::VectorXd::Zero(hist_len);

    RunResult out;
    out.e2.resize(static_cast<std::size_t>(total));
    out.length.resize(static_cast<std::size_t>(total));
    if (cfg_.metrics.mmse_every > 0) out.mmse.assign(static_cast<std::size_t>(total), kNan);

    const bool is_le = cfg_.eq.is_le();
    const bool variable = cfg_.eq.is_variable();

    std::optional<SegmentedLe> le;
    std::optional<Dfe> dfe;
    if (is_le) {
      le.emplace(make_le());
    } else {
      dfe.emplace(make_dfe());
    }
    const int initial_taps = is_le ? le->active_taps() : dfe->joint_taps();
    AlgoState algo = make_algo_state(cfg_.algo, initial_taps);
    LeLengthController le_ctl(cfg_.eq.le_control);
    FbfLengthController fbf_ctl(cfg_.eq.fbf_control);

    double power_est = 1.0;  // smoothed per-tap input power for step clamping

    for (std::int64_t n = 0; n < total; ++n) {
      const auto sample = scenario_.at(n);
      const auto& taps = *sample.taps;

      const double d = symbol_rng_.symbol();
      for (int i = hist_len - 1; i > 0; --i) symbols[i] = symbols[i - 1];
      symbols[0] = d;

      double received = taps.dot(symbols.head(taps.size()));
      if (sample.noise_variance > 0.0) {
        received += std::sqrt(sample.noise_variance) * noise_rng_.gaussian();
      }

      const bool training = cfg_.training.is_training(n);
      const double delayed = symbols[delay];

      double error;
      double decision;
      int used_taps;
      if (is_le) {
        le->push(received);
        const Eigen::VectorXd& w = algo_weights(algo);
        const double y = le->output(w);
        const double y_prev = le->active_segments() > 1
                                  ? le->partial_output(w, le->active_segments() - 1)
                                  : 0.0;
        decision = detect(y);
        const double ref = training ? delayed : decision;
        used_taps = le->active_taps();
        error = update_algo(algo, le->active_window(), ref, n, out);
        power_est = 0.99 * power_est + 0.01 * (received * received);

        if (variable) {
          const double e_prev = ref - y_prev;
          const LengthDecision dec =
              le_ctl.update(e_prev, error, le->can_expand(), le->can_contract());
          if (dec == LengthDecision::Expand) {
            le->expand();
            resize_le_state(algo, le->active_taps());
            reclamp_step(algo, le->active_taps(), power_est);
            le_ctl.on_length_change();
          } else if (dec == LengthDecision::Contract) {
            le->contract();
            resize_le_state(algo, le->active_taps());
            reclamp_step(algo, le->active_taps(), power_est);
            le_ctl.on_length_change();
          }
        }
      } else {
        dfe->push_received(received);
        const Eigen::VectorXd& w = algo_weights(algo);
        const double y = dfe->output(w);
        decision = detect(y);
        const double ref = training ? delayed : decision;
        used_taps = dfe->joint_taps();
        error = update_algo(algo, dfe->regressor(), ref, n, out);
        power_est = 0.99 * power_est + 0.01 * (received * received);

        if (variable) {
          const Eigen::VectorXd& w_now = algo_weights(algo);
          const int nb = dfe->n_b();
          const double w_last = w_now[dfe->n_f() + nb - 1];
          const double w_prev = nb >= 2 ? w_now[dfe->n_f() + nb - 2] : 0.0;
          const LengthDecision dec =
              fbf_ctl.update(w_last, w_prev, error, dfe->can_expand(), dfe->can_contract());
          if (dec == LengthDecision::Expand) {
            dfe->expand_fbf();
            resize_dfe_state(algo, +1);
            reclamp_step(algo, dfe->joint_taps(), power_est);
          } else if (dec == LengthDecision::Contract) {
            algo_weights(algo)[dfe->n_f() + nb - 1] = 0.0;
            dfe->contract_fbf();
            resize_dfe_state(algo, -1);
          } else if (dec == LengthDecision::Probe) {
            while (dfe->can_expand()) {
              dfe->expand_fbf();
              resize_dfe_state(algo, +1);
            }
            reclamp_step(algo, dfe->joint_taps(), power_est);
          }
        }
        dfe->push_reference(ref);
      }

      out.e2[static_cast<std::size_t>(n)] = error * error;
      out.length[static_cast<std::size_t>(n)] = used_taps;
      if (n >= cfg_.metrics.ber_warmup && n >= delay) {
        ++out.bits;
        if (decision != delayed) ++out.bit_errors;
      }
      if (cfg_.metrics.mmse_every > 0 && n % cfg_.metrics.mmse_every == 0) {
        out.mmse[static_cast<std::size_t>(n)] = snapshot_mmse(taps, sample.noise_variance,
                                                              is_le ? le->active_taps() : 0,
                                                              is_le ? nullptr : &*dfe);
      }
    }
    return out;
  }

 private:
  SegmentedLe make_le() const {
    if (cfg_.eq.is_le() && cfg_.eq.kind == EqualizerKind::VariableLe) {
      return SegmentedLe(cfg_.eq.taps_per_segment, cfg_.eq.max_segments,
                         cfg_.eq.initial_segments, cfg_.eq.delay);
    }
    // a fixed LE is a single segment spanning all taps
    return SegmentedLe(cfg_.eq.taps, 1, 1, cfg_.eq.delay);
  }

  Dfe make_dfe() const {
    if (cfg_.eq.kind == EqualizerKind::FixedDfe) {
      return Dfe(cfg_.eq.n_f, cfg_.eq.n_b, cfg_.eq.n_b, cfg_.eq.n_b, cfg_.eq.delay);
    }
    return Dfe(cfg_.eq.n_f, cfg_.eq.n_b, cfg_.eq.n_b_min, cfg_.eq.n_b_max, cfg_.eq.delay);
  }

  double update_algo(AlgoState& algo, const Eigen::Ref<const Eigen::VectorXd>& u, double ref,
                     std::int64_t n, RunResult& out) {
    try {
      return algo_update(algo, u, ref);
    } catch (const RlsDivergence&) {
      auto& rls = std::get<RlsState>(algo);
      const int taps = static_cast<int>(u.size());
      rls = rls_init(taps, cfg_.algo.delta, cfg_.algo.lambda);
      out.events.push_back({run_, n, "rls divergence: filter restarted"});
      return algo_update(algo, u, ref);
    }
  }

  void resize_le_state(AlgoState& algo, int new_taps) {
    if (auto* rls = std::get_if<RlsState>(&algo)) {
      if (auto resized = rls_resize_le(*rls, new_taps)) {
        *rls = std::move(*resized);
      } else {
        *rls = rls_init(new_taps, cfg_.algo.delta, cfg_.algo.lambda);
      }
    } else {
      resize_gradient_weights(algo, new_taps);
    }
  }

  void resize_dfe_state(AlgoState& algo, int delta_taps) {
    if (auto* rls = std::get_if<RlsState>(&algo)) {
      *rls = rls_resize_dfe_fbf(*rls, delta_taps);
    } else {
      resize_gradient_weights(algo,
                              static_cast<int>(algo_weights(algo).size()) + delta_taps);
    }
  }

  double snapshot_mmse(const Eigen::VectorXd& taps, double noise_variance, int le_taps,
                       const Dfe* dfe) const {
    ChannelProfile profile{taps, {}};
    try {
      const CorrelationSystem sys =
          dfe ? build_dfe_correlations(profile, noise_variance, dfe->n_f(), dfe->n_b(),
                                       dfe->delay())
              : build_le_correlations(profile, noise_variance, le_taps, cfg_.eq.delay);
      return wiener_solve(sys).mmse;
    } catch (const IllConditioned&) {
      return kNan;
    }
  }

  const SimulationConfig& cfg_;
  int run_;
  SeededRng symbol_rng_;
  SeededRng noise_rng_;
  ScenarioProvider scenario_;
};

}  // namespace

const char* to_string(EqualizerKind kind) {
  switch (kind) {
    case EqualizerKind::FixedLe: return "le";
    case EqualizerKind::VariableLe: return "vl-le";
    case EqualizerKind::FixedDfe: return "dfe";
    case EqualizerKind::VariableFbfDfe: return "vl-fbf-dfe";
  }
  return "?";
}

const char* to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::Lms: return "lms";
    case Algorithm::Nlms: return "nlms";
    case Algorithm::Vslms: return "vslms";
    case Algorithm::Rls: return "rls";
  }
  return "?";
}

EqualizerKind equalizer_kind_from_string(const std::string& s) {
  if (s == "le") return EqualizerKind::FixedLe;
  if (s == "vl-le") return EqualizerKind::VariableLe;
  if (s == "dfe") return EqualizerKind::FixedDfe;
  if (s == "vl-fbf-dfe") return EqualizerKind::VariableFbfDfe;
  throw std::invalid_argument("unknown equalizer kind: " + s);
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "lms") return Algorithm::Lms;
  if (s == "nlms") return Algorithm::Nlms;
  if (s == "vslms") return Algorithm::Vslms;
  if (s == "rls") return Algorithm::Rls;
  throw std::invalid_argument("unknown algorithm: " + s);
}

std::vector<std::string> validate_config(const SimulationConfig& cfg) {
  std::vector<std::string> warnings;
  if (cfg.scenario.segments.empty()) throw std::invalid_argument("config: empty scenario");
  const std::int64_t total = cfg.run_length > 0 ? cfg.run_length : cfg.scenario.total_duration();
  if (total <= 0) throw std::invalid_argument("config: run length must be positive");
  if (cfg.run_length > cfg.scenario.total_duration()) {
    throw std::invalid_argument("config: run length exceeds the scenario duration");
  }
  if (cfg.ensemble < 1) throw std::invalid_argument("config: ensemble size must be at least 1");
  if (!cfg.training.continuous) {
    if (cfg.training.frame_len <= 0 || cfg.training.train_len < 0 ||
        cfg.training.train_len > cfg.training.frame_len) {
      throw std::invalid_argument("config: needs 0 <= train_len <= frame_len");
    }
  }
  if (cfg.metrics.mse_window < 1) throw std::invalid_argument("config: MSE window must be positive");
  if (cfg.metrics.decimation < 1) throw std::invalid_argument("config: decimation must be positive");

  if (cfg.eq.is_le()) {
    const int max_taps = cfg.eq.kind == EqualizerKind::FixedLe
                             ? cfg.eq.taps
                             : cfg.eq.taps_per_segment * cfg.eq.max_segments;
    if (cfg.eq.kind == EqualizerKind::FixedLe && cfg.eq.delay > cfg.eq.taps - 1) {
      throw std::invalid_argument("config: LE needs more taps than the decision delay");
    }
    if (cfg.algo.name == Algorithm::Lms) {
      const double bound = max_stable_mu(max_taps, 1.0);
      if (cfg.algo.mu > bound) {
        warnings.push_back("LMS step " + std::to_string(cfg.algo.mu) +
                           " exceeds the stability bound " + std::to_string(bound) +
                           " at the maximum length");
      }
    }
  } else {
    if (cfg.eq.n_b_min < 1 || cfg.eq.n_b > cfg.eq.n_b_max || cfg.eq.n_b < cfg.eq.n_b_min) {
      throw std::invalid_argument("config: DFE feedback lengths must satisfy 1 <= min <= n_b <= max");
    }
  }
  if (cfg.algo.name == Algorithm::Nlms && !(cfg.algo.mu_tilde > 0.0 && cfg.algo.mu_tilde < 2.0)) {
    warnings.push_back("NLMS step outside (0, 2): convergence is not guaranteed");
  }
  if (cfg.algo.name == Algorithm::Rls &&
      (cfg.algo.lambda <= 0.0 || cfg.algo.lambda > 1.0)) {
    throw std::invalid_argument("config: RLS forgetting factor must be in (0, 1]");
  }
  return warnings;
}

MetricsRecord run_experiment(const SimulationConfig& cfg) {
  validate_config(cfg);
  const std::int64_t total =
      cfg.run_length > 0 ? cfg.run_length : cfg.scenario.total_duration();
  const int runs = cfg.ensemble;

  std::vector<RunResult> results(static_cast<std::size_t>(runs));
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  const int workers = std::max(1, std::min(runs, cfg.threads > 0 ? cfg.threads : std::max(hw, 1)));
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&]() {
      for (int r = next.fetch_add(1); r < runs; r = next.fetch_add(1)) {
        Runner runner(cfg, r);
        results[static_cast<std::size_t>(r)] = runner.run();
      }
    });
  }
  for (auto& t : pool) t.join();

  MetricsRecord m;
  const auto count = static_cast<std::size_t>(total);
  m.mean_e2.assign(count, 0.0);
  m.mean_length.assign(count, 0.0);
  if (cfg.metrics.mmse_every > 0) m.mmse_db.assign(count, kNan);

  // deterministic reduction in run order
  for (int r = 0; r < runs; ++r) {
    const RunResult& res = results[static_cast<std::size_t>(r)];
    for (std::size_t n = 0; n < count; ++n) {
      m.mean_e2[n] += res.e2[n];
      m.mean_length[n] += res.length[n];
    }
    m.bit_errors += res.bit_errors;
    m.bits += res.bits;
    for (const auto& ev : res.events) m.events.push_back(ev);
  }
  for (std::size_t n = 0; n < count; ++n) {
    m.mean_e2[n] /= runs;
    m.mean_length[n] /= runs;
  }
  if (cfg.metrics.mmse_every > 0) {
    for (std::size_t n = 0; n < count; n += static_cast<std::size_t>(cfg.metrics.mmse_every)) {
      double acc = 0.0;
      for (int r = 0; r < runs; ++r) acc += results[static_cast<std::size_t>(r)].mmse[n];
      m.mmse_db[n] = to_db(acc / runs);
    }
  }

  m.windowed_mse_db = windowed_mse(m.mean_e2, cfg.metrics.mse_window);

  // ensemble operation totals from the per-run length traces
  const ControllerOverhead ctl = controller_overhead(cfg.eq);
  m.cum_products.assign(count, 0);
  m.cum_additions.assign(count, 0);
  for (int r = 0; r < runs; ++r) {
    const auto& len = results[static_cast<std::size_t>(r)].length;
    std::uint64_t prod = 0, add = 0;
    for (std::size_t n = 0; n < count; ++n) {
      const OpCounts c = per_iteration_cost(cfg.algo.name, ctl, len[n]);
      prod += c.products;
      add += c.additions;
      m.cum_products[n] += prod;
      m.cum_additions[n] += add;
    }
  }
  m.total_products = count ? m.cum_products.back() : 0;
  m.total_additions = count ? m.cum_additions.back() : 0;

  const std::size_t steady_from = count - count / 5;
  double acc = 0.0, len_acc = 0.0, len_all = 0.0;
  for (std::size_t n = steady_from; n < count; ++n) {
    acc += m.mean_e2[n];
    len_acc += m.mean_length[n];
  }
  for (std::size_t n = 0; n < count; ++n) len_all += m.mean_length[n];
  const std::size_t steady_count = count - steady_from;
  m.steady_mse = steady_count ? acc / steady_count : 0.0;
  m.steady_mse_db = to_db(m.steady_mse);
  m.settled_length = steady_count ? len_acc / steady_count : 0.0;
  m.average_length = count ? len_all / count : 0.0;
  return m;
}

std::vector<SweepPoint> sweep_fixed_lengths(const SimulationConfig& cfg,
                                            const std::vector<int>& lengths) {
  std::vector<SweepPoint> out;
  out.reserve(lengths.size());
  for (const int len : lengths) {
    SimulationConfig c = cfg;
    if (cfg.eq.is_le()) {
      c.eq.kind = EqualizerKind::FixedLe;
      c.eq.taps = len;
    } else {
      c.eq.kind = EqualizerKind::FixedDfe;
      c.eq.n_b = len;
      c.eq.n_b_min = len;
      c.eq.n_b_max = len;
    }
    const MetricsRecord m = run_experiment(c);
    out.push_back({len, m.steady_mse, m.steady_mse_db});
  }
  return out;
}

std::vector<double> windowed_mse(std::span<const double> errors_sq, int window) {
  if (window < 1) throw std::invalid_argument("windowed_mse: window must be positive");
  std::vector<double> out(errors_sq.size(), kNan);
  double acc = 0.0;
  for (std::size_t n = 0; n < errors_sq.size(); ++n) {
    acc += errors_sq[n];
    if (n >= static_cast<std::size_t>(window)) acc -= errors_sq[n - window];
    if (n + 1 >= static_cast<std::size_t>(window)) out[n] = to_db(acc / window);
  }
  return out;
}

BerResult ber(std::span<const double> decisions, std::span<const double> truth,
              std::int64_t warm_up) {
  if (decisions.size() != truth.size()) throw std::invalid_argument("ber: length mismatch");
  if (warm_up < 0 || static_cast<std::size_t>(warm_up) >= decisions.size()) {
    throw std::invalid_argument("ber: no bits counted");
  }
  BerResult r;
  for (std::size_t n = static_cast<std::size_t>(warm_up); n < decisions.size(); ++n) {
    ++r.bits;
    if ((decisions[n] < 0.0) != (truth[n] < 0.0)) ++r.errors;
  }
  r.rate = static_cast<double>(r.errors) / static_cast<double>(r.bits);
  return r;
}

OpCounts per_iteration_cost(Algorithm algo, ControllerOverhead ctl, int taps) {
  const auto m = static_cast<std::uint64_t>(taps);
  OpCounts c;
  switch (algo) {
    case Algorithm::Lms:
      c = {2 * m, 2 * m};
      break;
    case Algorithm::Nlms:
      c = {3 * m, 3 * m};
      break;
    case Algorithm::Vslms:
      // LMS cost plus the step update a mu + rho e^2
      c = {2 * m + 3, 2 * m + 1};
      break;
    case Algorithm::Rls:
      c = {2 * m * m, 2 * m * m};
      break;
  }
  switch (ctl) {
    case ControllerOverhead::None:
      break;
    case ControllerOverhead::LeBasic:
      c.products += 4;
      c.additions += 4;
      break;
    case ControllerOverhead::LeRobust:
      c.products += 6;
      c.additions += 4;
      break;
    case ControllerOverhead::Fbf:
      c.products += 2;
      c.additions += 2;
      break;
  }
  return c;
}

OpCounts count_operations(Algorithm algo, ControllerOverhead ctl,
                          std::span<const int> length_trace) {
  OpCounts total;
  for (const int taps : length_trace) {
    const OpCounts c = per_iteration_cost(algo, ctl, taps);
    total.products += c.products;
    total.additions += c.additions;
  }
  return total;
}

ControllerOverhead controller_overhead(const EqualizerConfig& eq) {
  switch (eq.kind) {
    case EqualizerKind::VariableLe:
      return eq.le_control.beta < 1.0 ? ControllerOverhead::LeRobust : ControllerOverhead::LeBasic;
    case EqualizerKind::VariableFbfDfe:
      return ControllerOverhead::Fbf;
    default:
      return ControllerOverhead::None;
  }
}

}  // namespace eqlab
