// Structural identities: segmented filtering, RLS resize algebra, DFE
// postcursor saturation, the decision-delay rule and operation accounting.

#include <Eigen/Dense>
#include <cmath>

#include "criteria.hpp"
#include "eqlab/equalizer.hpp"
#include "eqlab/rng.hpp"
#include "eqlab/signals.hpp"
#include "eqlab/sim.hpp"
#include "eqlab/wiener.hpp"

namespace acceptance {

using namespace eqlab;

namespace {

bool segmented_equivalence(std::ostream& out) {
  SeededRng rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int p = 1 + static_cast<int>(rng.uniform() * 4);
    const int k = 1 + static_cast<int>(rng.uniform() * 10);
    const int l = 1 + static_cast<int>(rng.uniform() * k);
    SegmentedLe eq(p, k, l, 0);
    const int m = l * p;
    Eigen::VectorXd w(k * p);
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = rng.gaussian();
    Eigen::VectorXd line = Eigen::VectorXd::Zero(m);
    for (int n = 0; n < 2 * m + 5; ++n) {
      const double x = rng.gaussian();
      eq.push(x);
      for (Eigen::Index i = line.size() - 1; i > 0; --i) line[i] = line[i - 1];
      line[0] = x;
      const double monolithic = w.head(m).dot(line);
      worst = std::max(worst, std::abs(eq.output(w) - monolithic));
    }
  }
  out << "1000 cases, worst |segmented - monolithic| = " << worst;
  return worst <= 1e-12;
}

bool wiener_oracle(std::ostream& out) {
  SeededRng channel_rng(2002);
  double worst_db = 0.0;
  const int channel_taps[] = {2, 3, 5, 8, 11};
  for (const int n_taps : channel_taps) {
    Eigen::VectorXd raw(n_taps);
    for (int i = 0; i < n_taps; ++i) raw[i] = channel_rng.gaussian();
    const ChannelProfile channel = normalize_power(raw);
    const int m = 2 * n_taps + 1;
    const int delay = n_taps;  // centre of the 2N+1-tap filter
    for (const double ebno : {5.0, 15.0, 25.0}) {
      const double sv2 = noise_variance_from_ebno(ebno);
      const double mmse = wiener_solve(build_le_correlations(channel, sv2, m, delay)).mmse;

      SimulationConfig cfg;
      cfg.scenario = ScenarioScript::single(channel, ebno, 300 * m);
      cfg.eq.kind = EqualizerKind::FixedLe;
      cfg.eq.taps = m;
      cfg.eq.delay = delay;
      cfg.algo.name = Algorithm::Rls;
      cfg.algo.lambda = 1.0;
      cfg.algo.delta = 0.01;
      cfg.ensemble = 8;
      cfg.seed = 42;
      const MetricsRecord r = run_experiment(cfg);

      double acc = 0.0;
      int count = 0;
      for (std::size_t n = static_cast<std::size_t>(10 * m); n < r.mean_e2.size(); ++n) {
        acc += r.mean_e2[n];
        ++count;
      }
      const double gap = std::abs(10.0 * std::log10((acc / count) / mmse));
      worst_db = std::max(worst_db, gap);
    }
  }
  out << "worst |steady - MMSE| = " << worst_db << " dB (allowed 0.2)";
  return worst_db < 0.2;
}

bool rls_resize_identity(std::ostream& out) {
  SeededRng rng(3003);
  double worst_expand = 0.0, worst_truncate = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + static_cast<int>(rng.uniform() * 5);
    Eigen::MatrixXd a(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) a(i, j) = rng.gaussian();
    const Eigen::MatrixXd phi = a * a.transpose() + Eigen::MatrixXd::Identity(m, m);
    const double delta = 0.01 + rng.uniform();

    // block expansion of the inverse
    RlsState s;
    s.w = Eigen::VectorXd::Zero(m);
    s.P = phi.inverse();
    s.delta = delta;
    const int grow = 1 + static_cast<int>(rng.uniform() * 3);
    const auto expanded = rls_resize_le(s, m + grow);
    Eigen::MatrixXd phi_big = Eigen::MatrixXd::Zero(m + grow, m + grow);
    phi_big.topLeftCorner(m, m) = phi;
    for (int i = m; i < m + grow; ++i) phi_big(i, i) = delta;
    worst_expand = std::max(worst_expand,
                            (expanded->P - phi_big.inverse()).cwiseAbs().maxCoeff());

    // truncation with a retired (zero cross-correlation) last tap
    Eigen::MatrixXd phi_iso = Eigen::MatrixXd::Zero(m + 1, m + 1);
    phi_iso.topLeftCorner(m, m) = phi;
    phi_iso(m, m) = 0.5 + rng.uniform();
    RlsState t;
    t.w = Eigen::VectorXd::Zero(m + 1);
    t.P = phi_iso.inverse();
    t.delta = delta;
    const RlsState shrunk = rls_resize_dfe_fbf(t, -1);
    worst_truncate =
        std::max(worst_truncate, (shrunk.P - phi.inverse()).cwiseAbs().maxCoeff());
  }
  out << "worst expansion residual " << worst_expand << ", truncation residual "
      << worst_truncate << " (allowed 1e-9)";
  return worst_expand < 1e-9 && worst_truncate < 1e-9;
}

bool dfe_postcursor_saturation(std::ostream& out) {
  SeededRng rng(4004);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 7);
    Eigen::VectorXd raw(n);
    for (int i = 0; i < n; ++i) raw[i] = rng.gaussian();
    const ChannelProfile channel = normalize_power(raw);
    const int n_f = 6;
    const int delay = n_f - 1;
    const double sv2 = noise_variance_from_ebno(15.0);
    double lo = 1e300, hi = -1e300;
    for (int n_b = n - 1; n_b <= n + 6; ++n_b) {
      const double mmse =
          wiener_solve(build_dfe_correlations(channel, sv2, n_f, n_b, delay)).mmse;
      lo = std::min(lo, mmse);
      hi = std::max(hi, mmse);
    }
    worst = std::max(worst, hi - lo);
  }
  out << "worst MMSE variation beyond N-1 feedback taps = " << worst << " (allowed 1e-9)";
  return worst < 1e-9;
}

bool decision_delay_rule(std::ostream& out) {
  const ChannelProfile channel =
      normalize_power(std::vector<double>{0.2, -0.5, 1.0, -0.2, 0.15, -0.05});
  const double sv2 = noise_variance_from_ebno(25.0);
  const int n_f = 4, n_b = 5;
  auto at = [&](int delay) {
    const CorrelationSystem sys = build_dfe_correlations(channel, sv2, n_f, n_b, delay);
    return std::pair{eigenvalue_spread(sys.R), wiener_solve(sys).mmse};
  };
  const auto [chi3, mmse3] = at(3);
  const auto [chi4, mmse4] = at(4);
  const auto [chi5, mmse5] = at(5);
  const auto [chi6, mmse6] = at(6);
  const double jump_db = 10.0 * std::log10(mmse6 / mmse5);
  out << "spread D=3,4,5: " << chi3 << ", " << chi4 << ", " << chi5
      << "; MMSE D=4: " << mmse4 << "; D=6 over D=5: " << jump_db << " dB";
  return chi5 < chi3 && chi5 < chi4 && mmse4 <= mmse3 && mmse4 <= mmse5 && jump_db >= 10.0;
}

bool operation_accounting(std::ostream& out) {
  // synthetic variable-length trace
  std::vector<int> trace;
  std::uint64_t expected_products = 0, expected_additions = 0;
  SeededRng rng(5005);
  int m = 12;
  for (int n = 0; n < 100000; ++n) {
    if (n % 1000 == 0) m = 9 + 3 * static_cast<int>(rng.uniform() * 8);
    trace.push_back(m);
    expected_products += 2ULL * m + 4ULL;
    expected_additions += 2ULL * m + 4ULL;
  }
  const OpCounts counts = count_operations(Algorithm::Lms, ControllerOverhead::LeBasic, trace);
  const bool exact =
      counts.products == expected_products && counts.additions == expected_additions;

  // back-calculation of the average length from the product total
  double mean = 0.0;
  for (const int v : trace) mean += v;
  mean /= static_cast<double>(trace.size());
  const double m_av = (static_cast<double>(counts.products) - 4.0 * trace.size()) /
                      (2.0 * static_cast<double>(trace.size()));
  const bool inverts = std::abs(m_av - mean) < 1e-9;
  out << "totals " << (exact ? "exact" : "WRONG") << ", M_av " << m_av << " vs mean " << mean;
  return exact && inverts;
}

}  // namespace

std::vector<Criterion> structure_criteria() {
  return {
      {1, "segmented equivalence", segmented_equivalence},
      {2, "wiener oracle (RLS, static channels)", wiener_oracle},
      {8, "rls resize identities", rls_resize_identity},
      {9, "dfe postcursor saturation", dfe_postcursor_saturation},
      {11, "decision delay rule", decision_delay_rule},
      {14, "operation accounting", operation_accounting},
  };
}

}  // namespace acceptance
