#include <doctest.h>

#include <cmath>

#include "eqlab/adaptive.hpp"
#include "eqlab/rng.hpp"
#include "eqlab/signals.hpp"
#include "eqlab/wiener.hpp"

using namespace eqlab;

namespace {

ChannelProfile profile(std::initializer_list<double> taps) {
  std::vector<double> v(taps);
  return normalize_power(v);
}

ChannelProfile raw_profile(std::initializer_list<double> taps) {
  ChannelProfile p;
  p.taps = Eigen::VectorXd(static_cast<Eigen::Index>(taps.size()));
  Eigen::Index i = 0;
  for (const double x : taps) p.taps[i++] = x;
  return p;
}

}  // namespace

TEST_CASE("LE correlation construction") {
  SUBCASE("identity channel") {
    const auto sys = build_le_correlations(raw_profile({1.0}), 0.0, 1, 0);
    CHECK(sys.R(0, 0) == doctest::Approx(1.0));
    CHECK(sys.p[0] == doctest::Approx(1.0));
  }

  SUBCASE("two-tap channel by hand") {
    const auto sys = build_le_correlations(raw_profile({0.6, 0.8}), 0.1, 2, 0);
    CHECK(sys.R(0, 0) == doctest::Approx(1.1));
    CHECK(sys.R(1, 1) == doctest::Approx(1.1));
    CHECK(sys.R(0, 1) == doctest::Approx(0.48));
    CHECK(sys.R(1, 0) == doctest::Approx(0.48));
  }

  SUBCASE("every diagonal entry is sd2 + sv2 for a unit-power channel") {
    const auto c = profile({0.3, -0.9, 0.2, 0.1});
    const auto sys = build_le_correlations(c, 0.25, 6, 3);
    for (int i = 0; i < 6; ++i) CHECK(sys.R(i, i) == doctest::Approx(1.25).epsilon(1e-12));
  }
}

TEST_CASE("DFE correlation construction") {
  const auto c = profile({0.2, -0.5, 1.0, -0.2, 0.15, -0.05});

  SUBCASE("degenerate feedback reduces to the LE system") {
    const auto le = build_le_correlations(c, 0.01, 5, 3);
    const auto dfe = build_dfe_correlations(c, 0.01, 5, 0, 3);
    CHECK((le.R - dfe.R).cwiseAbs().maxCoeff() == 0.0);
    CHECK((le.p - dfe.p).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("decision block is the identity") {
    const auto sys = build_dfe_correlations(c, 0.3, 4, 5, 5);
    const Eigen::MatrixXd block = sys.R.bottomRightCorner(5, 5);
    CHECK((block - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("cross block holds delayed channel coefficients") {
    const auto sys = build_dfe_correlations(c, 0.0, 4, 5, 5);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 5; ++j) {
        const int k = 5 + 1 + j - i;
        const double expected = (k >= 0 && k < c.length()) ? c.taps[k] : 0.0;
        CHECK(sys.R(i, 4 + j) == doctest::Approx(expected));
      }
    }
  }
}

TEST_CASE("wiener solve") {
  SUBCASE("noiseless identity channel is perfectly invertible") {
    const auto sys = build_le_correlations(raw_profile({1.0}), 0.0, 5, 2);
    const auto sol = wiener_solve(sys);
    CHECK(sol.mmse == doctest::Approx(0.0).epsilon(1e-12));
    for (int i = 0; i < 5; ++i) {
      CHECK(sol.w[i] == doctest::Approx(i == 2 ? 1.0 : 0.0).epsilon(1e-9));
    }
  }

  SUBCASE("scalar case by hand") {
    const auto sys = build_le_correlations(raw_profile({1.0}), 0.1, 1, 0);
    const auto sol = wiener_solve(sys);
    CHECK(sol.w[0] == doctest::Approx(1.0 / 1.1));
    CHECK(sol.mmse == doctest::Approx(1.0 - 1.0 / 1.1));
  }

  SUBCASE("matches a least-squares fit of simulated data") {
    const auto c = profile({0.8, -0.5, 0.33});
    const double sv2 = 0.02;
    const int m = 7, delay = 3;
    const auto sol = wiener_solve(build_le_correlations(c, sv2, m, delay));

    SeededRng rng(77);
    const int n_samples = 100000;
    Eigen::VectorXd sym = Eigen::VectorXd::Zero(8);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
    Eigen::MatrixXd ruu = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd rud = Eigen::VectorXd::Zero(m);
    for (int n = 0; n < n_samples; ++n) {
      for (Eigen::Index i = sym.size() - 1; i > 0; --i) sym[i] = sym[i - 1];
      sym[0] = rng.symbol();
      const double r = c.taps.dot(sym.head(3)) + std::sqrt(sv2) * rng.gaussian();
      for (Eigen::Index i = u.size() - 1; i > 0; --i) u[i] = u[i - 1];
      u[0] = r;
      if (n < m) continue;
      ruu.noalias() += u * u.transpose();
      rud.noalias() += u * sym[delay];
    }
    const Eigen::VectorXd w_ls = ruu.ldlt().solve(rud);
    CHECK((w_ls - sol.w).norm() < 1e-2);
  }

  SUBCASE("ill-conditioned systems are rejected with a condition estimate") {
    CorrelationSystem sys;
    sys.R = Eigen::MatrixXd::Zero(2, 2);
    sys.R(0, 0) = 1.0;
    sys.R(1, 1) = 1e-14;
    sys.p = Eigen::VectorXd::Ones(2);
    CHECK_THROWS_AS(wiener_solve(sys), IllConditioned);
  }
}

TEST_CASE("eigenvalue spread") {
  CHECK(eigenvalue_spread(Eigen::MatrixXd::Identity(4, 4)) == doctest::Approx(1.0));
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 4.0;
  d(1, 1) = 1.0;
  CHECK(eigenvalue_spread(d) == doctest::Approx(4.0));
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
  bad(0, 0) = 1.0;
  CHECK_THROWS_AS(eigenvalue_spread(bad), std::invalid_argument);

  SUBCASE("spread grows as the noise floor drops") {
    const auto c = builtin_profile("model2");
    double prev = 0.0;
    for (const double sv2 : {1.0, 0.1, 0.01, 0.001}) {
      const double spread = eigenvalue_spread(build_le_correlations(c, sv2, 11, 5).R);
      CHECK(spread > prev);
      prev = spread;
    }
  }
}

TEST_CASE("LMS LE steady-state prediction") {
  PredictionInputs in;
  in.mmse = 0.01;
  in.taps = 5;
  in.channel_taps = 2;
  in.symbol_power = 1.0;
  in.noise_variance = 0.0031623;
  in.process_noise = 1e-5;
  in.mu = 0.01;

  SUBCASE("static limit approaches the MMSE") {
    PredictionInputs s = in;
    s.process_noise = 0.0;
    s.mu = 1e-6;
    CHECK(predict_mse_lms_le(s) == doctest::Approx(0.01).epsilon(1e-4));
  }

  SUBCASE("direct evaluation") {
    // 0.01 (1 + 5 * 1.0031623 * 0.01 / 2) + 2e-5 / 0.02
    const double expected =
        0.01 * (1.0 + 5.0 * 1.0031623 * 0.005) + 2.0 * 1e-5 / (2.0 * 0.01);
    CHECK(predict_mse_lms_le(in) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(predict_mse_lms_le(in) == doctest::Approx(0.011250791).epsilon(1e-6));
  }

  SUBCASE("both excess terms are equal at the optimum step") {
    PredictionInputs s = in;
    s.mu = optimum_mu(in);
    const double misadjust = s.mmse * s.taps * (s.symbol_power + s.noise_variance) * s.mu / 2.0;
    const double tracking = s.channel_taps * s.process_noise / (2.0 * s.mu);
    CHECK(misadjust == doctest::Approx(tracking).epsilon(1e-12));
  }

  SUBCASE("grid search confirms the optimum step") {
    const double mu_opt = optimum_mu(in);
    double best = 1e300;
    double best_mu = 0.0;
    for (int k = -30; k <= 30; ++k) {
      PredictionInputs s = in;
      s.mu = mu_opt * std::pow(10.0, k / 30.0);
      const double v = predict_mse_lms_le(s);
      if (v < best) {
        best = v;
        best_mu = s.mu;
      }
    }
    CHECK(best_mu == doctest::Approx(mu_opt).epsilon(0.08));
  }

  SUBCASE("optimum step corner cases") {
    PredictionInputs s = in;
    s.process_noise = 0.0;
    CHECK(optimum_mu(s) == 0.0);
    s.process_noise = 0.01;
    s.mmse = 0.01;
    s.taps = 2;
    s.channel_taps = 2;
    s.symbol_power = 1.0;
    s.noise_variance = 0.0;
    CHECK(optimum_mu(s) == doctest::Approx(1.0));
  }
}

TEST_CASE("RLS LE steady-state prediction") {
  PredictionInputs in;
  in.mmse = 0.01;
  in.taps = 23;
  in.channel_taps = 11;
  in.symbol_power = 1.0;
  in.noise_variance = 0.0032;
  in.process_noise = 1e-6;
  in.lambda = 0.995;

  SUBCASE("static channel at lambda 1 gives the MMSE") {
    PredictionInputs s = in;
    s.lambda = 1.0;
    s.process_noise = 0.0;
    CHECK(predict_mse_rls_le(s) == doctest::Approx(0.01));
  }

  SUBCASE("lambda 1 with channel motion has no finite prediction") {
    PredictionInputs s = in;
    s.lambda = 1.0;
    CHECK_THROWS_AS(predict_mse_rls_le(s), std::invalid_argument);
  }

  SUBCASE("direct evaluation") {
    const double expected = 0.01 * (1.0 + 23.0 * 0.005 / 2.0) +
                            11.0 * 1e-6 * 1.0032 / (2.0 * 0.005);
    CHECK(predict_mse_rls_le(in) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(predict_mse_rls_le(in) == doctest::Approx(0.0116785).epsilon(1e-4));
  }

  SUBCASE("grid search confirms the optimum forgetting factor") {
    const double lam_opt = optimum_lambda(in);
    CHECK(lam_opt < 1.0);
    double best = 1e300, best_lam = 0.0;
    for (int k = -20; k <= 20; ++k) {
      PredictionInputs s = in;
      s.lambda = 1.0 - (1.0 - lam_opt) * std::pow(10.0, k / 20.0);
      if (s.lambda <= 0.0) continue;
      const double v = predict_mse_rls_le(s);
      if (v < best) {
        best = v;
        best_lam = s.lambda;
      }
    }
    CHECK(1.0 - best_lam == doctest::Approx(1.0 - lam_opt).epsilon(0.15));
  }

  SUBCASE("optimum forgetting factor corner cases") {
    PredictionInputs s = in;
    s.process_noise = 0.0;
    CHECK(optimum_lambda(s) == 1.0);
    s.process_noise = 1e-4;
    CHECK(optimum_lambda(s) < 1.0);
  }
}

TEST_CASE("DFE steady-state predictions") {
  PredictionInputs in;
  in.mmse = 0.005;
  in.n_f = 6;
  in.n_b = 10;
  in.channel_taps = 11;
  in.symbol_power = 1.0;
  in.noise_variance = 0.0032;
  in.process_noise = 1e-5;
  in.mu = 0.01;
  in.lambda = 0.99;

  SUBCASE("no feedback reduces to the LE expression") {
    PredictionInputs s = in;
    s.n_b = 0;
    s.taps = s.n_f;
    CHECK(predict_mse_lms_dfe(s) == doctest::Approx(predict_mse_lms_le(s)).epsilon(1e-12));
    CHECK(predict_mse_rls_dfe(s) == doctest::Approx(predict_mse_rls_le(s)).epsilon(1e-12));
  }

  SUBCASE("feedback taps add no noise sensitivity") {
    auto slope = [&](int n_b) {
      PredictionInputs a = in, b = in;
      a.n_b = n_b;
      b.n_b = n_b;
      b.noise_variance += 1e-3;
      return predict_mse_lms_dfe(b) - predict_mse_lms_dfe(a);
    };
    CHECK(slope(0) == doctest::Approx(slope(10)).epsilon(1e-9));
  }

  SUBCASE("LMS direct evaluation") {
    const double expected = 0.005 * (1.0 + 0.030096 + 0.05) + 11.0 * 1e-5 / 0.02;
    CHECK(predict_mse_lms_dfe(in) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(predict_mse_lms_dfe(in) == doctest::Approx(0.0109).epsilon(1e-3));
  }

  SUBCASE("RLS direct evaluation against an independent re-derivation") {
    const int m = in.n_f + in.n_b;
    const double om = 1.0 - in.lambda;
    const double expected = in.mmse + in.mmse * om * m / 2.0 +
                            (in.channel_taps * in.process_noise / (2.0 * om * m)) *
                                (in.n_f * (1.0 + in.noise_variance) + in.n_b);
    CHECK(predict_mse_rls_dfe(in) == doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("lambda 1 on a static channel gives the MMSE") {
    PredictionInputs s = in;
    s.lambda = 1.0;
    s.process_noise = 0.0;
    CHECK(predict_mse_rls_dfe(s) == doctest::Approx(0.005));
  }

  SUBCASE("all predictions dominate the MMSE") {
    SeededRng rng(55);
    for (int trial = 0; trial < 200; ++trial) {
      PredictionInputs s;
      s.mmse = 0.001 + rng.uniform() * 0.1;
      s.taps = 1 + static_cast<int>(rng.uniform() * 30);
      s.n_f = 1 + static_cast<int>(rng.uniform() * 10);
      s.n_b = static_cast<int>(rng.uniform() * 10);
      s.channel_taps = 1 + static_cast<int>(rng.uniform() * 11);
      s.noise_variance = rng.uniform();
      s.process_noise = rng.uniform() * 1e-4;
      s.mu = 1e-4 + rng.uniform() * 0.05;
      s.lambda = 0.9 + rng.uniform() * 0.0999;
      CHECK(predict_mse_lms_le(s) >= s.mmse);
      CHECK(predict_mse_rls_le(s) >= s.mmse);
      CHECK(predict_mse_lms_dfe(s) >= s.mmse);
      CHECK(predict_mse_rls_dfe(s) >= s.mmse);
    }
  }
}

TEST_CASE("combined response and ISI decomposition") {
  const auto c = profile({0.2, -0.5, 1.0, -0.2, 0.15, -0.05});

  SUBCASE("unit feedforward reproduces the channel") {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(1);
    w[0] = 1.0;
    const Eigen::VectorXd z = combined_response(c, w);
    CHECK((z - c.taps).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("hand convolution") {
    ChannelProfile two = raw_profile({1.0, 1.0});
    Eigen::VectorXd w(2);
    w << 1.0, -1.0;
    const Eigen::VectorXd z = combined_response(two, w);
    CHECK(z.size() == 3);
    CHECK(z[0] == doctest::Approx(1.0));
    CHECK(z[1] == doctest::Approx(0.0));
    CHECK(z[2] == doctest::Approx(-1.0));
  }

  SUBCASE("length is N + N_f - 1") {
    Eigen::VectorXd w = Eigen::VectorXd::Ones(4);
    CHECK(combined_response(c, w).size() == c.length() + 4 - 1);
  }

  SUBCASE("ideal response is an infinite-SNR sentinel") {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(5);
    z[2] = 1.0;
    const auto d = isi_decomposition(z, 2, 0.0, Eigen::VectorXd::Ones(1),
                                     Eigen::VectorXd::Zero(2), 5);
    CHECK(std::isinf(d.snr_out));
    CHECK(d.isi_pre == 0.0);
    CHECK(d.isi_post == 0.0);
    CHECK(d.isi_excess == 0.0);
  }

  SUBCASE("postcursor positions number N - 1 at the standard delay") {
    const int n = 5, n_f = 4;
    Eigen::VectorXd z = Eigen::VectorXd::Ones(n + n_f - 1);
    const auto d = isi_decomposition(z, n_f - 1, 0.0, Eigen::VectorXd::Ones(n_f),
                                     Eigen::VectorXd::Zero(0), n);
    CHECK(d.isi_post == doctest::Approx(static_cast<double>(n - 1)));
  }

  SUBCASE("feedback taps beyond the channel span are excess") {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(6);
    z[2] = 1.0;
    Eigen::VectorXd wb(5);
    wb << 0.5, 0.2, 0.1, 0.0, 0.0;
    CHECK(isi_decomposition(z, 2, 0.0, Eigen::VectorXd::Ones(2), wb, 3).isi_excess ==
          doctest::Approx(0.1 * 0.1));
    wb << 0.5, 0.2, 0.0, 0.0, 0.0;
    CHECK(isi_decomposition(z, 2, 0.0, Eigen::VectorXd::Ones(2), wb, 3).isi_excess == 0.0);
  }
}

TEST_CASE("transient expressions") {
  SUBCASE("the fixed point collapses to the MMSE as the step vanishes") {
    const double mmse = 0.01;
    double mse = 1.0;
    for (int n = 0; n < 200000; ++n) {
      mse = lms_transient_bound(5, 1e-3, mmse, 1.0, 0.01, 1.0, 1.2, mse);
    }
    CHECK(mse == doctest::Approx(mmse).epsilon(1e-3));
  }

  SUBCASE("iteration from a large start is monotone non-increasing") {
    double mse = 10.0;
    for (int n = 0; n < 500; ++n) {
      const double next = lms_transient_bound(5, 0.01, 0.01, 1.0, 0.01, 1.0, 1.2, mse);
      CHECK(next <= mse + 1e-15);
      mse = next;
    }
  }

  SUBCASE("RLS convergence level") {
    const int m = 8;
    const double mmse = 0.02;
    const int n = 2 * m + 10;
    CHECK(rls_transient_mse(m, mmse, n) ==
          doctest::Approx(mmse * (1.0 + static_cast<double>(m) / (n - m - 1))));
    CHECK_THROWS_AS(rls_transient_mse(m, mmse, m), std::invalid_argument);
  }
}

TEST_CASE("oracle chain: RLS converges to the Wiener solution") {
  const auto c = builtin_profile("model1");
  const double sv2 = noise_variance_from_ebno(35.0);
  const int m = 9, delay = 4;
  const auto sol = wiener_solve(build_le_correlations(c, sv2, m, delay));

  SeededRng sym(301), noise(302);
  RlsState rls = rls_init(m, 0.01, 1.0);
  Eigen::VectorXd hist = Eigen::VectorXd::Zero(5);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
  double tail_e2 = 0.0;
  int tail_count = 0;
  const int n_samples = 40000;
  for (int n = 0; n < n_samples; ++n) {
    for (Eigen::Index i = hist.size() - 1; i > 0; --i) hist[i] = hist[i - 1];
    hist[0] = sym.symbol();
    const double r = c.taps.dot(hist.head(2)) + std::sqrt(sv2) * noise.gaussian();
    for (Eigen::Index i = u.size() - 1; i > 0; --i) u[i] = u[i - 1];
    u[0] = r;
    const double zeta = rls_update(rls, u, hist[delay]);
    if (n >= n_samples / 2) {
      tail_e2 += zeta * zeta;
      ++tail_count;
    }
  }
  CHECK((rls.w - sol.w).norm() < 1e-3);
  const double steady = tail_e2 / tail_count;
  CHECK(std::abs(10.0 * std::log10(steady / sol.mmse)) < 0.2);
}

TEST_CASE("MMSE is monotone in the equaliser length") {
  const auto c = builtin_profile("model2");
  const double sv2 = noise_variance_from_ebno(15.0);
  double prev = 1e300;
  for (int m = 9; m <= 30; m += 3) {
    const double mmse = wiener_solve(build_le_correlations(c, sv2, m, 8)).mmse;
    CHECK(mmse <= prev + 1e-12);
    prev = mmse;
  }
}

TEST_CASE("DFE MMSE saturates once the feedback spans the channel") {
  const auto c = builtin_profile("model3");
  const double sv2 = noise_variance_from_ebno(15.0);
  const int n_f = 6;
  const double base = wiener_solve(build_dfe_correlations(c, sv2, n_f, c.length() - 1, n_f - 1)).mmse;
  for (int n_b = c.length() - 1; n_b <= c.length() + 4; ++n_b) {
    const double mmse = wiener_solve(build_dfe_correlations(c, sv2, n_f, n_b, n_f - 1)).mmse;
    CHECK(std::abs(mmse - base) < 1e-9);
  }
}
