#include "eqlab/wiener.hpp"

#include <cmath>
#include <limits>

namespace eqlab {

CorrelationSystem build_le_correlations(const ChannelProfile& channel, double noise_variance,
                                        int taps, int delay, double symbol_power) {
  const int n = channel.length();
  if (taps < 1) throw std::invalid_argument("build_le_correlations: need at least one tap");
  if (delay < 0 || delay > taps + n - 2) {
    throw std::invalid_argument("build_le_correlations: delay out of range");
  }
  const auto& c = channel.taps;
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(taps);
  for (int k = 0; k < std::min(taps, n); ++k) {
    double acc = 0.0;
    for (int j = 0; j + k < n; ++j) acc += c[j] * c[j + k];
    gamma[k] = acc;
  }
  CorrelationSystem sys;
  sys.n_f = taps;
  sys.n_b = 0;
  sys.delay = delay;
  sys.symbol_power = symbol_power;
  sys.R.resize(taps, taps);
  for (int i = 0; i < taps; ++i) {
    for (int j = 0; j < taps; ++j) {
      sys.R(i, j) = symbol_power * gamma[std::abs(i - j)] + (i == j ? noise_variance : 0.0);
    }
  }
  sys.p = Eigen::VectorXd::Zero(taps);
  for (int i = 0; i < taps; ++i) {
    const int k = delay - i;
    if (k >= 0 && k < n) sys.p[i] = symbol_power * c[k];
  }
  return sys;
}

CorrelationSystem build_dfe_correlations(const ChannelProfile& channel, double noise_variance,
                                         int n_f, int n_b, int delay, double symbol_power) {
  if (n_b < 0) throw std::invalid_argument("build_dfe_correlations: negative feedback length");
  CorrelationSystem le = build_le_correlations(channel, noise_variance, n_f, delay, symbol_power);
  if (n_b == 0) return le;

  const int n = channel.length();
  const auto& c = channel.taps;
  const int m = n_f + n_b;
  CorrelationSystem sys;
  sys.n_f = n_f;
  sys.n_b = n_b;
  sys.delay = delay;
  sys.symbol_power = symbol_power;
  sys.R = Eigen::MatrixXd::Zero(m, m);
  sys.R.topLeftCorner(n_f, n_f) = le.R;
  for (int i = 0; i < n_f; ++i) {
    for (int j = 0; j < n_b; ++j) {
      const int k = delay + 1 + j - i;
      if (k >= 0 && k < n) {
        sys.R(i, n_f + j) = symbol_power * c[k];
        sys.R(n_f + j, i) = symbol_power * c[k];
      }
    }
  }
  sys.R.bottomRightCorner(n_b, n_b) = symbol_power * Eigen::MatrixXd::Identity(n_b, n_b);
  sys.p = Eigen::VectorXd::Zero(m);
  sys.p.head(n_f) = le.p;
  return sys;
}

WienerSolution wiener_solve(const CorrelationSystem& sys) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sys.R, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  const double cond = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  if (!(cond < 1e12)) throw IllConditioned(cond);

  WienerSolution sol;
  sol.w = sys.R.ldlt().solve(sys.p);
  const double residual = (sys.R * sol.w - sys.p).cwiseAbs().maxCoeff();
  const double scale = std::max(sys.p.cwiseAbs().maxCoeff(), 1e-300);
  if (residual > 1e-9 * scale) {
    // one refinement pass; LDLT on SPD systems practically never needs more
    sol.w += sys.R.ldlt().solve(sys.p - sys.R * sol.w);
  }
  sol.mmse = std::max(sys.symbol_power - sys.p.dot(sol.w), 0.0);
  return sol;
}

double eigenvalue_spread(const Eigen::Ref<const Eigen::MatrixXd>& R) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (!(lmin > 0.0)) throw std::invalid_argument("eigenvalue_spread: matrix is not positive definite");
  return es.eigenvalues().maxCoeff() / lmin;
}

double predict_mse_lms_le(const PredictionInputs& in) {
  if (in.mu <= 0.0) throw std::invalid_argument("predict_mse_lms_le: step size must be positive");
  const double power = in.symbol_power + in.noise_variance;
  return in.mmse * (1.0 + in.taps * power * in.mu / 2.0) +
         in.channel_taps * in.process_noise / (2.0 * in.mu);
}

double optimum_mu(const PredictionInputs& in) {
  const double power = in.symbol_power + in.noise_variance;
  if (in.process_noise == 0.0) return 0.0;
  return std::sqrt(in.channel_taps * in.process_noise / (in.taps * power * in.mmse));
}

double predict_mse_rls_le(const PredictionInputs& in) {
  const double power = in.symbol_power + in.noise_variance;
  if (in.lambda >= 1.0) {
    if (in.process_noise > 0.0) {
      throw std::invalid_argument("predict_mse_rls_le: infinite tracking term at lambda = 1");
    }
    return in.mmse;
  }
  return in.mmse * (1.0 + in.taps * (1.0 - in.lambda) / 2.0) +
         in.channel_taps * in.process_noise * power / (2.0 * (1.0 - in.lambda));
}

double optimum_lambda(const PredictionInputs& in) {
  if (in.process_noise == 0.0) return 1.0;
  const double power = in.symbol_power + in.noise_variance;
  const double lam =
      1.0 - std::sqrt(in.channel_taps * in.process_noise * power / (in.taps * in.mmse));
  return std::clamp(lam, std::numeric_limits<double>::min(), 1.0 - 1e-12);
}

double predict_mse_lms_dfe(const PredictionInputs& in) {
  if (in.mu <= 0.0) throw std::invalid_argument("predict_mse_lms_dfe: step size must be positive");
  return in.mmse * (1.0 + in.mu * in.n_f * (1.0 + in.noise_variance) / 2.0 +
                    in.mu * in.n_b / 2.0) +
         in.channel_taps * in.process_noise / (2.0 * in.mu);
}

double predict_mse_rls_dfe(const PredictionInputs& in) {
  if (in.lambda >= 1.0) {
    if (in.process_noise > 0.0) {
      throw std::invalid_argument("predict_mse_rls_dfe: infinite tracking term at lambda = 1");
    }
    return in.mmse;
  }
  const int m = in.n_f + in.n_b;
  const double one_minus = 1.0 - in.lambda;
  return in.mmse * (1.0 + one_minus * m / 2.0) +
         in.channel_taps * in.n_f * in.process_noise * (1.0 + in.noise_variance) /
             (2.0 * one_minus * m) +
         in.channel_taps * in.n_b * in.process_noise / (2.0 * one_minus * m);
}

Eigen::VectorXd combined_response(const ChannelProfile& channel,
                                  const Eigen::Ref<const Eigen::VectorXd>& w_f) {
  const int n = channel.length();
  const int m = static_cast<int>(w_f.size());
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n + m - 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) z[i + j] += channel.taps[i] * w_f[j];
  }
  return z;
}

IsiDecomposition isi_decomposition(const Eigen::Ref<const Eigen::VectorXd>& z, int delay,
                                   double noise_variance,
                                   const Eigen::Ref<const Eigen::VectorXd>& w_f,
                                   const Eigen::Ref<const Eigen::VectorXd>& w_b,
                                   int channel_taps) {
  if (delay < 0 || delay >= z.size()) {
    throw std::invalid_argument("isi_decomposition: delay outside the combined response");
  }
  IsiDecomposition out;
  for (int i = 0; i < delay; ++i) out.isi_pre += z[i] * z[i];
  for (int i = delay + 1; i < z.size(); ++i) out.isi_post += z[i] * z[i];
  // postcursors within the feedback span are cancelled by correct decisions
  double post_residual = 0.0;
  const int cancelled_end = delay + static_cast<int>(w_b.size());
  for (int i = delay + 1; i < z.size(); ++i) {
    if (i > cancelled_end) post_residual += z[i] * z[i];
  }
  // the channel needs channel_taps - 1 cancelling taps; the rest are excess
  for (int i = channel_taps - 1; i < w_b.size(); ++i) out.isi_excess += w_b[i] * w_b[i];
  const double denom = noise_variance * w_f.squaredNorm() + out.isi_pre + post_residual;
  out.snr_out =
      denom > 0.0 ? z[delay] * z[delay] / denom : std::numeric_limits<double>::infinity();
  return out;
}

double lms_transient_bound(int taps, double mu, double mmse, double symbol_power,
                           double noise_variance, double lambda_av, double lambda_max,
                           double mse_now) {
  const double power = symbol_power + noise_variance;
  const double contraction = 1.0 - 2.0 * mu * lambda_av + mu * mu * lambda_max * power * taps;
  const double steady_excess = mu * mu * lambda_max * power * mmse;
  return contraction * (mse_now - mmse) + mmse + steady_excess;
}

double rls_transient_mse(int taps, double mmse, int n) {
  if (n <= taps + 1) throw std::invalid_argument("rls_transient_mse: needs n > M + 1");
  return mmse * (1.0 + static_cast<double>(taps) / (n - taps - 1));
}

}  // namespace eqlab
