#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "eqlab/channel.hpp"

namespace eqlab {

class IllConditioned : public std::runtime_error {
 public:
  explicit IllConditioned(double condition)
      : std::runtime_error("correlation matrix is ill-conditioned"), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

/// Input autocorrelation matrix and desired-signal crosscorrelation vector
/// for either a linear equaliser (n_b = 0) or a DFE with an (n_f, n_b)
/// split under the correct-decision assumption.
struct CorrelationSystem {
  Eigen::MatrixXd R;
  Eigen::VectorXd p;
  int n_f = 0;
  int n_b = 0;
  int delay = 0;
  double symbol_power = 1.0;

  int size() const { return static_cast<int>(R.rows()); }
  bool is_dfe() const { return n_b > 0; }
};

/// Static-channel LE system: R[i][j] = sd2 gamma_|i-j| + sv2 [i==j] with
/// gamma_k the channel tap autocorrelation, p[i] = sd2 c_{D-i}.
CorrelationSystem build_le_correlations(const ChannelProfile& channel, double noise_variance,
                                        int taps, int delay, double symbol_power = 1.0);

/// DFE system over the joint regressor [received window, decision window].
/// The feedforward block matches the LE system, the cross block holds
/// channel coefficients c_{D+1+j-i}, and the decision block is sd2 * I.
CorrelationSystem build_dfe_correlations(const ChannelProfile& channel, double noise_variance,
                                         int n_f, int n_b, int delay, double symbol_power = 1.0);

struct WienerSolution {
  Eigen::VectorXd w;
  double mmse = 0.0;
};

/// Solves R w = p by LDLT with a condition estimate; throws IllConditioned
/// above 1e12.  MMSE = sd2 - p'w, clamped at zero.
WienerSolution wiener_solve(const CorrelationSystem& sys);

/// lambda_max / lambda_min of a symmetric positive-definite matrix.
double eigenvalue_spread(const Eigen::Ref<const Eigen::MatrixXd>& R);

/// Everything the closed-form steady-state MSE predictions consume.
/// `taps` is the LE length; DFE formulas use (n_f, n_b) instead.
struct PredictionInputs {
  double mmse = 0.0;
  int taps = 0;
  int n_f = 0;
  int n_b = 0;
  int channel_taps = 0;
  double symbol_power = 1.0;
  double noise_variance = 0.0;
  double process_noise = 0.0;  // per-tap Markov variance sigma_q^2
  double mu = 0.0;
  double lambda = 1.0;
};

/// Steady-state MSE of an LMS linear equaliser tracking a Markov channel:
/// MMSE (1 + M (sd2+sv2) mu / 2) + N sq2 / (2 mu).
double predict_mse_lms_le(const PredictionInputs& in);

/// Step size minimising predict_mse_lms_le.
double optimum_mu(const PredictionInputs& in);

/// RLS counterpart: MMSE (1 + M (1-lambda) / 2) + N sq2 (sd2+sv2) / (2 (1-lambda)).
/// lambda = 1 with sq2 > 0 has an infinite tracking term and throws;
/// lambda = 1 with sq2 = 0 returns the MMSE.
double predict_mse_rls_le(const PredictionInputs& in);

/// Forgetting factor minimising predict_mse_rls_le, clamped into (0, 1).
double optimum_lambda(const PredictionInputs& in);

double predict_mse_lms_dfe(const PredictionInputs& in);

double predict_mse_rls_dfe(const PredictionInputs& in);

/// Combined channel-feedforward response z = c * w_f (linear convolution).
Eigen::VectorXd combined_response(const ChannelProfile& channel,
                                  const Eigen::Ref<const Eigen::VectorXd>& w_f);

struct IsiDecomposition {
  double snr_out = 0.0;   // infinity when the response is ideal and noiseless
  double isi_pre = 0.0;
  double isi_post = 0.0;
  double isi_excess = 0.0;
};

/// Splits the combined response around the decision position and accounts
/// for feedback taps beyond the channel span.  Postcursor energy inside the
/// feedback span is treated as cancelled for the output SNR.
IsiDecomposition isi_decomposition(const Eigen::Ref<const Eigen::VectorXd>& z, int delay,
                                   double noise_variance,
                                   const Eigen::Ref<const Eigen::VectorXd>& w_f,
                                   const Eigen::Ref<const Eigen::VectorXd>& w_b,
                                   int channel_taps);

/// One step of the LMS transient recursion: the excess over the MMSE decays
/// by [1 - 2 mu l_av + mu^2 l_max (sd2+sv2) M] while the steady-state excess
/// mu^2 l_max (sd2+sv2) MMSE is injected.
double lms_transient_bound(int taps, double mu, double mmse, double symbol_power,
                           double noise_variance, double lambda_av, double lambda_max,
                           double mse_now);

/// RLS transient level at iteration n: MMSE (1 + M / (n - M - 1)).
double rls_transient_mse(int taps, double mmse, int n);

}  // namespace eqlab
