#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <variant>

namespace eqlab {

/// Raised when the inverse-correlation matrix or the weights of an RLS state
/// stop being finite (or blow past any plausible magnitude).  The caller is
/// expected to restart the filter.
class RlsDivergence : public std::runtime_error {
 public:
  RlsDivergence() : std::runtime_error("RLS divergence") {}
};

struct LmsState {
  Eigen::VectorXd w;
  double mu = 0.01;

  LmsState() = default;
  LmsState(int taps, double step) : w(Eigen::VectorXd::Zero(taps)), mu(step) {}
};

struct NlmsState {
  Eigen::VectorXd w;
  double mu_tilde = 0.5;   // stable for 0 < mu_tilde < 2
  double eps = 1e-6;       // regulariser against a vanishing input norm

  NlmsState() = default;
  NlmsState(int taps, double step, double regularizer = 1e-6)
      : w(Eigen::VectorXd::Zero(taps)), mu_tilde(step), eps(regularizer) {}
};

/// LMS with the step size driven by the squared error:
/// mu' <- clamp(a mu' + rho e^2).  The upper clamp tracks the stability
/// bound from an exponentially smoothed input-power estimate.
struct VslmsState {
  Eigen::VectorXd w;
  double mu = 0.0;         // current step
  double a = 0.99;         // step forgetting factor
  double rho = 1e-4;       // error-power gain
  double mu_min = 1e-6;
  double mu_max = 0.0;     // hard ceiling; 0 = derive from the power estimate only
  double power_est = 1.0;  // smoothed per-tap input power
  double power_beta = 0.99;

  VslmsState() = default;
  VslmsState(int taps, double rho_, double a_, double initial_mu = 0.0, double mu_max_ = 0.0);
};

/// Exponentially weighted RLS state.  P tracks the inverse of the input
/// correlation matrix and is re-symmetrised after every update.
struct RlsState {
  Eigen::VectorXd w;
  Eigen::MatrixXd P;
  double lambda = 1.0;
  double delta = 0.01;
};

/// One LMS iteration; returns the a-priori error d - w'u.
double lms_update(LmsState& s, const Eigen::Ref<const Eigen::VectorXd>& u, double d);

double nlms_update(NlmsState& s, const Eigen::Ref<const Eigen::VectorXd>& u, double d);

double vslms_update(VslmsState& s, const Eigen::Ref<const Eigen::VectorXd>& u, double d);

/// One RLS iteration; returns the a-priori error.  Throws RlsDivergence when
/// the state stops being finite.
double rls_update(RlsState& s, const Eigen::Ref<const Eigen::VectorXd>& u, double d);

/// Soft-constrained initialisation: zero weights, P = I / delta.
RlsState rls_init(int taps, double delta, double lambda = 1.0);

/// Largest step size with guaranteed MSE convergence for an M-tap LMS-family
/// filter fed with the given per-tap input power: 2 / (3 M power).
double max_stable_mu(int taps, double input_power);

using AlgoState = std::variant<LmsState, NlmsState, VslmsState, RlsState>;

/// Dispatches to the matching *_update.
double algo_update(AlgoState& s, const Eigen::Ref<const Eigen::VectorXd>& u, double d);

Eigen::VectorXd& algo_weights(AlgoState& s);
const Eigen::VectorXd& algo_weights(const AlgoState& s);

}  // namespace eqlab
