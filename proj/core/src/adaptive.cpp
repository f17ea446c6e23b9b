#include "eqlab/adaptive.hpp"

#include <cmath>

namespace eqlab {

namespace {

void check_dim(Eigen::Index weights, Eigen::Index regressor) {
  if (weights != regressor) {
    throw std::invalid_argument("adaptive update: regressor length does not match filter length");
  }
}

}  // namespace

VslmsState::VslmsState(int taps, double rho_, double a_, double initial_mu, double mu_max_)
    : w(Eigen::VectorXd::Zero(taps)), a(a_), rho(rho_), mu_max(mu_max_) {
  const double bound = mu_max_ > 0.0 ? mu_max_ : max_stable_mu(taps, 1.0);
  mu = initial_mu > 0.0 ? initial_mu : 0.5 * bound;
}

double lms_update(LmsState& s, const Eigen::Ref<const Eigen::VectorXd>& u, double d) {
  check_dim(s.w.size(), u.size());
  const double e = d - s.w.dot(u);
  s.w.noalias() += s.mu * e * u;
  return e;
}

double nlms_update(NlmsState& s, const Eigen::Ref<const Eigen::VectorXd>& u, double d) {
  check_dim(s.w.size(), u.size());
  const double e = d - s.w.dot(u);
  s.w.noalias() += (s.mu_tilde / (s.eps + u.squaredNorm())) * e * u;
  return e;
}

double vslms_update(VslmsState& s, const Eigen::Ref<const Eigen::VectorXd>& u, double d) {
  check_dim(s.w.size(), u.size());
  const int m = static_cast<int>(u.size());
  const double e = d - s.w.dot(u);
  s.w.noalias() += s.mu * e * u;
  s.power_est = s.power_beta * s.power_est + (1.0 - s.power_beta) * u.squaredNorm() / m;
  double bound = max_stable_mu(m, s.power_est);
  if (s.mu_max > 0.0) bound = std::min(bound, s.mu_max);
  s.mu = std::clamp(s.a * s.mu + s.rho * e * e, s.mu_min, bound);
  return e;
}

double rls_update(RlsState& s, const Eigen::Ref<const Eigen::VectorXd>& u, double d) {
  check_dim(s.w.size(), u.size());
  const Eigen::VectorXd pu = s.P * u;
  const double denom = s.lambda + u.dot(pu);
  const Eigen::VectorXd k = pu / denom;
  const double zeta = d - s.w.dot(u);
  s.w.noalias() += k * zeta;
  s.P.noalias() -= k * pu.transpose();
  s.P /= s.lambda;
  s.P = ((s.P + s.P.transpose()) / 2.0).eval();
  if (!s.w.allFinite() || !s.P.allFinite() || s.w.cwiseAbs().maxCoeff() > 1e6) {
    throw RlsDivergence();
  }
  return zeta;
}

RlsState rls_init(int taps, double delta, double lambda) {
  if (delta <= 0.0) throw std::invalid_argument("rls_init: delta must be positive");
  if (lambda <= 0.0 || lambda > 1.0) throw std::invalid_argument("rls_init: lambda must be in (0, 1]");
  RlsState s;
  s.w = Eigen::VectorXd::Zero(taps);
  s.P = Eigen::MatrixXd::Identity(taps, taps) / delta;
  s.lambda = lambda;
  s.delta = delta;
  return s;
}

double max_stable_mu(int taps, double input_power) {
  if (taps < 1) throw std::invalid_argument("max_stable_mu: need at least one tap");
  if (input_power <= 0.0) throw std::invalid_argument("max_stable_mu: input power must be positive");
  return 2.0 / (3.0 * taps * input_power);
}

double algo_update(AlgoState& s, const Eigen::Ref<const Eigen::VectorXd>& u, double d) {
  return std::visit(
      [&](auto& state) {
        using T = std::decay_t<decltype(state)>;
        if constexpr (std::is_same_v<T, LmsState>) {
          return lms_update(state, u, d);
        } else if constexpr (std::is_same_v<T, NlmsState>) {
          return nlms_update(state, u, d);
        } else if constexpr (std::is_same_v<T, VslmsState>) {
          return vslms_update(state, u, d);
        } else {
          return rls_update(state, u, d);
        }
      },
      s);
}

Eigen::VectorXd& algo_weights(AlgoState& s) {
  return std::visit([](auto& state) -> Eigen::VectorXd& { return state.w; }, s);
}

const Eigen::VectorXd& algo_weights(const AlgoState& s) {
  return std::visit([](const auto& state) -> const Eigen::VectorXd& { return state.w; }, s);
}

}  // namespace eqlab
