#include "eqlab/equalizer.hpp"

#include <cmath>
#include <stdexcept>

namespace eqlab {

SegmentedLe::SegmentedLe(int taps_per_segment, int max_segments, int initial_segments, int delay)
    : taps_per_segment_(taps_per_segment),
      max_segments_(max_segments),
      active_segments_(initial_segments),
      delay_(delay) {
  if (taps_per_segment < 1 || max_segments < 1) {
    throw std::invalid_argument("SegmentedLe: segment layout must be positive");
  }
  if (delay < 0) throw std::invalid_argument("SegmentedLe: negative delay");
  min_segments_ = (delay + 1 + taps_per_segment - 1) / taps_per_segment;
  if (min_segments_ > max_segments) {
    throw std::invalid_argument("SegmentedLe: delay requires more taps than the filter can hold");
  }
  if (initial_segments < min_segments_ || initial_segments > max_segments) {
    throw std::invalid_argument("SegmentedLe: initial segments outside [min, max]");
  }
  line_ = Eigen::VectorXd::Zero(max_segments * taps_per_segment);
}

void SegmentedLe::push(double sample) {
  for (Eigen::Index i = line_.size() - 1; i > 0; --i) line_[i] = line_[i - 1];
  line_[0] = sample;
}

double SegmentedLe::partial_output(const Eigen::Ref<const Eigen::VectorXd>& w,
                                   int segments) const {
  if (segments < 0 || segments > active_segments_) {
    throw std::invalid_argument("SegmentedLe: partial output beyond the active length");
  }
  const int taps = segments * taps_per_segment_;
  if (w.size() < taps) throw std::invalid_argument("SegmentedLe: weight vector too short");
  return w.head(taps).dot(line_.head(taps));
}

Eigen::VectorXd SegmentedLe::partials(const Eigen::Ref<const Eigen::VectorXd>& w) const {
  Eigen::VectorXd out(active_segments_);
  double acc = 0.0;
  for (int s = 0; s < active_segments_; ++s) {
    const int base = s * taps_per_segment_;
    acc += w.segment(base, taps_per_segment_).dot(line_.segment(base, taps_per_segment_));
    out[s] = acc;
  }
  return out;
}

void SegmentedLe::expand() {
  if (!can_expand()) throw std::logic_error("SegmentedLe: already at the maximum length");
  ++active_segments_;
}

void SegmentedLe::contract() {
  if (!can_contract()) throw std::logic_error("SegmentedLe: already at the minimum length");
  --active_segments_;
}

LeLengthController::LeLengthController(const Config& cfg) : cfg_(cfg) {
  if (!(cfg.alpha_up > 0.0) || cfg.alpha_up > 1.0 || !(cfg.alpha_dw > 0.0) || cfg.alpha_dw > 1.0) {
    throw std::invalid_argument("LeLengthController: alpha values must be in (0, 1]");
  }
  if (cfg.alpha_up > cfg.alpha_dw) {
    throw std::invalid_argument("LeLengthController: requires alpha_up <= alpha_dw");
  }
  if (cfg.beta <= 0.0 || cfg.beta > 1.0) {
    throw std::invalid_argument("LeLengthController: beta must be in (0, 1]");
  }
}

LengthDecision LeLengthController::update(double e_prev, double e_full, bool can_expand,
                                          bool can_contract) {
  ase_full_ = cfg_.beta * ase_full_ + e_full * e_full;
  ase_prev_ = cfg_.beta * ase_prev_ + e_prev * e_prev;
  weight_sum_ = cfg_.beta * weight_sum_ + 1.0;
  if (hold_left_ > 0) {
    --hold_left_;
    return LengthDecision::Hold;
  }
  if (ase_full_ <= cfg_.alpha_up * ase_prev_ && can_expand &&
      (cfg_.mse_floor == 0.0 || ase_full_ > weight_sum_ * cfg_.mse_floor)) {
    return LengthDecision::Expand;
  }
  if (ase_full_ >= cfg_.alpha_dw * ase_prev_ && can_contract) {
    return LengthDecision::Contract;
  }
  return LengthDecision::Hold;
}

void LeLengthController::on_length_change() {
  ase_full_ = 0.0;
  ase_prev_ = 0.0;
  weight_sum_ = 0.0;
  hold_left_ = cfg_.hold;
}

Dfe::Dfe(int n_f, int n_b_initial, int n_b_min, int n_b_max, int delay)
    : n_f_(n_f), n_b_active_(n_b_initial), n_b_min_(n_b_min), n_b_max_(n_b_max), delay_(delay) {
  if (n_f < 1) throw std::invalid_argument("Dfe: need at least one feedforward tap");
  if (n_b_min < 1 || n_b_max < n_b_min) throw std::invalid_argument("Dfe: bad feedback bounds");
  if (n_b_initial < n_b_min || n_b_initial > n_b_max) {
    throw std::invalid_argument("Dfe: initial feedback length outside [min, max]");
  }
  if (delay < 0) throw std::invalid_argument("Dfe: negative delay");
  joint_ = Eigen::VectorXd::Zero(n_f_ + n_b_max_);
  fb_hist_ = Eigen::VectorXd::Zero(n_b_max_);
}

void Dfe::push_received(double sample) {
  for (int i = n_f_ - 1; i > 0; --i) joint_[i] = joint_[i - 1];
  joint_[0] = sample;
}

void Dfe::push_reference(double ref) {
  for (Eigen::Index i = fb_hist_.size() - 1; i > 0; --i) fb_hist_[i] = fb_hist_[i - 1];
  fb_hist_[0] = ref;
  rebuild_joint();
}

void Dfe::rebuild_joint() {
  joint_.segment(n_f_, n_b_active_) = fb_hist_.head(n_b_active_);
}

void Dfe::expand_fbf() {
  if (!can_expand()) throw std::logic_error("Dfe: feedback filter already at maximum length");
  ++n_b_active_;
  rebuild_joint();
}

void Dfe::contract_fbf() {
  if (!can_contract()) throw std::logic_error("Dfe: feedback filter already at minimum length");
  --n_b_active_;
}

void Dfe::set_fbf_length(int n_b) {
  if (n_b < n_b_min_ || n_b > n_b_max_) throw std::invalid_argument("Dfe: length outside [min, max]");
  n_b_active_ = n_b;
  rebuild_joint();
}

FbfLengthController::FbfLengthController(const Config& cfg) : cfg_(cfg) {
  if (cfg.window < 1) throw std::invalid_argument("FbfLengthController: window must be positive");
  if (!(cfg.chi > 0.0)) throw std::invalid_argument("FbfLengthController: chi must be positive");
}

LengthDecision FbfLengthController::update(double w_last, double w_second_last, double error,
                                           bool can_expand, bool can_contract) {
  tap_power_last_ += w_last * w_last;
  tap_power_prev_ += w_second_last * w_second_last;
  window_sse_ += error * error;
  ++in_window_;
  ++since_probe_;
  if (in_window_ < cfg_.window) return LengthDecision::Hold;

  const double threshold = cfg_.chi * window_sse_;  // chi * W * MSE without a division
  LengthDecision decision = LengthDecision::Hold;
  if (cfg_.probe_period > 0 && since_probe_ >= cfg_.probe_period && can_expand) {
    decision = LengthDecision::Probe;
    since_probe_ = 0;
  } else if (tap_power_last_ > threshold && can_expand) {
    decision = LengthDecision::Expand;
  } else if (tap_power_last_ < threshold && tap_power_prev_ < threshold && can_contract) {
    decision = LengthDecision::Contract;
  }
  reset_window();
  return decision;
}

void FbfLengthController::reset_window() {
  tap_power_last_ = 0.0;
  tap_power_prev_ = 0.0;
  window_sse_ = 0.0;
  in_window_ = 0;
}

std::optional<RlsState> rls_resize_le(const RlsState& s, int new_taps) {
  const int old_taps = static_cast<int>(s.w.size());
  if (new_taps == old_taps) return s;
  if (new_taps < old_taps) return std::nullopt;  // truncated inverse is invalid; restart
  RlsState out;
  out.lambda = s.lambda;
  out.delta = s.delta;
  out.w = Eigen::VectorXd::Zero(new_taps);
  out.w.head(old_taps) = s.w;
  out.P = Eigen::MatrixXd::Zero(new_taps, new_taps);
  out.P.topLeftCorner(old_taps, old_taps) = s.P;
  for (int i = old_taps; i < new_taps; ++i) out.P(i, i) = 1.0 / s.delta;
  return out;
}

RlsState rls_resize_dfe_fbf(const RlsState& s, int delta_taps) {
  if (delta_taps == 0) return s;
  if (delta_taps != 1 && delta_taps != -1) {
    throw std::invalid_argument("rls_resize_dfe_fbf: resize one tap at a time");
  }
  const int old_taps = static_cast<int>(s.w.size());
  const int new_taps = old_taps + delta_taps;
  if (new_taps < 1) throw std::invalid_argument("rls_resize_dfe_fbf: cannot shrink below one tap");
  RlsState out;
  out.lambda = s.lambda;
  out.delta = s.delta;
  if (delta_taps > 0) {
    out.w = Eigen::VectorXd::Zero(new_taps);
    out.w.head(old_taps) = s.w;
    out.P = Eigen::MatrixXd::Zero(new_taps, new_taps);
    out.P.topLeftCorner(old_taps, old_taps) = s.P;
    out.P(new_taps - 1, new_taps - 1) = 1.0 / s.delta;
  } else {
    out.w = s.w.head(new_taps);
    out.P = s.P.topLeftCorner(new_taps, new_taps);
  }
  return out;
}

int optimal_dfe_delay(const ChannelProfile& channel, int n_f) {
  if (n_f < 1) throw std::invalid_argument("optimal_dfe_delay: need at least one feedforward tap");
  Eigen::Index peak = 0;
  channel.taps.cwiseAbs().maxCoeff(&peak);
  return static_cast<int>(peak) + n_f - 1;
}

}  // namespace eqlab
