#pragma once

#include <Eigen/Dense>
#include <optional>

#include "eqlab/adaptive.hpp"
#include "eqlab/channel.hpp"

namespace eqlab {

enum class LengthDecision { Expand, Contract, Hold, Probe };

/// Detector convention used throughout: sign(y) with sign(0) = +1.
inline double detect(double y) { return y < 0.0 ? -1.0 : 1.0; }

/// Linear equaliser partitioned into K concatenated P-tap segments of which
/// the first L are active.  The partial output over k segments is the dot
/// product of the first kP weights with the first kP delay-line entries, so
/// the full output equals a conventional LP-tap FIR filter exactly.
///
/// Weights live in the adaptive-algorithm state; this class owns only the
/// delay line and the segment layout.  Taps are activated and retired at the
/// tail; the first D+1 positions always stay active.
class SegmentedLe {
 public:
  SegmentedLe(int taps_per_segment, int max_segments, int initial_segments, int delay);

  void push(double sample);

  double partial_output(const Eigen::Ref<const Eigen::VectorXd>& w, int segments) const;

  /// Cumulative partial outputs y_0 .. y_{L-1}.
  Eigen::VectorXd partials(const Eigen::Ref<const Eigen::VectorXd>& w) const;

  double output(const Eigen::Ref<const Eigen::VectorXd>& w) const {
    return partial_output(w, active_segments_);
  }

  /// Active regressor window (newest sample first).
  Eigen::Ref<const Eigen::VectorXd> active_window() const {
    return line_.head(active_segments_ * taps_per_segment_);
  }

  void expand();
  void contract();

  int taps_per_segment() const { return taps_per_segment_; }
  int max_segments() const { return max_segments_; }
  int active_segments() const { return active_segments_; }
  int active_taps() const { return active_segments_ * taps_per_segment_; }
  int min_segments() const { return min_segments_; }
  int delay() const { return delay_; }
  bool can_expand() const { return active_segments_ < max_segments_; }
  bool can_contract() const { return active_segments_ > min_segments_; }

 private:
  int taps_per_segment_;
  int max_segments_;
  int active_segments_;
  int delay_;
  int min_segments_;
  Eigen::VectorXd line_;
};

/// Accumulated-squared-error test over the last two active segments with an
/// exponential forgetting factor, a post-change freeze, and an optional MSE
/// floor that blocks expansions once the error is already low enough.
class LeLengthController {
 public:
  struct Config {
    double alpha_up = 0.8;
    double alpha_dw = 0.99;  // requires alpha_up <= alpha_dw
    double beta = 1.0;
    double mse_floor = 0.0;  // 0 disables the expansion limit
    int hold = 1000;         // samples frozen after every length change
  };

  explicit LeLengthController(const Config& cfg);

  /// Per-sample test.  e_prev is the error of the output one segment short,
  /// e_full the error of the full active output.
  LengthDecision update(double e_prev, double e_full, bool can_expand, bool can_contract);

  /// Resets both accumulators and starts the freeze; call after the
  /// equaliser length actually changed.
  void on_length_change();

  double ase_full() const { return ase_full_; }
  double ase_prev() const { return ase_prev_; }
  const Config& config() const { return cfg_; }

 private:
  Config cfg_;
  double ase_full_ = 0.0;
  double ase_prev_ = 0.0;
  double weight_sum_ = 0.0;  // normaliser turning the ASE floor test into an MSE one
  int hold_left_ = 0;
};

/// Decision feedback equaliser layout: an n_f-tap feedforward window over
/// received samples and a variable-length feedback window over past
/// references (true symbols while training, detector decisions otherwise).
/// The joint regressor is [r(n) .. r(n-n_f+1), ref(n-D-1) .. ref(n-D-n_b)].
class Dfe {
 public:
  Dfe(int n_f, int n_b_initial, int n_b_min, int n_b_max, int delay);

  void push_received(double sample);

  /// Push the reference of the symbol just detected (newest first window).
  void push_reference(double ref);

  /// Joint regressor over the currently active length n_f + n_b.
  Eigen::Ref<const Eigen::VectorXd> regressor() const {
    return joint_.head(n_f_ + n_b_active_);
  }

  double output(const Eigen::Ref<const Eigen::VectorXd>& w) const {
    return w.dot(regressor().head(w.size()));
  }

  void expand_fbf();
  void contract_fbf();
  void set_fbf_length(int n_b);

  int n_f() const { return n_f_; }
  int n_b() const { return n_b_active_; }
  int n_b_min() const { return n_b_min_; }
  int n_b_max() const { return n_b_max_; }
  int delay() const { return delay_; }
  int joint_taps() const { return n_f_ + n_b_active_; }
  bool can_expand() const { return n_b_active_ < n_b_max_; }
  bool can_contract() const { return n_b_active_ > n_b_min_; }

 private:
  void rebuild_joint();

  int n_f_;
  int n_b_active_;
  int n_b_min_;
  int n_b_max_;
  int delay_;
  Eigen::VectorXd joint_;     // [feedforward window, feedback window]
  Eigen::VectorXd fb_hist_;   // newest first, kept at n_b_max for re-expansion
};

/// Windowed tap-power test on the last two feedback taps (Alg. of the
/// feedback length update): expand when the last tap's accumulated power is
/// significant against chi times the windowed squared error, contract when
/// the last two both are not.  An optional probe period periodically forces
/// the feedback filter to full length so sparse responses are rediscovered.
class FbfLengthController {
 public:
  struct Config {
    double chi = 0.001;     // significance ratio, typically 0.001 .. 0.1
    int window = 150;       // averaging window W in samples
    int probe_period = 0;   // samples between full-length probes; 0 disables
  };

  explicit FbfLengthController(const Config& cfg);

  /// Per-symbol update with the current last two feedback weights.  Returns
  /// a non-Hold decision only at window boundaries (Probe asks the caller to
  /// expand to n_b_max).
  LengthDecision update(double w_last, double w_second_last, double error, bool can_expand,
                        bool can_contract);

  void reset_window();

  const Config& config() const { return cfg_; }

 private:
  Config cfg_;
  double tap_power_last_ = 0.0;
  double tap_power_prev_ = 0.0;
  double window_sse_ = 0.0;
  int in_window_ = 0;
  std::int64_t since_probe_ = 0;
};

/// Grows an RLS state by P-matrix block extension when the filter gains taps
/// (new diagonal entries 1/delta); contraction invalidates the recursion, so
/// it returns nullopt and the caller restarts with rls_init.
std::optional<RlsState> rls_resize_le(const RlsState& s, int new_taps);

/// Feedback-tap resize for a DFE: one tap at a time, expansion zero-extends
/// and contraction truncates the last row and column.  Valid because the
/// decision block of the correlation matrix is diagonal and a retired tap's
/// row and column have decayed to zero.
RlsState rls_resize_dfe_fbf(const RlsState& s, int delta_taps);

/// D = argmax |c_i| + n_f - 1: keeps the main channel peak inside the
/// feedforward span while minimising the input eigenvalue spread.
int optimal_dfe_delay(const ChannelProfile& channel, int n_f);

}  // namespace eqlab
