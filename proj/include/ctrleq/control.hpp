#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ctrleq/reduced_system.hpp"

namespace ctrleq {

/// Piecewise-constant control on a uniform grid: value(step, channel) holds
/// on [step*dt, (step+1)*dt). Every sample is kept within the per-channel
/// bounds.
class ControlSignal {
 public:
  ControlSignal() = default;

  /// values laid out step-major: values[step * channels + channel].
  static ControlSignal from_samples(std::size_t channels, double dt, std::vector<double> values,
                                    std::vector<double> lo, std::vector<double> hi);

  static ControlSignal constant(std::span<const double> value, double dt, double horizon,
                                std::vector<double> lo, std::vector<double> hi);

  std::size_t channels() const { return channels_; }
  std::size_t steps() const { return channels_ ? values_.size() / channels_ : 0; }
  double dt() const { return dt_; }
  double horizon() const { return dt_ * static_cast<double>(steps()); }

  double value(std::size_t step, std::size_t channel) const {
    return values_[step * channels_ + channel];
  }
  std::span<const double> step_values(std::size_t step) const {
    return {values_.data() + step * channels_, channels_};
  }
  std::span<const double> lo() const { return lo_; }
  std::span<const double> hi() const { return hi_; }

 private:
  std::size_t channels_ = 0;
  double dt_ = 0.0;
  std::vector<double> values_;
  std::vector<double> lo_, hi_;

  friend ControlSignal project_control(const ControlSignal&, const ReducedSystem&);
  friend ControlSignal lift_control(const ControlSignal&, const ReducedSystem&);
};

/// û_l(t) = sum of u over the channels steering driver block l. The result
/// lies in [lo_hat, hi_hat] by construction (clamped against rounding).
ControlSignal project_control(const ControlSignal& u, const ReducedSystem& rs);

/// The canonical affine lifting: each original channel l' in group l takes
///   u_l'(t) = lo_l' + (hi_l' - lo_l') / (hi_hat_l - lo_hat_l) * (û_l(t) - lo_hat_l),
/// or the frozen value lo_l' = hi_l' when the macro interval is degenerate.
/// Satisfies project_control(lift_control(û)) = û and respects the original
/// bounds. Throws ValidationError when û leaves its bounds.
ControlSignal lift_control(const ControlSignal& u_hat, const ReducedSystem& rs);

/// Seeded piecewise-constant signal, uniform within bounds, re-sampled every
/// hold_steps grid steps. Deterministic across platforms.
ControlSignal sample_piecewise_constant(std::span<const double> lo, std::span<const double> hi,
                                        double dt, double horizon, std::size_t hold_steps,
                                        std::uint64_t seed);

}  // namespace ctrleq
