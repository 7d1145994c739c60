#include "ctrleq/control.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "ctrleq/error.hpp"

namespace ctrleq {

namespace {

void check_bounds_arrays(std::size_t channels, std::span<const double> lo,
                         std::span<const double> hi) {
  if (lo.size() != channels || hi.size() != channels) {
    throw ValidationError("bounds must have one entry per channel");
  }
  for (std::size_t c = 0; c < channels; ++c) {
    if (!(lo[c] <= hi[c])) {
      throw ValidationError("channel " + std::to_string(c) + " has empty bound interval");
    }
  }
}

std::size_t step_count(double horizon, double dt) {
  if (!(dt > 0.0) || !(horizon > 0.0)) throw ValidationError("horizon and dt must be positive");
  auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  if (steps == 0 || std::abs(steps * dt - horizon) > 1e-9 * std::max(1.0, horizon)) {
    throw ValidationError("horizon is not a multiple of dt");
  }
  return steps;
}

}  // namespace

ControlSignal ControlSignal::from_samples(std::size_t channels, double dt,
                                          std::vector<double> values, std::vector<double> lo,
                                          std::vector<double> hi) {
  if (channels == 0) throw ValidationError("control needs at least one channel");
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  if (values.empty()) throw ValidationError("control needs at least one sample");
  if (values.size() % channels != 0) throw ValidationError("sample count not a multiple of channels");
  check_bounds_arrays(channels, lo, hi);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::size_t c = i % channels;
    if (!(values[i] >= lo[c] && values[i] <= hi[c])) {
      throw ValidationError("sample " + std::to_string(i / channels) + " of channel " +
                            std::to_string(c) + " violates its bounds");
    }
  }
  ControlSignal u;
  u.channels_ = channels;
  u.dt_ = dt;
  u.values_ = std::move(values);
  u.lo_ = std::move(lo);
  u.hi_ = std::move(hi);
  return u;
}

ControlSignal ControlSignal::constant(std::span<const double> value, double dt, double horizon,
                                      std::vector<double> lo, std::vector<double> hi) {
  std::size_t steps = step_count(horizon, dt);
  std::vector<double> values(steps * value.size());
  for (std::size_t s = 0; s < steps; ++s) {
    std::copy(value.begin(), value.end(), values.begin() + s * value.size());
  }
  return from_samples(value.size(), dt, std::move(values), std::move(lo), std::move(hi));
}

ControlSignal project_control(const ControlSignal& u, const ReducedSystem& rs) {
  if (u.channels() != rs.lo_orig.size()) {
    throw ValidationError("control has " + std::to_string(u.channels()) +
                          " channels, system expects " + std::to_string(rs.lo_orig.size()));
  }
  const std::size_t k = rs.k();
  ControlSignal out;
  out.channels_ = k;
  out.dt_ = u.dt();
  out.lo_ = rs.lo_hat;
  out.hi_ = rs.hi_hat;
  out.values_.resize(u.steps() * k);
  for (std::size_t s = 0; s < u.steps(); ++s) {
    for (std::size_t l = 0; l < k; ++l) {
      double sum = 0.0;
      for (std::size_t channel : rs.control_groups[l]) sum += u.value(s, channel);
      // group sums of in-bound samples stay in bounds; clamp the rounding dust
      out.values_[s * k + l] = std::clamp(sum, rs.lo_hat[l], rs.hi_hat[l]);
    }
  }
  return out;
}

ControlSignal lift_control(const ControlSignal& u_hat, const ReducedSystem& rs) {
  const std::size_t k = rs.k();
  if (u_hat.channels() != k) {
    throw ValidationError("macro control has " + std::to_string(u_hat.channels()) +
                          " channels, reduced system expects " + std::to_string(k));
  }
  const std::size_t channels = rs.lo_orig.size();
  for (std::size_t s = 0; s < u_hat.steps(); ++s) {
    for (std::size_t l = 0; l < k; ++l) {
      double v = u_hat.value(s, l);
      if (!(v >= rs.lo_hat[l] && v <= rs.hi_hat[l])) {
        throw ValidationError("macro control leaves [lo_hat, hi_hat] at step " +
                              std::to_string(s) + ", channel " + std::to_string(l));
      }
    }
  }

  ControlSignal out;
  out.channels_ = channels;
  out.dt_ = u_hat.dt();
  out.lo_ = rs.lo_orig;
  out.hi_ = rs.hi_orig;
  out.values_.resize(u_hat.steps() * channels);
  for (std::size_t s = 0; s < u_hat.steps(); ++s) {
    for (std::size_t l = 0; l < k; ++l) {
      const double width = rs.hi_hat[l] - rs.lo_hat[l];
      const double offset = u_hat.value(s, l) - rs.lo_hat[l];
      for (std::size_t channel : rs.control_groups[l]) {
        double value = rs.lo_orig[channel];
        if (width > 0.0) {
          value += (rs.hi_orig[channel] - rs.lo_orig[channel]) / width * offset;
        }
        out.values_[s * channels + channel] =
            std::clamp(value, rs.lo_orig[channel], rs.hi_orig[channel]);
      }
    }
  }
  return out;
}

ControlSignal sample_piecewise_constant(std::span<const double> lo, std::span<const double> hi,
                                        double dt, double horizon, std::size_t hold_steps,
                                        std::uint64_t seed) {
  check_bounds_arrays(lo.size(), lo, hi);
  const std::size_t steps = step_count(horizon, dt);
  const std::size_t channels = lo.size();
  if (hold_steps == 0) hold_steps = 1;

  std::mt19937_64 rng(seed);
  auto uniform01 = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  std::vector<double> values(steps * channels);
  std::vector<double> current(channels);
  for (std::size_t s = 0; s < steps; ++s) {
    if (s % hold_steps == 0) {
      for (std::size_t c = 0; c < channels; ++c) {
        current[c] = lo[c] + (hi[c] - lo[c]) * uniform01();
      }
    }
    std::copy(current.begin(), current.end(), values.begin() + s * channels);
  }
  return ControlSignal::from_samples(channels, dt, std::move(values),
                                     std::vector<double>(lo.begin(), lo.end()),
                                     std::vector<double>(hi.begin(), hi.end()));
}

}  // namespace ctrleq
