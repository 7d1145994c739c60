#include "ctrleq/sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ctrleq/error.hpp"

namespace ctrleq {

SystemView SystemView::original(const SparseMatrix& a, const InputStructure& input) {
  if (!a.square()) throw ValidationError("system matrix must be square");
  SystemView v;
  v.dim_ = a.n_rows();
  v.sparse_ = &a;
  v.control_nodes_.assign(input.driver_nodes.begin(), input.driver_nodes.end());
  v.lo_ = input.lo;
  v.hi_ = input.hi;
  return v;
}

SystemView SystemView::reduced(const ReducedSystem& rs) {
  SystemView v;
  v.dim_ = rs.n();
  if (!rs.a_hat_dense.empty()) {
    v.dense_ = &rs.a_hat_dense;
  } else {
    v.sparse_ = &rs.a_hat;
  }
  v.control_nodes_.resize(rs.k());
  for (std::size_t l = 0; l < rs.k(); ++l) v.control_nodes_[l] = l;  // B̂ columns are unit vectors
  v.lo_ = rs.lo_hat;
  v.hi_ = rs.hi_hat;
  return v;
}

void SystemView::apply(std::span<const double> x, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  if (dense_) {
    const double* row = dense_->data();
    for (std::size_t i = 0; i < dim_; ++i, row += dim_) {
      double acc = 0.0;
      for (std::size_t j = 0; j < dim_; ++j) acc += row[j] * x[j];
      out[i] = acc;
    }
  } else {
    for (const Triplet& e : sparse_->entries()) out[e.row] += e.weight * x[e.col];
  }
}

void SystemView::apply_transpose(std::span<const double> x, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  if (dense_) {
    const double* row = dense_->data();
    for (std::size_t i = 0; i < dim_; ++i, row += dim_) {
      const double xi = x[i];
      for (std::size_t j = 0; j < dim_; ++j) out[j] += row[j] * xi;
    }
  } else {
    for (const Triplet& e : sparse_->entries()) out[e.col] += e.weight * x[e.row];
  }
}

void SystemView::add_control(std::span<const double> u, std::span<double> out) const {
  for (std::size_t l = 0; l < control_nodes_.size(); ++l) out[control_nodes_[l]] += u[l];
}

namespace {

std::size_t grid_steps(double horizon, double dt) {
  if (!(dt > 0.0) || !(horizon > 0.0)) throw ValidationError("horizon and dt must be positive");
  auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  if (steps == 0 || std::abs(steps * dt - horizon) > 1e-9 * std::max(1.0, horizon)) {
    throw ValidationError("horizon is not a multiple of dt");
  }
  return steps;
}

void check_grid(const ControlSignal& u, std::size_t steps, double dt) {
  if (std::abs(u.dt() - dt) > 1e-12 * std::max(1.0, dt) || u.steps() != steps) {
    throw ValidationError("control grid does not match the integration grid");
  }
}

/// One RK4 step of x' = A x + b_const, where b_const = B u is frozen over
/// the step.
struct Rk4Scratch {
  std::vector<double> k1, k2, k3, k4, tmp, forcing;
  explicit Rk4Scratch(std::size_t dim)
      : k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim), forcing(dim) {}
};

void rk4_step(const SystemView& sys, std::span<double> x, std::span<const double> forcing,
              double h, Rk4Scratch& s, bool transpose) {
  const std::size_t dim = x.size();
  auto deriv = [&](std::span<const double> in, std::span<double> out) {
    if (transpose) {
      sys.apply_transpose(in, out);
    } else {
      sys.apply(in, out);
    }
    for (std::size_t i = 0; i < dim; ++i) out[i] += forcing[i];
  };
  deriv(x, s.k1);
  for (std::size_t i = 0; i < dim; ++i) s.tmp[i] = x[i] + 0.5 * h * s.k1[i];
  deriv(s.tmp, s.k2);
  for (std::size_t i = 0; i < dim; ++i) s.tmp[i] = x[i] + 0.5 * h * s.k2[i];
  deriv(s.tmp, s.k3);
  for (std::size_t i = 0; i < dim; ++i) s.tmp[i] = x[i] + h * s.k3[i];
  deriv(s.tmp, s.k4);
  for (std::size_t i = 0; i < dim; ++i) {
    x[i] += h / 6.0 * (s.k1[i] + 2.0 * s.k2[i] + 2.0 * s.k3[i] + s.k4[i]);
  }
}

}  // namespace

Trajectory integrate(const SystemView& sys, const ControlSignal& u, std::span<const double> x0,
                     double horizon, double dt) {
  const std::size_t steps = grid_steps(horizon, dt);
  check_grid(u, steps, dt);
  if (x0.size() != sys.dim()) throw ValidationError("x0 dimension mismatch");
  if (u.channels() != sys.channels()) throw ValidationError("control channel mismatch");

  Trajectory traj;
  traj.dim = sys.dim();
  traj.dt = dt;
  traj.states.resize((steps + 1) * sys.dim());
  std::copy(x0.begin(), x0.end(), traj.states.begin());

  Rk4Scratch scratch(sys.dim());
  std::vector<double> x(x0.begin(), x0.end());
  for (std::size_t s = 0; s < steps; ++s) {
    std::fill(scratch.forcing.begin(), scratch.forcing.end(), 0.0);
    sys.add_control(u.step_values(s), scratch.forcing);
    rk4_step(sys, x, scratch.forcing, dt, scratch, false);
    for (double v : x) {
      if (!std::isfinite(v)) {
        throw NumericError("integration diverged at step " + std::to_string(s + 1) + " (t = " +
                           std::to_string((s + 1) * dt) + ")");
      }
    }
    std::copy(x.begin(), x.end(), traj.states.begin() + (s + 1) * sys.dim());
  }
  return traj;
}

double verify_trajectory_equivalence(const SparseMatrix& a, const InputStructure& input,
                                     const Partition& partition, const ReducedSystem& rs,
                                     const ControlSignal& u, std::span<const double> x0,
                                     double horizon, double dt) {
  if (!partition.same_blocks(rs.blocks)) {
    throw ValidationError("partition does not match the reduced system's blocks");
  }
  Trajectory original = integrate(SystemView::original(a, input), u, x0, horizon, dt);
  ControlSignal u_hat = project_control(u, rs);
  std::vector<double> x0_hat = project_state(x0, rs.blocks);
  Trajectory reduced = integrate(SystemView::reduced(rs), u_hat, x0_hat, horizon, dt);

  double max_dev = 0.0;
  std::vector<double> lumped(rs.n());
  for (std::size_t s = 0; s <= original.step_count(); ++s) {
    std::fill(lumped.begin(), lumped.end(), 0.0);
    auto x = original.at(s);
    for (NodeId v = 0; v < x.size(); ++v) lumped[rs.blocks.block_of(v)] += x[v];
    auto x_hat = reduced.at(s);
    for (std::size_t b = 0; b < lumped.size(); ++b) {
      max_dev = std::max(max_dev, std::abs(lumped[b] - x_hat[b]));
    }
  }
  return max_dev;
}

namespace {

/// Shared quadrature core: states and controls arrive already lumped; the
/// reduced system passes its own coordinates through unchanged.
double evaluate_lumped(const CostSpec& spec, double dt, std::size_t steps,
                       const std::vector<std::vector<double>>& lumped_states,
                       const std::vector<std::vector<double>>& lumped_controls) {
  const std::size_t n = spec.final_coeff.size();
  if (lumped_states.front().size() != n) {
    throw ValidationError("cost has " + std::to_string(n) + " block coefficients, state has " +
                          std::to_string(lumped_states.front().size()));
  }
  auto running = [&](std::size_t s) {
    double r = 0.0;
    if (spec.tracking) {
      const auto& tr = *spec.tracking;
      auto ref = tr.reference.at(s);
      for (std::size_t b = 0; b < n; ++b) {
        double d = lumped_states[s][b] - ref[b];
        r += tr.weight[b] * d * d;
      }
    }
    if (spec.control_weight) {
      // u is right-continuous; the final grid point reuses the last sample
      const auto& q = *spec.control_weight;
      const auto& uc = lumped_controls[std::min(s, steps - 1)];
      if (q.size() != uc.size()) throw ValidationError("control weight size mismatch");
      for (std::size_t l = 0; l < q.size(); ++l) r += q[l] * uc[l] * uc[l];
    }
    return r;
  };

  double integral = 0.0;
  if (spec.tracking || spec.control_weight) {
    for (std::size_t s = 0; s <= steps; ++s) {
      double w = (s == 0 || s == steps) ? 0.5 : 1.0;
      integral += w * running(s);
    }
    integral *= dt;
  }

  double final_term = 0.0;
  const auto& xT = lumped_states[steps];
  for (std::size_t b = 0; b < n; ++b) final_term += spec.final_coeff[b] * xT[b];
  return final_term + integral;
}

void check_tracking_grid(const CostSpec& spec, std::size_t steps, double dt) {
  if (!spec.tracking) return;
  const Trajectory& ref = spec.tracking->reference;
  if (ref.step_count() != steps || std::abs(ref.dt - dt) > 1e-12 * std::max(1.0, dt)) {
    throw ValidationError("tracking reference grid does not match the trajectory grid");
  }
  if (spec.tracking->weight.size() != spec.final_coeff.size()) {
    throw ValidationError("tracking weight size mismatch");
  }
}

}  // namespace

double evaluate_cost(const Trajectory& traj, const ControlSignal& u, const CostSpec& spec,
                     const Partition& partition,
                     const std::vector<std::vector<std::size_t>>& control_groups) {
  const std::size_t steps = traj.step_count();
  check_tracking_grid(spec, steps, traj.dt);
  if (traj.dim != partition.node_count()) throw ValidationError("trajectory/partition mismatch");

  std::vector<std::vector<double>> states(steps + 1);
  for (std::size_t s = 0; s <= steps; ++s) {
    states[s].assign(partition.block_count(), 0.0);
    auto x = traj.at(s);
    for (NodeId v = 0; v < x.size(); ++v) states[s][partition.block_of(v)] += x[v];
  }
  std::vector<std::vector<double>> controls(std::max<std::size_t>(steps, 1));
  for (std::size_t s = 0; s < steps; ++s) {
    controls[s].assign(control_groups.size(), 0.0);
    for (std::size_t l = 0; l < control_groups.size(); ++l) {
      for (std::size_t channel : control_groups[l]) controls[s][l] += u.value(s, channel);
    }
  }
  return evaluate_lumped(spec, traj.dt, steps, states, controls);
}

double evaluate_cost_reduced(const Trajectory& traj_hat, const ControlSignal& u_hat,
                             const CostSpec& spec) {
  const std::size_t steps = traj_hat.step_count();
  check_tracking_grid(spec, steps, traj_hat.dt);

  std::vector<std::vector<double>> states(steps + 1);
  for (std::size_t s = 0; s <= steps; ++s) {
    auto x = traj_hat.at(s);
    states[s].assign(x.begin(), x.end());
  }
  std::vector<std::vector<double>> controls(std::max<std::size_t>(steps, 1));
  for (std::size_t s = 0; s < steps; ++s) {
    auto v = u_hat.step_values(s);
    controls[s].assign(v.begin(), v.end());
  }
  return evaluate_lumped(spec, traj_hat.dt, steps, states, controls);
}

OptimalValueResult optimal_bangbang_value(const SystemView& sys,
                                          std::span<const double> final_coeff,
                                          std::span<const double> x0, double horizon, double dt,
                                          Direction direction) {
  const std::size_t steps = grid_steps(horizon, dt);
  if (final_coeff.size() != sys.dim()) throw ValidationError("final cost dimension mismatch");
  if (x0.size() != sys.dim()) throw ValidationError("x0 dimension mismatch");

  // Adjoint backward in time: with μ(τ) = λ(T - τ), μ' = Aᵀ μ, μ(0) = c.
  Trajectory adjoint;
  adjoint.dim = sys.dim();
  adjoint.dt = dt;
  adjoint.states.resize((steps + 1) * sys.dim());
  std::vector<double> mu(final_coeff.begin(), final_coeff.end());
  std::copy(mu.begin(), mu.end(), adjoint.states.begin() + steps * sys.dim());
  Rk4Scratch scratch(sys.dim());
  std::fill(scratch.forcing.begin(), scratch.forcing.end(), 0.0);
  for (std::size_t s = 0; s < steps; ++s) {
    rk4_step(sys, mu, scratch.forcing, dt, scratch, true);
    for (double v : mu) {
      if (!std::isfinite(v)) {
        throw NumericError("adjoint integration diverged at step " + std::to_string(s + 1));
      }
    }
    std::copy(mu.begin(), mu.end(), adjoint.states.begin() + (steps - s - 1) * sys.dim());
  }

  // Each channel sits at a bound given by the sign of the switching function
  // φ_l = (Bᵀλ)_l = λ at the driven coordinate, sampled at the step midpoint.
  const std::size_t channels = sys.channels();
  std::vector<double> values(steps * channels);
  for (std::size_t s = 0; s < steps; ++s) {
    for (std::size_t l = 0; l < channels; ++l) {
      const std::size_t node = sys.control_node(l);
      const double phi = 0.5 * (adjoint.at(s)[node] + adjoint.at(s + 1)[node]);
      const bool take_hi = direction == Direction::Sup ? phi > 0.0 : phi < 0.0;
      values[s * channels + l] = take_hi ? sys.hi()[l] : sys.lo()[l];
    }
  }
  ControlSignal u = ControlSignal::from_samples(
      channels, dt, std::move(values), std::vector<double>(sys.lo().begin(), sys.lo().end()),
      std::vector<double>(sys.hi().begin(), sys.hi().end()));

  Trajectory traj = integrate(sys, u, x0, horizon, dt);
  double value = 0.0;
  auto xT = traj.final_state();
  for (std::size_t i = 0; i < sys.dim(); ++i) value += final_coeff[i] * xT[i];

  OptimalValueResult result;
  result.value = value;
  result.direction = direction;
  result.control = std::move(u);
  result.adjoint = std::move(adjoint);
  return result;
}

std::vector<double> lift_final_coeff(std::span<const double> block_coeff,
                                     const Partition& partition) {
  if (block_coeff.size() != partition.block_count()) {
    throw ValidationError("coefficient count does not match block count");
  }
  std::vector<double> c(partition.node_count());
  for (NodeId v = 0; v < c.size(); ++v) c[v] = block_coeff[partition.block_of(v)];
  return c;
}

std::vector<double> representative_state(std::span<const double> x_hat,
                                         const Partition& partition) {
  if (x_hat.size() != partition.block_count()) {
    throw ValidationError("macro state does not match block count");
  }
  std::vector<double> x(partition.node_count());
  for (NodeId v = 0; v < x.size(); ++v) {
    std::uint32_t b = partition.block_of(v);
    x[v] = x_hat[b] / static_cast<double>(partition.block(b).size());
  }
  return x;
}

}  // namespace ctrleq
