#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ctrleq/control.hpp"
#include "ctrleq/input_structure.hpp"
#include "ctrleq/partition.hpp"
#include "ctrleq/reduced_system.hpp"
#include "ctrleq/sparse_matrix.hpp"

namespace ctrleq {

/// States on a uniform grid, flat (steps+1) x dim row-major.
struct Trajectory {
  std::size_t dim = 0;
  double dt = 0.0;
  std::vector<double> states;

  std::size_t step_count() const { return dim ? states.size() / dim - 1 : 0; }
  double horizon() const { return dt * static_cast<double>(step_count()); }
  std::span<const double> at(std::size_t step) const { return {states.data() + step * dim, dim}; }
  std::span<const double> final_state() const { return at(step_count()); }
};

/// Uniform view over the original system (sparse A, unit input columns at
/// the driver nodes) and the reduced system (Â, unit columns at the driver
/// blocks), so integration and optimization share one code path.
class SystemView {
 public:
  static SystemView original(const SparseMatrix& a, const InputStructure& input);
  static SystemView reduced(const ReducedSystem& rs);

  std::size_t dim() const { return dim_; }
  std::size_t channels() const { return control_nodes_.size(); }
  std::size_t control_node(std::size_t channel) const { return control_nodes_[channel]; }
  std::span<const double> lo() const { return lo_; }
  std::span<const double> hi() const { return hi_; }

  void apply(std::span<const double> x, std::span<double> out) const;            // out = A x
  void apply_transpose(std::span<const double> x, std::span<double> out) const;  // out = Aᵀ x
  void add_control(std::span<const double> u, std::span<double> out) const;      // out += B u

 private:
  std::size_t dim_ = 0;
  const SparseMatrix* sparse_ = nullptr;
  const std::vector<double>* dense_ = nullptr;  // row-major dim x dim
  std::vector<std::size_t> control_nodes_;
  std::vector<double> lo_, hi_;
};

/// Classical fixed-step RK4 for x' = A x + B u(t) with piecewise-constant u.
/// Throws NumericError with the first bad step when the state leaves the
/// finite range.
Trajectory integrate(const SystemView& sys, const ControlSignal& u, std::span<const double> x0,
                     double horizon, double dt);

/// Integrates the original system under u and the reduced system under the
/// projected control, and returns max_t ||L x(t) - x̂(t)||_inf over the grid.
double verify_trajectory_equivalence(const SparseMatrix& a, const InputStructure& input,
                                     const Partition& partition, const ReducedSystem& rs,
                                     const ControlSignal& u, std::span<const double> x0,
                                     double horizon, double dt);

/// Block-constant cost family: linear final cost on block sums, optional
/// quadratic tracking of block sums against a reference, optional quadratic
/// weight on the lumped controls. Constant on the partition by construction.
struct CostSpec {
  std::vector<double> final_coeff;  // one coefficient per block

  struct Tracking {
    std::vector<double> weight;  // one weight per block
    Trajectory reference;        // block-sum reference on the same grid
  };
  std::optional<Tracking> tracking;              // S term
  std::optional<std::vector<double>> control_weight;  // Q term, one weight per driver block
};

/// J = F(x(T)) + trapezoidal quadrature of S + Q along the trajectory.
/// The original-system overload folds states and controls through block
/// sums; the reduced overload feeds them through unchanged. Both use the
/// same accumulation code.
double evaluate_cost(const Trajectory& traj, const ControlSignal& u, const CostSpec& spec,
                     const Partition& partition,
                     const std::vector<std::vector<std::size_t>>& control_groups);
double evaluate_cost_reduced(const Trajectory& traj_hat, const ControlSignal& u_hat,
                             const CostSpec& spec);

enum class Direction { Sup, Inf };

struct OptimalValueResult {
  double value = 0.0;
  Direction direction = Direction::Sup;
  ControlSignal control;   // bang-bang optimizer, resolved to grid precision
  Trajectory adjoint;      // λ(t), λ(T) = c, λ' = -Aᵀλ
};

/// Exact optimal value of J = cᵀx(T) over bounded controls (R = 0): the
/// adjoint is integrated backward, each channel takes its upper bound where
/// the switching function (Bᵀλ)_l is positive (sup; reversed for inf), and
/// the value comes from a forward integration under that control.
OptimalValueResult optimal_bangbang_value(const SystemView& sys,
                                          std::span<const double> final_coeff,
                                          std::span<const double> x0, double horizon, double dt,
                                          Direction direction);

/// c = Lᵀ ĉ: expands per-block coefficients to a node-level vector that is
/// constant on blocks.
std::vector<double> lift_final_coeff(std::span<const double> block_coeff,
                                     const Partition& partition);

/// L̄ x̂: one representative original state with the required block sums.
/// Any state with the same block sums is equally valid; this is only a
/// plotting aid, not an inverse of the projection.
std::vector<double> representative_state(std::span<const double> x_hat,
                                         const Partition& partition);

}  // namespace ctrleq
