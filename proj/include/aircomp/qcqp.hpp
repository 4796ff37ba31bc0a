#pragma once

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace aircomp::conic {

/// g(x) = ½ xᵀPx + qᵀx + r <= 0. An empty P marks an affine constraint.
struct QuadraticConstraint {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  double r = 0.0;

  bool affine() const noexcept { return P.size() == 0; }
  double value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
};

enum class SolveStatus { optimal, infeasible, iteration_limit, numerical_error };

std::string_view to_string(SolveStatus s);

struct BarrierOptions {
  double gap_tolerance = 1e-9;     ///< relative to 1 + |objective|
  double barrier_growth = 20.0;
  int max_newton_steps = 400;      ///< per centering step
  int max_outer_steps = 60;
  double newton_tolerance = 1e-12; ///< half squared Newton decrement
};

struct BarrierResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  double duality_gap = 0.0;
  SolveStatus status = SolveStatus::numerical_error;
  int newton_steps = 0;
  Eigen::VectorXd multipliers;  ///< 1 / (-t gᵢ(x)) at the last centering point
};

/// Minimizes costᵀx subject to convex quadratic constraints with a
/// log-barrier path-following method. `start` does not need to be strictly
/// feasible; a phase-I problem is solved when it is not. The feasible set must
/// be bounded.
BarrierResult minimize_linear(const Eigen::VectorXd& cost,
                              std::span<const QuadraticConstraint> constraints,
                              const Eigen::VectorXd& start, const BarrierOptions& options = {});

}  // namespace aircomp::conic
