#include "aircomp/qcqp.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "aircomp/errors.hpp"

namespace aircomp::conic {

double QuadraticConstraint::value(const Eigen::VectorXd& x) const {
  double v = q.dot(x) + r;
  if (!affine()) v += 0.5 * x.dot(P * x);
  return v;
}

Eigen::VectorXd QuadraticConstraint::gradient(const Eigen::VectorXd& x) const {
  if (affine()) return q;
  return P * x + q;
}

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::iteration_limit: return "iteration_limit";
    case SolveStatus::numerical_error: return "numerical_error";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Centering {
  int steps = 0;
  bool ok = true;
};

double max_constraint(std::span<const QuadraticConstraint> cons, const Eigen::VectorXd& x) {
  double worst = -kInf;
  for (const auto& g : cons) worst = std::max(worst, g.value(x));
  return worst;
}

/// t·costᵀx - Σ log(-gᵢ(x)), +inf outside the strict interior.
double barrier_value(const Eigen::VectorXd& cost, std::span<const QuadraticConstraint> cons,
                     double t, const Eigen::VectorXd& x) {
  double v = t * cost.dot(x);
  for (const auto& g : cons) {
    const double gi = g.value(x);
    if (!(gi < 0.0)) return kInf;
    v -= std::log(-gi);
  }
  return v;
}

/// Damped Newton minimization of the barrier function at fixed t. `stop` is
/// polled after every step and ends centering early when it returns true.
Centering center(const Eigen::VectorXd& cost, std::span<const QuadraticConstraint> cons, double t,
                 Eigen::VectorXd& x, const BarrierOptions& opt,
                 const std::function<bool(const Eigen::VectorXd&)>& stop) {
  const Eigen::Index n = x.size();
  Centering out;
  Eigen::VectorXd grad(n);
  Eigen::MatrixXd hess(n, n);
  for (; out.steps < opt.max_newton_steps; ++out.steps) {
    grad = t * cost;
    hess.setZero();
    for (const auto& g : cons) {
      const double gi = g.value(x);
      const Eigen::VectorXd dg = g.gradient(x);
      const double inv = -1.0 / gi;
      grad += inv * dg;
      hess.noalias() += (inv * inv) * dg * dg.transpose();
      if (!g.affine()) hess.noalias() += inv * g.P;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    Eigen::VectorXd step = ldlt.solve(-grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) {
      const double reg = 1e-12 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff());
      hess.diagonal().array() += reg;
      step = hess.ldlt().solve(-grad);
      if (!step.allFinite()) {
        out.ok = false;
        return out;
      }
    }
    const double decrement = -grad.dot(step);
    if (decrement < 0.0) {
      out.ok = false;
      return out;
    }
    if (0.5 * decrement <= opt.newton_tolerance) break;

    const double f0 = barrier_value(cost, cons, t, x);
    double s = 1.0;
    Eigen::VectorXd trial = x + s * step;
    while (barrier_value(cost, cons, t, trial) > f0 - 0.25 * s * decrement) {
      s *= 0.5;
      if (s < 1e-20) break;
      trial = x + s * step;
    }
    if (s < 1e-20) break;  // no further progress at this precision
    x = trial;
    if (stop && stop(x)) {
      ++out.steps;
      break;
    }
  }
  return out;
}

BarrierResult run_barrier(const Eigen::VectorXd& cost, std::span<const QuadraticConstraint> cons,
                          Eigen::VectorXd x, const BarrierOptions& opt,
                          const std::function<bool(const Eigen::VectorXd&)>& stop) {
  BarrierResult res;
  const double m = static_cast<double>(cons.size());
  double t = std::max(1e-3, m / (1.0 + std::abs(cost.dot(x))));
  for (int outer = 0; outer < opt.max_outer_steps; ++outer) {
    const Centering c = center(cost, cons, t, x, opt, stop);
    res.newton_steps += c.steps;
    res.x = x;
    res.objective = cost.dot(x);
    res.duality_gap = m / t;
    if (!c.ok) {
      res.status = SolveStatus::numerical_error;
      break;
    }
    if (stop && stop(x)) {
      res.status = SolveStatus::optimal;
      break;
    }
    if (res.duality_gap <= opt.gap_tolerance * (1.0 + std::abs(res.objective))) {
      res.status = SolveStatus::optimal;
      break;
    }
    res.status = SolveStatus::iteration_limit;
    t *= opt.barrier_growth;
  }
  res.multipliers.resize(static_cast<Eigen::Index>(cons.size()));
  for (std::size_t i = 0; i < cons.size(); ++i)
    res.multipliers(static_cast<Eigen::Index>(i)) = -1.0 / (t * cons[i].value(res.x));
  return res;
}

/// Finds a strictly feasible point by minimizing s subject to gᵢ(x) <= s.
bool phase_one(std::span<const QuadraticConstraint> cons, Eigen::VectorXd& x,
               const BarrierOptions& opt) {
  const Eigen::Index n = x.size();
  const double worst = max_constraint(cons, x);
  const double s0 = worst + std::max(1.0, std::abs(worst));

  std::vector<QuadraticConstraint> lifted;
  lifted.reserve(cons.size() + 2);
  for (const auto& g : cons) {
    QuadraticConstraint h;
    if (!g.affine()) {
      h.P = Eigen::MatrixXd::Zero(n + 1, n + 1);
      h.P.topLeftCorner(n, n) = g.P;
    }
    h.q = Eigen::VectorXd::Zero(n + 1);
    h.q.head(n) = g.q;
    h.q(n) = -1.0;
    h.r = g.r;
    lifted.push_back(std::move(h));
  }
  // Keep s in a bounded interval so the barrier has a minimizer.
  QuadraticConstraint upper;
  upper.q = Eigen::VectorXd::Zero(n + 1);
  upper.q(n) = 1.0;
  upper.r = -(s0 + std::max(1.0, std::abs(s0)));
  lifted.push_back(upper);
  QuadraticConstraint lower;
  lower.q = Eigen::VectorXd::Zero(n + 1);
  lower.q(n) = -1.0;
  lower.r = -std::max(1.0, std::abs(worst));
  lifted.push_back(lower);

  Eigen::VectorXd cost = Eigen::VectorXd::Zero(n + 1);
  cost(n) = 1.0;
  Eigen::VectorXd y(n + 1);
  y.head(n) = x;
  y(n) = s0;

  auto feasible = [&](const Eigen::VectorXd& yy) {
    return max_constraint(cons, yy.head(n)) < 0.0;
  };
  BarrierOptions o = opt;
  o.gap_tolerance = 1e-12;
  const BarrierResult r = run_barrier(cost, lifted, y, o, feasible);
  if (max_constraint(cons, r.x.head(n)) < 0.0) {
    x = r.x.head(n);
    return true;
  }
  return false;
}

}  // namespace

BarrierResult minimize_linear(const Eigen::VectorXd& cost,
                              std::span<const QuadraticConstraint> constraints,
                              const Eigen::VectorXd& start, const BarrierOptions& options) {
  for (const auto& g : constraints) {
    if (g.q.size() != cost.size() || (!g.affine() && (g.P.rows() != cost.size() || g.P.cols() != cost.size())))
      throw DimensionError("constraint dimension does not match the cost vector");
  }
  if (start.size() != cost.size()) throw DimensionError("start point dimension mismatch");

  Eigen::VectorXd x = start;
  if (!(max_constraint(constraints, x) < 0.0)) {
    if (!phase_one(constraints, x, options)) {
      BarrierResult r;
      r.x = start;
      r.objective = cost.dot(start);
      r.status = SolveStatus::infeasible;
      return r;
    }
  }
  return run_barrier(cost, constraints, x, options, {});
}

}  // namespace aircomp::conic
