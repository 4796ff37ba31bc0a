#include "aircomp/nnls.hpp"
#include "aircomp/optimizer.hpp"

#include <cmath>

#include "aircomp/errors.hpp"

namespace aircomp {

KktDiagnostics kkt_check(const PairProblem& problem, const ScaState& state,
                         double active_tolerance, double residual_tolerance) {
  const auto n_f = static_cast<Eigen::Index>(problem.num_antennas());
  const auto n_c = static_cast<Eigen::Index>(problem.num_devices());
  const auto n_a = static_cast<Eigen::Index>(problem.num_terms());
  if (state.steering.size() != n_c || state.alpha.size() != n_a || state.f_hat.size() != n_f)
    throw DimensionError("state does not match the problem");
  const double s = state.steering.sum();
  if (!(s > 0.0)) throw DegenerateDesign("all steering powers are zero");

  // Stationarity of the Lagrangian, unknowns z = [β; λ] >= 0.
  //   α_j:  -w + λ_j S² gap_j / α_j² = 0
  //   c_k:  2 β_k c_k + Σ_j λ_j (2 c_k ε_k² + 2 S σ_j² - 2 S gap_j / α_j) = 0
  //   f̂:   -Σ_k β_k ∇R_k + Σ_j λ_j 2 δ₀² f̂ = 0
  const Eigen::Index rows = n_a + n_c + n_f;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, n_c + n_a);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
  for (Eigen::Index j = 0; j < n_a; ++j) {
    const double gap = problem.terms[static_cast<std::size_t>(j)].centroid_gap_sq;
    const double al = state.alpha(j);
    a(j, n_c + j) = s * s * gap / (al * al);
    b(j) = problem.weight;
  }
  for (Eigen::Index k = 0; k < n_c; ++k) {
    const Eigen::Index row = n_a + k;
    const double ck = state.steering(k);
    a(row, k) = 2.0 * ck;
    for (Eigen::Index j = 0; j < n_a; ++j) {
      const GainTerm& t = problem.terms[static_cast<std::size_t>(j)];
      a(row, n_c + j) = 2.0 * ck * problem.sensing_noise(k) + 2.0 * s * t.variance -
                        2.0 * s * t.centroid_gap_sq / state.alpha(j);
    }
  }
  for (Eigen::Index k = 0; k < n_c; ++k)
    a.block(n_a + n_c, k, n_f, 1) = -problem.power_gradient(static_cast<std::size_t>(k), state.f_hat);
  for (Eigen::Index j = 0; j < n_a; ++j)
    a.block(n_a + n_c, n_c + j, n_f, 1) = 2.0 * problem.rx_noise_power * state.f_hat;

  for (Eigen::Index r = 0; r < rows; ++r) {
    const double scale = std::max(a.row(r).cwiseAbs().maxCoeff(), std::abs(b(r)));
    if (scale > 0.0) {
      a.row(r) /= scale;
      b(r) /= scale;
    }
  }
  const Eigen::VectorXd z = nnls(a, b);

  KktDiagnostics out;
  out.power_multipliers = z.head(n_c);
  out.gain_multipliers = z.tail(n_a);
  out.stationarity_residual = a * z - b;
  out.relative_residual = out.stationarity_residual.norm() / std::max(b.norm(), 1e-300);
  out.kkt_satisfied = out.relative_residual < residual_tolerance;

  out.power_slack.resize(n_c);
  out.power_active.resize(static_cast<std::size_t>(n_c));
  out.normalized_steering = state.steering / s;
  out.weighted_steering = out.normalized_steering.cwiseProduct(problem.sensing_noise);
  double sum = 0.0;
  std::vector<Eigen::Index> inactive;
  for (Eigen::Index k = 0; k < n_c; ++k) {
    const double r = problem.power_function(static_cast<std::size_t>(k), state.f_hat);
    const double ck = state.steering(k);
    out.power_slack(k) = r > 0.0 ? (r - ck * ck) / r : 0.0;
    const bool active = out.power_slack(k) < active_tolerance;
    out.power_active[static_cast<std::size_t>(k)] = active;
    if (!active) {
      inactive.push_back(k);
      sum += out.weighted_steering(k);
    }
  }
  out.inactive_count = inactive.size();
  out.structure_checked = inactive.size() >= 2;
  if (out.structure_checked) {
    const double mean = sum / static_cast<double>(inactive.size());
    for (Eigen::Index k : inactive)
      out.structure_deviation =
          std::max(out.structure_deviation, std::abs(out.weighted_steering(k) - mean) / mean);
  }
  return out;
}

}  // namespace aircomp
