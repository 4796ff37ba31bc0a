#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "aircomp/channel_sim.hpp"
#include "aircomp/feature_model.hpp"
#include "aircomp/qcqp.hpp"
#include "aircomp/rng.hpp"
#include "aircomp/transceiver.hpp"

namespace aircomp {

/// One per-class-pair ratio of the objective: element `element` of the pair,
/// classes (class_a < class_b).
struct GainTerm {
  std::size_t element = 0;
  std::size_t class_a = 0;
  std::size_t class_b = 0;
  double centroid_gap_sq = 0.0;  ///< (μ_a - μ_b)²
  double variance = 0.0;         ///< σ² of the element
};

/// Everything that stays fixed while one element pair is optimized.
struct PairProblem {
  ElementPair pair;
  std::vector<Eigen::VectorXcd> channels;
  Eigen::VectorXd sensing_noise;    ///< ε_k²
  Eigen::VectorXd precoding_power;  ///< P̂_k
  double rx_noise_power = 1.0;      ///< δ₀²
  double weight = 1.0;              ///< 2 / (L (L - 1))
  std::vector<GainTerm> terms;      ///< class pairs with distinct centroids only

  static PairProblem build(const FeatureStatistics& stats, const ElementPair& pair,
                           std::span<const Eigen::VectorXcd> channels,
                           std::span<const DeviceProfile> profiles, double rx_noise_power);

  std::size_t num_devices() const noexcept { return channels.size(); }
  std::size_t num_antennas() const noexcept { return channels.empty() ? 0 : static_cast<std::size_t>(channels.front().size()); }
  std::size_t num_terms() const noexcept { return terms.size(); }

  /// Re(hₖhₖᴴ), so that |f̂ᵀhₖ|² = f̂ᵀ Hₖ f̂.
  Eigen::MatrixXd channel_gram(std::size_t k) const;
  /// Rₖ(f̂) = 2 P̂ₖ |f̂ᵀhₖ|².
  double power_function(std::size_t k, const Eigen::VectorXd& f_hat) const;
  Eigen::VectorXd power_gradient(std::size_t k, const Eigen::VectorXd& f_hat) const;
  /// Σ cₖ² εₖ² + δ₀² f̂ᵀf̂ + σ² (Σ cₖ)² for term j.
  double noise_function(std::size_t j, const Eigen::VectorXd& f_hat, const Eigen::VectorXd& c) const;
  /// Q_j = (Σ cₖ)² gap / α.
  double gap_function(std::size_t j, const Eigen::VectorXd& c, double alpha) const;
  /// The per-class-pair ratio at (f̂, c).
  double exact_alpha(std::size_t j, const Eigen::VectorXd& f_hat, const Eigen::VectorXd& c) const;
  Eigen::VectorXd exact_alphas(const Eigen::VectorXd& f_hat, const Eigen::VectorXd& c) const;
  /// Received discriminant gain of the pair.
  double gain(const Eigen::VectorXd& f_hat, const Eigen::VectorXd& c) const;
  double steering_limit(std::size_t k, const Eigen::VectorXd& f_hat) const;
};

/// Reference point of the successive convex approximation.
struct ScaState {
  Eigen::VectorXd f_hat;
  Eigen::VectorXd steering;
  Eigen::VectorXd alpha;
  double objective = 0.0;
  int iteration = 0;
  std::vector<double> trace;

  nlohmann::json to_json() const;
};

/// Largest relative violation of the power and gain constraints (<= 0 when
/// feasible).
double constraint_violation(const PairProblem& problem, const ScaState& state);

/// First-order data of the convex surrogate anchored at a reference point.
struct ConvexSubproblem {
  const PairProblem* problem = nullptr;
  ScaState reference;
  Eigen::VectorXd power_value;               ///< Rₖ at the reference
  std::vector<Eigen::VectorXd> power_grad;   ///< ∇Rₖ at the reference
  Eigen::VectorXd gap_value;                 ///< Q_j at the reference
  Eigen::VectorXd gap_grad_steering;         ///< A_j, shared by every device
  Eigen::VectorXd gap_grad_alpha;            ///< B_j <= 0

  double power_hat(std::size_t k, const Eigen::VectorXd& f_hat) const;
  double gap_hat(std::size_t j, const Eigen::VectorXd& c, double alpha) const;
};

struct ScaOptions {
  int max_iter = 100;
  double rel_tol = 1e-5;
  double alpha_floor = 1e-10;
  /// Bound on ‖f̂‖ inside each subproblem; the reference is kept at unit norm.
  double beamformer_radius = 2.0;
  /// Also start from each device's matched direction and keep the best run.
  bool multi_start = true;
  /// Random probes per iteration to confirm R >= R̂ and Q >= Q̂ (0 disables).
  int underestimator_probes = 0;
  conic::BarrierOptions barrier;
  std::function<void(const ScaState&, const ConvexSubproblem&)> on_iteration;
};

struct SubproblemSolution {
  Eigen::VectorXd f_hat;
  Eigen::VectorXd steering;
  Eigen::VectorXd alpha;
  double objective = 0.0;
  conic::SolveStatus status = conic::SolveStatus::numerical_error;
  int newton_steps = 0;
};

struct ScaResult {
  TransceiverDesign design;
  ScaState state;
  std::size_t starts = 1;
  bool converged = false;
};

/// Dominant real direction of Σ P̂ₖ Re(hₖhₖᴴ) (fallback: real part of Σ hₖ).
Eigen::VectorXd dominant_direction(const PairProblem& problem);

/// Feasible reference with every device at full steering power and α set to
/// the exact ratios. `direction` overrides the beamformer direction.
ScaState initialize_reference(const PairProblem& problem,
                              const std::optional<Eigen::VectorXd>& direction = std::nullopt);

ConvexSubproblem build_subproblem(const PairProblem& problem, const ScaState& reference,
                                  double alpha_floor = 1e-10);

SubproblemSolution solve_subproblem(const ConvexSubproblem& sub, const ScaOptions& options = {});

ScaResult sca_optimize(const PairProblem& problem, const ScaOptions& options = {});

struct KktDiagnostics {
  Eigen::VectorXd power_multipliers;      ///< β
  Eigen::VectorXd gain_multipliers;       ///< λ
  Eigen::VectorXd stationarity_residual;  ///< rows: α, c, f̂
  double relative_residual = 0.0;
  Eigen::VectorXd power_slack;            ///< (Rₖ - cₖ²) / Rₖ
  std::vector<bool> power_active;
  Eigen::VectorXd normalized_steering;    ///< c'ₖ = cₖ / Σc
  Eigen::VectorXd weighted_steering;      ///< c'ₖ εₖ²
  std::size_t inactive_count = 0;
  bool structure_checked = false;         ///< at least two inactive devices
  double structure_deviation = 0.0;       ///< max |c'ε² - mean| / mean over inactive devices
  bool kkt_satisfied = false;
};

KktDiagnostics kkt_check(const PairProblem& problem, const ScaState& state,
                         double active_tolerance = 1e-4, double residual_tolerance = 1e-4);

/// Random unit-norm beamformer, every device at full power.
TransceiverDesign baseline_random(const PairProblem& problem, Rng& rng);

/// Channel-equalizing design: one common steering power, limited by the weakest
/// device, with the beamformer that maximizes the weakest effective gain over
/// a candidate set.
TransceiverDesign baseline_mmse_centroid(const PairProblem& problem);

}  // namespace aircomp
