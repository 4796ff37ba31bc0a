#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "aircomp/feature_model.hpp"

namespace aircomp {

/// Symmetric receive beamformer f = f̂ (1 + j), steering powers c_k and the
/// zero-forcing precoders b_k derived from them.
struct TransceiverDesign {
  Eigen::VectorXd beamformer_half;  ///< f̂
  Eigen::VectorXd steering;         ///< c
  Eigen::VectorXcd precoders;       ///< b

  Eigen::VectorXcd beamformer() const;
  std::size_t num_devices() const noexcept { return static_cast<std::size_t>(steering.size()); }

  nlohmann::json to_json() const;
  static TransceiverDesign from_json(const nlohmann::json& j);
};

struct AggregationResult {
  double first = 0.0;   ///< x̂_{m1} = Re(fᴴy)
  double second = 0.0;  ///< x̂_{m2} = Im(fᴴy)
  Eigen::VectorXcd received;
};

/// s_k = x_{k,m1} + j x_{k,m2}; a pair without second element leaves the
/// imaginary part empty.
std::complex<double> pack_symbol(const Eigen::VectorXd& local_features, const ElementPair& pair);

/// b_k = c_k hₖᴴf / (hₖᴴ f fᴴ hₖ). Throws BeamformerNullsDevice if fᴴhₖ = 0.
Eigen::VectorXcd zf_precoders(const Eigen::VectorXd& beamformer_half,
                              std::span<const Eigen::VectorXcd> channels,
                              const Eigen::VectorXd& steering);

/// Builds the design with its zero-forcing precoders.
TransceiverDesign make_design(Eigen::VectorXd beamformer_half,
                              std::span<const Eigen::VectorXcd> channels,
                              Eigen::VectorXd steering);

/// y = Σ hₖ bₖ sₖ + n and the estimates read off fᴴy.
AggregationResult aggregate(const TransceiverDesign& design,
                            std::span<const std::complex<double>> symbols,
                            std::span<const Eigen::VectorXcd> channels,
                            const Eigen::VectorXcd& noise);

/// P̂_k = P_k / E(s_k s_kᴴ).
double max_precoding_power(double transmit_power_w, double second_moment);

/// |f̂ᵀh|² for a real f̂ and complex h.
double effective_gain(const Eigen::VectorXd& beamformer_half, const Eigen::VectorXcd& channel);

/// Largest feasible steering power, sqrt(2 P̂ |f̂ᵀh|²).
double steering_limit(const Eigen::VectorXd& beamformer_half, const Eigen::VectorXcd& channel,
                      double max_precoding_power);

struct DesignCheck {
  double max_zf_error = 0.0;      ///< max_k |fᴴhₖbₖ - cₖ| / max(cₖ, 1)
  double max_power_excess = 0.0;  ///< max_k |bₖ|²/P̂ₖ - 1, clipped at 0
  bool nonnegative = true;
  bool ok(double zf_tol = 1e-8, double power_tol = 1e-8) const {
    return nonnegative && max_zf_error <= zf_tol && max_power_excess <= power_tol;
  }
};

DesignCheck check_design(const TransceiverDesign& design,
                         std::span<const Eigen::VectorXcd> channels,
                         const Eigen::VectorXd& max_precoding_powers);

}  // namespace aircomp
