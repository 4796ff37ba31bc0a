#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "aircomp/feature_model.hpp"
#include "aircomp/rng.hpp"

namespace aircomp {

struct Position {
  double x_m = 0.0;
  double y_m = 0.0;
};

struct DeviceProfile {
  double sensing_noise_power = 0.0;  ///< ε_k²
  double transmit_power_w = 1.0;     ///< P_k
  Position position;                 ///< relative to the server, meters

  double distance_m() const noexcept;
  /// Throws InvalidArgument on ε² < 0 or P <= 0.
  void validate() const;
};

/// Uplink channel vectors h_k with the large- and small-scale parts that
/// produced them.
struct ChannelRealization {
  std::vector<Eigen::VectorXcd> h;
  std::vector<double> path_loss_db;
  std::vector<double> shadowing_db;
  std::vector<Eigen::VectorXcd> small_scale;

  std::size_t num_devices() const noexcept { return h.size(); }
  std::size_t num_antennas() const noexcept { return h.empty() ? 0 : static_cast<std::size_t>(h.front().size()); }

  /// Large-scale power coefficient [φ_k]_dB = -PL_k + ζ_k.
  double large_scale_db(std::size_t k) const { return -path_loss_db.at(k) + shadowing_db.at(k); }

  /// Channels expressed relative to a reference receiver noise power, so that
  /// unit receiver noise corresponds to `noise_power_w` watts.
  ChannelRealization normalized(double noise_power_w) const;
};

struct NoiseModel {
  double power = 1.0;  ///< δ₀², split evenly between real and imaginary parts
};

/// [PL]_dB = 128.1 + 37.6 log10(d), d in kilometers.
double path_loss_db(double distance_km);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return db_to_linear(dbm) * 1e-3; }

/// Uniform placement in a disk of `radius_m` around the server, at least
/// `min_distance_m` away from it. Device k draws from its own sub-stream of
/// `seed`, so the first K devices are the same for any larger K.
std::vector<Position> place_devices(std::size_t count, double radius_m, double min_distance_m,
                                    std::uint64_t seed);

/// h_k = sqrt(linear(φ_k)) ρ_k with ρ_k ~ CN(0, I_N) and ζ_k ~ N(0, σ_ζ²) dB.
ChannelRealization sample_channels(std::span<const DeviceProfile> profiles, std::size_t antennas,
                                   double shadowing_variance_db, Rng& rng);

/// Same model with one sub-stream of `seed` per device.
ChannelRealization sample_channels(std::span<const DeviceProfile> profiles, std::size_t antennas,
                                   double shadowing_variance_db, std::uint64_t seed);

/// Ground-truth feature vector of one trial and its noisy per-device copies.
struct Observation {
  std::size_t label = 0;
  Eigen::VectorXd truth;
  std::vector<Eigen::VectorXd> local;
};

/// x ~ N(μ_ℓ, Σ); x_k = x + d_k with d_k ~ N(0, ε_k² I). One draw of x is
/// shared by every device.
Observation sample_observation(const FeatureStatistics& stats, std::size_t label,
                               std::span<const DeviceProfile> profiles, Rng& rng);

/// Raw-space variant: z ~ N(μ_ℓ, Σ) in raw space, x = Uᵀz, x_k = x + d_k.
Observation sample_observation(const FeatureStatistics& raw_stats, const PcaProjection& proj,
                               std::size_t label, std::span<const DeviceProfile> profiles,
                               Rng& rng);

/// Independent draws for the ground truth and for each device's sensing noise,
/// using separate sub-streams of `seed` (one per device).
Observation sample_observation(const FeatureStatistics& stats, std::size_t label,
                               std::span<const DeviceProfile> profiles, std::uint64_t seed);
Observation sample_observation(const FeatureStatistics& raw_stats, const PcaProjection& proj,
                               std::size_t label, std::span<const DeviceProfile> profiles,
                               std::uint64_t seed);

/// Circularly-symmetric receiver noise; real and imaginary parts ~ N(0, δ₀²/2).
Eigen::VectorXcd sample_rx_noise(const NoiseModel& noise, std::size_t antennas, Rng& rng);

}  // namespace aircomp
