#include "aircomp/channel_sim.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "aircomp/errors.hpp"

namespace aircomp {

double DeviceProfile::distance_m() const noexcept { return std::hypot(position.x_m, position.y_m); }

void DeviceProfile::validate() const {
  if (!(sensing_noise_power >= 0.0)) throw InvalidArgument("sensing noise power must be >= 0");
  if (!(transmit_power_w > 0.0)) throw InvalidArgument("transmit power must be > 0");
}

ChannelRealization ChannelRealization::normalized(double noise_power_w) const {
  if (!(noise_power_w > 0.0)) throw InvalidArgument("reference noise power must be > 0");
  ChannelRealization out = *this;
  const double scale = 1.0 / std::sqrt(noise_power_w);
  for (auto& hk : out.h) hk *= scale;
  return out;
}

double path_loss_db(double distance_km) {
  if (!(distance_km > 0.0)) throw InvalidArgument("path loss needs a positive distance");
  return 128.1 + 37.6 * std::log10(distance_km);
}

std::vector<Position> place_devices(std::size_t count, double radius_m, double min_distance_m,
                                    std::uint64_t seed) {
  if (!(radius_m > min_distance_m) || min_distance_m < 0.0)
    throw InvalidArgument("placement needs radius > min distance >= 0");
  std::vector<Position> out;
  out.reserve(count);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r2_min = min_distance_m * min_distance_m;
  const double r2_max = radius_m * radius_m;
  for (std::size_t k = 0; k < count; ++k) {
    Rng rng = make_rng(seed, Stream::placement, {k});
    // Area-uniform radius on the annulus [min, radius].
    const double r = std::sqrt(r2_min + (r2_max - r2_min) * unit(rng));
    const double theta = 2.0 * std::numbers::pi * unit(rng);
    out.push_back({r * std::cos(theta), r * std::sin(theta)});
  }
  return out;
}

namespace {

void draw_device(const DeviceProfile& p, std::size_t antennas, double shadow_std_db, Rng& rng,
                 ChannelRealization& out) {
  p.validate();
  const double d = p.distance_m();
  if (!(d > 0.0)) throw InvalidArgument("device at zero distance from the server");
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double pl = path_loss_db(d / 1000.0);
  const double zeta = shadow_std_db > 0.0 ? shadow_std_db * gauss(rng) : 0.0;
  Eigen::VectorXcd rho(static_cast<Eigen::Index>(antennas));
  const double s = std::sqrt(0.5);
  for (Eigen::Index n = 0; n < rho.size(); ++n) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    rho(n) = {s * re, s * im};
  }
  const double amplitude = std::sqrt(db_to_linear(-pl + zeta));
  out.path_loss_db.push_back(pl);
  out.shadowing_db.push_back(zeta);
  out.small_scale.push_back(rho);
  out.h.push_back(amplitude * rho);
}

void check_antennas(std::size_t antennas, double shadowing_variance_db) {
  if (antennas == 0) throw InvalidArgument("need at least one receive antenna");
  if (shadowing_variance_db < 0.0) throw InvalidArgument("shadowing variance must be >= 0");
}

}  // namespace

ChannelRealization sample_channels(std::span<const DeviceProfile> profiles, std::size_t antennas,
                                   double shadowing_variance_db, Rng& rng) {
  check_antennas(antennas, shadowing_variance_db);
  ChannelRealization out;
  const double sd = std::sqrt(shadowing_variance_db);
  for (const auto& p : profiles) draw_device(p, antennas, sd, rng, out);
  return out;
}

ChannelRealization sample_channels(std::span<const DeviceProfile> profiles, std::size_t antennas,
                                   double shadowing_variance_db, std::uint64_t seed) {
  check_antennas(antennas, shadowing_variance_db);
  ChannelRealization out;
  const double sd = std::sqrt(shadowing_variance_db);
  for (std::size_t k = 0; k < profiles.size(); ++k) {
    Rng rng = make_rng(seed, Stream::channel, {k});
    draw_device(profiles[k], antennas, sd, rng, out);
  }
  return out;
}

namespace {

Eigen::VectorXd draw_class_vector(const FeatureStatistics& stats, std::size_t label, Rng& rng) {
  if (label >= stats.num_classes()) throw DimensionError("class index out of range");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd x(static_cast<Eigen::Index>(stats.num_dims()));
  for (Eigen::Index m = 0; m < x.size(); ++m)
    x(m) = stats.centroid(label, static_cast<std::size_t>(m)) + std::sqrt(stats.variance(static_cast<std::size_t>(m))) * gauss(rng);
  return x;
}

Eigen::VectorXd add_sensing_noise(const Eigen::VectorXd& truth, double power, Rng& rng) {
  if (power == 0.0) return truth;
  std::normal_distribution<double> gauss(0.0, std::sqrt(power));
  Eigen::VectorXd x = truth;
  for (Eigen::Index m = 0; m < x.size(); ++m) x(m) += gauss(rng);
  return x;
}

}  // namespace

Observation sample_observation(const FeatureStatistics& stats, std::size_t label,
                               std::span<const DeviceProfile> profiles, Rng& rng) {
  Observation obs;
  obs.label = label;
  obs.truth = draw_class_vector(stats, label, rng);
  for (const auto& p : profiles) {
    p.validate();
    obs.local.push_back(add_sensing_noise(obs.truth, p.sensing_noise_power, rng));
  }
  return obs;
}

Observation sample_observation(const FeatureStatistics& raw_stats, const PcaProjection& proj,
                               std::size_t label, std::span<const DeviceProfile> profiles,
                               Rng& rng) {
  Observation obs;
  obs.label = label;
  obs.truth = pca_project(draw_class_vector(raw_stats, label, rng), proj);
  for (const auto& p : profiles) {
    p.validate();
    obs.local.push_back(add_sensing_noise(obs.truth, p.sensing_noise_power, rng));
  }
  return obs;
}

namespace {

Observation add_device_noise(Eigen::VectorXd truth, std::size_t label,
                             std::span<const DeviceProfile> profiles, std::uint64_t seed) {
  Observation obs;
  obs.label = label;
  obs.truth = std::move(truth);
  for (std::size_t k = 0; k < profiles.size(); ++k) {
    profiles[k].validate();
    Rng rng = make_rng(seed, Stream::sensing, {k});
    obs.local.push_back(add_sensing_noise(obs.truth, profiles[k].sensing_noise_power, rng));
  }
  return obs;
}

}  // namespace

Observation sample_observation(const FeatureStatistics& stats, std::size_t label,
                               std::span<const DeviceProfile> profiles, std::uint64_t seed) {
  Rng truth_rng = make_rng(seed, Stream::truth);
  return add_device_noise(draw_class_vector(stats, label, truth_rng), label, profiles, seed);
}

Observation sample_observation(const FeatureStatistics& raw_stats, const PcaProjection& proj,
                               std::size_t label, std::span<const DeviceProfile> profiles,
                               std::uint64_t seed) {
  Rng truth_rng = make_rng(seed, Stream::truth);
  return add_device_noise(pca_project(draw_class_vector(raw_stats, label, truth_rng), proj), label,
                          profiles, seed);
}

Eigen::VectorXcd sample_rx_noise(const NoiseModel& noise, std::size_t antennas, Rng& rng) {
  if (noise.power < 0.0) throw InvalidArgument("receiver noise power must be >= 0");
  Eigen::VectorXcd n = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(antennas));
  if (noise.power == 0.0) return n;
  std::normal_distribution<double> gauss(0.0, std::sqrt(noise.power / 2.0));
  for (Eigen::Index i = 0; i < n.size(); ++i) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    n(i) = {re, im};
  }
  return n;
}

}  // namespace aircomp
