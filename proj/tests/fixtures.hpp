#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "aircomp/channel_sim.hpp"
#include "aircomp/feature_model.hpp"
#include "aircomp/optimizer.hpp"

namespace fixture {

inline aircomp::FeatureStatistics random_stats(std::size_t classes, std::size_t dims, std::uint64_t seed,
                                               double spread = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> var(0.5, 2.0);
  Eigen::MatrixXd mu(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(dims));
  Eigen::VectorXd v(static_cast<Eigen::Index>(dims));
  for (Eigen::Index m = 0; m < mu.cols(); ++m) {
    v(m) = var(rng);
    for (Eigen::Index l = 0; l < mu.rows(); ++l) mu(l, m) = spread * n01(rng);
  }
  return {mu, v};
}

inline std::vector<Eigen::VectorXcd> random_channels(std::size_t devices, std::size_t antennas, std::uint64_t seed,
                                                     double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, std::sqrt(0.5));
  std::vector<Eigen::VectorXcd> h(devices, Eigen::VectorXcd(static_cast<Eigen::Index>(antennas)));
  for (auto& v : h)
    for (Eigen::Index n = 0; n < v.size(); ++n) v(n) = scale * std::complex<double>(n01(rng), n01(rng));
  return h;
}

inline std::vector<aircomp::DeviceProfile> profiles(const std::vector<double>& eps2, double power_w) {
  std::vector<aircomp::DeviceProfile> out;
  for (double e : eps2) out.push_back({e, power_w, {10.0, 0.0}});
  return out;
}

/// Pair problem on the first two dims with Rayleigh channels; `scales`
/// multiplies device k's channel when given.
inline aircomp::PairProblem random_problem(std::size_t devices, std::size_t antennas, std::uint64_t seed,
                                           const std::vector<double>& eps2, double power_w = 1.0,
                                           double rx_noise = 1.0, const std::vector<double>& scales = {}) {
  const auto stats = random_stats(4, 2, seed * 7 + 1);
  auto h = random_channels(devices, antennas, seed * 7 + 2);
  for (std::size_t k = 0; k < scales.size() && k < devices; ++k) h[k] *= scales[k];
  const auto prof = profiles(eps2, power_w);
  return aircomp::PairProblem::build(stats, aircomp::ElementPair{0, 1}, h, prof, rx_noise);
}

}  // namespace fixture
