#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "aircomp/channel_sim.hpp"
#include "aircomp/feature_model.hpp"

namespace aircomp {

enum class Scheme { proposed, mmse_centroid, random };
enum class SweepAxis { none, devices, power, pca_dims };

std::string to_string(Scheme s);
std::string to_string(SweepAxis a);
Scheme parse_scheme(const std::string& name);
SweepAxis parse_sweep_axis(const std::string& name);

struct ScenarioConfig {
  std::size_t devices = 3;
  std::size_t antennas = 8;
  double radius_m = 50.0;
  double min_distance_m = 1.0;
  double shadowing_variance_db = 8.0;
  double rx_noise_power = 1.0;           ///< δ₀², normalized
  double channel_noise_power_w = 1e-11;  ///< δ_c², the watts that unit δ₀² stands for
  std::vector<double> sensing_noise_power{0.4};  ///< one value, or one per device
  double transmit_power_dbm = 12.0;
  std::uint64_t seed = 0;
  std::size_t channel_blocks = 1;  ///< channel realizations per point, trials split evenly
};

struct FeatureConfig {
  std::string source = "synthetic";  ///< synthetic | samples | file
  std::size_t classes = 4;
  std::size_t dims = 12;
  double separation = 0.9;  ///< centroid spread of the first dimension
  double decay = 0.85;      ///< geometric spread decay across dimensions
  double variance = 1.0;
  std::uint64_t seed = 7;
  std::size_t raw_dim = 24;             ///< samples source
  std::size_t samples_per_class = 1600; ///< samples source
  std::string path;                     ///< file source: FeatureStatistics JSON
  std::optional<std::size_t> used_dims; ///< top dims by gain; all when unset
};

struct SweepConfig {
  SweepAxis axis = SweepAxis::none;
  std::vector<double> values;
};

struct OptimizerConfig {
  int max_iter = 100;
  double rel_tol = 1e-5;
  bool multi_start = true;
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  FeatureConfig features;
  SweepConfig sweep;
  std::size_t trials = 1600;
  std::vector<Scheme> schemes{Scheme::proposed, Scheme::mmse_centroid, Scheme::random};
  OptimizerConfig optimizer;
  bool report_timing = false;  ///< seconds column stays 0 unless set, keeping reports reproducible
  std::size_t threads = 0;     ///< 0: hardware concurrency

  /// Throws InvalidArgument describing the first problem found.
  void validate() const;
  nlohmann::json to_json() const;
  /// Missing fields keep their defaults.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);
};

/// Config of one sweep point.
ExperimentConfig apply_sweep_value(const ExperimentConfig& config, double value);

/// Feature model an experiment draws from.
struct FeatureSource {
  FeatureStatistics stats;                 ///< statistics used for design and classification
  std::optional<FeatureStatistics> raw;    ///< raw-space mixture when sampling through PCA
  std::optional<PcaProjection> projection;
};

FeatureSource build_feature_source(const FeatureConfig& config);

/// Equal-prior diagonal-Gaussian MAP decision; `stats[i]` describes `x_hat(i)`.
/// Ties go to the lowest class index.
std::size_t map_classify(std::span<const ReceivedElementStats> stats, const Eigen::VectorXd& x_hat);

struct PointResult {
  double sweep_value = 0.0;
  Scheme scheme = Scheme::proposed;
  double gain = 0.0;
  double accuracy = 0.0;
  double se = 0.0;
  long iterations = 0;
  double seconds = 0.0;

  bool operator==(const PointResult&) const = default;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<PointResult> rows;

  nlohmann::json to_json() const;
  static ExperimentReport from_json(const nlohmann::json& j);
};

/// One scheme at one point: designs per element pair, then `trials` end-to-end
/// inferences classified with map_classify.
PointResult run_point(const ExperimentConfig& config, Scheme scheme, double sweep_value = 0.0);
PointResult run_point(const ExperimentConfig& config, const FeatureSource& source, Scheme scheme,
                      double sweep_value = 0.0);

ExperimentReport run_sweep(const ExperimentConfig& config);

std::string report_csv(const ExperimentReport& report);

enum class ReportFormat { csv, json, both };

/// Writes `<stem>.csv` and/or `<stem>.json`; returns the written paths.
std::vector<std::filesystem::path> emit_report(const ExperimentReport& report,
                                               const std::filesystem::path& stem,
                                               ReportFormat format = ReportFormat::both);

}  // namespace aircomp
