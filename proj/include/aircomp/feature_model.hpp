#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace aircomp {

/// Column-unitary S x M projection onto the leading principal directions.
class PcaProjection {
 public:
  static constexpr double kUnitaryTolerance = 1e-9;

  /// Throws InvalidArgument if basis is not column-unitary or M > S.
  PcaProjection(Eigen::MatrixXd basis, Eigen::VectorXd explained_variance = {});

  const Eigen::MatrixXd& basis() const noexcept { return basis_; }
  const Eigen::VectorXd& explained_variance() const noexcept { return explained_variance_; }
  std::size_t raw_dim() const noexcept { return static_cast<std::size_t>(basis_.rows()); }
  std::size_t feature_dim() const noexcept { return static_cast<std::size_t>(basis_.cols()); }

 private:
  Eigen::MatrixXd basis_;
  Eigen::VectorXd explained_variance_;
};

/// Top-M principal directions of the centered sample covariance. Samples are
/// the rows of `samples`.
PcaProjection pca_fit(const Eigen::MatrixXd& samples, std::size_t target_dim);

/// basisᵀ·raw.
Eigen::VectorXd pca_project(const Eigen::VectorXd& raw, const PcaProjection& proj);

/// Equal-prior Gaussian mixture with class-independent diagonal covariance.
class FeatureStatistics {
 public:
  /// centroids is L x M, variances has length M and is strictly positive.
  FeatureStatistics(Eigen::MatrixXd centroids, Eigen::VectorXd variances);

  /// Per-class sample means and pooled per-dimension variance of labeled
  /// feature vectors (rows of `samples`).
  static FeatureStatistics fit(const Eigen::MatrixXd& samples,
                               std::span<const std::size_t> labels,
                               std::size_t num_classes);

  std::size_t num_classes() const noexcept { return static_cast<std::size_t>(centroids_.rows()); }
  std::size_t num_dims() const noexcept { return static_cast<std::size_t>(centroids_.cols()); }
  const Eigen::MatrixXd& centroids() const noexcept { return centroids_; }
  const Eigen::VectorXd& variances() const noexcept { return variances_; }
  double centroid(std::size_t cls, std::size_t dim) const { return centroids_(cls, dim); }
  double variance(std::size_t dim) const { return variances_(dim); }

  /// Restriction to a subset of feature dimensions, in the given order.
  FeatureStatistics select(std::span<const std::size_t> dims) const;

  /// Average pair weight 2 / (L (L - 1)).
  double pair_weight() const noexcept;

  nlohmann::json to_json() const;
  static FeatureStatistics from_json(const nlohmann::json& j);

 private:
  Eigen::MatrixXd centroids_;
  Eigen::VectorXd variances_;
};

/// One or two feature elements carried by the real and imaginary parts of a
/// single AirComp symbol.
struct ElementPair {
  std::size_t first = 0;
  std::optional<std::size_t> second;

  std::size_t size() const noexcept { return second ? 2 : 1; }
  std::size_t operator[](std::size_t i) const { return i == 0 ? first : *second; }
  std::vector<std::size_t> elements() const;
};

/// Class statistics of one received element x̂_m.
struct ReceivedElementStats {
  Eigen::VectorXd centroids;  ///< per class, (Σc)·μ
  double variance = 0.0;
};

double pairwise_element_gain(const FeatureStatistics& stats, std::size_t cls_a,
                             std::size_t cls_b, std::size_t dim);

/// Averaged discriminant gain over a set of dimensions.
double total_gain(const FeatureStatistics& stats, std::span<const std::size_t> dims);

/// Per-element gain G(x_m) for every dimension.
Eigen::VectorXd element_gains(const FeatureStatistics& stats);

/// Dimensions sorted by decreasing element gain; ties keep the lower index first.
std::vector<std::size_t> rank_dims_by_gain(const FeatureStatistics& stats);

/// Consecutive pairs of `ordered_dims`; a trailing odd element travels alone.
std::vector<ElementPair> make_pairs(std::span<const std::size_t> ordered_dims);

ReceivedElementStats received_element_stats(const FeatureStatistics& stats, std::size_t dim,
                                            const Eigen::VectorXd& steering,
                                            const Eigen::VectorXd& beamformer_half,
                                            const Eigen::VectorXd& sensing_noise,
                                            double rx_noise_power);

/// Sum of the element gains of the received elements of `pair`. Throws
/// DegenerateDesign when a received variance is zero.
double received_gain(const FeatureStatistics& stats, const ElementPair& pair,
                     const Eigen::VectorXd& steering, const Eigen::VectorXd& beamformer_half,
                     const Eigen::VectorXd& sensing_noise, double rx_noise_power);

/// E|s_k|² for the symbol carrying `pair` from a device with sensing noise
/// power `sensing_noise`.
double symbol_second_moment(const FeatureStatistics& stats, double sensing_noise,
                            const ElementPair& pair);

}  // namespace aircomp
