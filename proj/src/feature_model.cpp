#include "aircomp/feature_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "aircomp/errors.hpp"

namespace aircomp {

namespace {

void check_dim(const FeatureStatistics& stats, std::size_t dim) {
  if (dim >= stats.num_dims())
    throw DimensionError("feature dimension " + std::to_string(dim) + " out of range [0, " +
                         std::to_string(stats.num_dims()) + ")");
}

void check_class(const FeatureStatistics& stats, std::size_t cls) {
  if (cls >= stats.num_classes())
    throw DimensionError("class index " + std::to_string(cls) + " out of range");
}

}  // namespace

// ---------------------------------------------------------------------------
// PCA

PcaProjection::PcaProjection(Eigen::MatrixXd basis, Eigen::VectorXd explained_variance)
    : basis_(std::move(basis)), explained_variance_(std::move(explained_variance)) {
  if (basis_.cols() == 0 || basis_.cols() > basis_.rows())
    throw InvalidArgument("projection needs 1 <= M <= S");
  const Eigen::MatrixXd gram = basis_.transpose() * basis_;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(basis_.cols(), basis_.cols());
  if ((gram - eye).cwiseAbs().maxCoeff() > kUnitaryTolerance)
    throw InvalidArgument("projection basis is not column-unitary");
}

PcaProjection pca_fit(const Eigen::MatrixXd& samples, std::size_t target_dim) {
  const auto n = static_cast<std::size_t>(samples.rows());
  const auto s = static_cast<std::size_t>(samples.cols());
  if (target_dim == 0 || target_dim > s)
    throw InvalidArgument("PCA target dimension must satisfy 1 <= M <= S");
  if (n < target_dim) throw RankDeficient("fewer samples than the target dimension");

  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const Eigen::MatrixXd centered = samples.rowwise() - mean;
  const Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(std::max<std::size_t>(n - 1, 1));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw RankDeficient("covariance eigen-decomposition failed");

  // Eigenvalues ascend; take the trailing M columns in descending order.
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double top = std::max(values(values.size() - 1), 0.0);
  const double floor = top * 1e-12 * static_cast<double>(s);
  Eigen::MatrixXd basis(s, target_dim);
  Eigen::VectorXd explained(target_dim);
  for (std::size_t i = 0; i < target_dim; ++i) {
    const Eigen::Index col = static_cast<Eigen::Index>(s - 1 - i);
    if (!(values(col) > floor)) throw RankDeficient("sample covariance rank is below the target dimension");
    basis.col(static_cast<Eigen::Index>(i)) = eig.eigenvectors().col(col);
    explained(static_cast<Eigen::Index>(i)) = values(col);
  }
  return PcaProjection(std::move(basis), std::move(explained));
}

Eigen::VectorXd pca_project(const Eigen::VectorXd& raw, const PcaProjection& proj) {
  if (static_cast<std::size_t>(raw.size()) != proj.raw_dim())
    throw DimensionError("raw vector length does not match projection");
  return proj.basis().transpose() * raw;
}

// ---------------------------------------------------------------------------
// Mixture statistics

FeatureStatistics::FeatureStatistics(Eigen::MatrixXd centroids, Eigen::VectorXd variances)
    : centroids_(std::move(centroids)), variances_(std::move(variances)) {
  if (centroids_.rows() < 1 || centroids_.cols() < 1)
    throw InvalidArgument("feature statistics need L >= 1 and M >= 1");
  if (variances_.size() != centroids_.cols())
    throw DimensionError("variances length must equal the number of dimensions");
  for (Eigen::Index m = 0; m < variances_.size(); ++m)
    if (!(variances_(m) > 0.0) || !std::isfinite(variances_(m)))
      throw InvalidArgument("feature variances must be strictly positive");
  if (!centroids_.allFinite()) throw InvalidArgument("centroids must be finite");
}

FeatureStatistics FeatureStatistics::fit(const Eigen::MatrixXd& samples,
                                         std::span<const std::size_t> labels,
                                         std::size_t num_classes) {
  if (static_cast<std::size_t>(samples.rows()) != labels.size())
    throw DimensionError("one label per sample required");
  if (num_classes == 0) throw InvalidArgument("need at least one class");
  const Eigen::Index m = samples.cols();
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_classes), m);
  std::vector<std::size_t> counts(num_classes, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) throw DimensionError("label out of range");
    sums.row(static_cast<Eigen::Index>(labels[i])) += samples.row(static_cast<Eigen::Index>(i));
    ++counts[labels[i]];
  }
  for (std::size_t l = 0; l < num_classes; ++l) {
    if (counts[l] == 0) throw InvalidArgument("class " + std::to_string(l) + " has no samples");
    sums.row(static_cast<Eigen::Index>(l)) /= static_cast<double>(counts[l]);
  }
  if (labels.size() <= num_classes) throw InvalidArgument("too few samples for pooled variance");

  Eigen::VectorXd pooled = Eigen::VectorXd::Zero(m);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Eigen::RowVectorXd d =
        samples.row(static_cast<Eigen::Index>(i)) - sums.row(static_cast<Eigen::Index>(labels[i]));
    pooled += d.transpose().cwiseAbs2();
  }
  pooled /= static_cast<double>(labels.size() - num_classes);
  return FeatureStatistics(std::move(sums), std::move(pooled));
}

FeatureStatistics FeatureStatistics::select(std::span<const std::size_t> dims) const {
  if (dims.empty()) throw InvalidArgument("empty dimension selection");
  Eigen::MatrixXd c(centroids_.rows(), static_cast<Eigen::Index>(dims.size()));
  Eigen::VectorXd v(static_cast<Eigen::Index>(dims.size()));
  for (std::size_t i = 0; i < dims.size(); ++i) {
    check_dim(*this, dims[i]);
    c.col(static_cast<Eigen::Index>(i)) = centroids_.col(static_cast<Eigen::Index>(dims[i]));
    v(static_cast<Eigen::Index>(i)) = variances_(static_cast<Eigen::Index>(dims[i]));
  }
  return FeatureStatistics(std::move(c), std::move(v));
}

double FeatureStatistics::pair_weight() const noexcept {
  const double l = static_cast<double>(num_classes());
  return l > 1 ? 2.0 / (l * (l - 1.0)) : 0.0;
}

nlohmann::json FeatureStatistics::to_json() const {
  nlohmann::json j;
  j["L"] = num_classes();
  j["M"] = num_dims();
  auto rows = nlohmann::json::array();
  for (Eigen::Index l = 0; l < centroids_.rows(); ++l) {
    std::vector<double> row(static_cast<std::size_t>(centroids_.cols()));
    for (Eigen::Index m = 0; m < centroids_.cols(); ++m) row[static_cast<std::size_t>(m)] = centroids_(l, m);
    rows.push_back(row);
  }
  j["centroids"] = rows;
  j["variances"] = std::vector<double>(variances_.data(), variances_.data() + variances_.size());
  return j;
}

FeatureStatistics FeatureStatistics::from_json(const nlohmann::json& j) {
  const auto l = j.at("L").get<std::size_t>();
  const auto m = j.at("M").get<std::size_t>();
  const auto& rows = j.at("centroids");
  if (rows.size() != l) throw DimensionError("centroids must have L rows");
  Eigen::MatrixXd c(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < l; ++i) {
    const auto row = rows[i].get<std::vector<double>>();
    if (row.size() != m) throw DimensionError("centroid rows must have M entries");
    for (std::size_t k = 0; k < m; ++k) c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
  }
  const auto var = j.at("variances").get<std::vector<double>>();
  if (var.size() != m) throw DimensionError("variances must have M entries");
  return FeatureStatistics(std::move(c), Eigen::Map<const Eigen::VectorXd>(var.data(), static_cast<Eigen::Index>(m)));
}

std::vector<std::size_t> ElementPair::elements() const {
  if (second) return {first, *second};
  return {first};
}

// ---------------------------------------------------------------------------
// Gains

double pairwise_element_gain(const FeatureStatistics& stats, std::size_t cls_a,
                             std::size_t cls_b, std::size_t dim) {
  check_class(stats, cls_a);
  check_class(stats, cls_b);
  check_dim(stats, dim);
  if (cls_a == cls_b) throw InvalidArgument("pairwise gain needs two distinct classes");
  const double d = stats.centroid(cls_a, dim) - stats.centroid(cls_b, dim);
  return d * d / stats.variance(dim);
}

double total_gain(const FeatureStatistics& stats, std::span<const std::size_t> dims) {
  if (dims.empty()) throw InvalidArgument("total gain needs at least one dimension");
  const std::size_t l = stats.num_classes();
  double sum = 0.0;
  for (std::size_t dim : dims)
    for (std::size_t b = 1; b < l; ++b)
      for (std::size_t a = 0; a < b; ++a) sum += pairwise_element_gain(stats, a, b, dim);
  return stats.pair_weight() * sum;
}

Eigen::VectorXd element_gains(const FeatureStatistics& stats) {
  Eigen::VectorXd g(static_cast<Eigen::Index>(stats.num_dims()));
  for (std::size_t m = 0; m < stats.num_dims(); ++m) {
    const std::size_t dims[] = {m};
    g(static_cast<Eigen::Index>(m)) = total_gain(stats, dims);
  }
  return g;
}

std::vector<std::size_t> rank_dims_by_gain(const FeatureStatistics& stats) {
  const Eigen::VectorXd g = element_gains(stats);
  std::vector<std::size_t> order(stats.num_dims());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return g(static_cast<Eigen::Index>(a)) > g(static_cast<Eigen::Index>(b));
  });
  return order;
}

std::vector<ElementPair> make_pairs(std::span<const std::size_t> ordered_dims) {
  std::vector<ElementPair> pairs;
  for (std::size_t i = 0; i < ordered_dims.size(); i += 2) {
    ElementPair p{ordered_dims[i], std::nullopt};
    if (i + 1 < ordered_dims.size()) p.second = ordered_dims[i + 1];
    pairs.push_back(p);
  }
  return pairs;
}

ReceivedElementStats received_element_stats(const FeatureStatistics& stats, std::size_t dim,
                                            const Eigen::VectorXd& steering,
                                            const Eigen::VectorXd& beamformer_half,
                                            const Eigen::VectorXd& sensing_noise,
                                            double rx_noise_power) {
  check_dim(stats, dim);
  if (steering.size() != sensing_noise.size())
    throw DimensionError("steering powers and sensing noise powers differ in length");
  if ((steering.array() < 0.0).any()) throw InvalidArgument("steering powers must be nonnegative");
  if ((sensing_noise.array() < 0.0).any()) throw InvalidArgument("sensing noise powers must be nonnegative");
  if (rx_noise_power < 0.0) throw InvalidArgument("receiver noise power must be nonnegative");

  const double total = steering.sum();
  ReceivedElementStats out;
  out.centroids = total * stats.centroids().col(static_cast<Eigen::Index>(dim));
  out.variance = stats.variance(dim) * total * total +
                 steering.cwiseAbs2().dot(sensing_noise) +
                 rx_noise_power * beamformer_half.squaredNorm();
  return out;
}

double received_gain(const FeatureStatistics& stats, const ElementPair& pair,
                     const Eigen::VectorXd& steering, const Eigen::VectorXd& beamformer_half,
                     const Eigen::VectorXd& sensing_noise, double rx_noise_power) {
  const std::size_t l = stats.num_classes();
  double gain = 0.0;
  for (std::size_t i = 0; i < pair.size(); ++i) {
    const auto rx = received_element_stats(stats, pair[i], steering, beamformer_half,
                                           sensing_noise, rx_noise_power);
    if (!(rx.variance > 0.0)) throw DegenerateDesign("received element variance is zero");
    double sum = 0.0;
    for (std::size_t b = 1; b < l; ++b)
      for (std::size_t a = 0; a < b; ++a) {
        const double d = rx.centroids(static_cast<Eigen::Index>(a)) - rx.centroids(static_cast<Eigen::Index>(b));
        sum += d * d;
      }
    gain += stats.pair_weight() * sum / rx.variance;
  }
  return gain;
}

double symbol_second_moment(const FeatureStatistics& stats, double sensing_noise,
                            const ElementPair& pair) {
  double moment = 0.0;
  for (std::size_t i = 0; i < pair.size(); ++i) {
    const std::size_t dim = pair[i];
    check_dim(stats, dim);
    const auto col = stats.centroids().col(static_cast<Eigen::Index>(dim));
    moment += col.squaredNorm() / static_cast<double>(stats.num_classes()) + stats.variance(dim) +
              sensing_noise;
  }
  return moment;
}

}  // namespace aircomp
