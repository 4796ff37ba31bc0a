#include "aircomp/optimizer.hpp"

#include <limits>

#include "aircomp/errors.hpp"

namespace aircomp {

namespace {

Eigen::VectorXd full_power(const PairProblem& p, const Eigen::VectorXd& f_hat) {
  Eigen::VectorXd c(static_cast<Eigen::Index>(p.num_devices()));
  for (std::size_t k = 0; k < p.num_devices(); ++k) c(static_cast<Eigen::Index>(k)) = p.steering_limit(k, f_hat);
  return c;
}

Eigen::VectorXd top_eigenvector(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  Eigen::VectorXd v = eig.eigenvectors().col(m.cols() - 1);
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  return v(idx) < 0.0 ? Eigen::VectorXd(-v) : v;
}

}  // namespace

TransceiverDesign baseline_random(const PairProblem& problem, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd f(static_cast<Eigen::Index>(problem.num_antennas()));
  do {
    for (Eigen::Index n = 0; n < f.size(); ++n) f(n) = gauss(rng);
  } while (!(f.norm() > 0.0));
  f.normalize();
  return make_design(f, problem.channels, full_power(problem, f));
}

TransceiverDesign baseline_mmse_centroid(const PairProblem& problem) {
  const auto n = static_cast<Eigen::Index>(problem.num_antennas());
  std::vector<Eigen::VectorXd> candidates;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < problem.num_devices(); ++k) {
    const Eigen::MatrixXd g = problem.channel_gram(k);
    sum += g;
    if (g.norm() > 0.0) candidates.push_back(top_eigenvector(g));
  }
  if (sum.norm() > 0.0) candidates.insert(candidates.begin(), top_eigenvector(sum));
  if (candidates.empty()) candidates.push_back(Eigen::VectorXd::Unit(n, 0));

  // Equalization: every device lands at the same steering power, so the
  // weakest effective channel sets it.
  Eigen::VectorXd best_f = candidates.front().normalized();
  double best_c = -1.0;
  for (const auto& cand : candidates) {
    const Eigen::VectorXd f = cand.normalized();
    double c = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < problem.num_devices(); ++k) c = std::min(c, problem.steering_limit(k, f));
    if (c > best_c) {
      best_c = c;
      best_f = f;
    }
  }
  const Eigen::VectorXd steering =
      Eigen::VectorXd::Constant(static_cast<Eigen::Index>(problem.num_devices()), std::max(best_c, 0.0));
  return make_design(best_f, problem.channels, steering);
}

}  // namespace aircomp
