// Independent reference computations for the tests. Nothing here calls into
// the library's math; inputs are plain Eigen objects.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix; eigenvalues sorted
/// descending, eigenvectors in matching columns.
inline void jacobi_eigen(Eigen::MatrixXd a, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) > a(j, j); });
  values.resize(n);
  vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    values(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
}

/// Class-pair averaged Δμ²/σ² summed over `dims`, straight from the definition.
inline double gain(const Eigen::MatrixXd& mu, const Eigen::VectorXd& var, const std::vector<std::size_t>& dims) {
  const auto L = mu.rows();
  double g = 0.0;
  for (auto m : dims)
    for (Eigen::Index a = 0; a < L; ++a)
      for (Eigen::Index b = a + 1; b < L; ++b) {
        const double d = mu(a, static_cast<Eigen::Index>(m)) - mu(b, static_cast<Eigen::Index>(m));
        g += d * d / var(static_cast<Eigen::Index>(m));
      }
  return 2.0 * g / static_cast<double>(L * (L - 1));
}

/// Gain of the received elements of one pair for unit-free steering powers c and
/// beamformer half f (noise power scales with ‖f‖²).
inline double received_gain(const Eigen::MatrixXd& mu, const Eigen::VectorXd& var, const std::vector<std::size_t>& dims,
                            const Eigen::VectorXd& c, double f_norm_sq, const Eigen::VectorXd& eps2, double rx) {
  const double s = c.sum();
  double spread = rx * f_norm_sq;
  for (Eigen::Index k = 0; k < c.size(); ++k) spread += c(k) * c(k) * eps2(k);
  const auto L = mu.rows();
  double g = 0.0;
  for (auto m : dims) {
    const auto mm = static_cast<Eigen::Index>(m);
    const double v = var(mm) * s * s + spread;
    for (Eigen::Index a = 0; a < L; ++a)
      for (Eigen::Index b = a + 1; b < L; ++b) {
        const double d = s * (mu(a, mm) - mu(b, mm));
        g += d * d / v;
      }
  }
  return 2.0 * g / static_cast<double>(L * (L - 1));
}

/// Largest pair gain over unit beamformers f = (cos θ, sin θ) and steering powers
/// in the box c_k ≤ sqrt(2 P̂_k |fᵀh_k|²), K = 2, N = 2. Coarse grid followed by
/// successive zooms around the incumbent.
struct GridResult {
  double gain = 0.0;
  double theta = 0.0;
  Eigen::Vector2d c;
};

inline GridResult grid_search_k2n2(const Eigen::MatrixXd& mu, const Eigen::VectorXd& var,
                                   const std::vector<std::size_t>& dims, const std::vector<Eigen::VectorXcd>& h,
                                   const Eigen::Vector2d& p_hat, const Eigen::Vector2d& eps2, double rx) {
  auto limit = [&](double theta, int k) {
    const std::complex<double> g = std::cos(theta) * h[static_cast<std::size_t>(k)](0) +
                                   std::sin(theta) * h[static_cast<std::size_t>(k)](1);
    return std::sqrt(2.0 * p_hat(k) * std::norm(g));
  };
  GridResult best;
  auto scan = [&](double t_lo, double t_hi, int nt, double u_lo[2], double u_hi[2], int nc) {
    for (int it = 0; it <= nt; ++it) {
      const double theta = t_lo + (t_hi - t_lo) * it / nt;
      const double a0 = limit(theta, 0), a1 = limit(theta, 1);
      for (int i = 0; i <= nc; ++i)
        for (int j = 0; j <= nc; ++j) {
          const double u0 = std::clamp(u_lo[0] + (u_hi[0] - u_lo[0]) * i / nc, 0.0, 1.0);
          const double u1 = std::clamp(u_lo[1] + (u_hi[1] - u_lo[1]) * j / nc, 0.0, 1.0);
          const Eigen::VectorXd c = Eigen::Vector2d(u0 * a0, u1 * a1);
          if (!(c.sum() > 0.0)) continue;
          const double g = received_gain(mu, var, dims, c, 1.0, eps2, rx);
          if (g > best.gain) {
            best.gain = g;
            best.theta = theta;
            best.c = Eigen::Vector2d(u0, u1);  // fractions of the limit while searching
          }
        }
    }
  };
  const double pi = std::acos(-1.0);
  double lo[2] = {0.0, 0.0}, hi[2] = {1.0, 1.0};
  scan(0.0, pi, 720, lo, hi, 40);
  double dt = pi / 720, du = 1.0 / 40;
  for (int round = 0; round < 8; ++round) {
    const double t0 = best.theta;
    double l[2] = {best.c(0) - 2 * du, best.c(1) - 2 * du};
    double u[2] = {best.c(0) + 2 * du, best.c(1) + 2 * du};
    scan(t0 - 2 * dt, t0 + 2 * dt, 40, l, u, 40);
    dt /= 10;
    du /= 10;
  }
  best.c = Eigen::Vector2d(best.c(0) * limit(best.theta, 0), best.c(1) * limit(best.theta, 1));
  return best;
}

/// Posterior-maximizing class of a diagonal Gaussian mixture with equal priors,
/// computed from full log densities.
inline std::size_t bayes_decide(const Eigen::MatrixXd& mu, const Eigen::VectorXd& var, const Eigen::VectorXd& x) {
  const double log2pi = std::log(2.0 * std::acos(-1.0));
  std::size_t best = 0;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (Eigen::Index l = 0; l < mu.rows(); ++l) {
    double ll = 0.0;
    for (Eigen::Index m = 0; m < mu.cols(); ++m) {
      const double d = x(m) - mu(l, m);
      ll += -0.5 * (log2pi + std::log(var(m)) + d * d / var(m));
    }
    if (ll > best_ll) {
      best_ll = ll;
      best = static_cast<std::size_t>(l);
    }
  }
  return best;
}

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// Monte-Carlo accuracy of the Bayes classifier on the mixture itself.
inline Estimate bayes_accuracy(const Eigen::MatrixXd& mu, const Eigen::VectorXd& var, std::size_t draws,
                               std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::size_t hit = 0;
  Eigen::VectorXd x(mu.cols());
  for (std::size_t i = 0; i < draws; ++i) {
    const auto label = static_cast<Eigen::Index>(i % static_cast<std::size_t>(mu.rows()));
    for (Eigen::Index m = 0; m < mu.cols(); ++m) x(m) = mu(label, m) + std::sqrt(var(m)) * n01(rng);
    if (bayes_decide(mu, var, x) == static_cast<std::size_t>(label)) ++hit;
  }
  const double p = static_cast<double>(hit) / static_cast<double>(draws);
  return {p, std::sqrt(p * (1 - p) / static_cast<double>(draws))};
}

/// Running mean and variance with standard errors of both.
struct Moments {
  std::size_t n = 0;
  double mean = 0.0, m2 = 0.0, m4 = 0.0;
  std::vector<double> xs;

  void add(double x) { xs.push_back(x); }
  void finish() {
    n = xs.size();
    mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
    for (double x : xs) {
      const double d = x - mean;
      m2 += d * d;
      m4 += d * d * d * d;
    }
    m2 /= static_cast<double>(n - 1);
    m4 /= static_cast<double>(n);
  }
  double variance() const { return m2; }
  double mean_se() const { return std::sqrt(m2 / static_cast<double>(n)); }
  double variance_se() const { return std::sqrt(std::max(m4 - m2 * m2, 0.0) / static_cast<double>(n)); }
};

/// Spearman rank correlation (average ranks for ties).
inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto i, auto j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * static_cast<double>(i + j) + 1.0;
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double num = 0, da = 0, db = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  return num / std::sqrt(da * db);
}

}  // namespace oracle
