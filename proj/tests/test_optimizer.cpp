#include <doctest.h>

#include <random>

#include "aircomp/errors.hpp"
#include "aircomp/optimizer.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace aircomp;

TEST_CASE("pair problem construction") {
  const auto p = fixture::random_problem(3, 4, 1, {0.4, 0.2, 0.1}, 0.5);
  CHECK(p.num_devices() == 3);
  CHECK(p.num_antennas() == 4);
  CHECK(p.num_terms() == 12);  // 6 class pairs × 2 elements
  CHECK(p.weight == doctest::Approx(1.0 / 6.0));
  CHECK_THROWS_AS(PairProblem::build(fixture::random_stats(4, 2, 1), ElementPair{0, 1}, fixture::random_channels(2, 3, 1),
                                     fixture::profiles({0.4}, 1.0), 1.0),
                  DimensionError);
}

TEST_CASE("initial reference is feasible") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = fixture::random_problem(3, 8, seed, {0.4, 0.4, 0.4}, 0.0158);
    const ScaState s = initialize_reference(p);
    CHECK(constraint_violation(p, s) <= 1e-9);
    CHECK(s.objective > 0.0);
    CHECK(std::isfinite(s.objective));
    CHECK(s.objective == doctest::Approx(p.gain(s.f_hat, s.steering)).epsilon(1e-12));
  }
}

TEST_CASE("surrogates are anchored at the reference and under-estimate") {
  const auto p = fixture::random_problem(3, 4, 2, {0.3, 0.5, 0.9}, 1.0);
  const ScaState ref = initialize_reference(p);
  const ConvexSubproblem sub = build_subproblem(p, ref);
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(sub.power_hat(k, ref.f_hat) == doctest::Approx(p.power_function(k, ref.f_hat)).epsilon(1e-14));
  for (std::size_t j = 0; j < p.num_terms(); ++j)
    CHECK(sub.gap_hat(j, ref.steering, ref.alpha(static_cast<Eigen::Index>(j))) ==
          doctest::Approx(p.gap_function(j, ref.steering, ref.alpha(static_cast<Eigen::Index>(j)))).epsilon(1e-14));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXd f = ref.f_hat;
    for (Eigen::Index n = 0; n < f.size(); ++n) f(n) += n01(rng);
    Eigen::VectorXd c = ref.steering;
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = std::abs(c(k) + n01(rng) * c(k));
    for (std::size_t k = 0; k < 3; ++k) CHECK(p.power_function(k, f) >= sub.power_hat(k, f) - 1e-12);
    for (std::size_t j = 0; j < p.num_terms(); ++j) {
      const double a = ref.alpha(static_cast<Eigen::Index>(j)) * std::exp(n01(rng));
      CHECK(p.gap_function(j, c, a) >= sub.gap_hat(j, c, a) - 1e-12 * std::abs(p.gap_function(j, c, a)));
    }
  }
}

TEST_CASE("a subproblem solution does not lose objective") {
  const auto p = fixture::random_problem(2, 4, 4, {0.4, 0.8}, 0.1);
  const ScaState ref = initialize_reference(p);
  const auto sol = solve_subproblem(build_subproblem(p, ref));
  CHECK(sol.status == conic::SolveStatus::optimal);
  CHECK(sol.objective >= ref.objective * (1 - 1e-9));
}

TEST_CASE("single device, single antenna closed form") {
  const auto stats = fixture::random_stats(3, 2, 5);
  const std::vector<Eigen::VectorXcd> h{Eigen::VectorXcd::Constant(1, std::complex<double>(0.7, 0.0))};
  const auto prof = fixture::profiles({0.3}, 0.2);
  const auto p = PairProblem::build(stats, ElementPair{0, 1}, h, prof, 1.0);
  const auto r = sca_optimize(p);
  const double p_hat = p.precoding_power(0);
  const double c2 = 2.0 * p_hat * 0.49;  // c² at the limit for unit f̂
  double expect = 0.0;
  for (const auto& t : p.terms) expect += t.centroid_gap_sq * c2 / (t.variance * c2 + c2 * 0.3 + 1.0);
  expect *= p.weight;
  CHECK(r.state.objective == doctest::Approx(expect).epsilon(1e-6));
  CHECK(r.state.steering(0) * r.state.steering(0) == doctest::Approx(c2 * r.state.f_hat.squaredNorm()).epsilon(1e-6));
}

TEST_CASE("noise-free instance attains the total gain") {
  const auto stats = fixture::random_stats(4, 2, 6);
  const auto h = fixture::random_channels(3, 4, 6);
  const auto p = PairProblem::build(stats, ElementPair{0, 1}, h, fixture::profiles({0.0, 0.0, 0.0}, 1.0), 0.0);
  const auto r = sca_optimize(p);
  const std::vector<std::size_t> dims{0, 1};
  CHECK(r.state.objective == doctest::Approx(total_gain(stats, dims)).epsilon(1e-9));
}

TEST_CASE("SCA trace is nondecreasing and iterates stay feasible") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto p = fixture::random_problem(3, 4, seed + 100, {0.2, 0.5, 1.0}, 0.05);
    ScaOptions opt;
    opt.max_iter = 40;
    int calls = 0;
    opt.on_iteration = [&](const ScaState& s, const ConvexSubproblem&) {
      ++calls;
      CHECK(constraint_violation(p, s) <= 1e-7);
    };
    const auto r = sca_optimize(p, opt);
    CHECK(calls > 0);
    CHECK(r.state.trace.size() <= static_cast<std::size_t>(opt.max_iter) + 1);
    for (std::size_t i = 1; i < r.state.trace.size(); ++i) CHECK(r.state.trace[i] >= r.state.trace[i - 1]);
    CHECK(check_design(r.design, p.channels, p.precoding_power).ok(1e-7));
  }
}

TEST_CASE("built-in under-estimator probes") {
  const auto p = fixture::random_problem(2, 4, 9, {0.4, 0.6}, 0.05);
  ScaOptions opt;
  opt.underestimator_probes = 200;
  CHECK_NOTHROW(sca_optimize(p, opt));
}

TEST_CASE("SCA matches a dense grid on two devices and two antennas") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto stats = fixture::random_stats(4, 2, seed + 40);
    const auto h = fixture::random_channels(2, 2, seed + 41);
    const auto p = PairProblem::build(stats, ElementPair{0, 1}, h, fixture::profiles({0.3, 0.9}, 0.2), 1.0);
    const auto grid = oracle::grid_search_k2n2(stats.centroids(), stats.variances(), {0, 1}, h,
                                               Eigen::Vector2d(p.precoding_power(0), p.precoding_power(1)),
                                               Eigen::Vector2d(0.3, 0.9), 1.0);
    const auto r = sca_optimize(p);
    CHECK(r.state.objective == doctest::Approx(grid.gain).epsilon(0.01));
  }
}

TEST_CASE("KKT diagnostics") {
  ScaOptions tight;
  tight.rel_tol = 1e-12;
  tight.max_iter = 500;
  SUBCASE("equal sensing noise gives equal normalized steering") {
    const auto p = fixture::random_problem(4, 8, 11, {0.4, 0.4, 0.4, 0.4}, 1.0, 1.0, {1.0, 30.0, 30.0, 30.0});
    const auto r = sca_optimize(p, tight);
    const auto d = kkt_check(p, r.state);
    REQUIRE(d.inactive_count >= 2);
    std::vector<double> inactive;
    for (Eigen::Index k = 0; k < 4; ++k)
      if (!d.power_active[static_cast<std::size_t>(k)]) inactive.push_back(d.normalized_steering(k));
    for (double v : inactive) CHECK(v == doctest::Approx(inactive.front()).epsilon(0.02));
  }
  SUBCASE("active devices carry positive multipliers") {
    const auto p = fixture::random_problem(3, 8, 12, {0.2, 0.5, 0.9}, 0.01);
    const auto r = sca_optimize(p, tight);
    const auto d = kkt_check(p, r.state);
    bool any = false;
    for (std::size_t k = 0; k < 3; ++k) {
      if (!d.power_active[k]) continue;
      any = true;
      CHECK(d.power_multipliers(static_cast<Eigen::Index>(k)) > 0.0);
      const double c = r.state.steering(static_cast<Eigen::Index>(k));
      CHECK(c * c == doctest::Approx(p.power_function(k, r.state.f_hat)).epsilon(1e-4));
    }
    CHECK(any);
    CHECK(d.kkt_satisfied);
  }
}

TEST_CASE("baselines") {
  SUBCASE("identical channels give the full-power uniform design") {
    const auto stats = fixture::random_stats(4, 2, 3);
    const auto one = fixture::random_channels(1, 4, 3);
    const std::vector<Eigen::VectorXcd> h(3, one[0]);
    const auto p = PairProblem::build(stats, ElementPair{0, 1}, h, fixture::profiles({0.4, 0.4, 0.4}, 1.0), 1.0);
    const auto d = baseline_mmse_centroid(p);
    for (std::size_t k = 0; k < 3; ++k)
      CHECK(d.steering(static_cast<Eigen::Index>(k)) == doctest::Approx(p.steering_limit(k, d.beamformer_half)).epsilon(1e-12));
  }
  SUBCASE("the weakest device sets the common steering power") {
    auto h = fixture::random_channels(3, 4, 4);
    h[1] *= 0.01;
    const auto p = PairProblem::build(fixture::random_stats(4, 2, 4), ElementPair{0, 1}, h,
                                      fixture::profiles({0.4, 0.4, 0.4}, 1.0), 1.0);
    const auto d = baseline_mmse_centroid(p);
    CHECK(d.steering(0) == d.steering(2));
    CHECK(d.steering(0) == doctest::Approx(p.steering_limit(1, d.beamformer_half)).epsilon(1e-12));
  }
  SUBCASE("proposed dominates both baselines") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto p = fixture::random_problem(3, 8, seed + 60, {0.4, 0.4, 0.4}, 0.01);
      const auto r = sca_optimize(p);
      Rng rng(seed);
      const auto rnd = baseline_random(p, rng);
      const auto mm = baseline_mmse_centroid(p);
      CHECK(r.state.objective >= p.gain(mm.beamformer_half, mm.steering) * (1 - 1e-9));
      CHECK(r.state.objective >= p.gain(rnd.beamformer_half, rnd.steering) * (1 - 1e-9));
      CHECK(check_design(rnd, p.channels, p.precoding_power).ok(1e-9));
      CHECK(check_design(mm, p.channels, p.precoding_power).ok(1e-9));
    }
  }
}
