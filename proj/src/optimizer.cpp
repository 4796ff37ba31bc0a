#include "aircomp/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "aircomp/errors.hpp"

namespace aircomp {

namespace {

constexpr double kGapEpsilon = 1e-300;

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

/// Makes the first entry of largest magnitude positive so directions are
/// reproducible regardless of eigen-solver sign conventions.
Eigen::VectorXd canonical_sign(Eigen::VectorXd v) {
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  if (v(idx) < 0.0) v = -v;
  return v;
}

Eigen::VectorXd principal_eigenvector(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  return canonical_sign(eig.eigenvectors().col(m.cols() - 1));
}

}  // namespace

// ---------------------------------------------------------------------------
// PairProblem

PairProblem PairProblem::build(const FeatureStatistics& stats, const ElementPair& pair,
                               std::span<const Eigen::VectorXcd> channels,
                               std::span<const DeviceProfile> profiles, double rx_noise_power) {
  if (channels.size() != profiles.size()) throw DimensionError("one channel per device profile required");
  if (channels.empty()) throw InvalidArgument("need at least one device");
  if (rx_noise_power < 0.0) throw InvalidArgument("receiver noise power must be >= 0");
  for (const auto& h : channels)
    if (h.size() != channels.front().size() || h.size() == 0)
      throw DimensionError("all channels need the same nonzero antenna count");

  PairProblem p;
  p.pair = pair;
  p.channels.assign(channels.begin(), channels.end());
  p.rx_noise_power = rx_noise_power;
  p.weight = stats.pair_weight();
  const auto k = static_cast<Eigen::Index>(profiles.size());
  p.sensing_noise.resize(k);
  p.precoding_power.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& prof = profiles[static_cast<std::size_t>(i)];
    prof.validate();
    p.sensing_noise(i) = prof.sensing_noise_power;
    p.precoding_power(i) =
        max_precoding_power(prof.transmit_power_w, symbol_second_moment(stats, prof.sensing_noise_power, pair));
  }
  const std::size_t l = stats.num_classes();
  for (std::size_t e = 0; e < pair.size(); ++e) {
    const std::size_t dim = pair[e];
    if (dim >= stats.num_dims()) throw DimensionError("pair element out of range");
    for (std::size_t b = 1; b < l; ++b)
      for (std::size_t a = 0; a < b; ++a) {
        const double d = stats.centroid(a, dim) - stats.centroid(b, dim);
        if (d * d <= 1e-24 * stats.variance(dim)) continue;  // contributes nothing
        p.terms.push_back({e, a, b, d * d, stats.variance(dim)});
      }
  }
  return p;
}

Eigen::MatrixXd PairProblem::channel_gram(std::size_t k) const {
  const auto& h = channels.at(k);
  return h.real() * h.real().transpose() + h.imag() * h.imag().transpose();
}

double PairProblem::power_function(std::size_t k, const Eigen::VectorXd& f_hat) const {
  return 2.0 * precoding_power(static_cast<Eigen::Index>(k)) * effective_gain(f_hat, channels.at(k));
}

Eigen::VectorXd PairProblem::power_gradient(std::size_t k, const Eigen::VectorXd& f_hat) const {
  const auto& h = channels.at(k);
  const double re = f_hat.dot(h.real());
  const double im = f_hat.dot(h.imag());
  return 4.0 * precoding_power(static_cast<Eigen::Index>(k)) * (re * h.real() + im * h.imag());
}

double PairProblem::noise_function(std::size_t j, const Eigen::VectorXd& f_hat,
                                   const Eigen::VectorXd& c) const {
  const double s = c.sum();
  return c.cwiseAbs2().dot(sensing_noise) + rx_noise_power * f_hat.squaredNorm() +
         terms.at(j).variance * s * s;
}

double PairProblem::gap_function(std::size_t j, const Eigen::VectorXd& c, double alpha) const {
  const double s = c.sum();
  return s * s * terms.at(j).centroid_gap_sq / alpha;
}

double PairProblem::exact_alpha(std::size_t j, const Eigen::VectorXd& f_hat,
                                const Eigen::VectorXd& c) const {
  const double s = c.sum();
  const double var = noise_function(j, f_hat, c);
  if (!(var > 0.0)) throw DegenerateDesign("received element variance is zero");
  return s * s * terms.at(j).centroid_gap_sq / var;
}

Eigen::VectorXd PairProblem::exact_alphas(const Eigen::VectorXd& f_hat, const Eigen::VectorXd& c) const {
  Eigen::VectorXd a(static_cast<Eigen::Index>(terms.size()));
  for (std::size_t j = 0; j < terms.size(); ++j) a(static_cast<Eigen::Index>(j)) = exact_alpha(j, f_hat, c);
  return a;
}

double PairProblem::gain(const Eigen::VectorXd& f_hat, const Eigen::VectorXd& c) const {
  return weight * exact_alphas(f_hat, c).sum();
}

double PairProblem::steering_limit(std::size_t k, const Eigen::VectorXd& f_hat) const {
  return std::sqrt(power_function(k, f_hat));
}

nlohmann::json ScaState::to_json() const {
  return {{"f_hat", to_vec(f_hat)},
          {"c", to_vec(steering)},
          {"alpha", to_vec(alpha)},
          {"objective", objective},
          {"iteration", iteration},
          {"trace", trace}};
}

double constraint_violation(const PairProblem& problem, const ScaState& state) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < problem.num_devices(); ++k) {
    const double r = problem.power_function(k, state.f_hat);
    const double c = state.steering(static_cast<Eigen::Index>(k));
    worst = std::max(worst, (c * c - r) / std::max(r, 1.0));
    worst = std::max(worst, -c);
  }
  for (std::size_t j = 0; j < problem.num_terms(); ++j) {
    const double alpha = state.alpha(static_cast<Eigen::Index>(j));
    if (!(alpha > 0.0)) return std::numeric_limits<double>::infinity();
    const double q = problem.gap_function(j, state.steering, alpha);
    const double v = problem.noise_function(j, state.f_hat, state.steering);
    worst = std::max(worst, (v - q) / std::max(q, 1.0));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Subproblem

double ConvexSubproblem::power_hat(std::size_t k, const Eigen::VectorXd& f_hat) const {
  return power_value(static_cast<Eigen::Index>(k)) + power_grad.at(k).dot(f_hat - reference.f_hat);
}

double ConvexSubproblem::gap_hat(std::size_t j, const Eigen::VectorXd& c, double alpha) const {
  const auto jj = static_cast<Eigen::Index>(j);
  return gap_value(jj) + gap_grad_steering(jj) * (c.sum() - reference.steering.sum()) +
         gap_grad_alpha(jj) * (alpha - reference.alpha(jj));
}

Eigen::VectorXd dominant_direction(const PairProblem& problem) {
  const auto n = static_cast<Eigen::Index>(problem.num_antennas());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < problem.num_devices(); ++k)
    gram += problem.precoding_power(static_cast<Eigen::Index>(k)) * problem.channel_gram(k);
  if (gram.norm() > 0.0) {
    const Eigen::VectorXd v = principal_eigenvector(gram);
    if (v.allFinite() && v.norm() > 0.0) return v.normalized();
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
  for (const auto& h : problem.channels) sum += h.real();
  if (!(sum.norm() > 0.0)) throw InvalidArgument("all channels are zero");
  return canonical_sign(sum.normalized());
}

ScaState initialize_reference(const PairProblem& problem,
                              const std::optional<Eigen::VectorXd>& direction) {
  if (problem.num_terms() == 0) throw InvalidArgument("the pair has no separable class pairs");
  ScaState s;
  s.f_hat = direction ? Eigen::VectorXd(*direction) : dominant_direction(problem);
  if (static_cast<std::size_t>(s.f_hat.size()) != problem.num_antennas())
    throw DimensionError("initial direction has the wrong length");
  if (!(s.f_hat.norm() > 0.0)) throw InvalidArgument("initial direction is zero");
  s.f_hat.normalize();
  s.steering.resize(static_cast<Eigen::Index>(problem.num_devices()));
  for (std::size_t k = 0; k < problem.num_devices(); ++k)
    s.steering(static_cast<Eigen::Index>(k)) = problem.steering_limit(k, s.f_hat) * (1.0 - 1e-6);
  if (!(s.steering.sum() > 0.0)) throw InvalidArgument("initial beamformer reaches no device");
  s.alpha = problem.exact_alphas(s.f_hat, s.steering);
  s.objective = problem.weight * s.alpha.sum();
  s.trace.push_back(s.objective);
  return s;
}

ConvexSubproblem build_subproblem(const PairProblem& problem, const ScaState& reference,
                                  double alpha_floor) {
  for (Eigen::Index j = 0; j < reference.alpha.size(); ++j)
    if (!(reference.alpha(j) > alpha_floor * 1e-2))
      throw InvalidArgument("degenerate reference: per-pair gain variable below tolerance");
  if (static_cast<std::size_t>(reference.alpha.size()) != problem.num_terms())
    throw DimensionError("reference gain variables do not match the problem");

  ConvexSubproblem sub;
  sub.problem = &problem;
  sub.reference = reference;
  const auto k = static_cast<Eigen::Index>(problem.num_devices());
  const auto t = static_cast<Eigen::Index>(problem.num_terms());
  sub.power_value.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    sub.power_value(i) = problem.power_function(static_cast<std::size_t>(i), reference.f_hat);
    sub.power_grad.push_back(problem.power_gradient(static_cast<std::size_t>(i), reference.f_hat));
  }
  const double s = reference.steering.sum();
  sub.gap_value.resize(t);
  sub.gap_grad_steering.resize(t);
  sub.gap_grad_alpha.resize(t);
  for (Eigen::Index j = 0; j < t; ++j) {
    const double gap = problem.terms[static_cast<std::size_t>(j)].centroid_gap_sq;
    const double a = reference.alpha(j);
    sub.gap_value(j) = problem.gap_function(static_cast<std::size_t>(j), reference.steering, a);
    sub.gap_grad_steering(j) = 2.0 * s * gap / a;
    sub.gap_grad_alpha(j) = -(s * s * gap) / (a * a);
  }
  return sub;
}

SubproblemSolution solve_subproblem(const ConvexSubproblem& sub, const ScaOptions& options) {
  const PairProblem& p = *sub.problem;
  const auto n_f = static_cast<Eigen::Index>(p.num_antennas());
  const auto n_c = static_cast<Eigen::Index>(p.num_devices());
  const auto n_a = static_cast<Eigen::Index>(p.num_terms());
  const Eigen::Index n = n_f + n_c + n_a;
  const Eigen::Index off_c = n_f;
  const Eigen::Index off_a = n_f + n_c;
  const ScaState& ref = sub.reference;
  const double floor = std::min(options.alpha_floor, 0.5 * ref.alpha.minCoeff());

  std::vector<conic::QuadraticConstraint> cons;
  cons.reserve(static_cast<std::size_t>(2 * n_c + 2 * n_a + 1));

  // c_k² <= R̂_k(f̂)
  for (Eigen::Index k = 0; k < n_c; ++k) {
    conic::QuadraticConstraint g;
    g.P = Eigen::MatrixXd::Zero(n, n);
    g.P(off_c + k, off_c + k) = 2.0;
    g.q = Eigen::VectorXd::Zero(n);
    const Eigen::VectorXd& grad = sub.power_grad[static_cast<std::size_t>(k)];
    g.q.head(n_f) = -grad;
    g.r = -sub.power_value(k) + grad.dot(ref.f_hat);
    cons.push_back(std::move(g));
  }
  // σ²(Σc)² + Σc²ε² + δ₀²‖f̂‖² <= Q̂_j(c, α_j)
  for (Eigen::Index j = 0; j < n_a; ++j) {
    const GainTerm& term = p.terms[static_cast<std::size_t>(j)];
    conic::QuadraticConstraint g;
    g.P = Eigen::MatrixXd::Zero(n, n);
    g.P.topLeftCorner(n_f, n_f).diagonal().setConstant(2.0 * p.rx_noise_power);
    g.P.block(off_c, off_c, n_c, n_c).setConstant(2.0 * term.variance);
    g.P.block(off_c, off_c, n_c, n_c).diagonal() += 2.0 * p.sensing_noise;
    g.q = Eigen::VectorXd::Zero(n);
    g.q.segment(off_c, n_c).setConstant(-sub.gap_grad_steering(j));
    g.q(off_a + j) = -sub.gap_grad_alpha(j);
    g.r = -sub.gap_value(j) + sub.gap_grad_steering(j) * ref.steering.sum() +
          sub.gap_grad_alpha(j) * ref.alpha(j);
    cons.push_back(std::move(g));
  }
  for (Eigen::Index k = 0; k < n_c; ++k) {
    conic::QuadraticConstraint g;
    g.q = Eigen::VectorXd::Zero(n);
    g.q(off_c + k) = -1.0;
    cons.push_back(std::move(g));
  }
  for (Eigen::Index j = 0; j < n_a; ++j) {
    conic::QuadraticConstraint g;
    g.q = Eigen::VectorXd::Zero(n);
    g.q(off_a + j) = -1.0;
    g.r = floor;
    cons.push_back(std::move(g));
  }
  {
    const double radius = options.beamformer_radius * std::max(1.0, ref.f_hat.norm());
    conic::QuadraticConstraint g;
    g.P = Eigen::MatrixXd::Zero(n, n);
    g.P.topLeftCorner(n_f, n_f).diagonal().setConstant(2.0);
    g.q = Eigen::VectorXd::Zero(n);
    g.r = -radius * radius;
    cons.push_back(std::move(g));
  }

  Eigen::VectorXd cost = Eigen::VectorXd::Zero(n);
  cost.tail(n_a).setConstant(-p.weight);

  // Pull the reference slightly inside; the solver falls back to phase I if
  // this is still on the boundary.
  constexpr double eta = 1e-3;
  Eigen::VectorXd start(n);
  start.head(n_f) = ref.f_hat;
  for (Eigen::Index k = 0; k < n_c; ++k) {
    const double c = ref.steering(k);
    start(off_c + k) = c > 0.0 ? c * (1.0 - eta) : eta * std::sqrt(std::max(sub.power_value(k), 0.0));
  }
  start.tail(n_a) = (ref.alpha * (1.0 - 3.0 * eta)).cwiseMax(floor * 2.0);

  const conic::BarrierResult res = conic::minimize_linear(cost, cons, start, options.barrier);
  if (res.status == conic::SolveStatus::infeasible)
    throw SolverFailure("convex subproblem reported infeasible from a feasible reference");

  SubproblemSolution out;
  out.status = res.status;
  out.newton_steps = res.newton_steps;
  out.f_hat = res.x.head(n_f);
  out.steering = res.x.segment(off_c, n_c).cwiseMax(0.0);
  out.alpha = res.x.tail(n_a);
  out.objective = p.weight * out.alpha.sum();
  return out;
}

// ---------------------------------------------------------------------------
// SCA loop

namespace {

void probe_underestimators(const PairProblem& p, const ConvexSubproblem& sub, int probes, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const ScaState& ref = sub.reference;
  for (int i = 0; i < probes; ++i) {
    Eigen::VectorXd f = ref.f_hat;
    for (Eigen::Index n = 0; n < f.size(); ++n) f(n) += 0.5 * gauss(rng);
    Eigen::VectorXd c = ref.steering;
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = std::abs(c(k) * (1.0 + 0.5 * gauss(rng)));
    for (std::size_t k = 0; k < p.num_devices(); ++k) {
      const double exact = p.power_function(k, f);
      if (exact < sub.power_hat(k, f) - 1e-9 * std::max(1.0, std::abs(exact)))
        throw Error("power surrogate overestimates R_" + std::to_string(k));
    }
    for (std::size_t j = 0; j < p.num_terms(); ++j) {
      const double a = ref.alpha(static_cast<Eigen::Index>(j)) * std::exp(0.5 * gauss(rng));
      const double exact = p.gap_function(j, c, a);
      if (exact < sub.gap_hat(j, c, a) - 1e-9 * std::max(1.0, std::abs(exact)))
        throw Error("gain surrogate overestimates Q_" + std::to_string(j));
    }
  }
}

struct RunOutcome {
  ScaState state;
  bool converged = false;
};

RunOutcome run_from(const PairProblem& p, ScaState state, const ScaOptions& opt) {
  Rng probe_rng(0x5ca);
  RunOutcome out;
  for (int it = 0; it < opt.max_iter; ++it) {
    const ConvexSubproblem sub = build_subproblem(p, state, opt.alpha_floor);
    if (opt.underestimator_probes > 0) probe_underestimators(p, sub, opt.underestimator_probes, probe_rng);
    const SubproblemSolution sol = solve_subproblem(sub, opt);

    // Reference update: rescale to a unit beamformer (the objective and
    // constraints are invariant under joint scaling of f̂ and c) and tighten α
    // to the exact ratios, which keeps feasibility and can only raise the
    // objective.
    const double norm = sol.f_hat.norm();
    if (!(norm > 0.0) || !(sol.steering.sum() > 0.0)) break;
    ScaState next;
    next.f_hat = sol.f_hat / norm;
    next.steering = sol.steering / norm;
    next.alpha = p.exact_alphas(next.f_hat, next.steering);
    next.objective = p.weight * next.alpha.sum();
    if (!(next.objective >= state.objective)) {
      // The surrogate optimum is within solver tolerance of the reference.
      out.converged = true;
      break;
    }
    const double improvement = (next.objective - state.objective) / std::max(std::abs(state.objective), 1e-300);
    next.iteration = state.iteration + 1;
    next.trace = std::move(state.trace);
    next.trace.push_back(next.objective);
    state = std::move(next);
    if (opt.on_iteration) opt.on_iteration(state, sub);
    if (improvement < opt.rel_tol) {
      out.converged = true;
      break;
    }
  }
  out.state = std::move(state);
  return out;
}

}  // namespace

ScaResult sca_optimize(const PairProblem& problem, const ScaOptions& options) {
  if (options.max_iter < 1) throw InvalidArgument("max_iter must be >= 1");
  if (!(options.rel_tol > 0.0)) throw InvalidArgument("rel_tol must be > 0");

  std::vector<Eigen::VectorXd> starts{dominant_direction(problem)};
  if (options.multi_start && problem.num_devices() > 1) {
    for (std::size_t k = 0; k < problem.num_devices(); ++k) {
      const Eigen::MatrixXd g = problem.channel_gram(k);
      if (g.norm() > 0.0) starts.push_back(principal_eigenvector(g).normalized());
    }
  }

  ScaResult best;
  bool have = false;
  for (const auto& dir : starts) {
    ScaState init;
    try {
      init = initialize_reference(problem, dir);
    } catch (const InvalidArgument&) {
      continue;  // direction reaches no device
    }
    RunOutcome run = run_from(problem, std::move(init), options);
    if (!have || run.state.objective > best.state.objective) {
      best.state = std::move(run.state);
      best.converged = run.converged;
      have = true;
    }
  }
  if (!have) throw InvalidArgument("no feasible initialization: all channels are zero");
  best.starts = starts.size();
  best.design = make_design(best.state.f_hat, problem.channels, best.state.steering);
  return best;
}

}  // namespace aircomp
