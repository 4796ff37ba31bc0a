#include "aircomp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "aircomp/errors.hpp"
#include "aircomp/optimizer.hpp"
#include "aircomp/transceiver.hpp"

namespace aircomp {

// ---------------------------------------------------------------------------
// Names

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::proposed: return "proposed";
    case Scheme::mmse_centroid: return "mmse_centroid";
    case Scheme::random: return "random";
  }
  return "unknown";
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::none: return "none";
    case SweepAxis::devices: return "devices";
    case SweepAxis::power: return "power";
    case SweepAxis::pca_dims: return "pca_dims";
  }
  return "unknown";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "proposed") return Scheme::proposed;
  if (name == "mmse_centroid" || name == "mmse") return Scheme::mmse_centroid;
  if (name == "random" || name == "baseline") return Scheme::random;
  throw InvalidArgument("unknown scheme '" + name + "'");
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "none") return SweepAxis::none;
  if (name == "devices") return SweepAxis::devices;
  if (name == "power") return SweepAxis::power;
  if (name == "pca_dims" || name == "dims") return SweepAxis::pca_dims;
  throw InvalidArgument("unknown sweep axis '" + name + "'");
}

// ---------------------------------------------------------------------------
// Config

namespace {

bool is_count(double v) { return v >= 1.0 && std::floor(v) == v; }

std::size_t max_devices(const ExperimentConfig& c) {
  std::size_t k = c.scenario.devices;
  if (c.sweep.axis == SweepAxis::devices)
    for (double v : c.sweep.values) k = std::max(k, static_cast<std::size_t>(v));
  return k;
}

}  // namespace

void ExperimentConfig::validate() const {
  const auto& s = scenario;
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  if (s.devices < 1) throw InvalidArgument("devices must be >= 1");
  if (s.antennas < 1) throw InvalidArgument("antennas must be >= 1");
  if (!(s.min_distance_m > 0.0) || !(s.radius_m > s.min_distance_m))
    throw InvalidArgument("need radius_m > min_distance_m > 0");
  if (s.shadowing_variance_db < 0.0) throw InvalidArgument("shadowing_variance_db must be >= 0");
  if (s.rx_noise_power < 0.0) throw InvalidArgument("rx_noise_power must be >= 0");
  if (!(s.channel_noise_power_w > 0.0)) throw InvalidArgument("channel_noise_power_w must be > 0");
  if (s.channel_blocks < 1 || s.channel_blocks > trials)
    throw InvalidArgument("channel_blocks must lie in [1, trials]");
  if (s.sensing_noise_power.empty()) throw InvalidArgument("sensing_noise_power needs a value");
  for (double e : s.sensing_noise_power)
    if (!(e >= 0.0)) throw InvalidArgument("sensing noise powers must be >= 0");
  if (s.sensing_noise_power.size() != 1 && s.sensing_noise_power.size() < max_devices(*this))
    throw InvalidArgument("sensing_noise_power needs one value or one per device");

  const auto& f = features;
  if (f.source != "synthetic" && f.source != "samples" && f.source != "file")
    throw InvalidArgument("features.source must be synthetic, samples or file");
  if (f.source != "file") {
    if (f.classes < 2) throw InvalidArgument("need at least two classes");
    if (f.dims < 1) throw InvalidArgument("need at least one feature dimension");
    if (!(f.variance > 0.0)) throw InvalidArgument("feature variance must be > 0");
    if (f.used_dims && (*f.used_dims < 1 || *f.used_dims > f.dims))
      throw InvalidArgument("used_dims must lie in [1, dims]");
  } else if (f.path.empty()) {
    throw InvalidArgument("features.path is required for the file source");
  }
  if (f.source == "samples") {
    if (f.raw_dim < f.dims) throw InvalidArgument("raw_dim must be >= dims");
    if (f.samples_per_class < 2) throw InvalidArgument("samples_per_class must be >= 2");
  }

  if (sweep.axis != SweepAxis::none) {
    if (sweep.values.empty()) throw InvalidArgument("sweep needs at least one value");
    for (std::size_t i = 1; i < sweep.values.size(); ++i)
      if (!(sweep.values[i] > sweep.values[i - 1]))
        throw InvalidArgument("sweep values must be strictly increasing");
    for (double v : sweep.values) {
      if (sweep.axis == SweepAxis::devices && !is_count(v))
        throw InvalidArgument("device sweep values must be positive integers");
      if (sweep.axis == SweepAxis::pca_dims &&
          (!is_count(v) || (f.source != "file" && v > static_cast<double>(f.dims))))
        throw InvalidArgument("pca_dims sweep values must be integers in [1, dims]");
      if (!std::isfinite(v)) throw InvalidArgument("sweep values must be finite");
    }
  }
  if (schemes.empty()) throw InvalidArgument("at least one scheme is required");
  if (optimizer.max_iter < 1) throw InvalidArgument("optimizer.max_iter must be >= 1");
  if (!(optimizer.rel_tol > 0.0)) throw InvalidArgument("optimizer.rel_tol must be > 0");
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  const auto& s = scenario;
  j["scenario"] = {{"devices", s.devices},
                   {"antennas", s.antennas},
                   {"radius_m", s.radius_m},
                   {"min_distance_m", s.min_distance_m},
                   {"shadowing_variance_db", s.shadowing_variance_db},
                   {"rx_noise_power", s.rx_noise_power},
                   {"channel_noise_power_w", s.channel_noise_power_w},
                   {"sensing_noise_power", s.sensing_noise_power},
                   {"transmit_power_dbm", s.transmit_power_dbm},
                   {"seed", s.seed},
                   {"channel_blocks", s.channel_blocks}};
  const auto& f = features;
  j["features"] = {{"source", f.source},       {"classes", f.classes},
                   {"dims", f.dims},           {"separation", f.separation},
                   {"decay", f.decay},         {"variance", f.variance},
                   {"seed", f.seed},           {"raw_dim", f.raw_dim},
                   {"samples_per_class", f.samples_per_class}, {"path", f.path}};
  if (f.used_dims) j["features"]["used_dims"] = *f.used_dims;
  j["sweep"] = {{"axis", to_string(sweep.axis)}, {"values", sweep.values}};
  j["trials"] = trials;
  auto names = nlohmann::json::array();
  for (Scheme sc : schemes) names.push_back(to_string(sc));
  j["schemes"] = names;
  j["optimizer"] = {{"max_iter", optimizer.max_iter},
                    {"rel_tol", optimizer.rel_tol},
                    {"multi_start", optimizer.multi_start}};
  j["report_timing"] = report_timing;
  j["threads"] = threads;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  if (j.contains("scenario")) {
    const auto& s = j.at("scenario");
    auto& o = c.scenario;
    o.devices = s.value("devices", o.devices);
    o.antennas = s.value("antennas", o.antennas);
    o.radius_m = s.value("radius_m", o.radius_m);
    o.min_distance_m = s.value("min_distance_m", o.min_distance_m);
    o.shadowing_variance_db = s.value("shadowing_variance_db", o.shadowing_variance_db);
    o.rx_noise_power = s.value("rx_noise_power", o.rx_noise_power);
    o.channel_noise_power_w = s.value("channel_noise_power_w", o.channel_noise_power_w);
    if (s.contains("sensing_noise_power")) {
      const auto& e = s.at("sensing_noise_power");
      o.sensing_noise_power = e.is_array() ? e.get<std::vector<double>>() : std::vector<double>{e.get<double>()};
    }
    o.transmit_power_dbm = s.value("transmit_power_dbm", o.transmit_power_dbm);
    o.seed = s.value("seed", o.seed);
    o.channel_blocks = s.value("channel_blocks", o.channel_blocks);
  }
  if (j.contains("features")) {
    const auto& f = j.at("features");
    auto& o = c.features;
    o.source = f.value("source", o.source);
    o.classes = f.value("classes", o.classes);
    o.dims = f.value("dims", o.dims);
    o.separation = f.value("separation", o.separation);
    o.decay = f.value("decay", o.decay);
    o.variance = f.value("variance", o.variance);
    o.seed = f.value("seed", o.seed);
    o.raw_dim = f.value("raw_dim", o.raw_dim);
    o.samples_per_class = f.value("samples_per_class", o.samples_per_class);
    o.path = f.value("path", o.path);
    if (f.contains("used_dims") && !f.at("used_dims").is_null()) o.used_dims = f.at("used_dims").get<std::size_t>();
  }
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    c.sweep.axis = parse_sweep_axis(s.value("axis", std::string("none")));
    c.sweep.values = s.value("values", std::vector<double>{});
  }
  c.trials = j.value("trials", c.trials);
  if (j.contains("schemes")) {
    c.schemes.clear();
    for (const auto& n : j.at("schemes")) c.schemes.push_back(parse_scheme(n.get<std::string>()));
  }
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    c.optimizer.max_iter = o.value("max_iter", c.optimizer.max_iter);
    c.optimizer.rel_tol = o.value("rel_tol", c.optimizer.rel_tol);
    c.optimizer.multi_start = o.value("multi_start", c.optimizer.multi_start);
  }
  c.report_timing = j.value("report_timing", c.report_timing);
  c.threads = j.value("threads", c.threads);
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

ExperimentConfig apply_sweep_value(const ExperimentConfig& config, double value) {
  ExperimentConfig c = config;
  switch (config.sweep.axis) {
    case SweepAxis::none: break;
    case SweepAxis::devices: c.scenario.devices = static_cast<std::size_t>(value); break;
    case SweepAxis::power: c.scenario.transmit_power_dbm = value; break;
    case SweepAxis::pca_dims: c.features.used_dims = static_cast<std::size_t>(value); break;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Feature source

namespace {

Eigen::MatrixXd synthetic_centroids(const FeatureConfig& f) {
  Rng rng = make_rng(f.seed, Stream::features);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd mu(static_cast<Eigen::Index>(f.classes), static_cast<Eigen::Index>(f.dims));
  for (Eigen::Index m = 0; m < mu.cols(); ++m) {
    const double spread = f.separation * std::pow(f.decay, static_cast<double>(m));
    for (Eigen::Index l = 0; l < mu.rows(); ++l) mu(l, m) = spread * gauss(rng);
  }
  return mu;
}

}  // namespace

FeatureSource build_feature_source(const FeatureConfig& f) {
  if (f.source == "file") {
    std::ifstream in(f.path);
    if (!in) throw InvalidArgument("cannot open feature statistics file " + f.path);
    nlohmann::json j;
    in >> j;
    return {FeatureStatistics::from_json(j), std::nullopt, std::nullopt};
  }
  const Eigen::MatrixXd mu = synthetic_centroids(f);
  const Eigen::VectorXd var = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(f.dims), f.variance);
  if (f.source == "synthetic") return {FeatureStatistics(mu, var), std::nullopt, std::nullopt};

  // Raw data: centroids embedded in a random subspace of the raw space with
  // isotropic noise; PCA recovers the feature space from training samples.
  Rng rng = make_rng(f.seed, Stream::features, {1});
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd g(static_cast<Eigen::Index>(f.raw_dim), static_cast<Eigen::Index>(f.dims));
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = gauss(rng);
  const Eigen::MatrixXd basis = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() *
                                Eigen::MatrixXd::Identity(g.rows(), g.cols());
  FeatureStatistics raw(mu * basis.transpose(),
                        Eigen::VectorXd::Constant(static_cast<Eigen::Index>(f.raw_dim), f.variance));

  const std::size_t n = f.classes * f.samples_per_class;
  Eigen::MatrixXd samples(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(f.raw_dim));
  std::vector<std::size_t> labels(n);
  Rng train = make_rng(f.seed, Stream::features, {2});
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = i % f.classes;
    const Observation o = sample_observation(raw, labels[i], {}, train);
    samples.row(static_cast<Eigen::Index>(i)) = o.truth.transpose();
  }
  PcaProjection proj = pca_fit(samples, f.dims);
  const Eigen::MatrixXd projected = samples * proj.basis();
  FeatureStatistics fitted = FeatureStatistics::fit(projected, labels, f.classes);
  return {std::move(fitted), std::move(raw), std::move(proj)};
}

// ---------------------------------------------------------------------------
// Classification

std::size_t map_classify(std::span<const ReceivedElementStats> stats, const Eigen::VectorXd& x_hat) {
  if (static_cast<std::size_t>(x_hat.size()) != stats.size())
    throw DimensionError("one received element statistic per estimate required");
  if (stats.empty()) throw InvalidArgument("nothing to classify");
  const Eigen::Index classes = stats.front().centroids.size();
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (Eigen::Index l = 0; l < classes; ++l) {
    double score = 0.0;
    for (std::size_t m = 0; m < stats.size(); ++m) {
      if (stats[m].centroids.size() != classes) throw DimensionError("class counts differ across elements");
      if (!(stats[m].variance > 0.0)) throw DegenerateDesign("received element variance is zero");
      const double d = x_hat(static_cast<Eigen::Index>(m)) - stats[m].centroids(l);
      score -= d * d / (2.0 * stats[m].variance);
    }
    if (score > best_score) {
      best_score = score;
      best = static_cast<std::size_t>(l);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

std::size_t worker_count(const ExperimentConfig& c) {
  if (c.threads > 0) return c.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads; rethrows the first error.
template <class Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<DeviceProfile> make_profiles(const ScenarioConfig& s, std::uint64_t placement_seed) {
  const auto pos = place_devices(s.devices, s.radius_m, s.min_distance_m, placement_seed);
  const double watts = dbm_to_watts(s.transmit_power_dbm);
  std::vector<DeviceProfile> out;
  for (std::size_t k = 0; k < s.devices; ++k) {
    const double eps = s.sensing_noise_power.size() == 1 ? s.sensing_noise_power.front() : s.sensing_noise_power.at(k);
    out.push_back({eps, watts, pos[k]});
  }
  return out;
}

struct PairDesign {
  TransceiverDesign design;
  double gain = 0.0;
  long iterations = 0;
};

PairDesign design_pair(const ExperimentConfig& c, const FeatureStatistics& stats, const ElementPair& pair,
                       std::size_t pair_index, std::size_t block, const ChannelRealization& ch,
                       std::span<const DeviceProfile> profiles, Scheme scheme) {
  const PairProblem problem = PairProblem::build(stats, pair, ch.h, profiles, c.scenario.rx_noise_power);
  PairDesign out;
  switch (scheme) {
    case Scheme::proposed: {
      ScaOptions opt;
      opt.max_iter = c.optimizer.max_iter;
      opt.rel_tol = c.optimizer.rel_tol;
      opt.multi_start = c.optimizer.multi_start;
      ScaResult r = sca_optimize(problem, opt);
      out.iterations = r.state.iteration;
      out.design = std::move(r.design);
      break;
    }
    case Scheme::mmse_centroid: out.design = baseline_mmse_centroid(problem); break;
    case Scheme::random: {
      Rng rng = make_rng(c.scenario.seed, Stream::random_baseline, {block, pair_index});
      out.design = baseline_random(problem, rng);
      break;
    }
  }
  out.gain = received_gain(stats, pair, out.design.steering, out.design.beamformer_half,
                           problem.sensing_noise, c.scenario.rx_noise_power);
  return out;
}

}  // namespace

PointResult run_point(const ExperimentConfig& config, Scheme scheme, double sweep_value) {
  config.validate();
  return run_point(config, build_feature_source(config.features), scheme, sweep_value);
}

PointResult run_point(const ExperimentConfig& config, const FeatureSource& source, Scheme scheme,
                      double sweep_value) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const ScenarioConfig& sc = config.scenario;
  const FeatureStatistics& stats = source.stats;
  const std::size_t workers = worker_count(config);

  std::vector<std::size_t> dims = rank_dims_by_gain(stats);
  if (config.features.used_dims) {
    if (*config.features.used_dims > dims.size()) throw InvalidArgument("used_dims exceeds the feature dimension");
    dims.resize(*config.features.used_dims);
  }
  const std::vector<ElementPair> pairs = make_pairs(dims);
  const NoiseModel noise{sc.rx_noise_power};

  PointResult result;
  result.sweep_value = sweep_value;
  result.scheme = scheme;
  std::size_t correct = 0;
  double gain_sum = 0.0;

  for (std::size_t block = 0; block < sc.channel_blocks; ++block) {
    const std::size_t first = config.trials * block / sc.channel_blocks;
    const std::size_t last = config.trials * (block + 1) / sc.channel_blocks;

    const auto profiles = make_profiles(sc, substream_seed(sc.seed, Stream::placement, {block}));
    const ChannelRealization channels =
        sample_channels(profiles, sc.antennas, sc.shadowing_variance_db,
                        substream_seed(sc.seed, Stream::channel, {block}))
            .normalized(sc.channel_noise_power_w);

    std::vector<PairDesign> designs(pairs.size());
    parallel_for(pairs.size(), workers, [&](std::size_t p) {
      designs[p] = design_pair(config, stats, pairs[p], p, block, channels, profiles, scheme);
    });

    Eigen::VectorXd eps(static_cast<Eigen::Index>(profiles.size()));
    for (std::size_t k = 0; k < profiles.size(); ++k) eps(static_cast<Eigen::Index>(k)) = profiles[k].sensing_noise_power;
    std::vector<ReceivedElementStats> rx_stats;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      gain_sum += designs[p].gain;
      result.iterations += designs[p].iterations;
      for (std::size_t dim : pairs[p].elements())
        rx_stats.push_back(received_element_stats(stats, dim, designs[p].design.steering,
                                                  designs[p].design.beamformer_half, eps, sc.rx_noise_power));
    }

    // Monte-Carlo inference, chunked over workers.
    const std::size_t count = last - first;
    const std::size_t chunks = std::min<std::size_t>(count, workers * 4);
    std::vector<std::size_t> chunk_correct(chunks, 0);
    parallel_for(chunks, workers, [&](std::size_t ci) {
      const std::size_t lo = first + count * ci / chunks;
      const std::size_t hi = first + count * (ci + 1) / chunks;
      std::vector<std::complex<double>> symbols(profiles.size());
      Eigen::VectorXd x_hat(static_cast<Eigen::Index>(rx_stats.size()));
      for (std::size_t t = lo; t < hi; ++t) {
        const std::size_t label = t % stats.num_classes();
        const std::uint64_t seed = substream_seed(sc.seed, Stream::trial, {t});
        const Observation obs =
            source.raw ? sample_observation(*source.raw, *source.projection, label, profiles, seed)
                       : sample_observation(stats, label, profiles, seed);
        Eigen::Index slot = 0;
        for (std::size_t p = 0; p < pairs.size(); ++p) {
          for (std::size_t k = 0; k < profiles.size(); ++k) symbols[k] = pack_symbol(obs.local[k], pairs[p]);
          Rng rng = make_rng(seed, Stream::rx_noise, {p});
          const Eigen::VectorXcd n = sample_rx_noise(noise, sc.antennas, rng);
          const AggregationResult agg = aggregate(designs[p].design, symbols, channels.h, n);
          x_hat(slot++) = agg.first;
          if (pairs[p].second) x_hat(slot++) = agg.second;
        }
        if (map_classify(rx_stats, x_hat) == label) ++chunk_correct[ci];
      }
    });
    for (std::size_t c : chunk_correct) correct += c;
  }

  const double n = static_cast<double>(config.trials);
  result.gain = gain_sum / static_cast<double>(sc.channel_blocks);
  result.accuracy = static_cast<double>(correct) / n;
  result.se = std::sqrt(result.accuracy * (1.0 - result.accuracy) / n);
  if (config.report_timing)
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

ExperimentReport run_sweep(const ExperimentConfig& config) {
  config.validate();
  const FeatureSource source = build_feature_source(config.features);
  std::vector<double> values = config.sweep.values;
  if (config.sweep.axis == SweepAxis::none) values = {0.0};

  ExperimentReport report;
  report.config = config;
  for (double v : values) {
    const ExperimentConfig point = apply_sweep_value(config, v);
    for (Scheme s : config.schemes) report.rows.push_back(run_point(point, source, s, v));
  }
  return report;
}

}  // namespace aircomp
