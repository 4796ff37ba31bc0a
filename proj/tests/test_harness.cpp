#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "aircomp/errors.hpp"
#include "aircomp/harness.hpp"

using namespace aircomp;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.trials = 200;
  c.threads = 2;
  c.features.dims = 4;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "aircomp-tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("map classifier") {
  std::vector<ReceivedElementStats> s(2);
  s[0] = {Eigen::Vector3d(-4.0, 0.0, 4.0), 1.0};
  s[1] = {Eigen::Vector3d(0.0, 5.0, 10.0), 2.0};
  CHECK(map_classify(s, Eigen::Vector2d(4.0, 10.0)) == 2);
  CHECK(map_classify(s, Eigen::Vector2d(-4.0, 0.0)) == 0);

  std::vector<ReceivedElementStats> tie{{Eigen::Vector2d(-1.0, 1.0), 1.0}};
  CHECK(map_classify(tie, Eigen::VectorXd::Zero(1)) == 0);
  CHECK_THROWS_AS(map_classify(tie, Eigen::Vector2d::Zero()), DimensionError);
}

TEST_CASE("config JSON round trip and validation") {
  ExperimentConfig c = small_config();
  c.sweep = {SweepAxis::power, {0.0, 5.0}};
  c.schemes = {Scheme::random, Scheme::proposed};
  c.features.used_dims = 3;
  c.scenario.sensing_noise_power = {0.1, 0.2, 0.3};
  const auto back = ExperimentConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK_NOTHROW(back.validate());

  const auto defaults = ExperimentConfig::from_json(nlohmann::json::object());
  CHECK(defaults.scenario.devices == 3);
  CHECK(defaults.scenario.antennas == 8);
  CHECK(defaults.features.dims == 12);
  CHECK(defaults.features.classes == 4);
  CHECK(defaults.scenario.sensing_noise_power.front() == 0.4);
  CHECK(defaults.scenario.rx_noise_power == 1.0);

  auto bad = c;
  bad.trials = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = c;
  bad.sweep.values = {5.0, 0.0};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = c;
  bad.features.used_dims = 5;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = c;
  bad.sweep = {SweepAxis::devices, {2.0, 5.0}};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);  // three sensing noise values for five devices
  CHECK_THROWS(parse_scheme("bogus"));
  CHECK_THROWS(ExperimentConfig::from_json(nlohmann::json{{"sweep", {{"axis", "bogus"}}}}));
}

TEST_CASE("run_point basics") {
  ExperimentConfig c = small_config();
  c.trials = 1600;
  c.schemes = {Scheme::random};
  const auto r = run_point(c, Scheme::random);
  CHECK(r.accuracy >= 0.0);
  CHECK(r.accuracy <= 1.0);
  CHECK(r.se <= 0.0125);
  CHECK(r.se == doctest::Approx(std::sqrt(r.accuracy * (1 - r.accuracy) / 1600)));
  CHECK(r.iterations == 0);
  CHECK(r.seconds == 0.0);
  CHECK(r.gain > 0.0);
}

TEST_CASE("thread count does not change results") {
  ExperimentConfig c = small_config();
  c.scenario.channel_blocks = 3;
  c.threads = 1;
  const auto a = run_point(c, Scheme::mmse_centroid);
  c.threads = 4;
  CHECK(run_point(c, Scheme::mmse_centroid) == a);
}

TEST_CASE("dimension sweep gain grows with every added dimension") {
  ExperimentConfig c = small_config();
  c.features.dims = 6;
  c.sweep = {SweepAxis::pca_dims, {1, 2, 3, 4, 5, 6}};
  c.schemes = {Scheme::mmse_centroid};
  const auto rep = run_sweep(c);
  REQUIRE(rep.rows.size() == 6);
  for (std::size_t i = 1; i < rep.rows.size(); ++i) CHECK(rep.rows[i].gain >= rep.rows[i - 1].gain);
}

TEST_CASE("feature sources") {
  FeatureConfig f;
  f.source = "samples";
  f.dims = 4;
  f.raw_dim = 10;
  f.samples_per_class = 400;
  const auto src = build_feature_source(f);
  REQUIRE(src.raw.has_value());
  REQUIRE(src.projection.has_value());
  CHECK(src.stats.num_dims() == 4);
  CHECK(src.projection->raw_dim() == 10);

  ExperimentConfig c = small_config();
  c.features = f;
  CHECK(run_point(c, src, Scheme::random).accuracy > 0.25);

  const fs::path path = scratch("stats.json");
  std::ofstream(path) << src.stats.to_json().dump();
  FeatureConfig file;
  file.source = "file";
  file.path = path.string();
  CHECK(build_feature_source(file).stats.centroids() == src.stats.centroids());
}

TEST_CASE("report emission") {
  ExperimentReport empty;
  const auto written = emit_report(empty, scratch("empty"), ReportFormat::csv);
  REQUIRE(written.size() == 1);
  CHECK(slurp(written[0]) == "sweep_value,scheme,gain,accuracy,se,iters,seconds\n");

  ExperimentConfig c = small_config();
  c.schemes = {Scheme::proposed, Scheme::random};
  const auto rep = run_sweep(c);
  REQUIRE(rep.rows.size() == 2);
  const auto paths = emit_report(rep, scratch("run"));
  REQUIRE(paths.size() == 2);
  const auto back = ExperimentReport::from_json(nlohmann::json::parse(slurp(paths[1])));
  CHECK(back.rows == rep.rows);
  CHECK(back.config.to_json() == rep.config.to_json());

  const auto again = emit_report(run_sweep(c), scratch("run2"), ReportFormat::csv);
  CHECK(slurp(again[0]) == slurp(paths[0]));
}
