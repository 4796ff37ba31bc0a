#include <cstdio>
#include <fstream>
#include <sstream>

#include "aircomp/errors.hpp"
#include "aircomp/harness.hpp"

namespace aircomp {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

nlohmann::json ExperimentReport::to_json() const {
  auto results = nlohmann::json::array();
  for (const auto& r : rows)
    results.push_back({{"sweep_value", r.sweep_value},
                       {"scheme", to_string(r.scheme)},
                       {"gain", r.gain},
                       {"accuracy", r.accuracy},
                       {"se", r.se},
                       {"iters", r.iterations},
                       {"seconds", r.seconds}});
  return {{"config", config.to_json()}, {"results", results}};
}

ExperimentReport ExperimentReport::from_json(const nlohmann::json& j) {
  ExperimentReport out;
  out.config = ExperimentConfig::from_json(j.at("config"));
  for (const auto& r : j.at("results")) {
    PointResult p;
    p.sweep_value = r.at("sweep_value").get<double>();
    p.scheme = parse_scheme(r.at("scheme").get<std::string>());
    p.gain = r.at("gain").get<double>();
    p.accuracy = r.at("accuracy").get<double>();
    p.se = r.at("se").get<double>();
    p.iterations = r.at("iters").get<long>();
    p.seconds = r.at("seconds").get<double>();
    out.rows.push_back(p);
  }
  return out;
}

std::string report_csv(const ExperimentReport& report) {
  std::ostringstream os;
  os << "sweep_value,scheme,gain,accuracy,se,iters,seconds\n";
  for (const auto& r : report.rows)
    os << fmt(r.sweep_value) << ',' << to_string(r.scheme) << ',' << fmt(r.gain) << ','
       << fmt(r.accuracy) << ',' << fmt(r.se) << ',' << r.iterations << ',' << fmt(r.seconds) << '\n';
  return os.str();
}

std::vector<std::filesystem::path> emit_report(const ExperimentReport& report,
                                               const std::filesystem::path& stem, ReportFormat format) {
  std::vector<std::filesystem::path> written;
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
  auto write = [&](const std::string& ext, const std::string& body) {
    std::filesystem::path p = stem;
    p += ext;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + p.string());
    out << body;
    if (!out) throw InvalidArgument("failed writing " + p.string());
    written.push_back(p);
  };
  if (format != ReportFormat::json) write(".csv", report_csv(report));
  if (format != ReportFormat::csv) write(".json", report.to_json().dump(2) + "\n");
  return written;
}

}  // namespace aircomp
