#include "aircomp/transceiver.hpp"

#include <cmath>

#include "aircomp/errors.hpp"

namespace aircomp {

namespace {

constexpr std::complex<double> kOnePlusJ{1.0, 1.0};

void check_channels(const Eigen::VectorXd& f_hat, std::span<const Eigen::VectorXcd> channels,
                    Eigen::Index devices) {
  if (static_cast<Eigen::Index>(channels.size()) != devices)
    throw DimensionError("one channel per device required");
  for (const auto& h : channels)
    if (h.size() != f_hat.size()) throw DimensionError("channel length differs from beamformer length");
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

Eigen::VectorXcd TransceiverDesign::beamformer() const {
  return beamformer_half.cast<std::complex<double>>() * kOnePlusJ;
}

nlohmann::json TransceiverDesign::to_json() const {
  nlohmann::json j;
  j["f_hat"] = to_vec(beamformer_half);
  j["c"] = to_vec(steering);
  j["b_re"] = to_vec(precoders.real());
  j["b_im"] = to_vec(precoders.imag());
  return j;
}

TransceiverDesign TransceiverDesign::from_json(const nlohmann::json& j) {
  TransceiverDesign d;
  d.beamformer_half = from_vec(j.at("f_hat").get<std::vector<double>>());
  d.steering = from_vec(j.at("c").get<std::vector<double>>());
  const Eigen::VectorXd re = from_vec(j.at("b_re").get<std::vector<double>>());
  const Eigen::VectorXd im = from_vec(j.at("b_im").get<std::vector<double>>());
  if (re.size() != im.size() || re.size() != d.steering.size())
    throw DimensionError("precoder and steering lengths differ");
  d.precoders.resize(re.size());
  d.precoders.real() = re;
  d.precoders.imag() = im;
  return d;
}

std::complex<double> pack_symbol(const Eigen::VectorXd& local_features, const ElementPair& pair) {
  const auto n = static_cast<std::size_t>(local_features.size());
  if (pair.first >= n || (pair.second && *pair.second >= n))
    throw DimensionError("feature index out of range");
  if (pair.second && *pair.second == pair.first)
    throw InvalidArgument("a symbol carries two distinct elements");
  const double re = local_features(static_cast<Eigen::Index>(pair.first));
  const double im = pair.second ? local_features(static_cast<Eigen::Index>(*pair.second)) : 0.0;
  return {re, im};
}

Eigen::VectorXcd zf_precoders(const Eigen::VectorXd& beamformer_half,
                              std::span<const Eigen::VectorXcd> channels,
                              const Eigen::VectorXd& steering) {
  check_channels(beamformer_half, channels, steering.size());
  const Eigen::VectorXcd f = beamformer_half.cast<std::complex<double>>() * kOnePlusJ;
  Eigen::VectorXcd b(steering.size());
  for (Eigen::Index k = 0; k < steering.size(); ++k) {
    const auto& h = channels[static_cast<std::size_t>(k)];
    const std::complex<double> hf = h.dot(f);  // hᴴf
    const double gain = std::norm(hf);         // hᴴ f fᴴ h
    if (steering(k) == 0.0) {
      b(k) = 0.0;
      continue;
    }
    if (!(gain > 0.0)) throw BeamformerNullsDevice(static_cast<std::size_t>(k));
    b(k) = steering(k) * hf / gain;
  }
  return b;
}

TransceiverDesign make_design(Eigen::VectorXd beamformer_half,
                              std::span<const Eigen::VectorXcd> channels,
                              Eigen::VectorXd steering) {
  if ((steering.array() < 0.0).any()) throw InvalidArgument("steering powers must be nonnegative");
  TransceiverDesign d;
  d.precoders = zf_precoders(beamformer_half, channels, steering);
  d.beamformer_half = std::move(beamformer_half);
  d.steering = std::move(steering);
  return d;
}

AggregationResult aggregate(const TransceiverDesign& design,
                            std::span<const std::complex<double>> symbols,
                            std::span<const Eigen::VectorXcd> channels,
                            const Eigen::VectorXcd& noise) {
  const auto k = static_cast<std::size_t>(design.precoders.size());
  if (symbols.size() != k || channels.size() != k)
    throw DimensionError("symbols, channels and precoders must agree in count");
  if (noise.size() != design.beamformer_half.size())
    throw DimensionError("noise length differs from the antenna count");
  AggregationResult out;
  out.received = noise;
  for (std::size_t i = 0; i < k; ++i) {
    if (channels[i].size() != noise.size()) throw DimensionError("channel length differs from antenna count");
    out.received += channels[i] * (design.precoders(static_cast<Eigen::Index>(i)) * symbols[i]);
  }
  const std::complex<double> s_hat = design.beamformer().dot(out.received);  // fᴴy
  out.first = s_hat.real();
  out.second = s_hat.imag();
  return out;
}

double max_precoding_power(double transmit_power_w, double second_moment) {
  if (!(second_moment > 0.0)) throw InvalidArgument("symbol second moment must be positive");
  if (!(transmit_power_w > 0.0)) throw InvalidArgument("transmit power must be positive");
  return transmit_power_w / second_moment;
}

double effective_gain(const Eigen::VectorXd& beamformer_half, const Eigen::VectorXcd& channel) {
  if (channel.size() != beamformer_half.size()) throw DimensionError("channel length differs from beamformer");
  const double re = beamformer_half.dot(channel.real());
  const double im = beamformer_half.dot(channel.imag());
  return re * re + im * im;
}

double steering_limit(const Eigen::VectorXd& beamformer_half, const Eigen::VectorXcd& channel,
                      double max_precoding_power) {
  return std::sqrt(2.0 * max_precoding_power * effective_gain(beamformer_half, channel));
}

DesignCheck check_design(const TransceiverDesign& design,
                         std::span<const Eigen::VectorXcd> channels,
                         const Eigen::VectorXd& max_precoding_powers) {
  check_channels(design.beamformer_half, channels, design.steering.size());
  if (max_precoding_powers.size() != design.steering.size() ||
      design.precoders.size() != design.steering.size())
    throw DimensionError("design and power budgets differ in device count");
  DesignCheck out;
  const Eigen::VectorXcd f = design.beamformer();
  for (Eigen::Index k = 0; k < design.steering.size(); ++k) {
    const double c = design.steering(k);
    if (c < 0.0) out.nonnegative = false;
    const std::complex<double> achieved = f.dot(channels[static_cast<std::size_t>(k)]) * design.precoders(k);
    out.max_zf_error = std::max(out.max_zf_error, std::abs(achieved - c) / std::max(c, 1.0));
    const double excess = std::norm(design.precoders(k)) / max_precoding_powers(k) - 1.0;
    out.max_power_excess = std::max(out.max_power_excess, excess);
  }
  return out;
}

}  // namespace aircomp
