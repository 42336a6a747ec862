#include "qoc/model.hpp"

#include <cmath>
#include <stdexcept>

namespace qoc {

std::string to_string(Channel c) {
  switch (c) {
    case Channel::None: return "none";
    case Channel::Uniform: return "uniform";
    case Channel::X: return "x";
    case Channel::Y: return "y";
    case Channel::Z: return "z";
  }
  return "none";
}

Channel channel_from_string(std::string_view s) {
  if (s == "none") return Channel::None;
  if (s == "uniform") return Channel::Uniform;
  if (s == "x") return Channel::X;
  if (s == "y") return Channel::Y;
  if (s == "z") return Channel::Z;
  throw std::invalid_argument("unknown dissipation channel: " + std::string(s));
}

void SystemSpec::validate() const {
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
  if (!(u_bound > 0.0)) throw std::invalid_argument("u_bound must be > 0");
}

void to_json(nlohmann::json& j, const SystemSpec& s) {
  j = nlohmann::json{{"xi", s.xi},
                     {"channel", to_string(s.channel)},
                     {"gamma", s.gamma},
                     {"u_bound", s.u_bound}};
}

void from_json(const nlohmann::json& j, SystemSpec& s) {
  s.xi = j.at("xi").get<double>();
  s.channel = channel_from_string(j.at("channel").get<std::string>());
  s.gamma = j.at("gamma").get<double>();
  s.u_bound = j.value("u_bound", 1.0);
  s.validate();
}

PureState PureState::from_angles(double theta, double phi, double phi0) {
  const std::complex<double> phase = std::polar(1.0, phi0);
  return {phase * std::cos(theta / 2.0),
          phase * std::polar(1.0, phi) * std::sin(theta / 2.0)};
}

double PureState::norm2() const { return std::norm(c0) + std::norm(c1); }

PureState PureState::normalized() const {
  const double n = std::sqrt(norm2());
  if (n == 0.0) throw std::invalid_argument("cannot normalize the zero state");
  return {c0 / n, c1 / n};
}

std::complex<double> inner(const PureState& a, const PureState& b) {
  return std::conj(a.c0) * b.c0 + std::conj(a.c1) * b.c1;
}

Eigen::Vector3d hamiltonian_vector(double u, const SystemSpec& spec) {
  return {1.0 + u * spec.xi, 0.0, u};
}

FieldMatrix cross_matrix(const Eigen::Vector3d& a) {
  FieldMatrix m;
  m << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
      -a.y(), a.x(), 0.0;
  return m;
}

FieldMatrix damping_matrix(const SystemSpec& spec) {
  FieldMatrix m = FieldMatrix::Zero();
  switch (spec.channel) {
    case Channel::None:
      break;
    case Channel::Uniform:
      m = -spec.gamma * FieldMatrix::Identity();
      break;
    case Channel::X:
      m.diagonal() << 0.0, -spec.gamma, -spec.gamma;
      break;
    case Channel::Y:
      m.diagonal() << -spec.gamma, 0.0, -spec.gamma;
      break;
    case Channel::Z:
      m.diagonal() << -spec.gamma, -spec.gamma, 0.0;
      break;
  }
  return m;
}

FieldMatrix drift_field(const SystemSpec& spec) {
  return 2.0 * cross_matrix(Eigen::Vector3d::UnitX()) + damping_matrix(spec);
}

FieldMatrix drive_field(const SystemSpec& spec) {
  return 2.0 * cross_matrix(Eigen::Vector3d(spec.xi, 0.0, 1.0));
}

BlochVector bloch_from_pure(const PureState& psi) {
  const double n2 = psi.norm2();
  if (std::abs(n2 - 1.0) > 1e-9)
    throw std::invalid_argument("bloch_from_pure requires a normalized state");
  const std::complex<double> c = std::conj(psi.c0) * psi.c1;
  // Dividing by the norm keeps the output unit-length to rounding error.
  return BlochVector(2.0 * c.real(), 2.0 * c.imag(),
                     std::norm(psi.c0) - std::norm(psi.c1)) / n2;
}

PureState pure_from_bloch(const BlochVector& r) {
  if (std::abs(r.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("pure_from_bloch requires a unit Bloch vector");
  const double theta = std::acos(std::clamp(r.z(), -1.0, 1.0));
  const double phi = std::atan2(r.y(), r.x());
  return PureState::from_angles(theta, phi);
}

PureState ground_state(const Eigen::Vector3d& field) {
  const double n = field.norm();
  if (n == 0.0) throw std::invalid_argument("ground state of zero field is degenerate");
  return pure_from_bloch(-field / n);
}

}  // namespace qoc
