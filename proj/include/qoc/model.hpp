#pragma once

#include <complex>
#include <string>
#include <string_view>

#include <Eigen/Dense>
#include <json.hpp>

namespace qoc {

/// Bloch-vector parametrization of a qubit density matrix,
/// rho_mat = 1/2 (I + r . sigma). |r| = 1 for pure states, 0 for the
/// maximally mixed state.
using BlochVector = Eigen::Vector3d;

/// Conjugate momentum of the Bloch vector in the maximum-principle sense.
using CostateVector = Eigen::Vector3d;

/// All dynamics of this problem are linear in the Bloch vector, so every
/// vector field is represented exactly by a 3x3 matrix A acting as r -> A r.
using FieldMatrix = Eigen::Matrix3d;

/// Dissipation channel selector. X/Y/Z damp the two Bloch components
/// orthogonal to the named axis; Uniform damps all three identically.
enum class Channel { None, Uniform, X, Y, Z };

std::string to_string(Channel c);
Channel channel_from_string(std::string_view s);

/// Physical system parameters: drive tilt xi, dissipation channel and rate
/// gamma (in units of the drift energy), and the control amplitude bound.
struct SystemSpec {
  double xi = 0.0;
  Channel channel = Channel::None;
  double gamma = 0.0;
  double u_bound = 1.0;

  bool dissipative() const { return channel != Channel::None && gamma > 0.0; }

  /// Throws std::invalid_argument if gamma < 0 or u_bound <= 0.
  void validate() const;
};

void to_json(nlohmann::json& j, const SystemSpec& s);
void from_json(const nlohmann::json& j, SystemSpec& s);

/// Normalized two-component wave function c0|0> + c1|1>.
struct PureState {
  std::complex<double> c0{1.0, 0.0};
  std::complex<double> c1{0.0, 0.0};

  /// |psi(theta, phi, phi0)> = e^{i phi0} (cos(theta/2), e^{i phi} sin(theta/2)).
  static PureState from_angles(double theta, double phi, double phi0 = 0.0);

  double norm2() const;
  PureState normalized() const;
};

std::complex<double> inner(const PureState& a, const PureState& b);

/// Field vector h(u) = h0 + u h1 = (1 + u xi, 0, u) of H = h . sigma.
Eigen::Vector3d hamiltonian_vector(double u, const SystemSpec& spec);

/// Matrix of the cross product, cross_matrix(a) * v == a x v.
FieldMatrix cross_matrix(const Eigen::Vector3d& a);

/// Damping part of the drift: -gamma P_channel (zero for Channel::None,
/// -gamma I for Channel::Uniform).
FieldMatrix damping_matrix(const SystemSpec& spec);

/// Drift field f: r -> 2 h0 x r - gamma P r.
FieldMatrix drift_field(const SystemSpec& spec);

/// Drive field g: r -> 2 h1 x r with h1 = (xi, 0, 1). Always orthogonal
/// to r, so the control never changes purity directly.
FieldMatrix drive_field(const SystemSpec& spec);

/// Expectation values (<sx>, <sy>, <sz>); rejects non-normalized input.
BlochVector bloch_from_pure(const PureState& psi);

/// Inverse of bloch_from_pure for unit Bloch vectors (phase fixed to c0 real).
PureState pure_from_bloch(const BlochVector& r);

/// Ground state of the Hamiltonian field . sigma (Bloch vector -field/|field|).
PureState ground_state(const Eigen::Vector3d& field);

}  // namespace qoc
