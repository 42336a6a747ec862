#include "qoc/geometry.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace qoc {

namespace {

double cond1_estimate(const Eigen::Matrix3d& m) {
  const double det = m.determinant();
  if (det == 0.0 || !std::isfinite(det)) return std::numeric_limits<double>::infinity();
  const Eigen::Matrix3d inv = m.inverse();
  const double n = m.cwiseAbs().colwise().sum().maxCoeff();
  const double ni = inv.cwiseAbs().colwise().sum().maxCoeff();
  return n * ni;
}

double cond1_estimate2(const Eigen::Matrix2d& m) {
  const double det = m.determinant();
  if (det == 0.0 || !std::isfinite(det)) return std::numeric_limits<double>::infinity();
  const Eigen::Matrix2d inv = m.inverse();
  const double n = m.cwiseAbs().colwise().sum().maxCoeff();
  const double ni = inv.cwiseAbs().colwise().sum().maxCoeff();
  return n * ni;
}

}  // namespace

SphereCoord sphere_from_bloch(const BlochVector& r) {
  const double n = r.norm();
  if (n < 1e-12)
    throw std::runtime_error("sphere coordinates undefined at the origin");
  double phi = std::atan2(r.y(), r.x());
  if (phi < 0.0) phi += 2.0 * M_PI;
  return {std::acos(std::clamp(r.z() / n, -1.0, 1.0)), phi};
}

BlochVector bloch_from_sphere(const SphereCoord& p) {
  return {std::sin(p.theta) * std::cos(p.phi),
          std::sin(p.theta) * std::sin(p.phi), std::cos(p.theta)};
}

namespace {

void check_pole(const SphereCoord& p) {
  if (!(p.theta > kPoleGuard && p.theta < M_PI - kPoleGuard))
    throw std::runtime_error("chart evaluation too close to a pole");
}

}  // namespace

Eigen::Vector2d pauli_field(PauliAxis axis, const SphereCoord& p) {
  check_pole(p);
  const double ct = 1.0 / std::tan(p.theta);
  switch (axis) {
    case PauliAxis::Z:
      return {0.0, 2.0};
    case PauliAxis::X:
      return {-2.0 * std::sin(p.phi), -2.0 * std::cos(p.phi) * ct};
    case PauliAxis::Y:
      return {2.0 * std::cos(p.phi), -2.0 * std::sin(p.phi) * ct};
  }
  return {0.0, 0.0};
}

double singular_arc_alpha(const SphereCoord& p, double xi) {
  check_pole(p);
  const double sp = std::sin(p.phi);
  if (std::abs(sp) <= 1e-9)
    throw std::runtime_error("alpha is singular at phi = 0 or pi");
  return -(2.0 / sp) * (std::cos(p.phi) - xi / std::tan(p.theta));
}

double singular_control_closed(double xi) { return -xi / (1.0 + xi * xi); }

FieldMatrix lie_bracket(const FieldMatrix& a, const FieldMatrix& b) {
  return b * a - a * b;
}

SingularController::SingularController(const SystemSpec& spec)
    : chart_mode_(spec.channel == Channel::None ||
                  spec.channel == Channel::Uniform || spec.gamma == 0.0),
      xi_(spec.xi),
      u_bound_(spec.u_bound) {
  spec.validate();
  f_ = drift_field(spec);
  g_ = drive_field(spec);
  fg_ = lie_bracket(f_, g_);
  ffg_ = lie_bracket(f_, fg_);
  gfg_ = lie_bracket(g_, fg_);
}

SingularEvaluation SingularController::evaluate(const BlochVector& r) const {
  return chart_mode_ ? evaluate_chart(r) : evaluate_bracket(r);
}

// Closed-system feedback in the (theta, phi) chart. Writing the Lie
// derivatives of alpha scaled by sin^2(phi)/4,
//   a_z = 1 - xi cot(theta) cos(phi),
//   a_x = xi sin^2(phi)/sin^2(theta) - cos(phi) cot(theta) a_z,
// the singular value u = -L_f alpha / L_g alpha = -a_x / (xi a_x + a_z)
// is free of the 1/sin(phi) singularities of alpha itself.
SingularEvaluation SingularController::evaluate_chart(const BlochVector& r) const {
  const double n = r.norm();
  if (n < 1e-12)
    throw std::runtime_error("singular control undefined at the origin");
  const double st2 = (r.x() * r.x() + r.y() * r.y()) / (n * n);
  const double st = std::sqrt(st2);
  if (st < kPoleGuard)
    throw std::runtime_error("singular control undefined at the poles");
  const double cot = (r.z() / n) / st;
  const double cphi = r.x() / (n * st);
  const double sphi = r.y() / (n * st);

  const double az = 1.0 - xi_ * cot * cphi;
  const double ax = xi_ * sphi * sphi / st2 - cphi * cot * az;
  const double den = xi_ * ax + az;
  if (std::abs(den) < 1e-12)
    throw std::runtime_error("singular control undefined: L_g alpha vanishes");

  SingularEvaluation ev;
  ev.u_raw = -ax / den;
  ev.u_applied = std::clamp(ev.u_raw, -u_bound_, u_bound_);
  ev.admissible = std::abs(ev.u_raw) <= u_bound_;

  Eigen::Matrix2d basis;
  const SphereCoord p{std::acos(std::clamp(r.z() / n, -1.0, 1.0)),
                      std::atan2(r.y(), r.x())};
  basis.col(0) = pauli_field(PauliAxis::X, p);
  basis.col(1) = xi_ * pauli_field(PauliAxis::X, p) + pauli_field(PauliAxis::Z, p);
  ev.basis_condition = cond1_estimate2(basis);
  return ev;
}

SingularEvaluation SingularController::evaluate_bracket(const BlochVector& r) const {
  Eigen::Matrix3d basis;
  basis.col(0) = f_ * r;
  basis.col(1) = g_ * r;
  basis.col(2) = fg_ * r;

  const double cond = cond1_estimate(basis);
  const bool degenerate = !(cond < kBasisConditionLimit);
  if (degenerate) {
    // On the drift null ray the expansion degenerates but u -> 0 is the
    // admissible control that holds the state there; take that limit when
    // the drift has collapsed relative to the drive.
    const double fn = basis.col(0).norm();
    const double gn = basis.col(1).norm();
    if (gn > 0.0 && fn <= 1e-6 * gn) {
      SingularEvaluation ev;
      ev.u_raw = 0.0;
      ev.u_applied = 0.0;
      ev.admissible = true;
      ev.basis_condition = cond;
      return ev;
    }
    if (!std::isfinite(cond)) {
      std::ostringstream msg;
      msg << "degenerate {f, g, [f,g]} basis, condition estimate " << cond;
      throw std::runtime_error(msg.str());
    }
  }

  const Eigen::PartialPivLU<Eigen::Matrix3d> lu(basis);
  const Eigen::Vector3d alpha = lu.solve(ffg_ * r);
  const Eigen::Vector3d beta = lu.solve(gfg_ * r);

  SingularEvaluation ev;
  ev.u_raw = -alpha(0) / beta(0);
  ev.basis_condition = cond;
  // undefined only when both projections collapse; a vanishing beta_1 alone
  // sends the raw value to infinity, whose closest bang is well defined
  const bool b1_zero = std::abs(beta(0)) <= 1e-12 * (1.0 + beta.cwiseAbs().sum());
  const bool a1_zero = std::abs(alpha(0)) <= 1e-12 * (1.0 + alpha.cwiseAbs().sum());
  if (std::isnan(ev.u_raw) || (b1_zero && a1_zero))
    throw std::runtime_error("singular control undefined: beta_1 vanishes");
  if (!degenerate && !b1_zero) {
    ev.u_applied = std::clamp(ev.u_raw, -u_bound_, u_bound_);
    ev.admissible = std::abs(ev.u_raw) <= u_bound_;
    return ev;
  }
  // Crossing the surface where beta_1 changes sign the raw value diverges;
  // its magnitude is unreliable there but the limit from either side is a
  // bang, so take the closest one.
  ev.u_applied = ev.u_raw >= 0.0 ? u_bound_ : -u_bound_;
  ev.admissible = false;
  return ev;
}

SingularEvaluation singular_control_open(const BlochVector& r, const SystemSpec& spec) {
  return SingularController(spec).evaluate(r);
}

double quantum_speed_limit(const PureState& a, const PureState& b) {
  if (std::abs(a.norm2() - 1.0) > 1e-9 || std::abs(b.norm2() - 1.0) > 1e-9)
    throw std::invalid_argument("quantum_speed_limit requires normalized states");
  const double overlap = std::abs(a.c0) * std::abs(b.c0) + std::abs(a.c1) * std::abs(b.c1);
  return std::acos(std::clamp(overlap, -1.0, 1.0));
}

}  // namespace qoc
