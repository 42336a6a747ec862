#pragma once

#include "qoc/model.hpp"

namespace qoc {

/// Pole guard for the (theta, phi) chart.
inline constexpr double kPoleGuard = 1e-6;

/// Largest acceptable 1-norm condition estimate for the {f, g, [f,g]} basis.
inline constexpr double kBasisConditionLimit = 1e8;

/// Point on the Bloch sphere, theta in (0, pi), phi in [0, 2pi).
struct SphereCoord {
  double theta = 0.0;
  double phi = 0.0;
};

SphereCoord sphere_from_bloch(const BlochVector& r);
BlochVector bloch_from_sphere(const SphereCoord& p);

enum class PauliAxis { X, Y, Z };

/// Tangent field (dtheta/dt, dphi/dt) generated by a Pauli Hamiltonian:
/// V_z = (0, 2), V_x = (-2 sin phi, -2 cos phi cot theta),
/// V_y = (2 cos phi, -2 sin phi cot theta). Rejects points inside the
/// pole guard.
Eigen::Vector2d pauli_field(PauliAxis axis, const SphereCoord& p);

/// Coefficient alpha(theta, phi) = -(2/sin phi)(cos phi - xi cot theta) of
/// the drift component in [f,g] = alpha f + beta g for the closed system.
/// alpha = 0 is the singular arc xi = tan theta cos phi. Rejects phi with
/// |sin phi| <= 1e-9.
double singular_arc_alpha(const SphereCoord& p, double xi);

/// Constant singular control -xi/(1+xi^2) along the closed-system arc.
double singular_control_closed(double xi);

/// Bracket of the linear fields f = A r, g = B r: the bracket field is
/// (B A - A B) r. The sign is fixed so that for the closed system
/// [f, g] equals twice the sigma_y Bloch generator.
FieldMatrix lie_bracket(const FieldMatrix& a, const FieldMatrix& b);

struct SingularEvaluation {
  double u_raw = 0.0;      // unclamped feedback value
  double u_applied = 0.0;  // clamped to the control bound
  bool admissible = true;  // |u_raw| <= u_bound
  double basis_condition = 1.0;
};

/// State-feedback singular control. For dissipative x/y/z channels this is
/// the three-variable bracket construction: expand [f,[f,g]] and [g,[f,g]]
/// in the basis {f, g, [f,g]} at the point r and return -alpha1/beta1.
/// For Channel::None and Channel::Uniform the amplitude dynamics decouple
/// from the angular ones, so the two-variable chart construction applies;
/// it reduces to singular_control_closed(xi) on the arc.
class SingularController {
 public:
  explicit SingularController(const SystemSpec& spec);

  SingularEvaluation evaluate(const BlochVector& r) const;

 private:
  SingularEvaluation evaluate_chart(const BlochVector& r) const;
  SingularEvaluation evaluate_bracket(const BlochVector& r) const;

  bool chart_mode_;
  double xi_;
  double u_bound_;
  FieldMatrix f_, g_, fg_, ffg_, gfg_;
};

/// One-shot convenience wrapper around SingularController.
SingularEvaluation singular_control_open(const BlochVector& r, const SystemSpec& spec);

/// Minimum time arccos(|i0 t0| + |i1 t1|) to connect two pure states in the
/// xi = 0, unbounded-control problem.
double quantum_speed_limit(const PureState& a, const PureState& b);

}  // namespace qoc
