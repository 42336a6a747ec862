#pragma once

#include <vector>

#include "qoc/model.hpp"
#include "qoc/schedule.hpp"

namespace qoc {

/// Default number of grid divisions: dt_max = tf / kDefaultDivisions.
inline constexpr double kDefaultDivisions = 4096.0;

/// Forward state trajectory on a grid that lands exactly on segment (or
/// sample) boundaries. controls[k] is the control applied on the step
/// starting at times[k]; the last entry repeats the control at tf.
/// step_u_mid / step_u_right record the realized control at the interior
/// and right stage of every step so the backward pass can reuse it.
struct Trajectory {
  std::vector<double> times;
  std::vector<BlochVector> states;
  std::vector<double> controls;
  std::vector<double> step_u_mid;
  std::vector<double> step_u_right;
  std::vector<std::size_t> switch_indices;  // interior segment boundaries

  double tf() const { return times.empty() ? 0.0 : times.back(); }
};

struct CostateTrajectory {
  std::vector<double> times;
  std::vector<CostateVector> costates;
};

struct WaveTrajectory {
  std::vector<double> times;
  std::vector<PureState> states;
  std::vector<double> controls;
};

/// Integrates d rho/dt = 2 h x rho - Gamma P rho with a classical
/// fixed-step 4th-order scheme, step <= dt_max. Singular segments realize
/// the control by state feedback evaluated at every integrator stage; a
/// feedback failure propagates as an error naming the time.
Trajectory evolve_state(const BlochVector& rho0, const ControlSchedule& sched,
                        const SystemSpec& spec, double dt_max);

/// Integrates d lambda/dt = 2 h x lambda + Gamma P lambda backward from tf
/// on the same grid as the forward pass, reusing its realized control.
CostateTrajectory evolve_costate(const CostateVector& lambda_tf,
                                 const Trajectory& realized,
                                 const SystemSpec& spec);

/// Closed-system Schroedinger evolution; rejects dissipative specs.
WaveTrajectory evolve_wavefunction(const PureState& psi0,
                                   const ControlSchedule& sched,
                                   const SystemSpec& spec, double dt_max);

enum class CostKind { Overlap, Frobenius };

std::string to_string(CostKind kind);
CostKind cost_kind_from_string(std::string_view s);

/// Overlap: -<target, rho>. Frobenius: sum_ij |target_ij - rho_ij|^2 of the
/// 2x2 matrices, equal to |target - rho|^2 / 2 in Bloch components.
double terminal_cost(const BlochVector& rho_tf, const BlochVector& target,
                     CostKind kind);

/// Gradient of terminal_cost with respect to rho_tf; the costate boundary.
CostateVector terminal_cost_gradient(const BlochVector& rho_tf,
                                     const BlochVector& target, CostKind kind);

/// Exact propagation of an all-bang segmented schedule via per-segment
/// matrix exponentials. Verification oracle; rejects singular segments.
BlochVector expm_oracle(const BlochVector& rho0, const ControlSchedule& sched,
                        const SystemSpec& spec);

}  // namespace qoc
