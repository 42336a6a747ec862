#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "qoc/model.hpp"
#include "qoc/propagate.hpp"
#include "qoc/schedule.hpp"

namespace qoc {

/// Switching function Phi = 2 lambda . (h1 x rho).
double switching_function(const CostateVector& lambda, const BlochVector& rho,
                          const SystemSpec& spec);

/// c-Hamiltonian H_c = lambda . [2 h x rho - Gamma P rho].
double control_hamiltonian(const CostateVector& lambda, const BlochVector& rho,
                           double u, const SystemSpec& spec);

/// Wave-function picture: Phi = Im <Pi| H_d |Psi>.
double switching_function(const PureState& costate, const PureState& psi,
                          const SystemSpec& spec);

/// Wave-function picture: H_c = Im <Pi| H(u) |Psi>.
double control_hamiltonian(const PureState& costate, const PureState& psi,
                           double u, const SystemSpec& spec);

/// Terminal costate |Pi(tf)> = -|target><target|Psi(tf)> for the overlap
/// cost -|<target|Psi(tf)>|^2 / 2.
PureState wave_costate_terminal(const PureState& target, const PureState& psi_tf);

enum class HcSign { Negative, NearZero, Positive };

std::string to_string(HcSign s);

/// Quantified check of the maximum-principle necessary conditions along a
/// trajectory. A failing report is a result, not an error.
struct OptimalityReport {
  std::vector<double> hc_samples;
  std::vector<double> phi_samples;
  double hc_mean = 0.0;
  double hc_drift = 0.0;           // max_t |H_c(t) - hc_mean|
  int bang_violations = 0;         // sign(u) vs sign(Phi) mismatches
  double worst_bang_margin = 0.0;  // largest |Phi| among violations
  double singular_residual = 0.0;  // max |Phi| over declared singular segments
  HcSign hc_sign = HcSign::NearZero;
  double tol_hc = 1e-3;
  double tol_phi = 1e-3;

  bool passed() const {
    return hc_drift <= tol_hc && bang_violations == 0 &&
           singular_residual <= tol_phi;
  }
};

nlohmann::json report_to_json(const OptimalityReport& r,
                              bool include_samples = true);

/// Evaluates H_c(t) and Phi(t) on the shared grid and scores every
/// necessary condition. Grid points within 2 steps of a declared switch are
/// excluded from the sign and singular-residual checks, since Phi crosses
/// zero there.
OptimalityReport verify(const Trajectory& traj, const CostateTrajectory& costates,
                        const ControlSchedule& sched, const SystemSpec& spec,
                        double tol_hc = 1e-3, double tol_phi = 1e-3);

}  // namespace qoc
