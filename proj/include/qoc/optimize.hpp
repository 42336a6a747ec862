#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qoc/model.hpp"
#include "qoc/pmp.hpp"
#include "qoc/propagate.hpp"
#include "qoc/schedule.hpp"

namespace qoc {

/// Protocol shape over the alphabet {X, Y, S}: X is the u = -1 bang, Y the
/// u = +1 bang, S a singular stretch. Two equal consecutive letters are
/// rejected (they would merge).
struct ProtocolStructure {
  std::string label;

  static ProtocolStructure parse(std::string_view s);
  std::size_t segment_count() const { return label.size(); }
  std::vector<SegmentKind> kinds() const;
  SegmentedSchedule schedule(const std::vector<double>& durations) const;
};

/// A control task: steer `initial` toward `target` under `spec`, scored by
/// `cost_kind` at the final time.
struct Scenario {
  BlochVector initial;
  BlochVector target;
  SystemSpec spec;
  CostKind cost_kind = CostKind::Overlap;

  /// State preparation between the ground states of sigma_x +- 2 sigma_z.
  static Scenario preparation(const SystemSpec& spec,
                              CostKind kind = CostKind::Overlap);
  /// State retention: target equals the initial state.
  static Scenario retention(const SystemSpec& spec,
                            CostKind kind = CostKind::Overlap);
};

struct OptimizeOptions {
  int restarts = 8;          // deterministic jittered initial simplices
  unsigned seed = 0;
  double search_divisions = 1024.0;  // dt during the simplex search
  double verify_divisions = 4096.0;  // dt for the final report
  double tol_hc = 1e-3;
  double tol_phi = 1e-3;
  int max_evaluations = 1200;  // per simplex run
  int workers = 0;             // 0: hardware concurrency
  bool attach_report = true;
  std::vector<std::vector<double>> extra_inits;  // warm-start durations
};

struct OptimizeResult {
  ProtocolStructure structure;
  std::vector<double> durations;  // per segment, sum to tf
  double tf = 0.0;
  double cost = 0.0;
  double overlap = 0.0;  // <target, rho(tf)>
  long evaluations = 0;
  OptimalityReport report;

  SegmentedSchedule schedule() const { return structure.schedule(durations); }
};

nlohmann::json result_to_json(const OptimizeResult& r,
                              bool include_samples = false);

/// Nelder-Mead over the k-1 cumulative switching times of a declared
/// structure; disordered candidates are projected and penalized so the
/// objective stays continuous. Throws if every restart lands in the
/// infeasible regime.
OptimizeResult optimize_switching_times(const ProtocolStructure& structure,
                                        double tf, const Scenario& scenario,
                                        const OptimizeOptions& opts = {});

const std::vector<ProtocolStructure>& default_catalog();

struct SearchResult {
  OptimizeResult winner;
  std::map<std::string, std::vector<double>> structure_durations;
  std::map<std::string, double> structure_costs;
};

using WarmStartMap = std::map<std::string, std::vector<std::vector<double>>>;

/// Optimizes every catalog member and picks the lowest verified cost; ties
/// (within 1e-8) break toward fewer segments. `warm_starts` maps structure
/// labels to duration vectors used as extra initializations.
SearchResult search_structures_detailed(
    double tf, const Scenario& scenario,
    const std::vector<ProtocolStructure>& catalog, const OptimizeOptions& opts = {},
    const WarmStartMap* warm_starts = nullptr);

OptimizeResult search_structures(
    double tf, const Scenario& scenario,
    const std::vector<ProtocolStructure>& catalog, const OptimizeOptions& opts = {},
    const WarmStartMap* warm_starts = nullptr);

/// Terminal cost and its exact adjoint gradient d cost / d u_k for a
/// sampled control (the per-sample integral of the switching function).
struct AdjointGradient {
  double cost = 0.0;
  std::vector<double> gradient;
  Trajectory trajectory;
  CostateTrajectory costates;
};

AdjointGradient adjoint_gradient(const SampledSchedule& control,
                                 const Scenario& scenario, double dt_max);

struct GradientOptions {
  double rate = 0.5;      // initial step on u <- clip(u - rate * Phi)
  int max_iter = 2000;
  double stop_tol = 1e-6;  // on max_k |u update|
  bool conjugate = false;  // Polak-Ribiere directions instead of steepest
  double step_divisions = 4096.0;
  double tol_hc = 1e-3;
  double tol_phi = 1e-3;
};

struct GradientResult {
  SampledSchedule control;
  double cost = 0.0;
  double overlap = 0.0;
  int iterations = 0;
  long evaluations = 0;
  bool converged = false;
  OptimalityReport report;
};

/// Projected gradient descent on N control samples, using the switching
/// function as the exact gradient and clipping to the admissible bound.
GradientResult gradient_descent_control(
    int n_samples, double tf, const Scenario& scenario,
    const GradientOptions& opts = {},
    const std::vector<double>* u_init = nullptr);

nlohmann::json result_to_json(const GradientResult& r,
                              bool include_samples = false);

namespace detail {

struct NelderMeadOptions {
  int max_evaluations = 1200;
  double x_tol = 1e-10;  // absolute simplex spread
  double f_tol = 1e-13;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  long evaluations = 0;
};

NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& fn,
    const Eigen::VectorXd& x0, double step, const NelderMeadOptions& opts = {});

}  // namespace detail

}  // namespace qoc
