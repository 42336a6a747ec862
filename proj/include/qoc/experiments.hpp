#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qoc/optimize.hpp"

namespace qoc {

/// One point of an overlap-vs-evolution-time sweep.
struct SweepRecord {
  double tf = 0.0;
  double overlap = 0.0;
  std::string structure;
  std::vector<double> switch_times;  // segment durations
  HcSign hc_sign = HcSign::NearZero;
  double hc_mean = 0.0;
  bool verified = false;  // optimality report passed
};

struct SweepOptions {
  OptimizeOptions opt;
  bool chain_warm_starts = true;  // reuse the previous grid point's solutions
  int refine_transitions = 0;     // midpoint-insertion passes at label changes
  int repair_passes = 3;          // neighbor-seeded retries of weak points
};

/// 60 points from 0.05 pi to 2.0 pi.
std::vector<double> default_time_grid();

/// Optimizes the scenario at every grid time (ascending) and records the
/// winning structure, overlap and verification outcome.
std::vector<SweepRecord> sweep_tf(const Scenario& scenario,
                                  const std::vector<double>& t_grid,
                                  const std::vector<ProtocolStructure>& catalog,
                                  const SweepOptions& opts = {});

/// Propagates with u = 0 and records the overlaps.
std::vector<SweepRecord> zero_control_baseline(const Scenario& scenario,
                                               const std::vector<double>& t_grid,
                                               double divisions = kDefaultDivisions);

/// Sweep of the state-retention scenario (target = initial).
std::vector<SweepRecord> retention_scan(const SystemSpec& spec,
                                        const std::vector<double>& t_grid,
                                        const std::vector<ProtocolStructure>& catalog,
                                        const SweepOptions& opts = {});

/// Long-time regimes of the sigma_x channel: the optimized overlap either
/// keeps increasing with tf (CaseI, no finite optimum) or has a finite
/// interior maximum followed by a positive plateau (CaseII).
enum class AsymptoticCase { CaseI, CaseII };

std::string to_string(AsymptoticCase c);

AsymptoticCase case_classifier(const SystemSpec& spec,
                               std::pair<double, double> t_probe,
                               const SweepOptions& opts = {},
                               const std::vector<ProtocolStructure>& catalog =
                                   default_catalog());

}  // namespace qoc
