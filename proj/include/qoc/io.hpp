#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "qoc/experiments.hpp"
#include "qoc/propagate.hpp"
#include "qoc/schedule.hpp"

namespace qoc {

inline constexpr const char* kToolVersion = "0.1.0";

/// Full-precision, locale-independent rendering ("." decimal separator).
std::string format_double(double v);

std::uint64_t fnv1a_hash(std::string_view s);

/// CSV `t,u,rx,ry,rz` (plus `lx,ly,lz` when a costate is supplied), one row
/// per grid point.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const CostateTrajectory* costates = nullptr);

/// CSV `tf,overlap,structure,hc_sign,switch_times(json)`.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records);

/// CSV `t,u`, one row per sample (left edge of the sample interval).
void write_sampled_csv(std::ostream& os, const SampledSchedule& control);

/// CSV `theta,phi` of the singular arc xi = tan(theta) cos(phi), both phi
/// branches, on an n-point theta grid.
void write_singular_arc_csv(std::ostream& os, double xi, int n_theta);

/// Canonical (sorted-key) JSON text.
std::string canonical_json(const nlohmann::json& j);

/// Companion manifest: configuration, its hash and the tool version.
nlohmann::json make_manifest(const nlohmann::json& config);

}  // namespace qoc
