#pragma once

#include <cstddef>
#include <stdexcept>
#include <variant>
#include <vector>

namespace qoc {

enum class SegmentKind { BangMinus, BangPlus, Singular };

struct Segment {
  SegmentKind kind = SegmentKind::BangMinus;
  double duration = 0.0;
};

/// Protocol made of bang segments (u pinned at -u_bound / +u_bound) and
/// singular segments (u realized by state feedback).
struct SegmentedSchedule {
  std::vector<Segment> segments;

  double total_time() const {
    double t = 0.0;
    for (const auto& s : segments) t += s.duration;
    return t;
  }
  bool all_bang() const {
    for (const auto& s : segments)
      if (s.kind == SegmentKind::Singular) return false;
    return true;
  }
};

/// Piecewise-constant control on a uniform grid: u[k] applies on
/// [k tf/N, (k+1) tf/N). Values are clipped to the spec's bound when used.
struct SampledSchedule {
  double tf = 0.0;
  std::vector<double> u;

  double dt() const {
    if (u.empty()) throw std::invalid_argument("sampled schedule has no samples");
    return tf / static_cast<double>(u.size());
  }
};

using ControlSchedule = std::variant<SegmentedSchedule, SampledSchedule>;

inline double total_time(const ControlSchedule& sched) {
  if (const auto* seg = std::get_if<SegmentedSchedule>(&sched)) return seg->total_time();
  return std::get<SampledSchedule>(sched).tf;
}

}  // namespace qoc
