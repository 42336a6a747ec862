#include "qoc/io.hpp"

#include <cmath>
#include <cstdio>

namespace qoc {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a_hash(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const CostateTrajectory* costates) {
  os << "t,u,rx,ry,rz";
  if (costates) os << ",lx,ly,lz";
  os << "\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    os << format_double(traj.times[k]) << ',' << format_double(traj.controls[k])
       << ',' << format_double(traj.states[k].x()) << ','
       << format_double(traj.states[k].y()) << ','
       << format_double(traj.states[k].z());
    if (costates) {
      const CostateVector& l = costates->costates[k];
      os << ',' << format_double(l.x()) << ',' << format_double(l.y()) << ','
         << format_double(l.z());
    }
    os << "\n";
  }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
  os << "tf,overlap,structure,hc_sign,switch_times(json)\n";
  for (const auto& r : records) {
    nlohmann::json times = nlohmann::json::array();
    for (double d : r.switch_times) times.push_back(d);
    os << format_double(r.tf) << ',' << format_double(r.overlap) << ','
       << r.structure << ',' << to_string(r.hc_sign) << ",\"" << times.dump()
       << "\"\n";
  }
}

void write_sampled_csv(std::ostream& os, const SampledSchedule& control) {
  os << "t,u\n";
  const double dt = control.dt();
  for (std::size_t k = 0; k < control.u.size(); ++k)
    os << format_double(k * dt) << ',' << format_double(control.u[k]) << "\n";
}

void write_singular_arc_csv(std::ostream& os, double xi, int n_theta) {
  os << "theta,phi\n";
  const auto emit_branch = [&](bool second) {
    for (int i = 0; i < n_theta; ++i) {
      const double theta =
          1e-3 + (M_PI - 2e-3) * static_cast<double>(i) / (n_theta - 1);
      const double c = xi / std::tan(theta);
      if (std::abs(c) > 1.0 - 1e-12) continue;
      const double phi = second ? 2.0 * M_PI - std::acos(c) : std::acos(c);
      os << format_double(theta) << ',' << format_double(phi) << "\n";
    }
  };
  emit_branch(false);
  emit_branch(true);
}

std::string canonical_json(const nlohmann::json& j) { return j.dump(2); }

nlohmann::json make_manifest(const nlohmann::json& config) {
  return nlohmann::json{
      {"config", config},
      {"config_hash", fnv1a_hash(config.dump())},
      {"version", kToolVersion}};
}

}  // namespace qoc
