#include "qoc/propagate.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "qoc/geometry.hpp"

namespace qoc {

namespace {

// For the linear systems of this problem the classical RK4 step with a
// constant field matrix M collapses to the degree-4 Taylor polynomial of
// exp(h M); one matrix per constant-control stretch.
FieldMatrix rk4_propagator(const FieldMatrix& m, double h) {
  const FieldMatrix a = h * m;
  const FieldMatrix i = FieldMatrix::Identity();
  return i + a * (i + 0.5 * a * (i + (a / 3.0) * (i + 0.25 * a)));
}

using WaveMatrix = Eigen::Matrix2cd;

WaveMatrix wave_propagator(const Eigen::Vector3d& h_vec, double h) {
  WaveMatrix ham;
  ham << h_vec.z(), std::complex<double>(h_vec.x(), -h_vec.y()),
      std::complex<double>(h_vec.x(), h_vec.y()), -h_vec.z();
  const WaveMatrix a = std::complex<double>(0.0, -h) * ham;
  const WaveMatrix i = WaveMatrix::Identity();
  return i + a * (i + 0.5 * a * (i + (a / 3.0) * (i + 0.25 * a)));
}

// Realizes the control of one declared singular segment. The arc ends where
// the raw feedback value leaves the admissible range: from there on the
// closest bang is held for the rest of the segment, otherwise the feedback
// would chatter across the admissibility boundary.
class SegmentFeedback {
 public:
  SegmentFeedback(const SingularController& ctl, double u_bound)
      : ctl_(ctl), u_bound_(u_bound) {}

  double operator()(const BlochVector& x) {
    if (latched_) return latch_u_;
    const SingularEvaluation ev = ctl_.evaluate(x);
    if (std::abs(ev.u_raw) < u_bound_) {
      seen_interior_ = true;
    } else if (seen_interior_) {
      latched_ = true;
      latch_u_ = ev.u_applied;
    }
    return ev.u_applied;
  }

 private:
  const SingularController& ctl_;
  double u_bound_;
  bool seen_interior_ = false;
  bool latched_ = false;
  double latch_u_ = 0.0;
};

struct GridBuilder {
  Trajectory traj;

  void start(double t0, const BlochVector& x0) {
    traj.times.push_back(t0);
    traj.states.push_back(x0);
  }
  void push(double t, const BlochVector& x, double u_left, double u_mid,
            double u_right) {
    traj.controls.push_back(u_left);
    traj.step_u_mid.push_back(u_mid);
    traj.step_u_right.push_back(u_right);
    traj.times.push_back(t);
    traj.states.push_back(x);
  }
  void finish() {
    // node-aligned controls: the final node repeats the control at tf
    traj.controls.push_back(traj.step_u_right.empty() ? 0.0
                                                      : traj.step_u_right.back());
  }
};

int substeps(double duration, double dt_max) {
  return std::max(1, static_cast<int>(std::ceil(duration / dt_max - 1e-12)));
}

}  // namespace

Trajectory evolve_state(const BlochVector& rho0, const ControlSchedule& sched,
                        const SystemSpec& spec, double dt_max) {
  spec.validate();
  if (!(dt_max > 0.0)) throw std::invalid_argument("dt_max must be > 0");

  const FieldMatrix drift = drift_field(spec);
  const FieldMatrix drive = drive_field(spec);

  GridBuilder grid;
  grid.start(0.0, rho0);

  if (const auto* seg = std::get_if<SegmentedSchedule>(&sched)) {
    std::unique_ptr<SingularController> feedback;
    for (const auto& s : seg->segments)
      if (s.duration < 0.0)
        throw std::invalid_argument("segment durations must be >= 0");

    double seg_start = 0.0;
    for (std::size_t si = 0; si < seg->segments.size(); ++si) {
      const Segment& s = seg->segments[si];
      const double seg_end = seg_start + s.duration;
      if (s.duration > 0.0) {
        const int n = substeps(s.duration, dt_max);
        const double h = s.duration / n;
        if (s.kind != SegmentKind::Singular) {
          const double u =
              s.kind == SegmentKind::BangPlus ? spec.u_bound : -spec.u_bound;
          const FieldMatrix p = rk4_propagator(drift + u * drive, h);
          BlochVector x = grid.traj.states.back();
          for (int i = 1; i <= n; ++i) {
            x = p * x;
            const double t = i == n ? seg_end : seg_start + i * h;
            grid.push(t, x, u, u, u);
          }
        } else {
          if (!feedback) feedback = std::make_unique<SingularController>(spec);
          SegmentFeedback seg_u(*feedback, spec.u_bound);
          BlochVector x = grid.traj.states.back();
          for (int i = 1; i <= n; ++i) {
            const double t_left = seg_start + (i - 1) * h;
            double u1, u2, u3, u4;
            BlochVector k1, k2, k3, k4;
            try {
              k1 = (drift + (u1 = seg_u(x)) * drive) * x;
              const BlochVector x2 = x + 0.5 * h * k1;
              k2 = (drift + (u2 = seg_u(x2)) * drive) * x2;
              const BlochVector x3 = x + 0.5 * h * k2;
              k3 = (drift + (u3 = seg_u(x3)) * drive) * x3;
              const BlochVector x4 = x + h * k3;
              k4 = (drift + (u4 = seg_u(x4)) * drive) * x4;
            } catch (const std::exception& e) {
              std::ostringstream msg;
              msg << "singular control failed at t = " << t_left << ": "
                  << e.what();
              throw std::runtime_error(msg.str());
            }
            x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            const double t = i == n ? seg_end : seg_start + i * h;
            grid.push(t, x, u1, 0.5 * (u2 + u3), u4);
          }
        }
      }
      if (si + 1 < seg->segments.size())
        grid.traj.switch_indices.push_back(grid.traj.times.size() - 1);
      seg_start = seg_end;
    }
  } else {
    const auto& sam = std::get<SampledSchedule>(sched);
    if (sam.u.empty()) throw std::invalid_argument("sampled schedule has no samples");
    if (!(sam.tf > 0.0)) throw std::invalid_argument("sampled schedule needs tf > 0");
    const double dts = sam.dt();
    const int m = substeps(dts, dt_max);
    const double h = dts / m;
    BlochVector x = rho0;
    for (std::size_t k = 0; k < sam.u.size(); ++k) {
      const double u = std::clamp(sam.u[k], -spec.u_bound, spec.u_bound);
      const FieldMatrix p = rk4_propagator(drift + u * drive, h);
      const double t0 = k * dts;
      for (int i = 1; i <= m; ++i) {
        x = p * x;
        const double t =
            i == m ? (k + 1 == sam.u.size() ? sam.tf : (k + 1) * dts) : t0 + i * h;
        grid.push(t, x, u, u, u);
      }
    }
  }

  grid.finish();
  return grid.traj;
}

CostateTrajectory evolve_costate(const CostateVector& lambda_tf,
                                 const Trajectory& realized,
                                 const SystemSpec& spec) {
  spec.validate();
  const std::size_t n = realized.times.size();
  if (n == 0 || realized.states.size() != n || realized.controls.size() != n ||
      realized.step_u_mid.size() + 1 != n || realized.step_u_right.size() + 1 != n)
    throw std::invalid_argument("costate integration: trajectory grid mismatch");

  const FieldMatrix drift = drift_field(spec);
  const FieldMatrix drive = drive_field(spec);
  const auto costate_gen = [&](double u) -> FieldMatrix {
    return -(drift + u * drive).transpose();
  };

  CostateTrajectory out;
  out.times = realized.times;
  out.costates.assign(n, lambda_tf);

  double cached_u = std::numeric_limits<double>::quiet_NaN();
  double cached_h = 0.0;
  FieldMatrix cached_p;

  for (std::size_t k = n - 1; k-- > 0;) {
    const double h = realized.times[k + 1] - realized.times[k];
    const CostateVector& lam1 = out.costates[k + 1];
    if (h == 0.0) {
      out.costates[k] = lam1;
      continue;
    }
    const double ul = realized.controls[k];
    const double um = realized.step_u_mid[k];
    const double ur = realized.step_u_right[k];
    if (ul == um && um == ur) {
      // constant control: the discrete adjoint of the forward step
      if (!(ul == cached_u && h == cached_h)) {
        cached_p = rk4_propagator((drift + ul * drive).transpose(), h);
        cached_u = ul;
        cached_h = h;
      }
      out.costates[k] = cached_p * lam1;
    } else {
      const FieldMatrix cr = costate_gen(ur);
      const FieldMatrix cm = costate_gen(um);
      const FieldMatrix cl = costate_gen(ul);
      const CostateVector k1 = cr * lam1;
      const CostateVector k2 = cm * (lam1 - 0.5 * h * k1);
      const CostateVector k3 = cm * (lam1 - 0.5 * h * k2);
      const CostateVector k4 = cl * (lam1 - h * k3);
      out.costates[k] = lam1 - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  return out;
}

WaveTrajectory evolve_wavefunction(const PureState& psi0,
                                   const ControlSchedule& sched,
                                   const SystemSpec& spec, double dt_max) {
  spec.validate();
  if (spec.dissipative())
    throw std::invalid_argument(
        "wave-function evolution is only valid without dissipation");
  if (!(dt_max > 0.0)) throw std::invalid_argument("dt_max must be > 0");

  // Reuse the Bloch grid machinery for times and realized controls, then
  // integrate the amplitudes with the same fixed-step 4th-order scheme.
  const Trajectory ref = evolve_state(bloch_from_pure(psi0), sched, spec, dt_max);

  WaveTrajectory out;
  out.times = ref.times;
  out.controls = ref.controls;
  out.states.reserve(ref.times.size());
  out.states.push_back(psi0);

  Eigen::Vector2cd psi(psi0.c0, psi0.c1);
  double cached_u = std::numeric_limits<double>::quiet_NaN();
  double cached_h = 0.0;
  WaveMatrix cached_p;
  for (std::size_t k = 0; k + 1 < ref.times.size(); ++k) {
    const double h = ref.times[k + 1] - ref.times[k];
    if (h == 0.0) {
      out.states.push_back(out.states.back());
      continue;
    }
    const double ul = ref.controls[k];
    const double um = ref.step_u_mid[k];
    const double ur = ref.step_u_right[k];
    if (ul == um && um == ur) {
      if (!(ul == cached_u && h == cached_h)) {
        cached_p = wave_propagator(hamiltonian_vector(ul, spec), h);
        cached_u = ul;
        cached_h = h;
      }
      psi = cached_p * psi;
    } else {
      const auto ham = [&](double u) {
        WaveMatrix m;
        const Eigen::Vector3d hv = hamiltonian_vector(u, spec);
        m << hv.z(), std::complex<double>(hv.x(), -hv.y()),
            std::complex<double>(hv.x(), hv.y()), -hv.z();
        return m;
      };
      const std::complex<double> mi(0.0, -1.0);
      const Eigen::Vector2cd k1 = mi * (ham(ul) * psi);
      const Eigen::Vector2cd p2 = psi + 0.5 * h * k1;
      const Eigen::Vector2cd k2 = mi * (ham(um) * p2);
      const Eigen::Vector2cd p3 = psi + 0.5 * h * k2;
      const Eigen::Vector2cd k3 = mi * (ham(um) * p3);
      const Eigen::Vector2cd p4 = psi + h * k3;
      const Eigen::Vector2cd k4 = mi * (ham(ur) * p4);
      psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    out.states.push_back(PureState{psi(0), psi(1)});
  }
  return out;
}

std::string to_string(CostKind kind) {
  return kind == CostKind::Overlap ? "overlap" : "frobenius";
}

CostKind cost_kind_from_string(std::string_view s) {
  if (s == "overlap") return CostKind::Overlap;
  if (s == "frobenius") return CostKind::Frobenius;
  throw std::invalid_argument("unknown cost kind: " + std::string(s));
}

double terminal_cost(const BlochVector& rho_tf, const BlochVector& target,
                     CostKind kind) {
  if (kind == CostKind::Overlap) return -target.dot(rho_tf);
  return 0.5 * (target - rho_tf).squaredNorm();
}

CostateVector terminal_cost_gradient(const BlochVector& rho_tf,
                                     const BlochVector& target, CostKind kind) {
  if (kind == CostKind::Overlap) return -target;
  return rho_tf - target;
}

BlochVector expm_oracle(const BlochVector& rho0, const ControlSchedule& sched,
                        const SystemSpec& spec) {
  spec.validate();
  const auto* seg = std::get_if<SegmentedSchedule>(&sched);
  if (!seg)
    throw std::invalid_argument("expm oracle requires a segmented schedule");
  const FieldMatrix drift = drift_field(spec);
  const FieldMatrix drive = drive_field(spec);
  BlochVector x = rho0;
  for (const auto& s : seg->segments) {
    if (s.kind == SegmentKind::Singular)
      throw std::invalid_argument("expm oracle supports bang segments only");
    if (s.duration < 0.0)
      throw std::invalid_argument("segment durations must be >= 0");
    if (s.duration == 0.0) continue;
    const double u = s.kind == SegmentKind::BangPlus ? spec.u_bound : -spec.u_bound;
    const FieldMatrix a = (drift + u * drive) * s.duration;
    x = a.exp() * x;
  }
  return x;
}

}  // namespace qoc
