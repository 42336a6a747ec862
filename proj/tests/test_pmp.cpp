#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "qoc/optimize.hpp"
#include "qoc/pmp.hpp"

using namespace qoc;

namespace {

SystemSpec make_spec(Channel ch, double gamma, double xi = 0.2) {
  SystemSpec s;
  s.xi = xi;
  s.channel = ch;
  s.gamma = gamma;
  return s;
}

}  // namespace

TEST_CASE("switching function values") {
  const SystemSpec s0 = make_spec(Channel::None, 0.0, 0.0);
  CHECK(switching_function({0, 0, 1}, {0, 0, 1}, s0) == doctest::Approx(0.0));
  CHECK(switching_function({0, 1, 0}, {1, 0, 0}, s0) == doctest::Approx(2.0));
}

TEST_CASE("c-Hamiltonian basics") {
  const SystemSpec sx = make_spec(Channel::X, 0.1);
  CHECK(control_hamiltonian({0, 0, 0}, {0.3, -0.2, 0.9}, 0.7, sx) == 0.0);

  // the x-channel drift vanishes on the x ray, so H_c(u=0) = 0 for every
  // costate there
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    const CostateVector lam(dist(rng), dist(rng), dist(rng));
    CHECK(std::abs(control_hamiltonian(lam, {0.8, 0, 0}, 0.0, sx)) < 1e-15);
  }
}

TEST_CASE("H_c is affine in u with slope Phi") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (Channel ch : {Channel::None, Channel::Uniform, Channel::Y}) {
    const SystemSpec s = make_spec(ch, 0.3, 0.6);
    for (int i = 0; i < 20; ++i) {
      const CostateVector lam(dist(rng), dist(rng), dist(rng));
      const BlochVector rho(dist(rng), dist(rng), dist(rng));
      const double u = dist(rng);
      const double lhs =
          control_hamiltonian(lam, rho, u, s) - control_hamiltonian(lam, rho, 0.0, s);
      CHECK(lhs == doctest::Approx(u * switching_function(lam, rho, s))
                       .epsilon(1e-12));
    }
  }
}

TEST_CASE("H_c stays constant along matched forward/backward integration") {
  const Scenario sc = Scenario::preparation(make_spec(Channel::Z, 0.12));
  for (double u : {-1.0, 0.37, 1.0}) {
    const double tf = 3.0;
    const Trajectory traj =
        evolve_state(sc.initial, SampledSchedule{tf, {u}}, sc.spec, tf / 4096);
    const CostateTrajectory lams = evolve_costate(
        terminal_cost_gradient(traj.states.back(), sc.target, sc.cost_kind),
        traj, sc.spec);
    const OptimalityReport rep =
        verify(traj, lams, ControlSchedule(SampledSchedule{tf, {u}}), sc.spec);
    CHECK(rep.hc_drift < 1e-6 * tf);
  }
}

TEST_CASE("verify samples match the pointwise definitions") {
  const Scenario sc = Scenario::preparation(make_spec(Channel::Uniform, 0.1));
  const SegmentedSchedule sched{{{SegmentKind::BangMinus, 0.4},
                                 {SegmentKind::BangPlus, 0.5}}};
  const Trajectory traj = evolve_state(sc.initial, sched, sc.spec, 0.9 / 512);
  const CostateTrajectory lams = evolve_costate(
      terminal_cost_gradient(traj.states.back(), sc.target, sc.cost_kind), traj,
      sc.spec);
  const OptimalityReport rep = verify(traj, lams, ControlSchedule(sched), sc.spec);
  REQUIRE(rep.phi_samples.size() == traj.times.size());
  for (std::size_t k = 0; k < traj.times.size(); k += 37) {
    CHECK(rep.phi_samples[k] ==
          doctest::Approx(switching_function(lams.costates[k], traj.states[k],
                                             sc.spec)).epsilon(1e-12));
    CHECK(rep.hc_samples[k] ==
          doctest::Approx(control_hamiltonian(lams.costates[k], traj.states[k],
                                              traj.controls[k], sc.spec))
              .epsilon(1e-12));
  }
  CHECK(rep.hc_mean != 0.0);
}

TEST_CASE("bang sign violations are counted with margins") {
  // a protocol driven against the switching function must be flagged
  const Scenario sc = Scenario::preparation(make_spec(Channel::None, 0.0));
  const SegmentedSchedule good{{{SegmentKind::BangMinus, 0.3}}};
  const SegmentedSchedule bad{{{SegmentKind::BangPlus, 0.3}}};
  const auto run = [&](const SegmentedSchedule& sched) {
    const Trajectory traj = evolve_state(sc.initial, sched, sc.spec, 0.3 / 512);
    const CostateTrajectory lams = evolve_costate(
        terminal_cost_gradient(traj.states.back(), sc.target, sc.cost_kind),
        traj, sc.spec);
    return verify(traj, lams, ControlSchedule(sched), sc.spec);
  };
  const OptimalityReport rg = run(good);
  const OptimalityReport rb = run(bad);
  // one of the two one-bang protocols must violate the sign condition
  CHECK(rg.bang_violations + rb.bang_violations > 0);
  if (rb.bang_violations > 0) CHECK(rb.worst_bang_margin > 0.0);
  CHECK((rg.passed() != rb.passed() || !rg.passed()));
}

TEST_CASE("report serializes every field") {
  OptimalityReport r;
  r.hc_samples = {1.0, 2.0};
  r.phi_samples = {0.1, -0.1};
  r.hc_mean = 1.5;
  r.hc_drift = 0.5;
  r.singular_residual = 2e-4;
  r.hc_sign = HcSign::Positive;
  const nlohmann::json j = report_to_json(r);
  CHECK(j.at("hc_sign") == "positive");
  CHECK(j.at("hc_samples").size() == 2);
  CHECK(j.at("passed") == false);
  const nlohmann::json compact = report_to_json(r, false);
  CHECK(!compact.contains("hc_samples"));
}

TEST_CASE("adjoint gradient matches finite differences") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dist(-0.9, 0.9);
  const Scenario sc = Scenario::preparation(make_spec(Channel::X, 0.1));
  const int n = 16;
  const double tf = 0.9 * M_PI;
  SampledSchedule u{tf, {}};
  for (int i = 0; i < n; ++i) u.u.push_back(dist(rng));

  const double dt = tf / 2048;
  const AdjointGradient ag = adjoint_gradient(u, sc, dt);
  double scale = 0.0;
  for (double g : ag.gradient) scale = std::max(scale, std::abs(g));
  for (int i = 0; i < n; ++i) {
    SampledSchedule p = u, m = u;
    p.u[i] += 1e-6;
    m.u[i] -= 1e-6;
    const double cp = terminal_cost(
        evolve_state(sc.initial, p, sc.spec, dt).states.back(), sc.target,
        sc.cost_kind);
    const double cm = terminal_cost(
        evolve_state(sc.initial, m, sc.spec, dt).states.back(), sc.target,
        sc.cost_kind);
    const double fd = (cp - cm) / 2e-6;
    CHECK(std::abs(ag.gradient[i] - fd) <
          1e-4 * std::max({std::abs(fd), std::abs(ag.gradient[i]), 0.01 * scale}));
  }
}

TEST_CASE("wave-function picture") {
  const SystemSpec s = make_spec(Channel::None, 0.0);
  const PureState target = ground_state({1.0, 0.0, -2.0});

  SUBCASE("terminal costate boundary") {
    const PureState psi{0.8, std::complex<double>(0.0, 0.6)};
    const PureState pi = wave_costate_terminal(target, psi);
    const std::complex<double> scale = -inner(target, psi);
    CHECK(std::abs(pi.c0 - scale * target.c0) < 1e-15);
    CHECK(std::abs(pi.c1 - scale * target.c1) < 1e-15);
  }

  SUBCASE("H_c constant and cost gradient given by Phi") {
    // constant control: psi and pi evolve with the same unitary
    const double u = 0.4, tf = 1.1;
    Eigen::Matrix2cd ham;
    const Eigen::Vector3d h = hamiltonian_vector(u, s);
    ham << h.z(), std::complex<double>(h.x(), -h.y()),
        std::complex<double>(h.x(), h.y()), -h.z();
    const Eigen::Matrix2cd um =
        (std::complex<double>(0, -1) * ham * tf).exp();

    const PureState psi0 = ground_state({1.0, 0.0, 2.0});
    Eigen::Vector2cd psi_v(psi0.c0, psi0.c1);
    const Eigen::Vector2cd psi_tf = um * psi_v;
    const PureState pi_tf =
        wave_costate_terminal(target, PureState{psi_tf(0), psi_tf(1)});

    // H_c(tf) equals H_c(0) after pulling both states back
    Eigen::Vector2cd pi_v(pi_tf.c0, pi_tf.c1);
    const Eigen::Vector2cd pi0 = um.adjoint() * pi_v;
    const double hc_tf = control_hamiltonian(pi_tf, PureState{psi_tf(0), psi_tf(1)}, u, s);
    const double hc_0 =
        control_hamiltonian(PureState{pi0(0), pi0(1)}, psi0, u, s);
    CHECK(hc_tf == doctest::Approx(hc_0).epsilon(1e-10));

    // d/du of C = -|<target|Psi(tf)>|^2/2 equals the integral of Phi
    const auto cost_of = [&](double uu) {
      Eigen::Matrix2cd hm;
      const Eigen::Vector3d hv = hamiltonian_vector(uu, s);
      hm << hv.z(), std::complex<double>(hv.x(), -hv.y()),
          std::complex<double>(hv.x(), hv.y()), -hv.z();
      const Eigen::Vector2cd f =
          (std::complex<double>(0, -1) * hm * tf).exp() * psi_v;
      const std::complex<double> ov =
          std::conj(target.c0) * f(0) + std::conj(target.c1) * f(1);
      return -0.5 * std::norm(ov);
    };
    const double fd = (cost_of(u + 1e-6) - cost_of(u - 1e-6)) / 2e-6;
    // integrate Phi(t) over [0, tf] with the midpoint rule
    double acc = 0.0;
    const int steps = 400;
    for (int i = 0; i < steps; ++i) {
      const double t = (i + 0.5) * tf / steps;
      const Eigen::Matrix2cd ut = (std::complex<double>(0, -1) * ham * t).exp();
      const Eigen::Vector2cd pv = ut * psi_v;
      const Eigen::Matrix2cd back =
          (std::complex<double>(0, -1) * ham * (t - tf)).exp();
      const Eigen::Vector2cd qv = back * pi_v;
      acc += switching_function(PureState{qv(0), qv(1)}, PureState{pv(0), pv(1)},
                                s) *
             tf / steps;
    }
    CHECK(acc == doctest::Approx(fd).epsilon(1e-5));
  }
}
