#include "qoc/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "qoc/parallel.hpp"

namespace qoc {

namespace {

constexpr double kInfeasibleCost = 1e3;

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

ProtocolStructure ProtocolStructure::parse(std::string_view s) {
  if (s.empty()) throw std::invalid_argument("empty protocol structure");
  for (char c : s)
    if (c != 'X' && c != 'Y' && c != 'S')
      throw std::invalid_argument("protocol letters must be X, Y or S");
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i] == s[i - 1])
      throw std::invalid_argument("consecutive identical segments in " +
                                  std::string(s));
  return ProtocolStructure{std::string(s)};
}

std::vector<SegmentKind> ProtocolStructure::kinds() const {
  std::vector<SegmentKind> out;
  out.reserve(label.size());
  for (char c : label)
    out.push_back(c == 'X' ? SegmentKind::BangMinus
                           : c == 'Y' ? SegmentKind::BangPlus
                                      : SegmentKind::Singular);
  return out;
}

SegmentedSchedule ProtocolStructure::schedule(
    const std::vector<double>& durations) const {
  if (durations.size() != label.size())
    throw std::invalid_argument("durations do not match structure " + label);
  SegmentedSchedule sched;
  const auto ks = kinds();
  for (std::size_t i = 0; i < ks.size(); ++i)
    sched.segments.push_back({ks[i], durations[i]});
  return sched;
}

Scenario Scenario::preparation(const SystemSpec& spec, CostKind kind) {
  return {bloch_from_pure(ground_state({1.0, 0.0, 2.0})),
          bloch_from_pure(ground_state({1.0, 0.0, -2.0})), spec, kind};
}

Scenario Scenario::retention(const SystemSpec& spec, CostKind kind) {
  const BlochVector r = bloch_from_pure(ground_state({1.0, 0.0, 2.0}));
  return {r, r, spec, kind};
}

nlohmann::json result_to_json(const OptimizeResult& r, bool include_samples) {
  return nlohmann::json{{"structure", r.structure.label},
                        {"switch_times", r.durations},
                        {"t_f", r.tf},
                        {"cost", r.cost},
                        {"overlap", r.overlap},
                        {"evaluations", r.evaluations},
                        {"report", report_to_json(r.report, include_samples)}};
}

nlohmann::json result_to_json(const GradientResult& r, bool include_samples) {
  return nlohmann::json{{"structure", "sampled"},
                        {"n_samples", r.control.u.size()},
                        {"t_f", r.control.tf},
                        {"cost", r.cost},
                        {"overlap", r.overlap},
                        {"iterations", r.iterations},
                        {"evaluations", r.evaluations},
                        {"converged", r.converged},
                        {"report", report_to_json(r.report, include_samples)}};
}

namespace detail {

NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& fn,
    const Eigen::VectorXd& x0, double step, const NelderMeadOptions& opts) {
  const int n = static_cast<int>(x0.size());
  NelderMeadResult res;
  if (n == 0) {
    res.x = x0;
    res.f = fn(x0);
    res.evaluations = 1;
    return res;
  }

  std::vector<Eigen::VectorXd> xs;
  std::vector<double> fs;
  xs.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    Eigen::VectorXd v = x0;
    if (i > 0) v(i - 1) += step;
    xs.push_back(v);
    fs.push_back(fn(v));
    ++res.evaluations;
  }

  std::vector<int> order(n + 1);
  const auto sort_order = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return fs[a] < fs[b]; });
  };

  while (res.evaluations < opts.max_evaluations) {
    sort_order();
    const int best = order[0], worst = order[n], second = order[n - 1];

    double spread = 0.0;
    for (int i = 0; i <= n; ++i)
      spread = std::max(spread, (xs[i] - xs[best]).cwiseAbs().maxCoeff());
    if (spread < opts.x_tol && std::abs(fs[worst] - fs[best]) < opts.f_tol) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i)
      if (i != worst) centroid += xs[i];
    centroid /= n;

    const Eigen::VectorXd xr = centroid + (centroid - xs[worst]);
    const double fr = fn(xr);
    ++res.evaluations;

    if (fr < fs[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - xs[worst]);
      const double fe = fn(xe);
      ++res.evaluations;
      if (fe < fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
    } else if (fr < fs[second]) {
      xs[worst] = xr;
      fs[worst] = fr;
    } else {
      const bool outside = fr < fs[worst];
      const Eigen::VectorXd xc =
          centroid + 0.5 * ((outside ? xr : xs[worst]) - centroid);
      const double fc = fn(xc);
      ++res.evaluations;
      if (fc < (outside ? fr : fs[worst])) {
        xs[worst] = xc;
        fs[worst] = fc;
      } else {
        for (int i = 0; i <= n; ++i) {
          if (i == best) continue;
          xs[i] = xs[best] + 0.5 * (xs[i] - xs[best]);
          fs[i] = fn(xs[i]);
          ++res.evaluations;
        }
      }
    }
  }

  sort_order();
  res.x = xs[order[0]];
  res.f = fs[order[0]];
  return res;
}

}  // namespace detail

namespace {

// Continuous penalty objective over raw cumulative switch times: evaluate
// at the sorted/clamped projection, plus a term measuring the disorder.
struct SwitchObjective {
  const ProtocolStructure& structure;
  double tf;
  const Scenario& scenario;
  double dt;

  std::vector<double> durations_of(const Eigen::VectorXd& tau_raw) const {
    std::vector<double> tau(tau_raw.data(), tau_raw.data() + tau_raw.size());
    std::sort(tau.begin(), tau.end());
    std::vector<double> d(tau.size() + 1);
    double prev = 0.0;
    for (std::size_t i = 0; i < tau.size(); ++i) {
      const double t = std::clamp(tau[i], 0.0, tf);
      d[i] = t - prev;
      prev = t;
    }
    d.back() = tf - prev;
    return d;
  }

  double violation_of(const Eigen::VectorXd& tau) const {
    double v = 0.0;
    for (Eigen::Index i = 0; i < tau.size(); ++i) {
      v += std::max(0.0, -tau(i)) + std::max(0.0, tau(i) - tf);
      if (i > 0) v += std::max(0.0, tau(i - 1) - tau(i));
    }
    return v;
  }

  double operator()(const Eigen::VectorXd& tau) const {
    double cost;
    try {
      const Trajectory traj = evolve_state(
          scenario.initial, structure.schedule(durations_of(tau)), scenario.spec, dt);
      cost = terminal_cost(traj.states.back(), scenario.target, scenario.cost_kind);
    } catch (const std::exception&) {
      cost = kInfeasibleCost;
    }
    return cost + (100.0 / tf) * violation_of(tau);
  }
};

Eigen::VectorXd cumulative_of(const std::vector<double>& durations) {
  Eigen::VectorXd tau(static_cast<Eigen::Index>(durations.size()) - 1);
  double acc = 0.0;
  for (Eigen::Index i = 0; i + 1 < static_cast<Eigen::Index>(durations.size()); ++i) {
    acc += durations[i];
    tau(i) = acc;
  }
  return tau;
}

std::vector<Eigen::VectorXd> initial_points(const ProtocolStructure& st, double tf,
                                            const OptimizeOptions& opts) {
  const int n = static_cast<int>(st.segment_count()) - 1;
  std::vector<Eigen::VectorXd> inits;
  Eigen::VectorXd equal(n);
  for (int i = 0; i < n; ++i)
    equal(i) = tf * static_cast<double>(i + 1) / st.segment_count();
  inits.push_back(equal);
  for (int r = 1; r < std::max(1, opts.restarts); ++r) {
    std::mt19937_64 rng(mix64(opts.seed ^ fnv1a(st.label)) + r);
    std::uniform_real_distribution<double> jitter(-0.18, 0.18);
    Eigen::VectorXd v = equal;
    for (int i = 0; i < n; ++i)
      v(i) = std::clamp(equal(i) + jitter(rng) * tf, 0.0, tf);
    std::sort(v.data(), v.data() + v.size());
    inits.push_back(v);
  }
  // long horizons are dominated by the singular stretch; seed one simplex
  // with short bangs and the rest of the time on the S segments
  const std::size_t n_singular = std::count(st.label.begin(), st.label.end(), 'S');
  if (n_singular > 0) {
    const std::size_t k = st.segment_count();
    const double bang = std::min(0.12 * M_PI, tf / (2.0 * k));
    const double rest = tf - bang * static_cast<double>(k - n_singular);
    if (rest > 0.0) {
      std::vector<double> d(k, bang);
      for (std::size_t i = 0; i < k; ++i)
        if (st.label[i] == 'S') d[i] = rest / n_singular;
      inits.push_back(cumulative_of(d));
    }
  }
  for (const auto& d : opts.extra_inits) {
    if (d.size() != st.segment_count()) continue;
    inits.push_back(cumulative_of(d));
  }
  return inits;
}

struct RunOutcome {
  double cost = kInfeasibleCost;
  Eigen::VectorXd tau;
  long evaluations = 0;
};

detail::NelderMeadOptions nm_options(double tf, const OptimizeOptions& opts) {
  detail::NelderMeadOptions nm;
  nm.max_evaluations = opts.max_evaluations;
  nm.x_tol = 1e-9 * std::max(tf, 1.0);
  nm.f_tol = 1e-13;
  return nm;
}

RunOutcome run_simplex(const SwitchObjective& obj, const Eigen::VectorXd& x0,
                       double tf, const OptimizeOptions& opts) {
  const auto r = detail::nelder_mead(obj, x0, 0.08 * tf, nm_options(tf, opts));
  return {r.f, r.x, r.evaluations};
}

// The sorted/clamped projection is flat along infeasible directions, which
// can collapse the simplex prematurely. Restart a small fresh simplex at the
// best point, and once more from an interior nudge when a segment hit zero.
RunOutcome polish_outcome(const SwitchObjective& obj, RunOutcome best, double tf,
                          const OptimizeOptions& opts) {
  if (best.tau.size() == 0) return best;
  const auto nm = nm_options(tf, opts);
  const auto improve = [&](const Eigen::VectorXd& x0, double step) {
    const auto r = detail::nelder_mead(obj, x0, step, nm);
    best.evaluations += r.evaluations;
    if (r.f < best.cost) {
      best.cost = r.f;
      best.tau = r.x;
    }
  };
  improve(best.tau, 0.015 * tf);

  std::vector<double> d = obj.durations_of(best.tau);
  int collapsed = 0;
  std::size_t largest = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] <= 1e-12) ++collapsed;
    if (d[i] > d[largest]) largest = i;
  }
  if (collapsed > 0) {
    const double bump = 0.01 * tf;
    std::vector<double> nudged = d;
    for (double& v : nudged)
      if (v <= 1e-12) v = bump;
    nudged[largest] -= bump * collapsed;
    if (nudged[largest] > 0.0) improve(cumulative_of(nudged), 0.01 * tf);
  }
  return best;
}

OptimizeResult finalize_result(const ProtocolStructure& st, double tf,
                               const Scenario& scenario,
                               const std::vector<double>& durations,
                               long evaluations, const OptimizeOptions& opts) {
  OptimizeResult res;
  res.structure = st;
  res.durations = durations;
  res.tf = tf;
  res.evaluations = evaluations;
  const ControlSchedule sched = st.schedule(durations);
  const double dt = tf > 0.0 ? tf / opts.verify_divisions : 1.0;
  const Trajectory traj = evolve_state(scenario.initial, sched, scenario.spec, dt);
  res.cost = terminal_cost(traj.states.back(), scenario.target, scenario.cost_kind);
  res.overlap = scenario.target.dot(traj.states.back());
  if (opts.attach_report) {
    const CostateTrajectory costates = evolve_costate(
        terminal_cost_gradient(traj.states.back(), scenario.target, scenario.cost_kind),
        traj, scenario.spec);
    res.report =
        verify(traj, costates, sched, scenario.spec, opts.tol_hc, opts.tol_phi);
  }
  return res;
}

// Where the feedback clamps, the realized control is a bang: move those
// clamped head/tail stretches of each singular segment into the adjacent
// bang segment of the same sign. The control is unchanged; only the
// declared segmentation becomes honest.
std::vector<double> relabel_clamped(const ProtocolStructure& st, double tf,
                                    const Scenario& scenario,
                                    const std::vector<double>& durations) {
  std::vector<double> d = durations;
  try {
    const Trajectory traj = evolve_state(scenario.initial, st.schedule(d),
                                         scenario.spec, tf / 2048.0);
    const auto kinds = st.kinds();
    const double bound = scenario.spec.u_bound;
    const auto clamped_at = [&](std::size_t step, double sign) {
      return std::abs(traj.controls[step] - sign * bound) <= 1e-9;
    };
    std::size_t lo = 0;
    for (std::size_t si = 0; si < kinds.size(); ++si) {
      const std::size_t hi = si < traj.switch_indices.size()
                                 ? traj.switch_indices[si]
                                 : traj.times.size() - 1;
      if (kinds[si] == SegmentKind::Singular && hi > lo) {
        if (si + 1 < kinds.size() && kinds[si + 1] != SegmentKind::Singular) {
          const double sign = kinds[si + 1] == SegmentKind::BangPlus ? 1.0 : -1.0;
          std::size_t j = hi;
          while (j > lo && clamped_at(j - 1, sign)) --j;
          const double moved = traj.times[hi] - traj.times[j];
          if (moved > 0.0 && moved < d[si]) {
            d[si] -= moved;
            d[si + 1] += moved;
          }
        }
        if (si > 0 && kinds[si - 1] != SegmentKind::Singular) {
          const double sign = kinds[si - 1] == SegmentKind::BangPlus ? 1.0 : -1.0;
          std::size_t j = lo;
          while (j < hi && clamped_at(j, sign)) ++j;
          const double moved = traj.times[j] - traj.times[lo];
          if (moved > 0.0 && moved < d[si]) {
            d[si] -= moved;
            d[si - 1] += moved;
          }
        }
      }
      lo = hi;
    }
  } catch (const std::exception&) {
    return durations;
  }
  return d;
}

// The terminal cost can be flat along families of near-equivalent switch
// times (a clamped feedback stretch trades length with its neighboring
// bang at no cost). The cost simplex then stalls anywhere in the valley,
// while only the extremal representative drives the switching function to
// zero on the singular stretch. When the report fails, re-polish the
// switch times on the optimality residuals themselves, guarding the cost.
OptimizeResult pmp_polish(const ProtocolStructure& st, double tf,
                          const Scenario& scenario, OptimizeResult base,
                          const OptimizeOptions& opts) {
  const std::size_t k = st.segment_count();
  if (!opts.attach_report || base.report.passed() || k < 2 || !(tf > 0.0))
    return base;

  // with clamped stretches latched, the extremal representative of the
  // flat valley costs no more than the raw minimum to solver precision
  const double guard = base.cost + 1e-6 * (1.0 + std::abs(base.cost));
  const SwitchObjective helper{st, tf, scenario, tf / opts.search_divisions};
  const double dt = tf / 2048.0;

  const auto residual = [&](const Eigen::VectorXd& tau) {
    double score;
    try {
      const ControlSchedule sched = st.schedule(helper.durations_of(tau));
      const Trajectory traj = evolve_state(scenario.initial, sched, scenario.spec, dt);
      const double cost =
          terminal_cost(traj.states.back(), scenario.target, scenario.cost_kind);
      const CostateTrajectory costates = evolve_costate(
          terminal_cost_gradient(traj.states.back(), scenario.target,
                                 scenario.cost_kind),
          traj, scenario.spec);
      const OptimalityReport rep =
          verify(traj, costates, sched, scenario.spec, opts.tol_hc, opts.tol_phi);
      score = rep.hc_drift + rep.singular_residual +
              rep.worst_bang_margin + 1e4 * std::max(0.0, cost - guard);
    } catch (const std::exception&) {
      score = kInfeasibleCost;
    }
    return score + (100.0 / tf) * helper.violation_of(tau);
  };

  detail::NelderMeadOptions nm;
  nm.max_evaluations = 800;
  nm.x_tol = 1e-10 * std::max(tf, 1.0);
  nm.f_tol = 1e-12;

  std::vector<std::vector<double>> starts{base.durations};
  const std::vector<double> relabeled =
      relabel_clamped(st, tf, scenario, base.durations);
  if (relabeled != base.durations) starts.push_back(relabeled);

  detail::NelderMeadResult best;
  best.f = std::numeric_limits<double>::infinity();
  long extra_evals = 0;
  for (const auto& d : starts) {
    auto r = detail::nelder_mead(residual, cumulative_of(d), 5e-3 * tf, nm);
    extra_evals += r.evaluations;
    const auto r2 = detail::nelder_mead(residual, r.x, 5e-4 * tf, nm);
    extra_evals += r2.evaluations;
    if (r2.f < r.f) r = r2;
    if (r.f < best.f) best = r;
  }

  OptimizeResult refined = finalize_result(st, tf, scenario,
                                           helper.durations_of(best.x),
                                           base.evaluations + extra_evals, opts);
  const bool better_report =
      refined.report.passed() ||
      (!base.report.passed() &&
       refined.report.hc_drift + refined.report.singular_residual <
           base.report.hc_drift + base.report.singular_residual);
  if (refined.cost <= guard && better_report) return refined;
  base.evaluations = refined.evaluations;
  return base;
}

}  // namespace

OptimizeResult optimize_switching_times(const ProtocolStructure& structure,
                                        double tf, const Scenario& scenario,
                                        const OptimizeOptions& opts) {
  if (!(tf >= 0.0)) throw std::invalid_argument("tf must be >= 0");
  scenario.spec.validate();

  if (tf == 0.0)
    return finalize_result(structure, tf, scenario,
                           std::vector<double>(structure.segment_count(), 0.0), 1,
                           opts);

  const SwitchObjective obj{structure, tf, scenario, tf / opts.search_divisions};

  if (structure.segment_count() == 1) {
    // zero-dimensional search: a single bang (or singular) evaluation
    return finalize_result(structure, tf, scenario, {tf}, 1, opts);
  }

  const auto inits = initial_points(structure, tf, opts);
  std::vector<RunOutcome> outcomes(inits.size());
  parallel_for(inits.size(), opts.workers,
               [&](std::size_t i) { outcomes[i] = run_simplex(obj, inits[i], tf, opts); });

  long evals = 0;
  const RunOutcome* best = nullptr;
  for (const auto& o : outcomes) {
    evals += o.evaluations;
    if (!best || o.cost < best->cost) best = &o;
  }
  if (!best || best->cost >= 0.5 * kInfeasibleCost)
    throw std::runtime_error("switching-time optimization infeasible for " +
                             structure.label);
  RunOutcome polished = *best;
  polished.evaluations = 0;
  polished = polish_outcome(obj, polished, tf, opts);
  evals += polished.evaluations;
  OptimizeResult res = finalize_result(
      structure, tf, scenario, obj.durations_of(polished.tau), evals, opts);
  return pmp_polish(structure, tf, scenario, std::move(res), opts);
}

const std::vector<ProtocolStructure>& default_catalog() {
  static const std::vector<ProtocolStructure> catalog = [] {
    std::vector<ProtocolStructure> c;
    for (const char* label : {"X", "Y", "XY", "YX", "XYX", "YXY", "XSY", "YSX",
                              "YSXY", "XSXY", "XYSXY", "XYSYX"})
      c.push_back(ProtocolStructure::parse(label));
    return c;
  }();
  return catalog;
}

SearchResult search_structures_detailed(
    double tf, const Scenario& scenario,
    const std::vector<ProtocolStructure>& catalog, const OptimizeOptions& opts,
    const WarmStartMap* warm_starts) {
  if (catalog.empty()) throw std::invalid_argument("empty structure catalog");

  if (tf == 0.0) {
    // every protocol is trivially identical; the tie-break picks the winner
    const ProtocolStructure* pick = &catalog.front();
    for (const auto& st : catalog)
      if (st.segment_count() < pick->segment_count() ||
          (st.segment_count() == pick->segment_count() && st.label < pick->label))
        pick = &st;
    SearchResult out;
    for (const auto& st : catalog)
      out.structure_durations[st.label] =
          std::vector<double>(st.segment_count(), 0.0);
    out.winner = finalize_result(*pick, 0.0, scenario,
                                 std::vector<double>(pick->segment_count(), 0.0),
                                 static_cast<long>(catalog.size()), opts);
    return out;
  }

  struct Task {
    std::size_t structure;
    Eigen::VectorXd init;
  };
  std::vector<Task> tasks;
  std::vector<SwitchObjective> objectives;
  objectives.reserve(catalog.size());
  for (std::size_t s = 0; s < catalog.size(); ++s) {
    OptimizeOptions local = opts;
    if (warm_starts) {
      const auto it = warm_starts->find(catalog[s].label);
      if (it != warm_starts->end())
        for (const auto& d : it->second)
          if (d.size() == catalog[s].segment_count()) local.extra_inits.push_back(d);
    }
    objectives.push_back(
        SwitchObjective{catalog[s], tf, scenario, tf / opts.search_divisions});
    if (catalog[s].segment_count() == 1) {
      tasks.push_back({s, Eigen::VectorXd()});
    } else {
      for (const auto& x0 : initial_points(catalog[s], tf, local))
        tasks.push_back({s, x0});
    }
  }

  std::vector<RunOutcome> outcomes(tasks.size());
  parallel_for(tasks.size(), opts.workers, [&](std::size_t i) {
    const auto& t = tasks[i];
    if (catalog[t.structure].segment_count() == 1) {
      RunOutcome o;
      o.tau = t.init;
      o.cost = objectives[t.structure](t.init);
      o.evaluations = 1;
      outcomes[i] = o;
    } else {
      outcomes[i] = run_simplex(objectives[t.structure], t.init, tf, opts);
    }
  });

  std::vector<double> best_cost(catalog.size(), kInfeasibleCost);
  std::vector<Eigen::VectorXd> best_tau(catalog.size());
  long evals = 0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    evals += outcomes[i].evaluations;
    const std::size_t s = tasks[i].structure;
    if (outcomes[i].cost < best_cost[s]) {
      best_cost[s] = outcomes[i].cost;
      best_tau[s] = outcomes[i].tau;
    }
  }

  std::vector<long> polish_evals(catalog.size(), 0);
  parallel_for(catalog.size(), opts.workers, [&](std::size_t s) {
    if (best_cost[s] >= 0.5 * kInfeasibleCost || best_tau[s].size() == 0) return;
    RunOutcome o{best_cost[s], best_tau[s], 0};
    o = polish_outcome(objectives[s], o, tf, opts);
    polish_evals[s] = o.evaluations;
    best_cost[s] = o.cost;
    best_tau[s] = o.tau;
  });
  for (long e : polish_evals) evals += e;

  double lowest = kInfeasibleCost;
  for (double c : best_cost) lowest = std::min(lowest, c);
  if (lowest >= 0.5 * kInfeasibleCost)
    throw std::runtime_error("structure search found no feasible protocol");

  // tie-break toward fewer segments, then lexicographic label
  const double tie = lowest + 1e-8 * (1.0 + std::abs(lowest));
  std::size_t winner = catalog.size();
  for (std::size_t s = 0; s < catalog.size(); ++s) {
    if (best_cost[s] > tie) continue;
    if (winner == catalog.size() ||
        catalog[s].segment_count() < catalog[winner].segment_count() ||
        (catalog[s].segment_count() == catalog[winner].segment_count() &&
         catalog[s].label < catalog[winner].label))
      winner = s;
  }

  SearchResult out;
  for (std::size_t s = 0; s < catalog.size(); ++s) {
    if (best_cost[s] >= 0.5 * kInfeasibleCost) continue;
    out.structure_durations[catalog[s].label] =
        objectives[s].durations_of(best_tau[s]);
    out.structure_costs[catalog[s].label] = best_cost[s];
  }
  out.winner = finalize_result(catalog[winner], tf, scenario,
                               objectives[winner].durations_of(best_tau[winner]),
                               evals, opts);
  out.winner = pmp_polish(catalog[winner], tf, scenario, std::move(out.winner), opts);
  out.structure_durations[catalog[winner].label] = out.winner.durations;
  return out;
}

OptimizeResult search_structures(
    double tf, const Scenario& scenario,
    const std::vector<ProtocolStructure>& catalog, const OptimizeOptions& opts,
    const WarmStartMap* warm_starts) {
  return search_structures_detailed(tf, scenario, catalog, opts, warm_starts).winner;
}

AdjointGradient adjoint_gradient(const SampledSchedule& control,
                                 const Scenario& scenario, double dt_max) {
  AdjointGradient out;
  out.trajectory = evolve_state(scenario.initial, control, scenario.spec, dt_max);
  out.cost = terminal_cost(out.trajectory.states.back(), scenario.target,
                           scenario.cost_kind);
  out.costates = evolve_costate(
      terminal_cost_gradient(out.trajectory.states.back(), scenario.target,
                             scenario.cost_kind),
      out.trajectory, scenario.spec);

  const FieldMatrix drive = drive_field(scenario.spec);
  const std::size_t n_nodes = out.trajectory.times.size();
  std::vector<double> phi(n_nodes);
  for (std::size_t k = 0; k < n_nodes; ++k)
    phi[k] = out.costates.costates[k].dot(drive * out.trajectory.states[k]);

  // per-sample integral of Phi by the trapezoid rule on the substep grid
  const std::size_t n = control.u.size();
  const std::size_t m = (n_nodes - 1) / n;
  out.gradient.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = k * m + i;
      acc += 0.5 * (phi[j] + phi[j + 1]) *
             (out.trajectory.times[j + 1] - out.trajectory.times[j]);
    }
    out.gradient[k] = acc;
  }
  return out;
}

GradientResult gradient_descent_control(int n_samples, double tf,
                                        const Scenario& scenario,
                                        const GradientOptions& opts,
                                        const std::vector<double>* u_init) {
  if (n_samples < 2) throw std::invalid_argument("need at least 2 samples");
  if (!(tf > 0.0)) throw std::invalid_argument("tf must be > 0");
  scenario.spec.validate();

  const double bound = scenario.spec.u_bound;
  const double dt_max = tf / opts.step_divisions;
  SampledSchedule u{tf, std::vector<double>(n_samples, 0.0)};
  if (u_init) {
    if (u_init->size() != static_cast<std::size_t>(n_samples))
      throw std::invalid_argument("u_init size does not match n_samples");
    u.u = *u_init;
    for (double& v : u.u) v = std::clamp(v, -bound, bound);
  }

  GradientResult res;
  long evals = 0;

  const auto cost_of = [&](const SampledSchedule& s) {
    ++evals;
    const Trajectory t = evolve_state(scenario.initial, s, scenario.spec, dt_max);
    return terminal_cost(t.states.back(), scenario.target, scenario.cost_kind);
  };

  AdjointGradient ag = adjoint_gradient(u, scenario, dt_max);
  ++evals;
  double cost = ag.cost;
  const double sample_dt = tf / n_samples;

  // steepest-descent direction measured as the per-sample average of Phi,
  // matching the u <- u - rate * Phi update
  std::vector<double> gbar(n_samples), gbar_prev, dir(n_samples, 0.0);
  const auto load_gbar = [&] {
    for (int i = 0; i < n_samples; ++i) gbar[i] = ag.gradient[i] / sample_dt;
  };
  load_gbar();

  double step = opts.rate;
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    res.iterations = iter;

    bool steepest = !opts.conjugate || gbar_prev.empty();
    if (!steepest) {
      double num = 0.0, den = 0.0;
      for (int i = 0; i < n_samples; ++i) {
        num += gbar[i] * (gbar[i] - gbar_prev[i]);
        den += gbar_prev[i] * gbar_prev[i];
      }
      const double beta = den > 0.0 ? std::max(0.0, num / den) : 0.0;
      double descent = 0.0;
      for (int i = 0; i < n_samples; ++i) {
        dir[i] = -gbar[i] + beta * dir[i];
        descent += dir[i] * gbar[i];
      }
      if (descent >= 0.0) steepest = true;  // not a descent direction
    }
    if (steepest)
      for (int i = 0; i < n_samples; ++i) dir[i] = -gbar[i];

    SampledSchedule trial = u;
    double trial_cost = cost;
    double eta = std::min(opts.rate, step * 2.0);
    bool accepted = false;
    double max_update = 0.0;
    for (int bt = 0; bt < 45; ++bt) {
      max_update = 0.0;
      for (int i = 0; i < n_samples; ++i) {
        trial.u[i] = std::clamp(u.u[i] + eta * dir[i], -bound, bound);
        max_update = std::max(max_update, std::abs(trial.u[i] - u.u[i]));
      }
      if (max_update == 0.0) break;
      trial_cost = cost_of(trial);
      if (trial_cost < cost) {
        accepted = true;
        break;
      }
      eta *= 0.5;
    }

    if (!accepted) {
      res.converged = true;
      break;
    }

    u = trial;
    cost = trial_cost;
    step = eta;
    gbar_prev = gbar;
    ag = adjoint_gradient(u, scenario, dt_max);
    ++evals;
    cost = ag.cost;
    load_gbar();

    if (max_update < opts.stop_tol) {
      res.converged = true;
      break;
    }
  }

  res.control = u;
  res.cost = cost;
  res.overlap = scenario.target.dot(ag.trajectory.states.back());
  res.evaluations = evals;
  res.report = verify(ag.trajectory, ag.costates, ControlSchedule(u),
                      scenario.spec, opts.tol_hc, opts.tol_phi);
  return res;
}

}  // namespace qoc
