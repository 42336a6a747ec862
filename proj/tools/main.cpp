#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qoc/experiments.hpp"
#include "qoc/geometry.hpp"
#include "qoc/io.hpp"
#include "qoc/optimize.hpp"
#include "qoc/parallel.hpp"

using nlohmann::json;
using namespace qoc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerification = 2;

// "0.42pi" -> 0.42*pi, plain numbers pass through
double parse_time(const std::string& text) {
  std::string s = text;
  double factor = 1.0;
  if (s.size() >= 2 && s.substr(s.size() - 2) == "pi") {
    factor = M_PI;
    s = s.substr(0, s.size() - 2);
    if (s.empty()) s = "1";
  }
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw CLI::ValidationError("cannot parse time: " + text);
  return v * factor;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_time(item));
  return out;
}

// "start:step:end" or a comma list, all entries pi-suffixed or plain
std::vector<double> parse_grid(const std::string& text) {
  if (text.find(':') == std::string::npos) return parse_list(text);
  std::stringstream ss(text);
  std::string a, b, c;
  if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') ||
      !std::getline(ss, c, ':'))
    throw CLI::ValidationError("grid must be start:step:end or a comma list");
  const double start = parse_time(a), step = parse_time(b), end = parse_time(c);
  if (!(step > 0.0) || end < start)
    throw CLI::ValidationError("bad grid range: " + text);
  std::vector<double> out;
  for (double t = start; t <= end + 0.25 * step; t += step)
    out.push_back(std::min(t, end));
  if (out.size() > 1 && out[out.size() - 1] == out[out.size() - 2]) out.pop_back();
  return out;
}

PureState parse_state(const std::string& text) {
  const std::vector<double> v = parse_list(text);
  if (v.size() < 2 || v.size() > 3)
    throw CLI::ValidationError("state must be theta,phi[,phi0]: " + text);
  return PureState::from_angles(v[0], v[1], v.size() == 3 ? v[2] : 0.0);
}

struct CommonOptions {
  SystemSpec spec;
  unsigned seed = 0;
  int workers = 0;
  double tol_hc = 1e-3;
  double tol_phi = 1e-3;
  std::string scenario = "prepare";
  std::string initial_bloch;  // "x,y,z" for scenario=custom
  std::string target_bloch;
  std::string cost = "overlap";
  std::string config_path;
  std::string channel_name = "none";

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file (flags win)");
    cmd->add_option("--xi", spec.xi, "drive tilt xi");
    cmd->add_option("--channel", channel_name,
                    "dissipation channel: none|uniform|x|y|z");
    cmd->add_option("--gamma", spec.gamma, "dissipation rate Gamma");
    cmd->add_option("--u-bound", spec.u_bound, "control amplitude bound");
    cmd->add_option("--seed", seed, "optimizer seed");
    cmd->add_option("--workers", workers, "worker threads (0: all cores)");
    cmd->add_option("--tol-hc", tol_hc, "c-Hamiltonian constancy tolerance");
    cmd->add_option("--tol-phi", tol_phi, "singular residual tolerance");
    cmd->add_option("--scenario", scenario, "prepare|retain|custom");
    cmd->add_option("--initial", initial_bloch, "custom initial Bloch x,y,z");
    cmd->add_option("--target", target_bloch, "custom target Bloch x,y,z");
    cmd->add_option("--cost", cost, "terminal cost: overlap|frobenius");
  }

  // config file supplies values for options not set on the command line
  void apply_config(CLI::App* cmd) {
    if (config_path.empty()) return;
    std::ifstream in(config_path);
    if (!in) throw CLI::ValidationError("cannot open config " + config_path);
    json j;
    in >> j;
    const auto overlay = [&](const char* flag, auto& target) {
      const std::string key = std::string(flag).substr(2);
      if (cmd->count(flag) == 0 && j.contains(key)) j.at(key).get_to(target);
    };
    overlay("--xi", spec.xi);
    overlay("--channel", channel_name);
    overlay("--gamma", spec.gamma);
    overlay("--u-bound", spec.u_bound);
    overlay("--seed", seed);
    overlay("--workers", workers);
    overlay("--tol-hc", tol_hc);
    overlay("--tol-phi", tol_phi);
    overlay("--scenario", scenario);
    overlay("--initial", initial_bloch);
    overlay("--target", target_bloch);
    overlay("--cost", cost);
  }

  SystemSpec resolved_spec() {
    spec.channel = channel_from_string(channel_name);
    spec.validate();
    return spec;
  }

  Scenario resolved_scenario() {
    const SystemSpec s = resolved_spec();
    const CostKind kind = cost_kind_from_string(cost);
    if (scenario == "prepare") return Scenario::preparation(s, kind);
    if (scenario == "retain") return Scenario::retention(s, kind);
    if (scenario == "custom") {
      Scenario sc = Scenario::preparation(s, kind);
      if (!initial_bloch.empty()) {
        const auto v = parse_list(initial_bloch);
        if (v.size() != 3) throw CLI::ValidationError("--initial needs x,y,z");
        sc.initial = BlochVector(v[0], v[1], v[2]);
      }
      if (!target_bloch.empty()) {
        const auto v = parse_list(target_bloch);
        if (v.size() != 3) throw CLI::ValidationError("--target needs x,y,z");
        sc.target = BlochVector(v[0], v[1], v[2]);
      }
      return sc;
    }
    throw CLI::ValidationError("unknown scenario " + scenario);
  }

  json as_json() {
    json j = resolved_spec();
    j["seed"] = seed;
    j["workers"] = workers;
    j["tol_hc"] = tol_hc;
    j["tol_phi"] = tol_phi;
    j["scenario"] = scenario;
    j["cost"] = cost;
    return j;
  }

  OptimizeOptions optimizer(int restarts = 8) {
    OptimizeOptions o;
    o.restarts = restarts;
    o.seed = seed;
    o.workers = workers;
    o.tol_hc = tol_hc;
    o.tol_phi = tol_phi;
    return o;
  }
};

void write_with_manifest(const std::string& path, const std::string& content,
                         const json& config) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  std::ofstream man(path + ".manifest.json");
  man << canonical_json(make_manifest(config)) << "\n";
}

std::vector<ProtocolStructure> parse_catalog(const std::string& text) {
  if (text.empty()) return default_catalog();
  std::vector<ProtocolStructure> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(ProtocolStructure::parse(item));
  if (out.empty()) throw CLI::ValidationError("empty catalog");
  return out;
}

ControlSchedule build_schedule(const std::string& structure,
                               const std::string& durations,
                               const std::string& samples, double tf,
                               const std::string& schedule_file) {
  if (!schedule_file.empty()) {
    std::ifstream in(schedule_file);
    if (!in) throw CLI::ValidationError("cannot open " + schedule_file);
    json j;
    in >> j;
    if (j.contains("structure")) {
      const auto st = ProtocolStructure::parse(j.at("structure").get<std::string>());
      return st.schedule(j.at("durations").get<std::vector<double>>());
    }
    SampledSchedule s;
    s.tf = j.at("tf").get<double>();
    s.u = j.at("u").get<std::vector<double>>();
    return s;
  }
  if (!structure.empty()) {
    const auto st = ProtocolStructure::parse(structure);
    auto d = parse_list(durations);
    if (d.size() != st.segment_count()) {
      if (!(tf > 0.0) || !d.empty())
        throw CLI::ValidationError("need --durations matching --structure");
      d.assign(st.segment_count(), tf / st.segment_count());
    }
    return st.schedule(d);
  }
  if (!samples.empty()) {
    if (!(tf > 0.0)) throw CLI::ValidationError("--u requires --tf");
    return SampledSchedule{tf, parse_list(samples)};
  }
  throw CLI::ValidationError(
      "no schedule given: use --structure/--durations, --u or --schedule");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"time-optimal control of a dissipative qubit"};
  app.require_subcommand(1);

  // ---- speed-limit ------------------------------------------------------
  auto* sl = app.add_subcommand("speed-limit",
                                "minimum time between two pure states");
  std::string sl_initial, sl_target;
  sl->add_option("--initial", sl_initial, "theta,phi[,phi0] (pi suffix ok)");
  sl->add_option("--target", sl_target, "theta,phi[,phi0]");

  // ---- simulate -----------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "propagate a control schedule");
  CommonOptions sim_common;
  sim_common.add_to(sim);
  std::string sim_structure, sim_durations, sim_samples, sim_schedule, sim_out;
  std::string sim_tf;
  bool sim_costate = false;
  double sim_div = 4096;
  sim->add_option("--structure", sim_structure, "protocol label, e.g. XSY");
  sim->add_option("--durations", sim_durations, "segment durations (comma list)");
  sim->add_option("--u", sim_samples, "sampled control values (comma list)");
  sim->add_option("--schedule", sim_schedule, "schedule JSON file");
  sim->add_option("--tf", sim_tf, "total time (with --u or equal durations)");
  sim->add_option("--divisions", sim_div, "integrator grid divisions");
  sim->add_option("--out", sim_out, "trajectory CSV path");
  sim->add_flag("--costate", sim_costate, "append backward costate columns");

  // ---- optimize -----------------------------------------------------------
  auto* opt = app.add_subcommand("optimize", "optimize switching times");
  CommonOptions opt_common;
  opt_common.add_to(opt);
  std::string opt_structure = "XSY", opt_tf, opt_out, opt_traj_out, opt_catalog;
  int opt_restarts = 8;
  bool opt_search = false;
  opt->add_option("--structure", opt_structure, "protocol label");
  opt->add_option("--tf", opt_tf, "evolution time")->required();
  opt->add_option("--restarts", opt_restarts, "simplex restarts");
  opt->add_flag("--search", opt_search, "search the whole structure catalog");
  opt->add_option("--catalog", opt_catalog, "comma list of labels for --search");
  opt->add_option("--out", opt_out, "result JSON path");
  opt->add_option("--traj-out", opt_traj_out, "optimal trajectory CSV path");

  // ---- sweep / retain -------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep", "overlap vs evolution time");
  CommonOptions sweep_common;
  sweep_common.add_to(sweep);
  std::string sweep_grid, sweep_out, sweep_catalog;
  int sweep_restarts = 8, sweep_refine = 0;
  bool sweep_baseline = false;
  sweep->add_option("--grid", sweep_grid, "start:step:end or comma list");
  sweep->add_option("--out", sweep_out, "sweep CSV path");
  sweep->add_option("--catalog", sweep_catalog, "comma list of labels");
  sweep->add_option("--restarts", sweep_restarts, "simplex restarts");
  sweep->add_option("--refine", sweep_refine, "transition refinement passes");
  sweep->add_flag("--baseline", sweep_baseline, "also emit the u=0 baseline");

  auto* retain = app.add_subcommand("retain", "state-retention sweep");
  CommonOptions retain_common;
  retain_common.add_to(retain);
  std::string retain_grid, retain_out, retain_catalog;
  int retain_restarts = 8;
  bool retain_baseline = false;
  retain->add_option("--grid", retain_grid, "start:step:end or comma list");
  retain->add_option("--out", retain_out, "sweep CSV path");
  retain->add_option("--catalog", retain_catalog, "comma list of labels");
  retain->add_option("--restarts", retain_restarts, "simplex restarts");
  retain->add_flag("--baseline", retain_baseline, "also emit the u=0 baseline");

  // ---- verify ---------------------------------------------------------------
  auto* ver = app.add_subcommand("verify", "check the optimality conditions");
  CommonOptions ver_common;
  ver_common.add_to(ver);
  std::string ver_structure, ver_durations, ver_samples, ver_schedule, ver_out;
  std::string ver_tf;
  ver->add_option("--structure", ver_structure, "protocol label");
  ver->add_option("--durations", ver_durations, "segment durations");
  ver->add_option("--u", ver_samples, "sampled control values");
  ver->add_option("--schedule", ver_schedule, "schedule JSON file");
  ver->add_option("--tf", ver_tf, "total time (with --u)");
  ver->add_option("--out", ver_out, "report JSON path");

  // ---- grad -------------------------------------------------------------------
  auto* grad = app.add_subcommand("grad", "gradient descent on a sampled control");
  CommonOptions grad_common;
  grad_common.add_to(grad);
  std::string grad_tf, grad_out, grad_json;
  int grad_n = 500, grad_max_iter = 2000;
  double grad_rate = 0.5, grad_stop = 1e-6;
  bool grad_cg = false;
  grad->add_option("--tf", grad_tf, "evolution time")->required();
  grad->add_option("--n", grad_n, "number of control samples");
  grad->add_option("--rate", grad_rate, "update rate");
  grad->add_option("--max-iter", grad_max_iter, "iteration cap");
  grad->add_option("--stop-tol", grad_stop, "stop when updates fall below");
  grad->add_flag("--cg", grad_cg, "conjugate-gradient directions");
  grad->add_option("--out", grad_out, "control CSV path");
  grad->add_option("--json", grad_json, "summary JSON path");

  // ---- singular-arc ------------------------------------------------------------
  auto* arc = app.add_subcommand("singular-arc", "dump the singular arc");
  double arc_xi = 0.2;
  int arc_n = 200;
  std::string arc_out;
  arc->add_option("--xi", arc_xi, "drive tilt xi");
  arc->add_option("--n", arc_n, "theta grid points");
  arc->add_option("--out", arc_out, "CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sl->parsed()) {
      const PureState a = sl_initial.empty() ? ground_state({1.0, 0.0, 2.0})
                                             : parse_state(sl_initial);
      const PureState b = sl_target.empty() ? ground_state({1.0, 0.0, -2.0})
                                            : parse_state(sl_target);
      const double t = quantum_speed_limit(a, b);
      std::printf("T_min = %.12f (%.6f pi)\n", t, t / M_PI);
      return kExitOk;
    }

    if (sim->parsed()) {
      sim_common.apply_config(sim);
      const Scenario sc = sim_common.resolved_scenario();
      const double tf = sim_tf.empty() ? 0.0 : parse_time(sim_tf);
      const ControlSchedule sched =
          build_schedule(sim_structure, sim_durations, sim_samples, tf, sim_schedule);
      const double total = total_time(sched);
      const Trajectory traj = evolve_state(sc.initial, sched, sc.spec, total / sim_div);
      std::optional<CostateTrajectory> lams;
      if (sim_costate)
        lams = evolve_costate(
            terminal_cost_gradient(traj.states.back(), sc.target, sc.cost_kind),
            traj, sc.spec);
      std::ostringstream csv;
      write_trajectory_csv(csv, traj, lams ? &*lams : nullptr);
      json cfg = sim_common.as_json();
      cfg["tf"] = total;
      if (!sim_out.empty())
        write_with_manifest(sim_out, csv.str(), cfg);
      else
        std::cout << csv.str();
      std::printf("|rho(tf)| = %.9f\noverlap = %.9f\n", traj.states.back().norm(),
                  sc.target.dot(traj.states.back()));
      return kExitOk;
    }

    if (opt->parsed()) {
      opt_common.apply_config(opt);
      const Scenario sc = opt_common.resolved_scenario();
      const double tf = parse_time(opt_tf);
      const OptimizeOptions oo = opt_common.optimizer(opt_restarts);
      const OptimizeResult res =
          opt_search
              ? search_structures(tf, sc, parse_catalog(opt_catalog), oo)
              : optimize_switching_times(ProtocolStructure::parse(opt_structure),
                                         tf, sc, oo);
      json cfg = opt_common.as_json();
      cfg["tf"] = tf;
      cfg["structure"] = opt_search ? "search" : opt_structure;
      const std::string text = canonical_json(result_to_json(res)) + "\n";
      if (!opt_out.empty())
        write_with_manifest(opt_out, text, cfg);
      else
        std::cout << text;
      if (!opt_traj_out.empty()) {
        const Trajectory traj =
            evolve_state(sc.initial, res.schedule(), sc.spec, tf / 4096);
        std::ostringstream csv;
        write_trajectory_csv(csv, traj);
        write_with_manifest(opt_traj_out, csv.str(), cfg);
      }
      return res.report.passed() ? kExitOk : kExitVerification;
    }

    if (sweep->parsed() || retain->parsed()) {
      const bool retention = retain->parsed();
      CommonOptions& com = retention ? retain_common : sweep_common;
      com.apply_config(retention ? retain : sweep);
      const std::string grid_text = retention ? retain_grid : sweep_grid;
      const std::vector<double> grid =
          grid_text.empty() ? default_time_grid() : parse_grid(grid_text);
      const auto catalog =
          parse_catalog(retention ? retain_catalog : sweep_catalog);
      SweepOptions so;
      so.opt = com.optimizer(retention ? retain_restarts : sweep_restarts);
      so.refine_transitions = retention ? 0 : sweep_refine;
      const Scenario sc =
          retention ? Scenario::retention(com.resolved_spec(),
                                          cost_kind_from_string(com.cost))
                    : com.resolved_scenario();
      const auto records = sweep_tf(sc, grid, catalog, so);
      std::ostringstream csv;
      write_sweep_csv(csv, records);
      json cfg = com.as_json();
      cfg["grid"] = grid;
      json cat = json::array();
      for (const auto& st : catalog) cat.push_back(st.label);
      cfg["catalog"] = cat;
      const std::string out_path = retention ? retain_out : sweep_out;
      if (!out_path.empty())
        write_with_manifest(out_path, csv.str(), cfg);
      else
        std::cout << csv.str();
      if (retention ? retain_baseline : sweep_baseline) {
        const auto base = zero_control_baseline(sc, grid);
        std::ostringstream bcsv;
        write_sweep_csv(bcsv, base);
        if (!out_path.empty())
          write_with_manifest(out_path + ".baseline.csv", bcsv.str(), cfg);
        else
          std::cout << bcsv.str();
      }
      for (const auto& r : records)
        if (!r.verified) return kExitVerification;
      return kExitOk;
    }

    if (ver->parsed()) {
      ver_common.apply_config(ver);
      const Scenario sc = ver_common.resolved_scenario();
      const double tf = ver_tf.empty() ? 0.0 : parse_time(ver_tf);
      const ControlSchedule sched =
          build_schedule(ver_structure, ver_durations, ver_samples, tf, ver_schedule);
      const double total = total_time(sched);
      const Trajectory traj = evolve_state(sc.initial, sched, sc.spec, total / 4096);
      const CostateTrajectory lams = evolve_costate(
          terminal_cost_gradient(traj.states.back(), sc.target, sc.cost_kind),
          traj, sc.spec);
      const OptimalityReport rep = verify(traj, lams, sched, sc.spec,
                                          ver_common.tol_hc, ver_common.tol_phi);
      std::printf(
          "%s  hc_drift=%.3e bang_violations=%d (worst %.3e) "
          "singular_residual=%.3e hc_sign=%s\n",
          rep.passed() ? "PASS" : "FAIL", rep.hc_drift, rep.bang_violations,
          rep.worst_bang_margin, rep.singular_residual,
          to_string(rep.hc_sign).c_str());
      if (!ver_out.empty()) {
        json cfg = ver_common.as_json();
        cfg["tf"] = total;
        write_with_manifest(ver_out, canonical_json(report_to_json(rep)) + "\n",
                            cfg);
      }
      return rep.passed() ? kExitOk : kExitVerification;
    }

    if (grad->parsed()) {
      grad_common.apply_config(grad);
      const Scenario sc = grad_common.resolved_scenario();
      const double tf = parse_time(grad_tf);
      GradientOptions go;
      go.rate = grad_rate;
      go.max_iter = grad_max_iter;
      go.stop_tol = grad_stop;
      go.conjugate = grad_cg;
      go.tol_hc = grad_common.tol_hc;
      go.tol_phi = grad_common.tol_phi;
      const GradientResult res = gradient_descent_control(grad_n, tf, sc, go);
      json cfg = grad_common.as_json();
      cfg["tf"] = tf;
      cfg["n"] = grad_n;
      cfg["cg"] = grad_cg;
      if (!grad_out.empty()) {
        std::ostringstream csv;
        write_sampled_csv(csv, res.control);
        write_with_manifest(grad_out, csv.str(), cfg);
      }
      const std::string text = canonical_json(result_to_json(res)) + "\n";
      if (!grad_json.empty())
        write_with_manifest(grad_json, text, cfg);
      else
        std::cout << text;
      return kExitOk;
    }

    if (arc->parsed()) {
      std::ostringstream csv;
      write_singular_arc_csv(csv, arc_xi, arc_n);
      if (!arc_out.empty())
        write_with_manifest(arc_out, csv.str(),
                            json{{"xi", arc_xi}, {"n", arc_n}});
      else
        std::cout << csv.str();
      return kExitOk;
    }
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
