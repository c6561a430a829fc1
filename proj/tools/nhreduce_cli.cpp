#include "nhr/verify.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using nhr::Vec;
using json = nlohmann::json;

struct RunConfig {
  std::string system = "particle";
  nhr::ExampleParams params;
  Vec initial_q, initial_pD;
  std::string method = "rk4";
  double dt = 1e-3;
  double t_final = 10.0;
  double drift_tolerance = 1e-6;
  Vec level;
  std::vector<std::string> checks;
  unsigned seed = 7;
  std::string output;
};

Vec to_vec(const json& arr) {
  Vec v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) v[i] = arr[i].get<double>();
  return v;
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw nhr::ParameterError("config file not found: " + path);
  json j;
  in >> j;
  if (j.contains("system")) cfg.system = j["system"].get<std::string>();
  if (j.contains("params")) {
    const json& p = j["params"];
    auto get = [&p](const char* key, double& slot) {
      if (p.contains(key)) slot = p[key].get<double>();
    };
    get("mass", cfg.params.mass);
    get("radius", cfg.params.radius);
    get("rotor_inertia", cfg.params.rotor_inertia);
    get("wheel_inertia", cfg.params.wheel_inertia);
    get("semi_axis_a", cfg.params.semi_axis_a);
    get("semi_axis_c", cfg.params.semi_axis_c);
    get("gravity", cfg.params.gravity);
    if (p.contains("inertia")) {
      const Vec I = to_vec(p["inertia"]);
      if (I.size() != 3) throw nhr::ParameterError("inertia must have 3 entries");
      cfg.params.inertia = Eigen::Vector3d(I[0], I[1], I[2]);
    }
  }
  if (j.contains("initial_state")) {
    const json& s = j["initial_state"];
    if (s.contains("q")) cfg.initial_q = to_vec(s["q"]);
    if (s.contains("pD")) cfg.initial_pD = to_vec(s["pD"]);
  }
  if (j.contains("integrator")) {
    const json& s = j["integrator"];
    if (s.contains("method")) cfg.method = s["method"].get<std::string>();
    if (s.contains("dt")) cfg.dt = s["dt"].get<double>();
    if (s.contains("t_final")) cfg.t_final = s["t_final"].get<double>();
    if (s.contains("drift_tolerance")) cfg.drift_tolerance = s["drift_tolerance"].get<double>();
  }
  if (j.contains("reduction") && j["reduction"].contains("level"))
    cfg.level = to_vec(j["reduction"]["level"]);
  if (j.contains("checks")) cfg.checks = j["checks"].get<std::vector<std::string>>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<unsigned>();
  if (j.contains("output")) cfg.output = j["output"].get<std::string>();
}

nhr::Example build_from(const RunConfig& cfg) {
  nhr::Example ex = nhr::build_example(cfg.system, cfg.params);
  if (cfg.initial_q.size() > 0) ex.initial_q = cfg.initial_q;
  if (cfg.initial_pD.size() > 0) ex.initial_pD = cfg.initial_pD;
  if (cfg.level.size() > 0) ex.default_level = cfg.level;
  return ex;
}

int cmd_simulate(const RunConfig& cfg) {
  const nhr::Example ex = build_from(cfg);
  nhr::IntegrateOptions io;
  io.mode = cfg.method == "rk45" ? nhr::IntegratorMode::Adaptive : nhr::IntegratorMode::Fixed;
  io.dt = cfg.dt;
  io.t_final = cfg.t_final;
  const nhr::Trajectory traj = nhr::simulate(ex, ex.initial_state(), io);

  const std::string csv_path =
      cfg.output.empty() ? cfg.system + "_trajectory.csv" : cfg.output;
  std::ofstream csv(csv_path);
  csv << "t";
  const int na = ex.sys.chart.ambient_dim, r = ex.sys.chart.rank_D;
  for (int i = 0; i < na; ++i) csv << ",q" << i;
  for (int i = 0; i < r; ++i) csv << ",pD" << i;
  csv << ",H";
  for (int i = 1; i <= static_cast<int>(ex.sections.sections.size()); ++i) csv << ",J_" << i;
  csv << ",constraint_residual\n";
  char buf[32];
  auto put = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    csv << buf;
  };
  for (size_t i = 0; i < traj.times.size(); ++i) {
    put(traj.times[i]);
    for (int j = 0; j < traj.states[i].size(); ++j) {
      csv << ",";
      put(traj.states[i][j]);
    }
    csv << ",";
    put(traj.diagnostics.at("H")[i]);
    for (int k = 1; k <= static_cast<int>(ex.sections.sections.size()); ++k) {
      csv << ",";
      put(traj.diagnostics.at("J_" + std::to_string(k))[i]);
    }
    csv << ",";
    put(traj.diagnostics.at("constraint_residual")[i]);
    csv << "\n";
  }

  json summary;
  summary["system"] = cfg.system;
  summary["dt"] = cfg.dt;
  summary["t_final"] = cfg.t_final;
  summary["csv"] = csv_path;
  bool ok = true;
  std::string failing;
  for (const auto& [name, vals] : traj.diagnostics) {
    if (name == "constraint_residual") {
      double worst = 0.0;
      for (double v : vals) worst = std::max(worst, std::abs(v));
      summary["drift"][name] = worst;
      continue;
    }
    const nhr::DriftReport dr = nhr::conservation_drift(vals);
    summary["drift"][name] = dr.max_rel_drift;
    if (dr.max_rel_drift > cfg.drift_tolerance && failing.empty()) failing = name;
    ok = ok && dr.max_rel_drift <= cfg.drift_tolerance;
  }
  summary["drift_tolerance"] = cfg.drift_tolerance;
  summary["pass"] = ok;
  if (!ok) summary["failing_invariant"] = failing;
  std::cout << summary.dump(2) << "\n";
  return ok ? 0 : 1;
}

int cmd_verify(const RunConfig& cfg, bool omit_gauge) {
  const nhr::Example ex = build_from(cfg);
  nhr::VerifyOptions opt;
  opt.seed = cfg.seed;
  opt.level = cfg.level;
  opt.omit_gauge = omit_gauge;
  opt.dt = cfg.dt;
  opt.t_final = cfg.t_final;
  const std::vector<std::string> names =
      cfg.checks.empty() ? nhr::verify_check_names() : cfg.checks;
  const std::vector<nhr::CheckResult> results = nhr::run_checks(ex, names, opt);

  json report = json::array();
  bool ok = true;
  std::printf("%-24s %8s %14s %10s  %s\n", "check", "samples", "max_residual", "tolerance",
              "pass");
  for (const nhr::CheckResult& r : results) {
    std::printf("%-24s %8d %14.3e %10.1e  %s\n", r.name.c_str(), r.samples, r.max_residual,
                r.tolerance, r.pass ? "yes" : "NO");
    json item;
    item["check"] = r.name;
    item["system"] = r.system;
    item["samples"] = r.samples;
    item["max_residual"] = r.max_residual;
    item["tolerance"] = r.tolerance;
    item["pass"] = r.pass;
    if (!r.detail.empty()) item["detail"] = r.detail;
    report.push_back(item);
    ok = ok && r.pass;
  }
  if (!cfg.output.empty()) {
    std::ofstream out(cfg.output);
    out << report.dump(2) << "\n";
  } else {
    std::cout << report.dump(2) << "\n";
  }
  return ok ? 0 : 1;
}

int cmd_reduce(const RunConfig& cfg, int grid) {
  const nhr::Example ex = build_from(cfg);
  nhr::GaugePack gauge(ex.sys, ex.red, ex.sections);
  const nhr::MomentumLevel mu{cfg.level.size() > 0 ? cfg.level : ex.default_level};
  nhr::Rng rng(cfg.seed);

  const std::string path = cfg.output.empty() ? cfg.system + "_omega_mu.csv" : cfg.output;
  std::ofstream csv(path);
  const int nb = ex.leaf.qbar.dim, hor = ex.red.chart_tilde.hor_count();
  csv << "sample";
  for (int i = 0; i < nb + hor; ++i)
    for (int j = i + 1; j < nb + hor; ++j) csv << ",omega_" << i << "_" << j;
  csv << "\n";
  char buf[32];
  for (int s = 0; s < grid; ++s) {
    const nhr::LeafPoint pt = ex.sample_leaf(rng);
    csv << s;
    const nhr::Mat Eb = ex.leaf.qbar.frame(pt.x);
    auto basis = [&](int i) {
      Vec dx = Vec::Zero(ex.leaf.qbar.ambient_dim);
      Vec dp = Vec::Zero(hor);
      if (i < nb)
        dx = Eb.col(i);
      else
        dp[i - nb] = 1.0;
      return std::pair<Vec, Vec>(dx, dp);
    };
    for (int i = 0; i < nb + hor; ++i)
      for (int j = i + 1; j < nb + hor; ++j) {
        auto [ux, up] = basis(i);
        auto [vx, vp] = basis(j);
        csv << ",";
        std::snprintf(buf, sizeof buf, "%.17g",
                      nhr::reduced_omega_mu(gauge, ex.leaf, mu, pt, ux, up, vx, vp));
        csv << buf;
      }
    csv << "\n";
  }
  std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_momenta(const RunConfig& cfg) {
  const nhr::Example ex = build_from(cfg);
  if (!ex.momentum_ode) {
    std::cerr << "system has no shape-ODE reconstruction\n";
    return 2;
  }
  const nhr::MomentumOdeSetup& setup = *ex.momentum_ode;
  nhr::MomentumOdeProblem prob{setup.sys.get(), setup.xi, setup.shape, setup.shape_point, 1.0,
                               20240811};
  double worst = 0.0;
  auto A = nhr::momentum_ode_matrix(prob, 1e-6, &worst);
  const int k = static_cast<int>(setup.xi.size());
  const nhr::MatrixOdeSolution F =
      nhr::solve_momentum_ode(A, setup.lo, setup.hi, setup.origin, nhr::Mat::Identity(k, k),
                              2e-3);
  const std::string path = cfg.output.empty() ? cfg.system + "_momenta.csv" : cfg.output;
  std::ofstream csv(path);
  csv << "gamma";
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) csv << ",A_" << i << j;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) csv << ",F_" << i << j;
  csv << "\n";
  char buf[32];
  const int n = 80;
  for (int s = 0; s <= n; ++s) {
    const double g = setup.lo + (setup.hi - setup.lo) * s / n;
    const nhr::Mat Ag = nhr::assemble_momentum_ode(prob, g).A;
    const nhr::Mat Fg = F.value(g);
    std::snprintf(buf, sizeof buf, "%.17g", g);
    csv << buf;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", Ag(i, j));
        csv << "," << buf;
      }
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", Fg(i, j));
        csv << "," << buf;
      }
    csv << "\n";
  }
  std::cout << "wrote " << path << " (probe consistency " << worst << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-step symmetry reduction of nonholonomic systems"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;
  std::vector<double> level_arg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--system", cfg.system, "builtin system name");
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--level", level_arg, "momentum level c_1..c_k");
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--output", cfg.output, "output path");
  };

  CLI::App* sim = app.add_subcommand("simulate", "integrate and export a trajectory");
  add_common(sim);
  sim->add_option("--dt", cfg.dt, "time step");
  sim->add_option("--t-final", cfg.t_final, "final time");
  sim->add_option("--method", cfg.method, "rk4 | rk45");
  sim->add_option("--tolerance", cfg.drift_tolerance, "drift tolerance");

  CLI::App* ver = app.add_subcommand("verify", "run verification checks");
  add_common(ver);
  bool omit_gauge = false;
  ver->add_option("--checks", cfg.checks, "subset of checks to run");
  ver->add_flag("--omit-gauge", omit_gauge, "negative control: drop the gauge 2-form");

  CLI::App* red = app.add_subcommand("reduce", "emit omega_mu^B tables");
  add_common(red);
  int grid = 20;
  red->add_option("--grid", grid, "number of leaf samples");

  CLI::App* mom = app.add_subcommand("momenta", "assemble/solve the gauge-momentum ODE");
  add_common(mom);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    if (!level_arg.empty()) {
      cfg.level = Vec(level_arg.size());
      for (size_t i = 0; i < level_arg.size(); ++i) cfg.level[i] = level_arg[i];
    }
    if (sim->parsed()) return cmd_simulate(cfg);
    if (ver->parsed()) return cmd_verify(cfg, omit_gauge);
    if (red->parsed()) return cmd_reduce(cfg, grid);
    if (mom->parsed()) return cmd_momenta(cfg);
  } catch (const nhr::ParameterError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
