#include "core/driver.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace dissent {

namespace {

void write_file(const std::string& dir, const std::string& name,
                const std::string& content) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + name + " in " + dir);
  out << content;
}

constexpr const char* kRunlogPlot = R"PY(#!/usr/bin/env python3
"""Plots residuals and per-agent objectives from runlog.csv."""
import csv, sys
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "runlog.csv"
rows = list(csv.DictReader(open(path)))
it = [int(r["iter"]) for r in rows]
rp = [float(r["r_p_max"]) for r in rows]
rd = [float(r["r_d"]) for r in rows]
jcols = [k for k in rows[0] if k.startswith("J_")]

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))
ax1.semilogy(it, rp, label="max primal residual")
ax1.semilogy(it, rd, label="dual residual")
ax1.set_xlabel("iteration"); ax1.set_ylabel("relative residual")
ax1.legend(); ax1.grid(True)
for k in jcols:
    ax2.plot(it, [float(r[k]) for r in rows], label=k)
ax2.set_xlabel("iteration"); ax2.set_ylabel("objective")
ax2.legend(); ax2.grid(True)
fig.tight_layout()
fig.savefig("runlog.png", dpi=140)
print("wrote runlog.png")
)PY";

constexpr const char* kResponsePlot = R"PY(#!/usr/bin/env python3
"""Plots per-agent state trajectories from response.csv."""
import csv, sys
from collections import defaultdict
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "response.csv"
rows = list(csv.DictReader(open(path)))
t = [float(r["t"]) for r in rows]
agents = defaultdict(list)
for k in rows[0]:
    if k.startswith("x"):
        agents[k.split("_")[0]].append(k)

fig, ax = plt.subplots(figsize=(8, 4.5))
for agent in sorted(agents):
    col = agents[agent][0]  # first state of each agent
    ax.plot(t, [float(r[col]) for r in rows], label=agent)
ax.set_xlabel("time [s]"); ax.set_ylabel("first state component")
ax.legend(ncol=2); ax.grid(True)
fig.tight_layout()
fig.savefig("response.png", dpi=140)
print("wrote response.png")
)PY";

constexpr const char* kPolesPlot = R"PY(#!/usr/bin/env python3
"""Scatter of closed-loop poles from poles.csv."""
import csv, sys
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "poles.csv"
rows = list(csv.DictReader(open(path)))
fig, ax = plt.subplots(figsize=(6, 5))
style = {"sample": dict(marker=".", s=12, label="sampled"),
         "vertex": dict(marker="x", s=40, label="vertex"),
         "nominal": dict(marker="o", s=46, label="nominal")}
for src, st in style.items():
    xs = [float(r["re"]) for r in rows if r["source"] == src]
    ys = [float(r["im"]) for r in rows if r["source"] == src]
    if xs:
        ax.scatter(xs, ys, **st)
ax.axvline(0.0, color="k", lw=0.8)
ax.set_xlabel("Re"); ax.set_ylabel("Im"); ax.legend(); ax.grid(True)
fig.tight_layout()
fig.savefig("poles.png", dpi=140)
print("wrote poles.png")
)PY";

SynthesisRun centralized_as_run(const ProblemConfig& cfg, bool with_ndt) {
  const auto agents = build_agents(cfg);
  const auto gains0 = initial_gains(cfg);
  std::vector<double> j0;
  for (size_t i = 0; i < agents.size(); ++i) {
    auto init = init_local(agents[i], gains0[i]);
    if (!init.ok) {
      SynthesisRun out;
      out.aborted = true;
      out.failing_agent = static_cast<int>(i);
      out.message = init.message;
      return out;
    }
    j0.push_back(objective_value(init.iterate, agents[i].objective));
  }
  CentralizedOptions opts;
  opts.with_ndt = with_ndt;
  opts.margin = cfg.admm.margin;
  opts.eps = cfg.admm.ico_eps;
  opts.max_outer = std::max(cfg.admm.max_iters, 1);
  const auto res = centralized_ico(agents, gains0, opts);
  SynthesisRun out;
  if (!res.ok) {
    out.aborted = true;
    out.message = res.message;
    return out;
  }
  out.converged = true;
  out.iterations = res.iterations;
  out.initial_objectives = j0;
  out.final_objectives = res.objectives;
  for (size_t i = 0; i < res.iterates.size(); ++i)
    out.gains.push_back(res.iterates[i].K_hat.of(static_cast<int>(i)));
  const auto aug = assemble_hbar(agents[0].topo);
  NetworkQsr net = NetworkQsr::zero(agents[0].topo);
  for (size_t i = 0; i < res.iterates.size(); ++i) {
    net.agent_triples[i] = res.iterates[i].X;
    net.controller_triples[i] = res.iterates[i].X_hat;
  }
  out.final_consensus = net;
  out.final_ndt = ndt_check(net, aug, 0.0);
  RunLogRow row;
  row.iter = res.iterations;
  row.ndt_max_eig = out.final_ndt.max_eig;
  row.objectives = res.objectives;
  for (double j : res.objectives) row.sum_objective += j;
  out.log.rows.push_back(row);
  return out;
}

}  // namespace

SynthesisRun synthesize(const ProblemConfig& cfg) {
  switch (cfg.admm.mode) {
    case SynthesisMode::Centralized:
      return centralized_as_run(cfg, true);
    case SynthesisMode::CentralizedNoNdt:
      return centralized_as_run(cfg, false);
    case SynthesisMode::Distributed:
      break;
  }
  const auto agents = build_agents(cfg);
  const auto gains0 = initial_gains(cfg);
  AdmmConfig acfg;
  acfg.rho = cfg.admm.rho;
  acfg.eps_p = cfg.admm.eps_p;
  acfg.eps_d = cfg.admm.eps_d;
  acfg.max_iters = cfg.admm.max_iters;
  acfg.margin = cfg.admm.margin;
  acfg.seed = cfg.seed;
  acfg.gain_consensus = cfg.admm.enable_gain_consensus;
  acfg.projection = cfg.admm.projection;
  return run_admm_from_gains(agents, gains0, acfg);
}

CertifyReport certify_gains(const ProblemConfig& cfg,
                            const std::vector<MatrixXd>& gains) {
  CertifyReport rep;
  const auto agents = build_agents(cfg);
  if (gains.size() != agents.size()) {
    rep.message = "expected " + std::to_string(agents.size()) + " gains, got " +
                  std::to_string(gains.size());
    return rep;
  }
  const auto out = network_certify(agents, gains, cfg.admm.margin);
  rep.certified = out.ok;
  rep.failing_agent = out.failing_agent;
  rep.ndt_max_eig = out.ndt_max_eig;
  rep.message = out.message;
  return rep;
}

ValidateReport validate_gains(const ProblemConfig& cfg,
                              const std::vector<MatrixXd>& gains,
                              const std::string& out_dir) {
  ValidateReport rep;
  const Topology topo = build_topology(cfg);
  std::vector<UncertainPlant> plants;
  std::vector<StateSpace> nominal;
  for (const auto& a : build_agents(cfg)) {
    plants.push_back(a.plant);
    nominal.push_back(a.plant.nominal);
  }

  // pole scan over samples and vertices
  const auto poles = pole_scan(plants, gains, topo.global_view(),
                               cfg.validation.samples, cfg.seed);
  rep.worst_pole_re = -1e300;
  auto scan = [&](const std::vector<std::complex<double>>& set) {
    for (const auto& lam : set) rep.worst_pole_re = std::max(rep.worst_pole_re, lam.real());
  };
  scan(poles.nominal);
  for (const auto& s : poles.samples) scan(s);
  for (const auto& s : poles.vertex_sets) scan(s);
  rep.poles_ok = rep.worst_pole_re < 0.0;

  // time response under the validation disturbance
  const auto global = assemble_global_closed_loop(nominal, gains, topo.global_view());
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(-cfg.validation.x0_range,
                                           cfg.validation.x0_range);
  VectorXd x0(global.nx());
  for (int i = 0; i < x0.size(); ++i) x0[i] = u(rng);
  const auto sim = simulate(global, default_disturbance(global.nu()), x0,
                            cfg.validation.t_final, cfg.validation.dt);
  rep.diverged = sim.diverged;
  rep.divergence_time = sim.divergence_time;
  if (!sim.diverged) {
    rep.terminal_deviation = sim.x.row(sim.x.rows() - 1).cwiseAbs().maxCoeff();
    rep.response_ok = rep.terminal_deviation < cfg.validation.threshold;
  }

  if (!out_dir.empty()) {
    // response.csv: t, then per-agent state columns x{i}_{j}
    std::ostringstream rcsv;
    rcsv << "t";
    for (size_t a = 0; a < nominal.size(); ++a)
      for (int j = 0; j < nominal[a].nx(); ++j)
        rcsv << ",x" << (a + 1) << "_" << (j + 1);
    rcsv << "\n";
    rcsv << std::setprecision(10);
    const int stride = std::max<int>(1, static_cast<int>(sim.t.size()) / 6000);
    for (int k = 0; k < sim.t.size(); k += stride) {
      rcsv << sim.t[k];
      for (int c = 0; c < sim.x.cols(); ++c) rcsv << "," << sim.x(k, c);
      rcsv << "\n";
    }
    write_file(out_dir, "response.csv", rcsv.str());

    std::ostringstream pcsv;
    pcsv << "re,im,source\n" << std::setprecision(17);
    for (const auto& lam : poles.nominal)
      pcsv << lam.real() << "," << lam.imag() << ",nominal\n";
    for (const auto& set : poles.samples)
      for (const auto& lam : set) pcsv << lam.real() << "," << lam.imag() << ",sample\n";
    for (const auto& set : poles.vertex_sets)
      for (const auto& lam : set) pcsv << lam.real() << "," << lam.imag() << ",vertex\n";
    write_file(out_dir, "poles.csv", pcsv.str());
    write_file(out_dir, "plot_response.py", kResponsePlot);
    write_file(out_dir, "plot_poles.py", kPolesPlot);
  }
  return rep;
}

std::string summary_text(const ProblemConfig& cfg, const SynthesisRun& run) {
  std::ostringstream os;
  os << "synthesis summary\n=================\n";
  os << "mode: "
     << (cfg.admm.mode == SynthesisMode::Distributed
             ? "distributed"
             : (cfg.admm.mode == SynthesisMode::Centralized ? "centralized"
                                                            : "centralized_no_ndt"))
     << "\n";
  os << "agents: " << cfg.agents.size() << "\n";
  os << "converged: " << (run.converged ? "yes" : "no") << "\n";
  os << "iterations: " << run.iterations << "\n";
  os << std::setprecision(6);
  os << "ndt max eigenvalue at consensus: " << run.final_ndt.max_eig << "\n";
  os << "ndt margin: " << run.final_ndt.margin << "\n\n";
  os << "per-agent objectives (J = trace W for h2 agents, gamma for hinf agents)\n";
  for (size_t i = 0; i < cfg.agents.size(); ++i) {
    os << "  " << cfg.agents[i].name << " ["
       << (cfg.agents[i].objective == ObjectiveKind::H2 ? "h2" : "hinf")
       << "]  initial " << std::setw(12) << run.initial_objectives[i] << "  final "
       << std::setw(12) << run.final_objectives[i] << "\n";
  }
  if (!run.message.empty()) os << "\nnote: " << run.message << "\n";
  return os.str();
}

void write_synthesis_outputs(const ProblemConfig& cfg, const SynthesisRun& run,
                             const std::string& out_dir) {
  write_file(out_dir, "gains.csv", gains_to_csv(run.gains));
  write_file(out_dir, "runlog.csv",
             run.log.to_csv(static_cast<int>(cfg.agents.size())));
  write_file(out_dir, "summary.txt", summary_text(cfg, run));
  write_file(out_dir, "plot_runlog.py", kRunlogPlot);
}

void apply_override(ProblemConfig& cfg, const std::string& key,
                    const std::string& value) {
  try {
    if (key == "seed")
      cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
    else if (key == "rho")
      cfg.admm.rho = std::stod(value);
    else if (key == "max_iters")
      cfg.admm.max_iters = std::stoi(value);
    else
      throw ConfigError(key, "unknown override");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError(key, "cannot parse override value '" + value + "'");
  }
}

namespace {

int with_config(const std::string& config_path,
                const std::vector<std::pair<std::string, std::string>>& overrides,
                const std::function<int(ProblemConfig&)>& body) {
  ProblemConfig cfg;
  try {
    cfg = load_config_file(config_path);
    for (const auto& [k, v] : overrides) apply_override(cfg, k, v);
  } catch (const ConfigError& e) {
    std::cerr << "config error at " << e.path() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  return body(cfg);
}

std::vector<MatrixXd> load_gains_or_exit(const std::string& path, int& code) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "cannot open gains file '" << path << "'\n";
    code = 2;
    return {};
  }
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    code = 0;
    return gains_from_csv(ss.str());
  } catch (const std::exception& e) {
    std::cerr << "gains file error: " << e.what() << "\n";
    code = 2;
    return {};
  }
}

}  // namespace

int run_cmd_synthesize(const std::string& config_path, const std::string& out_dir,
                       const std::vector<std::pair<std::string, std::string>>& overrides) {
  return with_config(config_path, overrides, [&](ProblemConfig& cfg) {
    SynthesisRun run;
    try {
      run = synthesize(cfg);
    } catch (const std::exception& e) {
      std::cerr << "synthesis failed: " << e.what() << "\n";
      return 3;
    }
    if (run.aborted) {
      std::cerr << "synthesis aborted: " << run.message << "\n";
      if (run.failing_agent >= 0)
        std::cerr << "failing agent: " << run.failing_agent << " ("
                  << cfg.agents[run.failing_agent].name << ")\n";
      return 3;
    }
    write_synthesis_outputs(cfg, run, out_dir);
    std::cout << summary_text(cfg, run);
    std::cout << "outputs written to " << out_dir << "\n";
    return 0;
  });
}

int run_cmd_certify(const std::string& config_path, const std::string& gains_path,
                    const std::vector<std::pair<std::string, std::string>>& overrides) {
  return with_config(config_path, overrides, [&](ProblemConfig& cfg) {
    int code = 0;
    const auto gains = load_gains_or_exit(gains_path, code);
    if (code) return code;
    const auto rep = certify_gains(cfg, gains);
    if (rep.certified) {
      std::cout << "certified: network dissipativity test passes\n";
      std::cout << "ndt max eigenvalue: " << rep.ndt_max_eig
                << " (margin " << -rep.ndt_max_eig << ")\n";
      return 0;
    }
    std::cerr << "certification failed";
    if (rep.failing_agent >= 0)
      std::cerr << " at agent " << rep.failing_agent << " ("
                << cfg.agents[rep.failing_agent].name << ")";
    std::cerr << ": " << rep.message << "\n";
    return 1;
  });
}

int run_cmd_validate(const std::string& config_path, const std::string& gains_path,
                     const std::string& out_dir,
                     const std::vector<std::pair<std::string, std::string>>& overrides) {
  return with_config(config_path, overrides, [&](ProblemConfig& cfg) {
    int code = 0;
    const auto gains = load_gains_or_exit(gains_path, code);
    if (code) return code;
    ValidateReport rep;
    try {
      rep = validate_gains(cfg, gains, out_dir);
    } catch (const std::exception& e) {
      std::cerr << "validation failed: " << e.what() << "\n";
      return 2;
    }
    std::cout << "worst closed-loop pole real part: " << rep.worst_pole_re << "\n";
    if (rep.diverged) {
      std::cerr << "simulation diverged at t = " << rep.divergence_time << "\n";
      return 1;
    }
    std::cout << "terminal deviation: " << rep.terminal_deviation << " (threshold "
              << cfg.validation.threshold << ")\n";
    if (!rep.ok()) {
      std::cerr << "validation failed: "
                << (!rep.poles_ok ? "poles reach the closed right half-plane"
                                  : "terminal deviation exceeds the threshold")
                << "\n";
      return 1;
    }
    std::cout << "validation passed\n";
    return 0;
  });
}

int run_cmd_example(const std::string& name, const std::string& out_path) {
  ProblemConfig cfg;
  try {
    cfg = example_config(name);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  const std::string text = emit_config(cfg);
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return 0;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot write '" << out_path << "'\n";
    return 2;
  }
  out << text;
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace dissent
