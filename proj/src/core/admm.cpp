#include "core/admm.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <iomanip>
#include <json.hpp>
#include <sstream>
#include <thread>

namespace dissent {

namespace {

using nlohmann::json;

json mat_to_json(const MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

MatrixXd mat_from_json(const json& j) {
  const int r = static_cast<int>(j.size());
  const int c = r ? static_cast<int>(j[0].size()) : 0;
  MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int k = 0; k < c; ++k) m(i, k) = j[i][k].get<double>();
  return m;
}

json triple_to_json(const QsrTriple& t) {
  return json{{"Q", mat_to_json(t.Q)}, {"S", mat_to_json(t.S)}, {"R", mat_to_json(t.R)}};
}

QsrTriple triple_from_json(const json& j) {
  return QsrTriple(mat_from_json(j.at("Q")), mat_from_json(j.at("S")),
                   mat_from_json(j.at("R")));
}

json gains_to_json(const GainTuple& g) {
  json out = json::array();
  for (size_t k = 0; k < g.members.size(); ++k)
    out.push_back(json{{"agent", g.members[k]}, {"K", mat_to_json(g.gains[k])}});
  return out;
}

GainTuple gains_from_json(const json& j) {
  GainTuple g;
  for (const auto& e : j) {
    g.members.push_back(e.at("agent").get<int>());
    g.gains.push_back(mat_from_json(e.at("K")));
  }
  return g;
}

}  // namespace

std::string serialize(const AgentMessage& m) {
  json j{{"type", "agent"},
         {"iteration", m.iteration},
         {"agent", m.agent},
         {"X", triple_to_json(m.X)},
         {"X_hat", triple_to_json(m.X_hat)},
         {"K_hat", gains_to_json(m.K_hat)},
         {"target_X", triple_to_json(m.target_X)},
         {"target_X_hat", triple_to_json(m.target_X_hat)},
         {"target_K", gains_to_json(m.target_K)},
         {"objective", m.objective},
         {"warning", m.warning}};
  return j.dump();
}

std::string serialize(const CoordinatorMessage& m) {
  json j{{"type", "coordinator"}, {"iteration", m.iteration}, {"agent", m.agent},
         {"Z", triple_to_json(m.Z)},  {"Z_hat", triple_to_json(m.Z_hat)},
         {"Z_tilde", gains_to_json(m.Z_tilde)}, {"stop", m.stop}};
  return j.dump();
}

AgentMessage parse_agent_message(const std::string& bytes) {
  const json j = json::parse(bytes);
  AgentMessage m;
  m.iteration = j.at("iteration").get<int>();
  m.agent = j.at("agent").get<int>();
  m.X = triple_from_json(j.at("X"));
  m.X_hat = triple_from_json(j.at("X_hat"));
  m.K_hat = gains_from_json(j.at("K_hat"));
  m.target_X = triple_from_json(j.at("target_X"));
  m.target_X_hat = triple_from_json(j.at("target_X_hat"));
  m.target_K = gains_from_json(j.at("target_K"));
  m.objective = j.at("objective").get<double>();
  m.warning = j.at("warning").get<bool>();
  return m;
}

CoordinatorMessage parse_coordinator_message(const std::string& bytes) {
  const json j = json::parse(bytes);
  CoordinatorMessage m;
  m.iteration = j.at("iteration").get<int>();
  m.agent = j.at("agent").get<int>();
  m.Z = triple_from_json(j.at("Z"));
  m.Z_hat = triple_from_json(j.at("Z_hat"));
  m.Z_tilde = gains_from_json(j.at("Z_tilde"));
  m.stop = j.at("stop").get<bool>();
  return m;
}

AgentDuals dual_update(const AgentDuals& duals, const QsrTriple& x,
                       const QsrTriple& x_hat, const GainTuple& k_hat,
                       const QsrTriple& z, const QsrTriple& z_hat,
                       const GainTuple& z_tilde) {
  AgentDuals out = duals;
  out.T = duals.T + (x - z);
  out.T_hat = duals.T_hat + (x_hat - z_hat);
  if (!z_tilde.members.empty()) {
    for (size_t k = 0; k < out.T_tilde.members.size(); ++k) {
      const int j = out.T_tilde.members[k];
      out.T_tilde.gains[k] += k_hat.of(j) - z_tilde.of(j);
    }
  }
  return out;
}

namespace {
double guarded(double x) { return std::max(x, 1e-12); }
}  // namespace

Residuals residuals(const std::vector<AgentMessage>& locals, const NetworkQsr& z,
                    const GainTuple& z_tilde, const NetworkQsr& z_prev,
                    const GainTuple& z_tilde_prev, bool gain_channel) {
  Residuals out;
  for (size_t i = 0; i < locals.size(); ++i) {
    const auto& m = locals[i];
    double num = (m.X - z.agent_triples[i]).norm() +
                 (m.X_hat - z.controller_triples[i]).norm();
    double den = m.X.norm() + m.X_hat.norm();
    if (gain_channel) {
      for (size_t k = 0; k < m.K_hat.members.size(); ++k) {
        num += (m.K_hat.gains[k] - z_tilde.of(m.K_hat.members[k])).norm();
        den += m.K_hat.gains[k].norm();
      }
    }
    out.r_p.push_back(num / guarded(den));
  }
  out.r_p_max = out.r_p.empty() ? 0.0 : *std::max_element(out.r_p.begin(), out.r_p.end());
  double num_d = 0.0, den_d = 0.0;
  for (int k = 0; k < z.ops(); ++k) {
    num_d += (z.op(k) - z_prev.op(k)).norm();
    den_d += z.op(k).norm();
  }
  if (gain_channel) {
    for (size_t k = 0; k < z_tilde.members.size(); ++k) {
      num_d += (z_tilde.gains[k] - z_tilde_prev.gains[k]).norm();
      den_d += z_tilde.gains[k].norm();
    }
  }
  out.r_d = num_d / guarded(den_d);
  return out;
}

std::string RunLog::to_csv(int num_agents) const {
  std::ostringstream os;
  os << "iter,r_p_max,r_d,ndt_max_eig,sum_objective";
  for (int i = 1; i <= num_agents; ++i) os << ",J_" << i;
  os << ",elapsed_ms\n";
  os << std::scientific << std::setprecision(17);
  for (const auto& r : rows) {
    os << r.iter << "," << r.r_p_max << "," << r.r_d << "," << r.ndt_max_eig << ","
       << r.sum_objective;
    for (double j : r.objectives) os << "," << j;
    os << "," << r.elapsed_ms << "\n";
  }
  return os.str();
}

void InProcTransport::Queue::push(std::string s) {
  {
    std::lock_guard<std::mutex> lk(mu);
    items.push_back(std::move(s));
  }
  cv.notify_one();
}

std::string InProcTransport::Queue::pop() {
  std::unique_lock<std::mutex> lk(mu);
  cv.wait(lk, [&] { return !items.empty(); });
  std::string s = std::move(items.front());
  items.pop_front();
  return s;
}

InProcTransport::InProcTransport(int num_agents, bool capture) : capture_(capture) {
  for (int i = 0; i < num_agents; ++i) down_.push_back(std::make_unique<Queue>());
}

void InProcTransport::to_coordinator(std::string bytes) {
  if (capture_) {
    std::lock_guard<std::mutex> lk(cap_mu_);
    captured_.push_back(bytes);
  }
  up_.push(std::move(bytes));
}

std::string InProcTransport::from_agents_blocking() { return up_.pop(); }

void InProcTransport::to_agent(int agent, std::string bytes) {
  if (capture_) {
    std::lock_guard<std::mutex> lk(cap_mu_);
    captured_.push_back(bytes);
  }
  down_[agent]->push(std::move(bytes));
}

std::string InProcTransport::from_coordinator_blocking(int agent) {
  return down_[agent]->pop();
}

std::vector<std::string> InProcTransport::captured() const {
  std::lock_guard<std::mutex> lk(cap_mu_);
  return captured_;
}

namespace {

GainTuple average_gain_targets(const std::vector<AgentMessage>& msgs) {
  // member-wise average of the dual-adjusted gain proposals
  GainTuple out;
  std::vector<int> counts;
  for (const auto& m : msgs) {
    for (size_t k = 0; k < m.target_K.members.size(); ++k) {
      const int j = m.target_K.members[k];
      if (!out.has(j)) {
        out.members.push_back(j);
        out.gains.push_back(MatrixXd::Zero(m.target_K.gains[k].rows(),
                                           m.target_K.gains[k].cols()));
        counts.push_back(0);
      }
      for (size_t q = 0; q < out.members.size(); ++q)
        if (out.members[q] == j) {
          out.gains[q] += m.target_K.gains[k];
          counts[q] += 1;
        }
    }
  }
  for (size_t q = 0; q < out.members.size(); ++q) out.gains[q] /= counts[q];
  return out;
}

}  // namespace

SynthesisRun run_admm(const std::vector<AgentProblem>& agents,
                      const std::vector<LocalIterate>& initial,
                      const AdmmConfig& cfg) {
  SynthesisRun out;
  const int n = static_cast<int>(agents.size());
  if (static_cast<int>(initial.size()) != n)
    dim_error("run_admm", "one initial iterate per agent required");

  const auto aug = assemble_hbar(agents[0].topo);
  ProjectorOptions popts;
  popts.margin = cfg.margin;
  popts.method = cfg.projection;
  ConsensusProjector projector(aug, popts);

  // initial consensus: the agents' own initial tuples
  NetworkQsr z = NetworkQsr::zero(agents[0].topo);
  GainTuple z_tilde;
  for (int i = 0; i < n; ++i) {
    z.agent_triples[i] = initial[i].X;
    z.controller_triples[i] = initial[i].X_hat;
    out.initial_objectives.push_back(objective_value(initial[i], agents[i].objective));
    out.gains.push_back(initial[i].K_hat.of(i));
  }
  out.final_objectives = out.initial_objectives;
  if (cfg.gain_consensus) {
    std::vector<AgentMessage> seed;
    for (int i = 0; i < n; ++i) {
      AgentMessage m;
      m.target_K = initial[i].K_hat;
      seed.push_back(m);
    }
    z_tilde = average_gain_targets(seed);
  }

  if (cfg.max_iters <= 0) {
    out.message = "no iterations requested";
    out.final_consensus = z;
    out.final_ndt = ndt_check(z, aug, 0.0);
    return out;
  }

  InProcTransport transport(n, cfg.capture_messages);

  std::vector<std::thread> workers;
  workers.reserve(n);
  for (int i = 0; i < n; ++i) {
    workers.emplace_back([&, i] {
      LocalIterate iterate = initial[i];
      AgentDuals duals;
      duals.T = QsrTriple::zero(iterate.X.l(), iterate.X.m());
      duals.T_hat = QsrTriple::zero(iterate.X_hat.l(), iterate.X_hat.m());
      if (cfg.gain_consensus) {
        duals.T_tilde = iterate.K_hat;
        for (auto& g : duals.T_tilde.gains) g.setZero();
      }
      bool first = true;
      while (true) {
        CoordinatorMessage cm =
            parse_coordinator_message(transport.from_coordinator_blocking(i));
        if (cm.stop) break;
        if (!first) {
          // dual ascent against the newly broadcast consensus
          duals = dual_update(duals, iterate.X, iterate.X_hat, iterate.K_hat, cm.Z,
                              cm.Z_hat, cm.Z_tilde);
        }
        first = false;
        ConsensusView view{cm.Z, cm.Z_hat, cm.Z_tilde};
        XUpdateResult res;
        try {
          res = x_update(agents[i], iterate, view, duals, cfg.rho);
        } catch (const std::exception& e) {
          res.iterate = iterate;
          res.iterate.warning = true;
          res.solver_warning = true;
          res.objective = objective_value(iterate, agents[i].objective);
        }
        iterate = res.iterate;
        AgentMessage m;
        m.iteration = cm.iteration + 1;
        m.agent = i;
        m.X = iterate.X;
        m.X_hat = iterate.X_hat;
        m.K_hat = iterate.K_hat;
        m.target_X = iterate.X + duals.T;
        m.target_X_hat = iterate.X_hat + duals.T_hat;
        m.target_K = iterate.K_hat;
        if (cfg.gain_consensus)
          for (size_t k = 0; k < m.target_K.gains.size(); ++k)
            m.target_K.gains[k] += duals.T_tilde.gains[k];
        m.objective = res.objective;
        m.warning = res.solver_warning;
        transport.to_coordinator(serialize(m));
      }
    });
  }

  auto broadcast = [&](int iter, bool stop) {
    for (int i = 0; i < n; ++i) {
      CoordinatorMessage cm;
      cm.iteration = iter;
      cm.agent = i;
      cm.Z = z.agent_triples[i];
      cm.Z_hat = z.controller_triples[i];
      cm.Z_tilde = z_tilde;
      cm.stop = stop;
      transport.to_agent(i, serialize(cm));
    }
  };

  double best_residual = std::numeric_limits<double>::infinity();
  bool converged = false, aborted = false;
  int k = 0;
  const auto t0 = std::chrono::steady_clock::now();
  NetworkQsr z_prev = z;
  GainTuple z_tilde_prev = z_tilde;

  while (k < cfg.max_iters) {
    broadcast(k, false);
    ++k;
    std::vector<AgentMessage> msgs(n);
    std::vector<bool> got(n, false);
    for (int c = 0; c < n; ++c) {
      AgentMessage m = parse_agent_message(transport.from_agents_blocking());
      if (m.iteration != k || m.agent < 0 || m.agent >= n || got[m.agent]) {
        out.message = "barrier violation: unexpected message tag";
        aborted = true;
        break;
      }
      got[m.agent] = true;
      msgs[m.agent] = std::move(m);
    }
    if (aborted) break;

    NetworkQsr targets = NetworkQsr::zero(agents[0].topo);
    for (int i = 0; i < n; ++i) {
      targets.agent_triples[i] = msgs[i].target_X;
      targets.controller_triples[i] = msgs[i].target_X_hat;
    }
    z_prev = z;
    z_tilde_prev = z_tilde;
    const auto proj = projector.project(targets);
    if (!proj.ok()) {
      out.message =
          (proj.status == ProjectionResult::Status::Infeasible)
              ? "consensus projection infeasible: the NDT set is empty for this topology"
              : "consensus projection failed: " + proj.message;
      aborted = true;
      break;
    }
    z = proj.z;
    if (cfg.gain_consensus) z_tilde = average_gain_targets(msgs);

    const auto res = residuals(msgs, z, z_tilde, z_prev, z_tilde_prev,
                               cfg.gain_consensus);
    NetworkQsr aggregate = NetworkQsr::zero(agents[0].topo);
    for (int i = 0; i < n; ++i) {
      aggregate.agent_triples[i] = msgs[i].X;
      aggregate.controller_triples[i] = msgs[i].X_hat;
    }
    const auto ndt_local = ndt_check(aggregate, aug, 0.0);

    RunLogRow row;
    row.iter = k;
    row.r_p_max = res.r_p_max;
    row.r_d = res.r_d;
    row.ndt_max_eig = proj.ndt_max_eig;
    row.sum_objective = 0.0;
    for (int i = 0; i < n; ++i) {
      row.objectives.push_back(msgs[i].objective);
      row.sum_objective += msgs[i].objective;
    }
    row.elapsed_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    out.log.rows.push_back(row);

    const double combined = std::max(res.r_p_max, res.r_d);
    if (combined < best_residual) {
      best_residual = combined;
      for (int i = 0; i < n; ++i) {
        out.gains[i] = msgs[i].K_hat.of(i);
        out.final_objectives[i] = msgs[i].objective;
      }
      out.iterations = k;
    }

    const bool residuals_ok = res.r_p_max <= cfg.eps_p && res.r_d <= cfg.eps_d;
    if (residuals_ok && ndt_local.max_eig < 0.0) {
      converged = true;
      for (int i = 0; i < n; ++i) {
        out.gains[i] = msgs[i].K_hat.of(i);
        out.final_objectives[i] = msgs[i].objective;
      }
      out.iterations = k;
      break;
    }
  }

  broadcast(k, true);
  for (auto& w : workers) w.join();

  out.converged = converged;
  out.aborted = aborted;
  out.final_consensus = z;
  out.final_ndt = ndt_check(z, aug, 0.0);
  if (cfg.capture_messages) out.captured_messages = transport.captured();
  if (!aborted && !converged && out.message.empty())
    out.message = "iteration limit reached; returning best-so-far gains";
  return out;
}

SynthesisRun run_admm_from_gains(const std::vector<AgentProblem>& agents,
                                 const std::vector<MatrixXd>& gains,
                                 const AdmmConfig& cfg) {
  std::vector<LocalIterate> inits;
  for (size_t i = 0; i < agents.size(); ++i) {
    auto r = init_local(agents[i], gains[i]);
    if (!r.ok) {
      SynthesisRun out;
      out.aborted = true;
      out.failing_agent = static_cast<int>(i);
      out.message = r.message;
      return out;
    }
    inits.push_back(r.iterate);
  }
  return run_admm(agents, inits, cfg);
}

}  // namespace dissent
