#include "dissent.h"

#include <cstring>
#include <fstream>
#include <sstream>

#include "core/driver.hpp"

using namespace dissent;

struct dissent_config {
  ProblemConfig cfg;
};
struct dissent_gains {
  std::vector<MatrixXd> gains;
};
struct dissent_result {
  ProblemConfig cfg;
  SynthesisRun run;
};

namespace {

thread_local std::string g_last_error;

dissent_status fail(dissent_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <typename F>
dissent_status guarded(F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    return fail(DISSENT_ERR_CONFIG, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(DISSENT_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(DISSENT_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* dissent_version(void) { return "0.1.0"; }

const char* dissent_last_error(void) { return g_last_error.c_str(); }

void dissent_string_free(char* s) { std::free(s); }

dissent_status dissent_config_load(const char* path, dissent_config** out) {
  if (!path || !out) return fail(DISSENT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto* h = new dissent_config{load_config_file(path)};
    *out = h;
    return DISSENT_OK;
  });
}

dissent_status dissent_config_parse(const char* text, dissent_config** out) {
  if (!text || !out) return fail(DISSENT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto* h = new dissent_config{parse_config(text)};
    *out = h;
    return DISSENT_OK;
  });
}

dissent_status dissent_config_example(const char* name, dissent_config** out) {
  if (!name || !out) return fail(DISSENT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto* h = new dissent_config{example_config(name)};
    *out = h;
    return DISSENT_OK;
  });
}

dissent_status dissent_config_emit(const dissent_config* cfg, char** text_out) {
  if (!cfg || !text_out) return fail(DISSENT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *text_out = dup_string(emit_config(cfg->cfg));
    return DISSENT_OK;
  });
}

dissent_status dissent_config_save(const dissent_config* cfg, const char* path) {
  if (!cfg || !path) return fail(DISSENT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    std::ofstream out(path, std::ios::binary);
    if (!out) return fail(DISSENT_ERR_IO, std::string("cannot write ") + path);
    out << emit_config(cfg->cfg);
    return DISSENT_OK;
  });
}

dissent_status dissent_config_override(dissent_config* cfg, const char* key,
                                       const char* value) {
  if (!cfg || !key || !value)
    return fail(DISSENT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    apply_override(cfg->cfg, key, value);
    return DISSENT_OK;
  });
}

int dissent_config_num_agents(const dissent_config* cfg) {
  return cfg ? static_cast<int>(cfg->cfg.agents.size()) : 0;
}

void dissent_config_free(dissent_config* cfg) { delete cfg; }

dissent_status dissent_gains_load_csv(const char* path, dissent_gains** out) {
  if (!path || !out) return fail(DISSENT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    std::ifstream in(path);
    if (!in) return fail(DISSENT_ERR_IO, std::string("cannot open ") + path);
    std::stringstream ss;
    ss << in.rdbuf();
    auto* h = new dissent_gains{gains_from_csv(ss.str())};
    *out = h;
    return DISSENT_OK;
  });
}

dissent_status dissent_gains_from_result(const dissent_result* r, dissent_gains** out) {
  if (!r || !out) return fail(DISSENT_ERR_INVALID_ARGUMENT, "null argument");
  *out = new dissent_gains{r->run.gains};
  return DISSENT_OK;
}

int dissent_gains_count(const dissent_gains* g) {
  return g ? static_cast<int>(g->gains.size()) : 0;
}

dissent_status dissent_gains_dims(const dissent_gains* g, int agent, int* rows,
                                  int* cols) {
  if (!g || !rows || !cols) return fail(DISSENT_ERR_INVALID_ARGUMENT, "null argument");
  if (agent < 0 || agent >= static_cast<int>(g->gains.size()))
    return fail(DISSENT_ERR_INVALID_ARGUMENT, "agent index out of range");
  *rows = static_cast<int>(g->gains[agent].rows());
  *cols = static_cast<int>(g->gains[agent].cols());
  return DISSENT_OK;
}

dissent_status dissent_gains_copy(const dissent_gains* g, int agent, double* buf,
                                  size_t len) {
  if (!g || !buf) return fail(DISSENT_ERR_INVALID_ARGUMENT, "null argument");
  if (agent < 0 || agent >= static_cast<int>(g->gains.size()))
    return fail(DISSENT_ERR_INVALID_ARGUMENT, "agent index out of range");
  const MatrixXd& k = g->gains[agent];
  const size_t need = static_cast<size_t>(k.rows()) * static_cast<size_t>(k.cols());
  if (len < need) return fail(DISSENT_ERR_INVALID_ARGUMENT, "buffer too small");
  for (int i = 0; i < k.rows(); ++i)
    for (int j = 0; j < k.cols(); ++j) buf[i * k.cols() + j] = k(i, j);
  return DISSENT_OK;
}

dissent_status dissent_gains_save_csv(const dissent_gains* g, const char* path) {
  if (!g || !path) return fail(DISSENT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    std::ofstream out(path, std::ios::binary);
    if (!out) return fail(DISSENT_ERR_IO, std::string("cannot write ") + path);
    out << gains_to_csv(g->gains);
    return DISSENT_OK;
  });
}

void dissent_gains_free(dissent_gains* g) { delete g; }

dissent_status dissent_synthesize(const dissent_config* cfg, dissent_result** out) {
  if (!cfg || !out) return fail(DISSENT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&]() -> dissent_status {
    SynthesisRun run = synthesize(cfg->cfg);
    if (run.aborted) {
      const auto code = (run.message.find("infeasible") != std::string::npos ||
                         run.failing_agent >= 0)
                            ? DISSENT_ERR_INFEASIBLE
                            : DISSENT_ERR_SOLVER;
      return fail(code, run.message);
    }
    *out = new dissent_result{cfg->cfg, std::move(run)};
    return DISSENT_OK;
  });
}

int dissent_result_converged(const dissent_result* r) {
  return r && r->run.converged ? 1 : 0;
}

int dissent_result_iterations(const dissent_result* r) {
  return r ? r->run.iterations : 0;
}

double dissent_result_ndt_max_eig(const dissent_result* r) {
  return r ? r->run.final_ndt.max_eig : 0.0;
}

dissent_status dissent_result_objectives(const dissent_result* r, int agent,
                                         double* initial, double* final_value) {
  if (!r || !initial || !final_value)
    return fail(DISSENT_ERR_INVALID_ARGUMENT, "null argument");
  if (agent < 0 || agent >= static_cast<int>(r->run.final_objectives.size()))
    return fail(DISSENT_ERR_INVALID_ARGUMENT, "agent index out of range");
  *initial = r->run.initial_objectives[agent];
  *final_value = r->run.final_objectives[agent];
  return DISSENT_OK;
}

dissent_status dissent_result_summary(const dissent_result* r, char** out) {
  if (!r || !out) return fail(DISSENT_ERR_INVALID_ARGUMENT, "null argument");
  *out = dup_string(summary_text(r->cfg, r->run));
  return DISSENT_OK;
}

dissent_status dissent_result_runlog_csv(const dissent_result* r, char** out) {
  if (!r || !out) return fail(DISSENT_ERR_INVALID_ARGUMENT, "null argument");
  *out = dup_string(r->run.log.to_csv(static_cast<int>(r->cfg.agents.size())));
  return DISSENT_OK;
}

dissent_status dissent_result_write_outputs(const dissent_result* r, const char* dir) {
  if (!r || !dir) return fail(DISSENT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    write_synthesis_outputs(r->cfg, r->run, dir);
    return DISSENT_OK;
  });
}

void dissent_result_free(dissent_result* r) { delete r; }

dissent_status dissent_certify(const dissent_config* cfg, const dissent_gains* g,
                               dissent_certify_report* out) {
  if (!cfg || !g || !out) return fail(DISSENT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto rep = certify_gains(cfg->cfg, g->gains);
    out->certified = rep.certified ? 1 : 0;
    out->failing_agent = rep.failing_agent;
    out->ndt_max_eig = rep.ndt_max_eig;
    if (!rep.certified) g_last_error = rep.message;
    return DISSENT_OK;
  });
}

dissent_status dissent_validate(const dissent_config* cfg, const dissent_gains* g,
                                const char* out_dir, dissent_validate_report* out) {
  if (!cfg || !g || !out) return fail(DISSENT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto rep = validate_gains(cfg->cfg, g->gains, out_dir ? out_dir : "");
    out->ok = rep.ok() ? 1 : 0;
    out->poles_ok = rep.poles_ok ? 1 : 0;
    out->response_ok = rep.response_ok ? 1 : 0;
    out->diverged = rep.diverged ? 1 : 0;
    out->divergence_time = rep.divergence_time;
    out->worst_pole_re = rep.worst_pole_re;
    out->terminal_deviation = rep.terminal_deviation;
    return DISSENT_OK;
  });
}

namespace {
std::vector<std::pair<std::string, std::string>> to_overrides(
    const char* const* overrides, int n) {
  std::vector<std::pair<std::string, std::string>> out;
  for (int i = 0; i < n; ++i)
    out.emplace_back(overrides[2 * i], overrides[2 * i + 1]);
  return out;
}
}  // namespace

int dissent_cmd_synthesize(const char* config_path, const char* out_dir,
                           const char* const* overrides, int n_overrides) {
  if (!config_path || !out_dir) return 2;
  try {
    return run_cmd_synthesize(config_path, out_dir, to_overrides(overrides, n_overrides));
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return 2;
  }
}

int dissent_cmd_certify(const char* config_path, const char* gains_path,
                        const char* const* overrides, int n_overrides) {
  if (!config_path || !gains_path) return 2;
  try {
    return run_cmd_certify(config_path, gains_path, to_overrides(overrides, n_overrides));
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return 2;
  }
}

int dissent_cmd_validate(const char* config_path, const char* gains_path,
                         const char* out_dir, const char* const* overrides,
                         int n_overrides) {
  if (!config_path || !gains_path || !out_dir) return 2;
  try {
    return run_cmd_validate(config_path, gains_path, out_dir,
                            to_overrides(overrides, n_overrides));
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return 2;
  }
}

int dissent_cmd_example(const char* name, const char* out_path) {
  if (!name) return 2;
  try {
    return run_cmd_example(name, out_path ? out_path : "");
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return 2;
  }
}

}  // extern "C"
