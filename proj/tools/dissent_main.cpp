// dissent command line front end. Links only the public C interface.
#include <CLI11.hpp>
#include <cstdio>

#include "dissent.h"

namespace {

std::vector<const char*> flatten(const std::vector<std::pair<std::string, std::string>>& kv,
                                 std::vector<std::string>& storage) {
  std::vector<const char*> out;
  for (const auto& [k, v] : kv) {
    storage.push_back(k);
    storage.push_back(v);
  }
  for (const auto& s : storage) out.push_back(s.c_str());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dissent: distributed dissipativity-based controller synthesis"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", gains_path, example_name, out_path;
  std::string seed, rho, max_iters;

  auto add_overrides = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "override the config seed");
    cmd->add_option("--rho", rho, "override the penalty parameter rho");
    cmd->add_option("--max-iters", max_iters, "override the iteration cap");
  };
  auto overrides = [&] {
    std::vector<std::pair<std::string, std::string>> kv;
    if (!seed.empty()) kv.emplace_back("seed", seed);
    if (!rho.empty()) kv.emplace_back("rho", rho);
    if (!max_iters.empty()) kv.emplace_back("max_iters", max_iters);
    return kv;
  };

  auto* synth = app.add_subcommand("synthesize", "run distributed controller synthesis");
  synth->add_option("--config", config_path, "problem configuration file")->required();
  synth->add_option("--out", out_dir, "output directory (gains.csv, runlog.csv, ...)");
  add_overrides(synth);

  auto* cert = app.add_subcommand("certify", "certify gains against the network test");
  cert->add_option("--config", config_path, "problem configuration file")->required();
  cert->add_option("--gains", gains_path, "gains.csv to certify")->required();
  add_overrides(cert);

  auto* val = app.add_subcommand("validate",
                                 "time-domain and pole validation of gains");
  val->add_option("--config", config_path, "problem configuration file")->required();
  val->add_option("--gains", gains_path, "gains.csv to validate")->required();
  val->add_option("--out", out_dir, "output directory (response.csv, poles.csv, ...)");
  add_overrides(val);

  auto* ex = app.add_subcommand("example", "emit a bundled example configuration");
  ex->add_option("name", example_name, "example name: chain3 | uav7")->required();
  ex->add_option("--out", out_path, "output file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::vector<std::string> storage;
  const auto kv = overrides();
  const auto flat = flatten(kv, storage);
  const int n = static_cast<int>(kv.size());
  const char* const* ptr = flat.empty() ? nullptr : flat.data();

  int rc = 2;
  if (synth->parsed())
    rc = dissent_cmd_synthesize(config_path.c_str(), out_dir.c_str(), ptr, n);
  else if (cert->parsed())
    rc = dissent_cmd_certify(config_path.c_str(), gains_path.c_str(), ptr, n);
  else if (val->parsed())
    rc = dissent_cmd_validate(config_path.c_str(), gains_path.c_str(), out_dir.c_str(),
                              ptr, n);
  else if (ex->parsed())
    rc = dissent_cmd_example(example_name.c_str(),
                             out_path.empty() ? nullptr : out_path.c_str());
  if (rc != 0 && dissent_last_error()[0] != '\0')
    std::fprintf(stderr, "%s\n", dissent_last_error());
  return rc;
}
