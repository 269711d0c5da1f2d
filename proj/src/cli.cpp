#include "p3o/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "p3o/bench.hpp"
#include "p3o/dataset.hpp"
#include "p3o/errors.hpp"
#include "p3o/oracle.hpp"

namespace p3o {

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", x);
  return buf;
}

int cmd_validate(const std::string& path, std::ostream& out) {
  const TabularPOMDP m = load_model(path);
  out << "ok: S=" << m.n_states << " O=" << m.n_obs << " A=" << m.n_actions << " H=" << m.horizon
      << " gamma=" << m.gamma << " fingerprint=" << fingerprint(m) << "\n";
  return 0;
}

int cmd_simulate(const std::string& model, const std::string& behavior, std::size_t n,
                 std::uint64_t seed, const std::string& out_path, std::ostream& out) {
  const TabularPOMDP m = load_model(model);
  const BehaviorPolicy b = load_behavior(behavior);
  validate(b, &m);
  const OfflineDataset d = generate(m, b, n, seed);
  save_dataset(d, out_path);
  out << "wrote " << d.size() << " trajectories to " << out_path << "\n";
  return 0;
}

int cmd_identify(const std::string& model, const std::string& behavior, const std::string& policy,
                 bool allow_inconsistent, std::ostream& out) {
  const TabularPOMDP m = load_model(model);
  const BehaviorPolicy b = load_behavior(behavior);
  validate(b, &m);
  const json pj = read_json_file(policy);
  std::vector<TargetPolicy> pis;
  if (pj.is_object() && pj.contains("policies")) pis = policy_set_from_json(pj).members;
  else pis.push_back(policy_from_json(pj));

  BridgeOptions opt;
  opt.allow_inconsistent = allow_inconsistent;
  double worst = 0.0;
  for (size_t i = 0; i < pis.size(); ++i) {
    const IdentificationResult r = identification_check(m, b, pis[i], opt);
    out << "policy " << i << ": J=" << fmt(r.lhs) << " bridge=" << fmt(r.rhs) << " gap=" << fmt(r.gap);
    // The weight bridge can fail on its own (e.g. history classes) without
    // affecting identification, so report it rather than abort.
    try {
      const CoverageReport cov = concentrability(m, b, pis[i], opt);
      out << " C=" << fmt(cov.c_pi) << (cov.finite ? "" : " (coverage violated)") << "\n";
    } catch (const BridgeError& e) {
      out << " C=n/a (" << e.what() << ")\n";
    }
    worst = std::max(worst, r.gap);
  }
  out << "max gap " << fmt(worst) << "\n";
  return 0;
}

int cmd_p3o(const std::string& config, std::ostream& out) {
  const ExperimentConfig cfg = load_config(config);
  const P3ORun run = p3o_run(cfg);
  write_output(cfg.output_dir, "p3o_report.json", run.report_json.dump(2) + "\n");
  write_output(cfg.output_dir, "p3o_table.txt", run.table);
  out << run.table;
  return 0;
}

int cmd_rate(const std::string& config, std::ostream& out) {
  const ExperimentConfig cfg = load_config(config);
  const RateBenchResult r = rate_bench(cfg);
  write_output(cfg.output_dir, "rate_report.json", r.report.dump(2) + "\n");
  write_output(cfg.output_dir, "rate_cells.csv", r.cells_csv);
  write_output(cfg.output_dir, "rate_medians.csv", r.medians_csv);
  out << r.medians_csv;
  if (r.fit.available)
    out << "slope " << r.fit.slope << " [" << r.fit.ci_low << ", " << r.fit.ci_high << "]\n";
  else
    out << "slope unavailable: " << r.fit.note << "\n";
  out << "resolution floor " << r.resolution_floor
      << (r.below_floor ? " (largest-n median is below it)" : "") << "\n";
  return 0;
}

int cmd_compare(const std::string& config, std::ostream& out) {
  const ExperimentConfig cfg = load_config(config);
  const CompareResult r = baseline_compare(cfg);
  write_output(cfg.output_dir, "compare_report.json", r.report.dump(2) + "\n");
  write_output(cfg.output_dir, "compare_cells.csv", r.cells_csv);
  out << "n,median_p3o,median_baseline,gap,bootstrap_se,p3o_better\n";
  for (const auto& s : r.summaries)
    out << s.n << ',' << s.median_p3o << ',' << s.median_baseline << ',' << s.gap << ','
        << s.bootstrap_se << ',' << (s.p3o_better ? "yes" : "no") << '\n';
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pessimistic proximal policy optimization on tabular POMDPs"};
  app.set_version_flag("--version", std::string(artifact_version()));
  app.require_subcommand(1);

  std::string model, behavior, policy, output, config;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  bool allow_inconsistent = false;

  auto* validate_cmd = app.add_subcommand("validate", "Check a model file");
  validate_cmd->add_option("model", model, "model JSON")->required();

  auto* simulate_cmd = app.add_subcommand("simulate", "Generate an offline dataset");
  simulate_cmd->add_option("model", model, "model JSON")->required();
  simulate_cmd->add_option("behavior", behavior, "behavior policy JSON")->required();
  simulate_cmd->add_option("--n", n, "number of trajectories")->required()->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--seed", seed, "random seed")->required();
  simulate_cmd->add_option("--out", output, "dataset output path")->required();

  auto* identify_cmd = app.add_subcommand("identify-check", "Compare J(pi) with the bridge functional");
  identify_cmd->add_option("model", model, "model JSON")->required();
  identify_cmd->add_option("behavior", behavior, "behavior policy JSON")->required();
  identify_cmd->add_option("policy", policy, "policy or policy-set JSON")->required();
  identify_cmd->add_flag("--allow-inconsistent", allow_inconsistent,
                         "report the least-squares bridge instead of failing");

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config,config", config, "experiment config JSON")->required();
  };
  auto* p3o_cmd = app.add_subcommand("p3o", "Run the pessimistic optimizer once");
  add_config(p3o_cmd);
  auto* rate_cmd = app.add_subcommand("rate-bench", "SubOpt versus n sweep");
  add_config(rate_cmd);
  auto* compare_cmd = app.add_subcommand("baseline-compare", "P3O against a confounder-ignoring baseline");
  add_config(compare_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << artifact_version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*validate_cmd) return cmd_validate(model, out);
    if (*simulate_cmd) return cmd_simulate(model, behavior, n, seed, output, out);
    if (*identify_cmd) return cmd_identify(model, behavior, policy, allow_inconsistent, out);
    if (*p3o_cmd) return cmd_p3o(config, out);
    if (*rate_cmd) return cmd_rate(config, out);
    if (*compare_cmd) return cmd_compare(config, out);
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    err << "invalid: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace p3o
