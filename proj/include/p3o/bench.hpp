#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "p3o/instances.hpp"
#include "p3o/json_io.hpp"
#include "p3o/pessimism.hpp"

namespace p3o {

const char* artifact_version();

struct ExperimentConfig {
  // Either a builder name or explicit model/behavior files.
  std::string instance;
  std::string model_path;
  std::string behavior_path;
  std::string dataset_path;     // p3o only: use this dataset instead of generating one
  std::string policy_set_path;  // otherwise a sampled linear-softmax set

  HistoryClass history_class;
  int policy_count = 20;
  std::uint64_t policy_seed = 7;
  double l_pi = 5.0;

  std::vector<std::size_t> n_grid{1000};
  std::vector<std::uint64_t> seeds{1};

  std::optional<double> gamma;  // needed only when no model is given
  double lambda = 1.0;
  double c1 = 1.0;
  double delta = 0.1;
  std::optional<double> xi;
  double L_b = 10.0;
  double L_g = 1.0;
  double M_B = 1.0;
  double M_G = 1.0;
  GridParams grid;

  std::string output_dir = ".";
  int threads = 1;
  int bootstrap = 1000;
  std::uint64_t bootstrap_seed = 12345;

  json raw;  // the document as given; hashed into every report
};

// Relative paths inside the document resolve against base_dir.
ExperimentConfig parse_config(const json& j, const std::string& base_dir = "");
ExperimentConfig load_config(const std::string& path);
std::string config_hash(const ExperimentConfig& cfg);

// Everything the sweeps share: instance, policy set, exact values.
struct Setup {
  Instance instance;
  PolicySet policies;
  P3OConfig p3o;
  std::vector<double> true_values;
  int optimal = -1;
  // Smallest positive SubOpt attainable in the policy set (+inf if none).
  double resolution_floor = 0.0;
};

Setup prepare(const ExperimentConfig& cfg);
Setup prepare(const ExperimentConfig& cfg, Instance inst, PolicySet set);

// Seed of the dataset used for sweep cell (n, seed).
std::uint64_t cell_dataset_seed(std::size_t n, std::uint64_t seed);

double median(std::vector<double> v);

struct RateCell {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  int selected = -1;
  double subopt = 0.0;
  std::string status = "ok";
};

struct RateFit {
  std::vector<std::size_t> n;
  std::vector<double> median_subopt;
  bool available = false;  // needs at least 4 grid points with positive medians
  double slope = 0.0;
  double intercept = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::string note;
};

// Least-squares slope of log(median) on log(n) with a seed-bootstrap CI.
RateFit fit_rate(const std::vector<RateCell>& cells, const std::vector<std::size_t>& n_grid,
                 const std::vector<std::uint64_t>& seeds, int bootstrap, std::uint64_t boot_seed);

struct RateBenchResult {
  std::vector<RateCell> cells;
  RateFit fit;
  double resolution_floor = 0.0;
  bool below_floor = false;  // median at the largest n is below the floor
  json report;
  std::string cells_csv;
  std::string medians_csv;
};

RateBenchResult rate_bench(const ExperimentConfig& cfg, const Setup& setup);
RateBenchResult rate_bench(const ExperimentConfig& cfg);

struct CompareCell {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  int p3o_selected = -1;
  double p3o_subopt = 0.0;
  int baseline_selected = -1;
  double baseline_subopt = 0.0;
  std::string status = "ok";
};

struct CompareSummary {
  std::size_t n = 0;
  double median_p3o = 0.0;
  double median_baseline = 0.0;
  double gap = 0.0;  // median_baseline - median_p3o
  double bootstrap_se = 0.0;
  bool p3o_better = false;  // gap > 0 and gap > 2 * se
};

struct CompareResult {
  std::vector<CompareCell> cells;
  std::vector<CompareSummary> summaries;
  json report;
  std::string cells_csv;
};

CompareResult baseline_compare(const ExperimentConfig& cfg, const Setup& setup);
CompareResult baseline_compare(const ExperimentConfig& cfg);

struct P3ORun {
  PessimismReport report;
  json report_json;
  std::string table;
};

// Single run: loads or generates one dataset and runs the optimizer.
P3ORun p3o_run(const ExperimentConfig& cfg);

json to_json(const PessimismReport& rep);
json to_json(const MinimaxFit& fit);
std::string report_table(const PessimismReport& rep);

// Writes text to dir/name, creating dir when needed.
void write_output(const std::string& dir, const std::string& name, const std::string& text);

}  // namespace p3o
