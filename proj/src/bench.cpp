#include "p3o/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "p3o/baseline.hpp"
#include "p3o/dataset.hpp"
#include "p3o/errors.hpp"
#include "p3o/oracle.hpp"
#include "p3o/rng.hpp"

#ifndef P3O_VERSION_STRING
#define P3O_VERSION_STRING "0.1.0+unknown"
#endif

namespace fs = std::filesystem;

namespace p3o {

const char* artifact_version() { return P3O_VERSION_STRING; }

namespace {

std::string resolve(const std::string& base, const std::string& path) {
  if (path.empty() || base.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base) / path).lexically_normal().string();
}

void only_keys(const json& j, const std::set<std::string>& keys, const std::string& ctx) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!keys.count(it.key())) throw FormatError(ctx + ": unknown key '" + it.key() + "'");
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

json num_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

template <class Fn>
void parallel_for(std::size_t count, int threads, Fn fn) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t k = std::min<std::size_t>(threads, count);
  for (std::size_t w = 0; w < k; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += k) fn(i);
    });
  for (auto& th : pool) th.join();
}

json meta(const ExperimentConfig& cfg, const std::string& kind) {
  json j;
  j["kind"] = kind;
  j["version"] = artifact_version();
  j["config_hash"] = config_hash(cfg);
  j["config"] = cfg.raw;
  j["seeds"] = cfg.seeds;
  j["n_grid"] = cfg.n_grid;
  return j;
}

}  // namespace

ExperimentConfig parse_config(const json& j, const std::string& base) {
  if (!j.is_object()) throw FormatError("config: expected an object");
  only_keys(j,
            {"instance", "model", "behavior", "dataset", "history_class", "policy_set", "n_grid",
             "seeds", "n", "seed", "gamma", "lambda", "c1", "delta", "xi", "features", "grid",
             "output_dir", "threads", "bootstrap", "bootstrap_seed"},
            "config");
  ExperimentConfig c;
  c.raw = j;
  try {
    if (j.contains("instance")) c.instance = j.at("instance").get<std::string>();
    if (j.contains("model")) c.model_path = resolve(base, j.at("model").get<std::string>());
    if (j.contains("behavior")) c.behavior_path = resolve(base, j.at("behavior").get<std::string>());
    if (j.contains("dataset")) c.dataset_path = resolve(base, j.at("dataset").get<std::string>());
    if (j.contains("history_class")) c.history_class = history_class_from_json(j.at("history_class"));
    if (j.contains("policy_set")) {
      const json& ps = j.at("policy_set");
      only_keys(ps, {"path", "count", "seed", "l_pi"}, "policy_set");
      if (ps.contains("path")) c.policy_set_path = resolve(base, ps.at("path").get<std::string>());
      if (ps.contains("count")) c.policy_count = ps.at("count").get<int>();
      if (ps.contains("seed")) c.policy_seed = ps.at("seed").get<std::uint64_t>();
      if (ps.contains("l_pi")) c.l_pi = ps.at("l_pi").get<double>();
    }
    if (j.contains("n_grid")) c.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
    else if (j.contains("n")) c.n_grid = {j.at("n").get<std::size_t>()};
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    else if (j.contains("seed")) c.seeds = {j.at("seed").get<std::uint64_t>()};
    if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
    if (j.contains("lambda")) c.lambda = j.at("lambda").get<double>();
    if (j.contains("c1")) c.c1 = j.at("c1").get<double>();
    if (j.contains("delta")) c.delta = j.at("delta").get<double>();
    if (j.contains("xi")) c.xi = j.at("xi").get<double>();
    if (j.contains("features")) {
      const json& f = j.at("features");
      only_keys(f, {"kind", "L_b", "L_g", "M_B", "M_G"}, "features");
      if (f.contains("kind") && f.at("kind") != "one_hot")
        throw FormatError("features: only one_hot is supported");
      if (f.contains("L_b")) c.L_b = f.at("L_b").get<double>();
      if (f.contains("L_g")) c.L_g = f.at("L_g").get<double>();
      if (f.contains("M_B")) c.M_B = f.at("M_B").get<double>();
      if (f.contains("M_G")) c.M_G = f.at("M_G").get<double>();
    }
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      only_keys(g, {"perturbations", "radius", "levels", "seed", "refits", "region_scaled", "directed"},
                "grid");
      if (g.contains("perturbations")) c.grid.perturbations = g.at("perturbations").get<int>();
      if (g.contains("radius")) c.grid.radius = g.at("radius").get<double>();
      if (g.contains("levels")) c.grid.levels = g.at("levels").get<int>();
      if (g.contains("seed")) c.grid.seed = g.at("seed").get<std::uint64_t>();
      if (g.contains("refits")) c.grid.refits = g.at("refits").get<bool>();
      if (g.contains("region_scaled")) c.grid.region_scaled = g.at("region_scaled").get<bool>();
      if (g.contains("directed")) c.grid.directed = g.at("directed").get<bool>();
    }
    if (j.contains("output_dir")) c.output_dir = resolve(base, j.at("output_dir").get<std::string>());
    else if (!base.empty()) c.output_dir = base;
    if (j.contains("threads")) c.threads = j.at("threads").get<int>();
    if (j.contains("bootstrap")) c.bootstrap = j.at("bootstrap").get<int>();
    if (j.contains("bootstrap_seed")) c.bootstrap_seed = j.at("bootstrap_seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  if (c.n_grid.empty()) throw ValidationError("n_grid", "must not be empty");
  for (size_t i = 0; i < c.n_grid.size(); ++i) {
    if (c.n_grid[i] < 1) throw ValidationError("n_grid", "entries must be positive");
    if (i > 0 && c.n_grid[i] <= c.n_grid[i - 1]) throw ValidationError("n_grid", "must be strictly increasing");
  }
  if (c.seeds.empty()) throw ValidationError("seeds", "must not be empty");
  if (std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size())
    throw ValidationError("seeds", "must be distinct");
  if (c.policy_count < 1) throw ValidationError("policy_set.count", "must be at least 1");
  if (!(c.lambda > 0.0)) throw ValidationError("lambda", "must be positive");
  if (c.grid.perturbations < 0 || c.grid.levels < 1 || c.grid.radius < 0.0)
    throw ValidationError("grid", "invalid perturbation parameters");
  if (c.bootstrap < 1) throw ValidationError("bootstrap", "must be at least 1");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  return parse_config(read_json_file(path), fs::path(path).parent_path().string());
}

std::string config_hash(const ExperimentConfig& cfg) { return fnv1a_hex(cfg.raw.dump()); }

namespace {

Instance load_instance(const ExperimentConfig& cfg) {
  if (!cfg.instance.empty()) return build_instance(cfg.instance);
  if (cfg.model_path.empty() || cfg.behavior_path.empty())
    throw ValidationError("instance", "config needs an instance builder or model and behavior files");
  Instance in;
  in.name = cfg.model_path;
  in.model = load_model(cfg.model_path);
  in.behavior = load_behavior(cfg.behavior_path);
  validate(in.behavior, &in.model);
  return in;
}

PolicySet load_policies(const ExperimentConfig& cfg, int n_obs, int n_actions, int horizon) {
  if (!cfg.policy_set_path.empty()) return policy_set_from_json(read_json_file(cfg.policy_set_path));
  return sample_policy_set(cfg.history_class, cfg.policy_count, cfg.policy_seed,
                           SoftmaxSpec{n_obs, n_actions, horizon, cfg.l_pi});
}

P3OConfig make_p3o_config(const ExperimentConfig& cfg, int n_obs, int n_actions, double gamma) {
  P3OConfig p;
  p.features = FeatureMap::one_hot(n_obs, n_actions, cfg.L_b, cfg.L_g, cfg.M_B, cfg.M_G);
  p.fit.lambda = cfg.lambda;
  p.fit.gamma = gamma;
  p.grid = cfg.grid;
  p.c1 = cfg.c1;
  p.delta = cfg.delta;
  p.l_pi = cfg.l_pi;
  p.xi = cfg.xi;
  return p;
}

}  // namespace

Setup prepare(const ExperimentConfig& cfg, Instance inst, PolicySet set) {
  validate(set);
  Setup s;
  s.instance = std::move(inst);
  s.policies = std::move(set);
  const auto& m = s.instance.model;
  s.p3o = make_p3o_config(cfg, m.n_obs, m.n_actions, m.gamma);
  for (const auto& pi : s.policies.members) s.true_values.push_back(true_value(m, pi));
  s.optimal = argmax_lowest(s.true_values);
  s.resolution_floor = std::numeric_limits<double>::infinity();
  for (double v : s.true_values) {
    const double gap = s.true_values[s.optimal] - v;
    if (gap > 1e-12) s.resolution_floor = std::min(s.resolution_floor, gap);
  }
  return s;
}

Setup prepare(const ExperimentConfig& cfg) {
  Instance inst = load_instance(cfg);
  PolicySet set = load_policies(cfg, inst.model.n_obs, inst.model.n_actions, inst.model.horizon);
  return prepare(cfg, std::move(inst), std::move(set));
}

std::uint64_t cell_dataset_seed(std::size_t n, std::uint64_t seed) {
  return mix_seed(seed, static_cast<std::uint64_t>(n));
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

namespace {

struct LineFit {
  bool ok = false;
  double slope = 0.0;
  double intercept = 0.0;
};

// Fits log(median) on log(n) over grid points with positive medians.
LineFit loglog_fit(const std::vector<std::size_t>& ns, const std::vector<double>& med) {
  std::vector<double> x, y;
  for (size_t i = 0; i < ns.size(); ++i)
    if (med[i] > 0.0 && std::isfinite(med[i])) {
      x.push_back(std::log(static_cast<double>(ns[i])));
      y.push_back(std::log(med[i]));
    }
  LineFit f;
  if (x.size() < 4) return f;
  const double k = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / k;
    my += y[i] / k;
  }
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  f.ok = true;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

// medians[n_index] over the seed multiset idx; failed cells are skipped.
std::vector<double> medians_for(const std::vector<RateCell>& cells, size_t n_count,
                                size_t seed_count, const std::vector<size_t>& idx) {
  std::vector<double> out(n_count);
  for (size_t a = 0; a < n_count; ++a) {
    std::vector<double> v;
    for (size_t s : idx) {
      const RateCell& c = cells[a * seed_count + s];
      if (c.status == "ok") v.push_back(c.subopt);
    }
    out[a] = median(v);
  }
  return out;
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(v.size() - 1, lo + 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

RateFit fit_rate(const std::vector<RateCell>& cells, const std::vector<std::size_t>& n_grid,
                 const std::vector<std::uint64_t>& seeds, int bootstrap, std::uint64_t boot_seed) {
  RateFit r;
  r.n = n_grid;
  std::vector<size_t> all(seeds.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  r.median_subopt = medians_for(cells, n_grid.size(), seeds.size(), all);
  if (n_grid.size() < 4) {
    r.note = "fewer than 4 grid points";
    return r;
  }
  const LineFit f = loglog_fit(n_grid, r.median_subopt);
  if (!f.ok) {
    r.note = "fewer than 4 grid points with positive median SubOpt";
    return r;
  }
  r.available = true;
  r.slope = f.slope;
  r.intercept = f.intercept;
  RandomStream rng(boot_seed, 0);
  std::vector<double> slopes;
  std::vector<size_t> idx(seeds.size());
  for (int b = 0; b < bootstrap; ++b) {
    for (auto& i : idx) i = static_cast<size_t>(rng.uniform() * static_cast<double>(seeds.size()));
    const LineFit g = loglog_fit(n_grid, medians_for(cells, n_grid.size(), seeds.size(), idx));
    if (g.ok) slopes.push_back(g.slope);
  }
  if (slopes.empty()) {
    r.ci_low = r.ci_high = r.slope;
    r.note = "no bootstrap replicate had 4 positive medians";
  } else {
    r.ci_low = percentile(slopes, 0.025);
    r.ci_high = percentile(slopes, 0.975);
    r.note = std::to_string(slopes.size()) + " of " + std::to_string(bootstrap) +
             " bootstrap replicates usable";
  }
  return r;
}

namespace {

PessimismReport run_p3o_cell(const Setup& s, std::size_t n, std::uint64_t seed, OfflineDataset* keep) {
  OfflineDataset data = generate(s.instance.model, s.instance.behavior, n, cell_dataset_seed(n, seed));
  PessimismReport rep = p3o(data, s.policies, s.p3o);
  attach_truth(rep, s.true_values);
  if (keep) *keep = std::move(data);
  return rep;
}

}  // namespace

RateBenchResult rate_bench(const ExperimentConfig& cfg, const Setup& s) {
  RateBenchResult r;
  const size_t N = cfg.n_grid.size(), K = cfg.seeds.size();
  r.cells.resize(N * K);
  parallel_for(N * K, cfg.threads, [&](std::size_t k) {
    RateCell& c = r.cells[k];
    c.n = cfg.n_grid[k / K];
    c.seed = cfg.seeds[k % K];
    try {
      const PessimismReport rep = run_p3o_cell(s, c.n, c.seed, nullptr);
      if (rep.selected < 0) throw EmptyRegion("every policy failed");
      c.selected = rep.selected;
      c.subopt = *rep.subopt;
    } catch (const std::exception& e) {
      c.status = e.what();
      c.selected = -1;
      c.subopt = std::numeric_limits<double>::quiet_NaN();
    }
  });
  r.fit = fit_rate(r.cells, cfg.n_grid, cfg.seeds, cfg.bootstrap, cfg.bootstrap_seed);
  r.resolution_floor = s.resolution_floor;
  const double last = r.fit.median_subopt.back();
  r.below_floor = std::isfinite(last) && last < s.resolution_floor;

  std::ostringstream cells, meds;
  cells << "n,seed,selected,subopt,status\n";
  for (const auto& c : r.cells)
    cells << c.n << ',' << c.seed << ',' << c.selected << ',' << fmt(c.subopt) << ','
          << csv_safe(c.status) << '\n';
  meds << "n,median_subopt\n";
  for (size_t i = 0; i < N; ++i) meds << cfg.n_grid[i] << ',' << fmt(r.fit.median_subopt[i]) << '\n';
  r.cells_csv = cells.str();
  r.medians_csv = meds.str();

  json j = meta(cfg, "rate_bench");
  j["instance"] = s.instance.name;
  j["policy_count"] = s.policies.members.size();
  j["true_values"] = s.true_values;
  j["optimal_policy"] = s.optimal;
  j["resolution_floor"] = num_or_null(s.resolution_floor);
  json med = json::array();
  for (size_t i = 0; i < N; ++i)
    med.push_back({{"n", cfg.n_grid[i]}, {"median_subopt", num_or_null(r.fit.median_subopt[i])}});
  j["medians"] = med;
  json fit;
  fit["available"] = r.fit.available;
  fit["note"] = r.fit.note;
  if (r.fit.available) {
    fit["slope"] = r.fit.slope;
    fit["intercept"] = r.fit.intercept;
    fit["slope_ci95"] = {r.fit.ci_low, r.fit.ci_high};
  }
  j["rate_fit"] = fit;
  j["median_at_largest_n_below_floor"] = r.below_floor;
  json cj = json::array();
  for (const auto& c : r.cells)
    cj.push_back({{"n", c.n}, {"seed", c.seed}, {"selected", c.selected},
                  {"subopt", num_or_null(c.subopt)}, {"status", c.status}});
  j["cells"] = cj;
  r.report = j;
  return r;
}

RateBenchResult rate_bench(const ExperimentConfig& cfg) { return rate_bench(cfg, prepare(cfg)); }

CompareResult baseline_compare(const ExperimentConfig& cfg, const Setup& s) {
  CompareResult r;
  const size_t N = cfg.n_grid.size(), K = cfg.seeds.size();
  r.cells.resize(N * K);
  parallel_for(N * K, cfg.threads, [&](std::size_t k) {
    CompareCell& c = r.cells[k];
    c.n = cfg.n_grid[k / K];
    c.seed = cfg.seeds[k % K];
    try {
      OfflineDataset data;
      const PessimismReport rep = run_p3o_cell(s, c.n, c.seed, &data);
      if (rep.selected < 0) throw EmptyRegion("every policy failed");
      c.p3o_selected = rep.selected;
      c.p3o_subopt = *rep.subopt;
      const BaselineResult base = naive_select(data, s.policies, s.instance.model.gamma);
      c.baseline_selected = base.selected;
      c.baseline_subopt = s.true_values[s.optimal] - s.true_values[base.selected];
    } catch (const std::exception& e) {
      c.status = e.what();
      c.p3o_subopt = c.baseline_subopt = std::numeric_limits<double>::quiet_NaN();
    }
  });

  RandomStream rng(cfg.bootstrap_seed, 1);
  for (size_t a = 0; a < N; ++a) {
    std::vector<double> p, b;
    for (size_t i = 0; i < K; ++i) {
      const auto& c = r.cells[a * K + i];
      if (c.status != "ok") continue;
      p.push_back(c.p3o_subopt);
      b.push_back(c.baseline_subopt);
    }
    CompareSummary sm;
    sm.n = cfg.n_grid[a];
    sm.median_p3o = median(p);
    sm.median_baseline = median(b);
    sm.gap = sm.median_baseline - sm.median_p3o;
    if (!p.empty()) {
      // Paired bootstrap over seeds of the difference of medians.
      std::vector<double> diffs;
      std::vector<double> pp(p.size()), bb(b.size());
      for (int rep = 0; rep < cfg.bootstrap; ++rep) {
        for (size_t i = 0; i < p.size(); ++i) {
          const auto k = static_cast<size_t>(rng.uniform() * static_cast<double>(p.size()));
          pp[i] = p[k];
          bb[i] = b[k];
        }
        diffs.push_back(median(bb) - median(pp));
      }
      double mean = 0.0;
      for (double d : diffs) mean += d / static_cast<double>(diffs.size());
      double var = 0.0;
      for (double d : diffs) var += (d - mean) * (d - mean);
      sm.bootstrap_se = diffs.size() > 1 ? std::sqrt(var / static_cast<double>(diffs.size() - 1)) : 0.0;
    }
    sm.p3o_better = sm.gap > 0.0 && sm.gap > 2.0 * sm.bootstrap_se;
    r.summaries.push_back(sm);
  }

  std::ostringstream csv;
  csv << "n,seed,p3o_selected,p3o_subopt,baseline_selected,baseline_subopt,status\n";
  for (const auto& c : r.cells)
    csv << c.n << ',' << c.seed << ',' << c.p3o_selected << ',' << fmt(c.p3o_subopt) << ','
        << c.baseline_selected << ',' << fmt(c.baseline_subopt) << ',' << csv_safe(c.status) << '\n';
  r.cells_csv = csv.str();

  json j = meta(cfg, "baseline_compare");
  j["instance"] = s.instance.name;
  j["policy_count"] = s.policies.members.size();
  j["true_values"] = s.true_values;
  j["optimal_policy"] = s.optimal;
  j["baseline"] = "tabular fitted-Q on observations, greedy, no pessimism";
  json sj = json::array();
  for (const auto& sm : r.summaries)
    sj.push_back({{"n", sm.n},
                  {"median_subopt_p3o", num_or_null(sm.median_p3o)},
                  {"median_subopt_baseline", num_or_null(sm.median_baseline)},
                  {"gap", num_or_null(sm.gap)},
                  {"bootstrap_se", sm.bootstrap_se},
                  {"p3o_better", sm.p3o_better}});
  j["summaries"] = sj;
  json cj = json::array();
  for (const auto& c : r.cells)
    cj.push_back({{"n", c.n}, {"seed", c.seed}, {"p3o_selected", c.p3o_selected},
                  {"p3o_subopt", num_or_null(c.p3o_subopt)}, {"baseline_selected", c.baseline_selected},
                  {"baseline_subopt", num_or_null(c.baseline_subopt)}, {"status", c.status}});
  j["cells"] = cj;
  r.report = j;
  return r;
}

CompareResult baseline_compare(const ExperimentConfig& cfg) {
  return baseline_compare(cfg, prepare(cfg));
}

P3ORun p3o_run(const ExperimentConfig& cfg) {
  P3ORun run;
  const bool have_model = !cfg.instance.empty() || !cfg.model_path.empty();
  OfflineDataset data;
  std::optional<Setup> setup;
  PolicySet set;
  P3OConfig pc;
  if (have_model) {
    setup = prepare(cfg);
    set = setup->policies;
    pc = setup->p3o;
    if (!cfg.dataset_path.empty()) {
      data = load_dataset(cfg.dataset_path);
      check_compatible(data, setup->instance.model);
    } else {
      data = generate(setup->instance.model, setup->instance.behavior, cfg.n_grid.front(),
                      cfg.seeds.front());
    }
  } else {
    if (cfg.dataset_path.empty() || cfg.policy_set_path.empty() || !cfg.gamma)
      throw ValidationError("config", "without a model, p3o needs dataset, policy_set.path and gamma");
    data = load_dataset(cfg.dataset_path);
    set = policy_set_from_json(read_json_file(cfg.policy_set_path));
    const auto& p0 = set.members.front();
    pc = make_p3o_config(cfg, p0.n_obs(), p0.n_actions(), *cfg.gamma);
  }
  run.report = p3o(data, set, pc);
  if (setup) attach_truth(run.report, setup->true_values);

  json j = meta(cfg, "p3o");
  j["dataset"] = {{"n", data.size()},
                  {"seed", data.seed},
                  {"model_fingerprint", data.model_fingerprint},
                  {"behavior_fingerprint", data.behavior_fingerprint}};
  if (setup) {
    j["instance"] = setup->instance.name;
    j["dataset"]["matches_model"] = data.model_fingerprint == fingerprint(setup->instance.model);
  }
  j["result"] = to_json(run.report);
  run.report_json = j;
  run.table = report_table(run.report);
  return run;
}

json to_json(const PessimismReport& rep) {
  json j;
  j["xi"] = rep.xi;
  j["n"] = rep.n;
  j["selected"] = rep.selected;
  j["optimal"] = rep.optimal ? json(*rep.optimal) : json(nullptr);
  j["subopt"] = rep.subopt ? json(*rep.subopt) : json(nullptr);
  j["empty_region_score"] = "-inf (never selected)";
  j["bridge_class"] = "linear, one-hot features (realizability slack epsilon_B = 0)";
  j["xi_calibration"] = "schedule; adaptive calibration not implemented";
  json ps = json::array();
  for (size_t i = 0; i < rep.policies.size(); ++i) {
    const auto& p = rep.policies[i];
    json pj;
    pj["index"] = i;
    pj["status"] = p.status;
    pj["j_pess"] = num_or_null(p.j_pess);
    pj["f_hat_fitted"] = p.f_hat_fitted;
    pj["fitted_chain_feasible"] = p.fitted_feasible;
    pj["grid_sizes"] = p.grid_sizes;
    pj["reachable"] = p.reachable;
    pj["chain"] = p.chain;
    pj["m_hat_fitted"] = p.m_hat_fitted;
    pj["true_value"] = p.true_value ? json(*p.true_value) : json(nullptr);
    ps.push_back(pj);
  }
  j["policies"] = ps;
  return j;
}

json to_json(const MinimaxFit& fit) {
  json arr = json::array();
  for (const auto& s : fit.steps) {
    arr.push_back({{"step", s.t},
                   {"theta", std::vector<double>(s.theta.data(), s.theta.data() + s.theta.size())},
                   {"m_hat", s.m_hat},
                   {"primal_constraint_active", s.primal_active},
                   {"dual_constraint_active", s.dual_active},
                   {"primal_ridge", s.primal_ridge},
                   {"dual_ridge", s.dual_ridge},
                   {"sup_sum", s.sup_sum},
                   {"mb_violation", s.mb_violation}});
  }
  return arr;
}

std::string report_table(const PessimismReport& rep) {
  std::ostringstream os;
  os << "xi = " << fmt(rep.xi) << ", n = " << rep.n << "\n";
  os << "policy  J_pess        F_hat(fit)    J(pi)         reachable   status\n";
  for (size_t i = 0; i < rep.policies.size(); ++i) {
    const auto& p = rep.policies[i];
    char line[256];
    std::string reach;
    for (size_t t = 0; t < p.reachable.size(); ++t) reach += (t ? "/" : "") + std::to_string(p.reachable[t]);
    std::snprintf(line, sizeof line, "%-7zu %-13s %-13s %-13s %-11s %s%s\n", i, fmt(p.j_pess).c_str(),
                  fmt(p.f_hat_fitted).c_str(), p.true_value ? fmt(*p.true_value).c_str() : "-",
                  reach.empty() ? "-" : reach.c_str(), p.status.c_str(),
                  static_cast<int>(i) == rep.selected ? "  <- selected" : "");
    os << line;
  }
  if (rep.subopt) os << "SubOpt(selected) = " << fmt(*rep.subopt) << "\n";
  return os.str();
}

void write_output(const std::string& dir, const std::string& name, const std::string& text) {
  std::error_code ec;
  if (!dir.empty()) fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "'");
  write_text_file(dir.empty() ? name : (fs::path(dir) / name).string(), text);
}

}  // namespace p3o
