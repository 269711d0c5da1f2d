// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "brute.hpp"
#include "p3o/bench.hpp"
#include "p3o/dataset.hpp"
#include "p3o/errors.hpp"
#include "p3o/instances.hpp"
#include "p3o/minimax.hpp"
#include "p3o/oracle.hpp"
#include "p3o/pessimism.hpp"
#include "p3o/rng.hpp"

using namespace p3o;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Eigen::MatrixXd random_table(RandomStream& rng, int rows, int cols, double scale) {
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < M.size(); ++i) M(i) = scale * rng.normal();
  return M;
}

ExperimentConfig config(const std::string& name) {
  ExperimentConfig c = load_config(std::string(P3O_CONFIG_DIR) + "/" + name);
  c.threads = std::max(1u, std::thread::hardware_concurrency());
  return c;
}

// Identification: J by path enumeration against the bridge functional.
void identification() {
  const auto t0 = Clock::now();
  RandomStream rng(2024, 0);
  const HistoryClass classes[] = {HistoryClass::reactive(), HistoryClass::finite(1),
                                  HistoryClass::finite(2), HistoryClass::full()};
  double worst = 0.0;
  int count = 0, errors = 0;
  for (int i = 0; i < 24; ++i) {
    const HistoryClass& hc = classes[i % 4];
    const bool reactive = hc.kind == HistoryClass::Kind::Reactive;
    const int S = 2 + static_cast<int>(rng.uniform() * 3);  // 2..4
    const int O = std::min(6, S + 1 + static_cast<int>(rng.uniform() * 2));
    const int A = 2 + static_cast<int>(rng.uniform() * 2);
    const int H = reactive ? 2 + static_cast<int>(rng.uniform() * 3) : 2 + static_cast<int>(rng.uniform() * 2);
    const Instance in = random_instance(S, O, A, H, 100 + i);
    try {
      const TargetPolicy pi = reactive ? random_table_policy(hc, O, A, H, 500 + i)
                                       : nullspace_history_policy(in.model, hc, 500 + i);
      const double lhs = brute::value(in.model, brute::target_actor(pi));
      const ValueBridgeExact vb = solve_value_bridge(in.model, in.behavior, pi);
      const double rhs = bridge_functional(in.model, vb.b[0]);
      worst = std::max(worst, std::abs(lhs - rhs));
      ++count;
    } catch (const std::exception& e) {
      std::printf("  instance %d (%s): %s\n", i, in.name.c_str(), e.what());
      ++errors;
    }
  }
  const double secs = seconds_since(t0);
  report(1, errors == 0 && count >= 20 && worst <= 1e-8 && secs <= 60.0,
         fmt("%.0f instances, max |J - F(b)| = %.3e (tol 1e-8), %.1f s (limit 60 s)", count, worst, secs));
}

// Dual equivalence: 4 lambda max Phi equals the population RMSE.
void dual_equivalence() {
  std::vector<Instance> instances{benchmark_instance(), random_instance(2, 3, 2, 3, 7),
                                  random_instance(3, 4, 3, 2, 8), random_instance(2, 2, 2, 2, 9)};
  RandomStream rng(77, 0);
  double worst = 0.0;
  int pairs = 0;
  for (size_t k = 0; k < instances.size(); ++k) {
    const auto& m = instances[k].model;
    const auto& b = instances[k].behavior;
    const TargetPolicy pi = random_table_policy(HistoryClass::reactive(), m.n_obs, m.n_actions, m.horizon, 40 + k);
    const Occupancy occ = occupancy(m, b, pi.history_class());
    const FeatureMap fm = FeatureMap::one_hot(m.n_obs, m.n_actions, 10.0, 1e8, 1.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
      const int t = rep % m.horizon;
      const Eigen::MatrixXd bt = random_table(rng, m.n_actions, m.n_obs, 2.0);
      const Eigen::MatrixXd bn = t + 1 < m.horizon ? random_table(rng, m.n_actions, m.n_obs, 2.0) : Eigen::MatrixXd();
      const double lambda = 0.25 + 2.0 * rng.uniform();
      const auto pr = population_residual(m, b, pi, occ, bt, bn, t);
      const double dual = 4.0 * lambda * population_inner_max(pr, fm, lambda, fm.L_g, 0.0).value;
      const double L = brute::residual(m, b, pi, bt, bn, t).rmse();
      worst = std::max(worst, std::abs(dual - L));
      ++pairs;
    }
  }
  report(2, worst <= 1e-8, fmt("%.0f pairs on %.0f instances, max |4 lambda max Phi - L| = %.3e (tol 1e-8)",
                               pairs, static_cast<double>(instances.size()), worst));
}

// Suboptimality decomposition on random chains.
void decomposition() {
  const Instance in = benchmark_instance();
  const auto& m = in.model;
  const PolicySet set = sample_policy_set(HistoryClass::reactive(), 10, 7, SoftmaxSpec{2, 2, 2, 5.0});
  RandomStream rng(99, 0);
  double worst = -std::numeric_limits<double>::infinity();
  int chains = 0;
  for (const auto& pi : set.members) {
    const double J = true_value(m, pi);
    const double c = concentrability(m, in.behavior, pi).c_pi;
    const Occupancy occ = occupancy(m, in.behavior, pi.history_class());
    for (int rep = 0; rep < 50; ++rep) {
      // Mix of wild chains and small perturbations of the true bridge.
      const ValueBridgeExact vb = solve_value_bridge(m, in.behavior, pi);
      const double scale = rep % 2 ? 3.0 : 0.05;
      std::vector<Eigen::MatrixXd> chain;
      for (int t = 0; t < m.horizon; ++t)
        chain.push_back((rep % 2 ? Eigen::MatrixXd::Zero(2, 2) : vb.b[t]) + random_table(rng, 2, 2, scale));
      double bound = 0.0;
      for (int t = 0; t < m.horizon; ++t) {
        const Eigen::MatrixXd next = t + 1 < m.horizon ? chain[t + 1] : Eigen::MatrixXd();
        const double L = population_residual(m, in.behavior, pi, occ, chain[t], next, t).rmse();
        bound += std::pow(m.gamma, t) * std::sqrt(c) * std::sqrt(L);
      }
      worst = std::max(worst, (J - bridge_functional(m, chain[0])) - bound);
      ++chains;
    }
  }
  report(3, worst <= 1e-8, fmt("%.0f chains, max (F(b_pi) - F(b)) - bound = %.3e (slack 1e-8)", chains, worst));
}

// Region exactness against explicit chain enumeration.
void region_exactness() {
  RandomStream rng(5, 0);
  int cases = 0, mismatches = 0;
  for (int rep = 0; rep < 80; ++rep) {
    const int H = 1 + rep % 5;
    const int m = std::max(1, static_cast<int>(std::floor(std::pow(1e5, 1.0 / H))) - static_cast<int>(rng.uniform() * 3));
    std::vector<Eigen::MatrixXd> tables;
    for (int t = 0; t < H; ++t) {
      Eigen::MatrixXd M(m, t + 1 < H ? m : 1);
      for (Eigen::Index i = 0; i < M.size(); ++i) M(i) = rng.uniform();
      tables.push_back(M);
    }
    const ConfidenceRegion r = region_from_values(tables, 0.05 + 0.3 * rng.uniform());
    Eigen::VectorXd head(m);
    for (int i = 0; i < m; ++i) head[i] = rng.normal();
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> chain;
    std::function<void(int)> rec = [&](int t) {
      if (t == H) {
        if (r.feasible[H - 1](chain.back(), 0)) best = std::min(best, head[chain[0]]);
        return;
      }
      for (int i = 0; i < m; ++i) {
        if (t > 0 && !r.feasible[t - 1](chain.back(), i)) continue;
        chain.push_back(i);
        rec(t + 1);
        chain.pop_back();
      }
    };
    rec(0);
    const PessimisticValue pv = pessimistic_value(r, head);
    if (pv.value != best) ++mismatches;
    ++cases;
  }
  report(4, mismatches == 0 && cases >= 50, fmt("%.0f randomized grids (m^H <= 1e5), %.0f mismatches", cases, mismatches));
}

// Oracle chain feasibility for every policy of the benchmark set.
void validity() {
  const auto t0 = Clock::now();
  ExperimentConfig cfg = config("benchmark_compare.json");
  const Setup s = prepare(cfg);
  const std::size_t n = 4000;
  const FeatureMap& fm = s.p3o.features;
  std::vector<std::vector<Eigen::VectorXd>> oracle;
  for (const auto& pi : s.policies.members) {
    const ValueBridgeExact vb = solve_value_bridge(s.instance.model, s.instance.behavior, pi);
    std::vector<Eigen::VectorXd> chain;
    for (const auto& b : vb.b) chain.push_back(fm.theta_from_table(b));
    oracle.push_back(chain);
  }
  const double xi = scheduled_xi(s.p3o, n, s.instance.model.horizon);
  int covered = 0;
  double worst = 0.0;
  const int seeds = 200;
  for (int seed = 1; seed <= seeds; ++seed) {
    const OfflineDataset d = generate(s.instance.model, s.instance.behavior, n, cell_dataset_seed(n, seed));
    bool all = true;
    for (size_t k = 0; k < s.policies.members.size(); ++k) {
      const auto fitters = make_fitters(d, s.policies.members[k], fm, s.p3o.fit);
      const ChainCheck cc = chain_feasibility(fitters, oracle[k], xi);
      all = all && cc.feasible;
      for (double e : cc.excess) worst = std::max(worst, e / xi);
    }
    covered += all;
  }
  const double frac = static_cast<double>(covered) / seeds;
  const double secs = seconds_since(t0);
  report(5, frac >= 0.85 && secs <= 600.0,
         fmt("oracle chains of all policies feasible in %.3f of 200 seeds (need 0.85), xi = %.4f, worst excess/xi = %.3f, %.0f s",
             frac, xi, worst, secs));
}

void rate() {
  const auto t0 = Clock::now();
  const ExperimentConfig cfg = config("benchmark_rate.json");
  const RateBenchResult r = rate_bench(cfg);
  const double secs = seconds_since(t0);
  std::string med;
  for (size_t i = 0; i < r.fit.n.size(); ++i) med += fmt(" %.0f:%.4f", r.fit.n[i], r.fit.median_subopt[i]);
  const bool slope_ok = r.fit.available && r.fit.slope >= -0.75 && r.fit.slope <= -0.25;
  std::string detail = r.fit.available
                           ? fmt("slope %.3f [%.3f, %.3f] (need [-0.75, -0.25]);", r.fit.slope, r.fit.ci_low, r.fit.ci_high)
                           : "slope unavailable: " + r.fit.note + ";";
  detail += fmt(" floor %.4f, below floor at largest n:", r.resolution_floor) + (r.below_floor ? " yes;" : " no;");
  detail += " medians" + med + fmt("; %.0f s (limit 1200 s)", secs);
  report(6, (slope_ok || r.below_floor) && secs <= 1200.0, detail);
}

void compare() {
  const CompareResult r = baseline_compare(config("benchmark_compare.json"));
  const CompareSummary& s = r.summaries.at(0);
  report(7, s.p3o_better && s.median_p3o < s.median_baseline,
         fmt("median SubOpt p3o %.4f vs baseline %.4f, gap %.4f, 2 SE = %.4f", s.median_p3o, s.median_baseline,
             s.gap, 2 * s.bootstrap_se));
}

void determinism() {
  ExperimentConfig p = config("quick_p3o.json");
  const std::string a = p3o_run(p).report_json.dump(2);
  const std::string b = p3o_run(p).report_json.dump(2);
  ExperimentConfig r = config("benchmark_rate.json");
  r.n_grid = {250, 500, 1000, 2000};
  r.seeds = {1, 2, 3};
  r.bootstrap = 100;
  const RateBenchResult r1 = rate_bench(r);
  r.threads = r.threads == 1 ? 2 : 1;
  const RateBenchResult r2 = rate_bench(r);
  const bool same = a == b && r1.report.dump(2) == r2.report.dump(2) && r1.cells_csv == r2.cells_csv &&
                    r1.medians_csv == r2.medians_csv;
  report(8, same, fmt("p3o report %.0f bytes, rate report %.0f bytes, byte-identical across runs:",
                      static_cast<double>(a.size()), static_cast<double>(r1.report.dump(2).size())) +
                      (same ? " yes" : " no"));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> runs{identification, dual_equivalence, decomposition, region_exactness,
                                                validity, rate, compare, determinism};
  for (size_t i = 0; i < runs.size(); ++i) {
    try {
      runs[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), false, std::string("error: ") + e.what());
    }
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(runs.size()) - failures, runs.size());
  return failures == 0 ? 0 : 1;
}
