#include "p3o/instances.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "p3o/errors.hpp"
#include "p3o/rng.hpp"

namespace p3o {

namespace {

// Uniform point on the simplex, mixed with the uniform vector so every
// entry is at least floor.
void random_simplex(RandomStream& rng, double* out, int n, double floor) {
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform();
    while (u <= 0.0) u = rng.uniform();
    out[i] = -std::log(u);
    sum += out[i];
  }
  const double rest = 1.0 - floor * n;
  for (int i = 0; i < n; ++i) out[i] = floor + rest * out[i] / sum;
  double total = 0.0;
  for (int i = 0; i + 1 < n; ++i) total += out[i];
  out[n - 1] = 1.0 - total;
}

void set2(double* row, double p0) {
  row[0] = p0;
  row[1] = 1.0 - p0;
}

}  // namespace

Instance identity_instance(int H) {
  Instance in;
  in.name = "identity:" + std::to_string(H);
  TabularPOMDP m = TabularPOMDP::zeros(2, 2, 2, H, 1.0);
  m.mu1 = {0.6, 0.4};
  for (int t = 0; t < H; ++t) {
    for (int s = 0; s < 2; ++s) m.emit_row(t, s)[s] = 1.0;
    // Sticky dynamics; action 1 pushes toward state 1.
    set2(m.trans_row(t, 0, 0), 0.85);
    set2(m.trans_row(t, 0, 1), 0.55);
    set2(m.trans_row(t, 1, 0), 0.35);
    set2(m.trans_row(t, 1, 1), 0.15);
    m.R(t, 0, 0) = 0.7;
    m.R(t, 0, 1) = 0.1;
    m.R(t, 1, 0) = 0.2;
    m.R(t, 1, 1) = 0.9;
  }
  for (int s = 0; s < 2; ++s) m.emit0_row(s)[s] = 1.0;
  in.model = m;
  in.behavior = BehaviorPolicy::uniform(H, 2, 2);
  for (int t = 0; t < H; ++t) {
    set2(in.behavior.row(t, 0), 0.65);
    set2(in.behavior.row(t, 1), 0.4);
  }
  validate(in.model);
  validate(in.behavior, &in.model);
  return in;
}

Instance benchmark_instance() {
  Instance in;
  in.name = "benchmark";
  const int H = 2;
  TabularPOMDP m = TabularPOMDP::zeros(2, 2, 2, H, 1.0);
  m.mu1 = {0.5, 0.5};
  for (int s = 0; s < 2; ++s) set2(m.emit0_row(s), s == 0 ? 0.75 : 0.25);
  for (int t = 0; t < H; ++t) {
    for (int s = 0; s < 2; ++s) set2(m.emit_row(t, s), s == 0 ? 0.7 : 0.3);
    set2(m.trans_row(t, 0, 0), 0.9);
    set2(m.trans_row(t, 0, 1), 0.7);
    set2(m.trans_row(t, 1, 0), 0.3);
    set2(m.trans_row(t, 1, 1), 0.1);
    m.R(t, 0, 0) = 0.6;
    m.R(t, 0, 1) = 0.0;
    m.R(t, 1, 0) = 0.2;
    m.R(t, 1, 1) = 1.0;
  }
  in.model = m;
  in.behavior = BehaviorPolicy::uniform(H, 2, 2);
  for (int t = 0; t < H; ++t) {
    // The logged action tracks the hidden state much more closely than the
    // observation does, which is what misleads observation-level baselines.
    set2(in.behavior.row(t, 0), 0.9);
    set2(in.behavior.row(t, 1), 0.1);
  }
  validate(in.model);
  validate(in.behavior, &in.model);
  return in;
}

Instance zero_reward_instance() {
  Instance in = benchmark_instance();
  in.name = "zero_reward";
  std::fill(in.model.reward.begin(), in.model.reward.end(), 0.0);
  return in;
}

Instance random_instance(int S, int O, int A, int H, std::uint64_t seed) {
  if (O < S) throw ValidationError("n_obs", "random full-rank instances need n_obs >= n_states");
  Instance in;
  in.name = "random:" + std::to_string(S) + ":" + std::to_string(O) + ":" + std::to_string(A) +
            ":" + std::to_string(H) + ":" + std::to_string(seed);
  TabularPOMDP m = TabularPOMDP::zeros(S, O, A, H, 0.9);
  RandomStream rng(seed, 0);
  random_simplex(rng, m.mu1.data(), S, 0.1 / S);
  auto emission = [&](double* row, int s) {
    random_simplex(rng, row, O, 0.05 / O);
    for (int o = 0; o < O; ++o) row[o] *= 0.4;
    row[s] += 0.6;  // diagonal dominance keeps the matrix well conditioned
  };
  for (int s = 0; s < S; ++s) emission(m.emit0_row(s), s);
  for (int t = 0; t < H; ++t) {
    for (int s = 0; s < S; ++s) emission(m.emit_row(t, s), s);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        double* row = m.trans_row(t, s, a);
        random_simplex(rng, row, S, 0.05 / S);
        for (int s2 = 0; s2 < S; ++s2) row[s2] *= 0.5;
        row[s] += 0.5;  // persistence keeps the backward matrices full rank
      }
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) m.R(t, s, a) = rng.uniform();
  }
  in.model = m;
  in.behavior = BehaviorPolicy::uniform(H, S, A);
  for (int t = 0; t < H; ++t)
    for (int s = 0; s < S; ++s) random_simplex(rng, in.behavior.row(t, s), A, 0.3 / A);
  validate(in.model);
  validate(in.behavior, &in.model);
  return in;
}

Instance build_instance(const std::string& spec) {
  if (spec == "benchmark") return benchmark_instance();
  if (spec == "zero_reward") return zero_reward_instance();
  if (spec == "identity") return identity_instance();
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  try {
    if (parts.size() == 2 && parts[0] == "identity") return identity_instance(std::stoi(parts[1]));
    if (parts.size() == 6 && parts[0] == "random")
      return random_instance(std::stoi(parts[1]), std::stoi(parts[2]), std::stoi(parts[3]),
                             std::stoi(parts[4]), std::stoull(parts[5]));
  } catch (const std::logic_error&) {
  }
  throw ValidationError("instance", "unknown builder '" + spec + "'");
}

TargetPolicy random_table_policy(const HistoryClass& hc, int O, int A, int H, std::uint64_t seed,
                                 double min_prob) {
  HistoryCoder coder(hc, O, A, H);
  RandomStream rng(seed, 1);
  std::vector<std::vector<double>> probs(H);
  for (int t = 0; t < H; ++t) {
    probs[t].resize(static_cast<size_t>(coder.atoms(t)) * A);
    for (std::int64_t r = 0; r < coder.atoms(t); ++r) random_simplex(rng, &probs[t][r * A], A, min_prob);
  }
  return TargetPolicy::table(hc, O, A, H, std::move(probs));
}

TargetPolicy nullspace_history_policy(const TabularPOMDP& m, const HistoryClass& hc,
                                      std::uint64_t seed, double strength) {
  const int S = m.n_states, O = m.n_obs, A = m.n_actions, H = m.horizon;
  if (O <= S) throw ValidationError("n_obs", "null-space construction needs n_obs > n_states");
  if (A < 2) throw ValidationError("n_actions", "null-space construction needs two actions");
  HistoryCoder coder(hc, O, A, H);
  RandomStream rng(seed, 2);
  const double floor = 0.15;
  if (strength > floor) throw ValidationError("strength", "must not exceed the probability floor");
  std::vector<std::vector<double>> probs(H);
  for (int t = 0; t < H; ++t) {
    Eigen::MatrixXd E(S, O);
    for (int s = 0; s < S; ++s)
      for (int o = 0; o < O; ++o) E(s, o) = m.emit_row(t, s)[o];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(E, Eigen::ComputeFullV);
    // Columns S..O-1 of V span the null space of a full-row-rank E.
    Eigen::VectorXd v = Eigen::VectorXd::Zero(O);
    for (int k = S; k < O; ++k) v += rng.normal() * svd.matrixV().col(k);
    v /= v.cwiseAbs().maxCoeff();
    Eigen::VectorXd sa(A);
    for (int a = 0; a < A; ++a) sa[a] = rng.normal();
    sa.array() -= sa.mean();
    sa /= sa.cwiseAbs().maxCoeff();

    std::vector<double> base(static_cast<size_t>(O) * A);
    for (int o = 0; o < O; ++o) random_simplex(rng, &base[o * A], A, floor);
    probs[t].resize(static_cast<size_t>(coder.atoms(t)) * A);
    for (std::int64_t code = 0; code < coder.codes(t); ++code) {
      const double c = 2.0 * rng.uniform() - 1.0;
      for (int o = 0; o < O; ++o) {
        double* row = &probs[t][(o * coder.codes(t) + code) * A];
        double sum = 0.0;
        for (int a = 0; a < A; ++a) {
          row[a] = base[o * A + a] + strength * c * sa[a] * v[o];
          sum += row[a];
        }
        for (int a = 0; a < A; ++a) row[a] /= sum;  // sum is 1 up to rounding
      }
    }
  }
  return TargetPolicy::table(hc, O, A, H, std::move(probs));
}

}  // namespace p3o
