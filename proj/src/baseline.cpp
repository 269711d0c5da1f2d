#include "p3o/baseline.hpp"

#include <Eigen/Dense>

#include "p3o/errors.hpp"
#include "p3o/pessimism.hpp"

namespace p3o {

double naive_fqe(const OfflineDataset& data, const TargetPolicy& pi, double gamma) {
  if (data.trajectories.empty()) throw ValidationError("dataset", "empty");
  const int H = data.horizon, O = pi.n_obs(), A = pi.n_actions();
  const HistoryCoder& coder = pi.coder();
  const size_t n = data.size();
  // Per-trajectory unrolled observations/actions and window codes.
  std::vector<std::vector<int>> obs(n, std::vector<int>(H + 1)), act(n, std::vector<int>(H));
  for (size_t i = 0; i < n; ++i) {
    const auto& tr = data.trajectories[i];
    obs[i][0] = tr.o0;
    for (int t = 0; t < H; ++t) {
      obs[i][t + 1] = tr.steps[t].o;
      act[i][t] = tr.steps[t].a;
    }
  }
  Eigen::MatrixXd q_next = Eigen::MatrixXd::Zero(O, A);
  for (int t = H - 1; t >= 0; --t) {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(O, A), cnt = Eigen::MatrixXd::Zero(O, A);
    for (size_t i = 0; i < n; ++i) {
      double y = data.trajectories[i].steps[t].r;
      if (t + 1 < H) {
        const int o2 = obs[i][t + 2];
        const double* p = pi.probs(t + 1, o2, coder.window_code(t + 1, obs[i].data(), act[i].data()));
        for (int a = 0; a < A; ++a) y += gamma * p[a] * q_next(o2, a);
      }
      sum(obs[i][t + 1], act[i][t]) += y;
      cnt(obs[i][t + 1], act[i][t]) += 1.0;
    }
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(O, A);
    for (int o = 0; o < O; ++o)
      for (int a = 0; a < A; ++a)
        if (cnt(o, a) > 0.0) q(o, a) = sum(o, a) / cnt(o, a);
    q_next = q;
  }
  double J = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const int o = obs[i][1];
    const double* p = pi.probs(0, o, 0);
    for (int a = 0; a < A; ++a) J += p[a] * q_next(o, a);
  }
  return J / static_cast<double>(n);
}

BaselineResult naive_select(const OfflineDataset& data, const PolicySet& set, double gamma) {
  BaselineResult r;
  for (const auto& pi : set.members) r.estimates.push_back(naive_fqe(data, pi, gamma));
  r.selected = argmax_lowest(r.estimates);
  return r;
}

}  // namespace p3o
