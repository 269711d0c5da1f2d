#include "p3o/policy.hpp"

#include <algorithm>
#include <cmath>

#include "p3o/errors.hpp"
#include "p3o/rng.hpp"

namespace p3o {

BehaviorPolicy BehaviorPolicy::uniform(int horizon, int n_states, int n_actions) {
  BehaviorPolicy b;
  b.horizon = horizon;
  b.n_states = n_states;
  b.n_actions = n_actions;
  b.probs.assign(static_cast<size_t>(horizon) * n_states * n_actions, 1.0 / n_actions);
  return b;
}

void validate(const BehaviorPolicy& b, const TabularPOMDP* model) {
  if (b.horizon < 1 || b.n_states < 1 || b.n_actions < 1)
    throw ValidationError("behavior", "dimensions must be positive");
  if (b.probs.size() != static_cast<size_t>(b.horizon) * b.n_states * b.n_actions)
    throw ValidationError("behavior.probs", "wrong shape");
  if (model) {
    if (b.horizon != model->horizon) throw ValidationError("behavior.horizon", "does not match model");
    if (b.n_states != model->n_states) throw ValidationError("behavior.n_states", "does not match model");
    if (b.n_actions != model->n_actions) throw ValidationError("behavior.n_actions", "does not match model");
  }
  for (int t = 0; t < b.horizon; ++t)
    for (int s = 0; s < b.n_states; ++s) {
      const std::string field =
          "behavior.probs[" + std::to_string(t) + "][" + std::to_string(s) + "]";
      check_probability_vector(b.row(t, s), b.n_actions, field);
      if (b.strict_coverage)
        for (int a = 0; a < b.n_actions; ++a)
          if (b.row(t, s)[a] < b.min_behavior_prob)
            throw ValidationError(field, "below min_behavior_prob");
    }
}

std::vector<double> softmax(const double* logits, int n) {
  const double mx = *std::max_element(logits, logits + n);
  std::vector<double> p(n);
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    p[i] = std::exp(logits[i] - mx);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

std::int64_t TargetPolicy::softmax_dim(const HistoryClass& hc, int n_obs, int n_actions,
                                       int horizon) {
  HistoryCoder coder(hc, n_obs, n_actions, horizon);
  std::int64_t d = 0;
  for (int t = 0; t < horizon; ++t) d += coder.atoms(t) * n_actions;
  return d;
}

TargetPolicy TargetPolicy::uniform(const HistoryClass& hc, int n_obs, int n_actions,
                                   int horizon) {
  return linear_softmax(hc, n_obs, n_actions, horizon,
                        Eigen::VectorXd::Zero(softmax_dim(hc, n_obs, n_actions, horizon)), 0.0);
}

TargetPolicy TargetPolicy::table(const HistoryClass& hc, int n_obs, int n_actions, int horizon,
                                 std::vector<std::vector<double>> probs) {
  TargetPolicy p;
  p.coder_ = HistoryCoder(hc, n_obs, n_actions, horizon);
  p.form_ = Form::Table;
  p.probs_ = std::move(probs);
  p.check_table();
  return p;
}

TargetPolicy TargetPolicy::linear_softmax(const HistoryClass& hc, int n_obs, int n_actions,
                                          int horizon, Eigen::VectorXd beta, double l_pi) {
  TargetPolicy p;
  p.coder_ = HistoryCoder(hc, n_obs, n_actions, horizon);
  p.form_ = Form::LinearSoftmax;
  if (beta.size() != softmax_dim(hc, n_obs, n_actions, horizon))
    throw ValidationError("beta", "dimension does not match feature map");
  if (!beta.allFinite()) throw ValidationError("beta", "non-finite entry");
  if (beta.norm() > l_pi * (1.0 + 1e-12) + 1e-15)
    throw ValidationError("beta", "norm exceeds l_pi");
  p.beta_ = std::move(beta);
  p.l_pi_ = l_pi;
  // One-hot psi: logit of (t, a, o, code) is a single coordinate of beta.
  std::int64_t offset = 0;
  p.probs_.resize(horizon);
  for (int t = 0; t < horizon; ++t) {
    const std::int64_t rows = p.coder_.atoms(t);
    auto& tab = p.probs_[t];
    tab.resize(static_cast<size_t>(rows) * n_actions);
    for (std::int64_t r = 0; r < rows; ++r) {
      const auto pr = softmax(p.beta_.data() + offset + r * n_actions, n_actions);
      std::copy(pr.begin(), pr.end(), tab.begin() + r * n_actions);
    }
    offset += rows * n_actions;
  }
  return p;
}

void TargetPolicy::check_table() const {
  const int H = coder_.horizon, A = coder_.n_actions;
  if (static_cast<int>(probs_.size()) != H) throw ValidationError("table", "needs one table per step");
  for (int t = 0; t < H; ++t) {
    const std::int64_t rows = coder_.atoms(t);
    if (probs_[t].size() != static_cast<size_t>(rows) * A)
      throw ValidationError("table[" + std::to_string(t) + "]", "wrong number of rows");
    for (std::int64_t r = 0; r < rows; ++r)
      check_probability_vector(&probs_[t][r * A], A,
                               "table[" + std::to_string(t) + "][" + std::to_string(r) + "]");
  }
}

const double* TargetPolicy::probs(int t, int o, std::int64_t code) const {
  if (t < 0 || t >= coder_.horizon) throw UnknownHistoryAtom("step out of range");
  if (o < 0 || o >= coder_.n_obs) throw UnknownHistoryAtom("observation out of range");
  if (code < 0 || code >= coder_.codes(t))
    throw UnknownHistoryAtom("history atom " + std::to_string(code) + " unknown at step " +
                             std::to_string(t));
  return probs_unchecked(t, o, code);
}

bool TargetPolicy::operator==(const TargetPolicy& other) const {
  return coder_.hc == other.coder_.hc && coder_.n_obs == other.coder_.n_obs &&
         coder_.n_actions == other.coder_.n_actions && coder_.horizon == other.coder_.horizon &&
         form_ == other.form_ && l_pi_ == other.l_pi_ && beta_.size() == other.beta_.size() &&
         beta_ == other.beta_ && probs_ == other.probs_;
}

void validate(const PolicySet& set) {
  if (set.members.empty()) throw ValidationError("policies", "policy set is empty");
  for (size_t i = 0; i < set.members.size(); ++i)
    if (!(set.members[i].history_class() == set.history_class))
      throw ValidationError("policies[" + std::to_string(i) + "]", "history class differs from set");
}

PolicySet sample_policy_set(const HistoryClass& hc, int count, std::uint64_t seed,
                            const SoftmaxSpec& spec) {
  if (count < 1) throw ValidationError("count", "must be at least 1");
  PolicySet set;
  set.history_class = hc;
  set.provenance = "sampled";
  set.seed = seed;
  const auto d = TargetPolicy::softmax_dim(hc, spec.n_obs, spec.n_actions, spec.horizon);
  set.members.push_back(TargetPolicy::linear_softmax(hc, spec.n_obs, spec.n_actions, spec.horizon,
                                                     Eigen::VectorXd::Zero(d), spec.l_pi));
  for (int i = 1; i < count; ++i) {
    RandomStream rng(seed, static_cast<std::uint64_t>(i));
    Eigen::VectorXd beta(d);
    for (std::int64_t j = 0; j < d; ++j) beta[j] = rng.normal();
    const double radius = spec.l_pi * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    beta *= radius / beta.norm();
    set.members.push_back(
        TargetPolicy::linear_softmax(hc, spec.n_obs, spec.n_actions, spec.horizon, beta, spec.l_pi));
  }
  return set;
}

}  // namespace p3o
