#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "p3o/history.hpp"
#include "p3o/model.hpp"

namespace p3o {

// Behavior policy pi^b_h(a | s); it sees the latent state.
struct BehaviorPolicy {
  int horizon = 0;
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> probs;  // [H][S][A]
  bool strict_coverage = false;
  double min_behavior_prob = 0.0;

  static BehaviorPolicy uniform(int horizon, int n_states, int n_actions);

  const double* row(int t, int s) const {
    return &probs[(static_cast<size_t>(t) * n_states + s) * n_actions];
  }
  double* row(int t, int s) { return &probs[(static_cast<size_t>(t) * n_states + s) * n_actions]; }

  bool operator==(const BehaviorPolicy&) const = default;
};

// Throws ValidationError; when a model is given, shapes must agree with it.
void validate(const BehaviorPolicy& b, const TabularPOMDP* model = nullptr);

// Numerically stable softmax.
std::vector<double> softmax(const double* logits, int n);

// Target policy over (o_t, window of past (o, a) pairs). Probabilities are
// cached as a dense table for every step, so both forms answer lookups in
// O(1). Table rows at step t are indexed by o * codes(t) + window_code.
class TargetPolicy {
 public:
  enum class Form { Table, LinearSoftmax };

  static TargetPolicy uniform(const HistoryClass& hc, int n_obs, int n_actions, int horizon);
  // probs[t] is a flat [rows(t)][A] table.
  static TargetPolicy table(const HistoryClass& hc, int n_obs, int n_actions, int horizon,
                            std::vector<std::vector<double>> probs);
  // One-hot psi over (t, a, o, window); beta has softmax_dim() entries.
  static TargetPolicy linear_softmax(const HistoryClass& hc, int n_obs, int n_actions,
                                     int horizon, Eigen::VectorXd beta, double l_pi);
  static std::int64_t softmax_dim(const HistoryClass& hc, int n_obs, int n_actions, int horizon);

  const HistoryClass& history_class() const { return coder_.hc; }
  const HistoryCoder& coder() const { return coder_; }
  int n_obs() const { return coder_.n_obs; }
  int n_actions() const { return coder_.n_actions; }
  int horizon() const { return coder_.horizon; }
  Form form() const { return form_; }
  const Eigen::VectorXd& beta() const { return beta_; }
  double l_pi() const { return l_pi_; }
  const std::vector<std::vector<double>>& tables() const { return probs_; }

  // Distribution over actions; throws UnknownHistoryAtom on out-of-range input.
  const double* probs(int t, int o, std::int64_t code) const;
  double action_prob(int t, int a, int o, std::int64_t code) const {
    return probs(t, o, code)[a];
  }
  // Unchecked variant for hot loops.
  const double* probs_unchecked(int t, int o, std::int64_t code) const {
    return &probs_[t][static_cast<size_t>(o * coder_.codes(t) + code) * coder_.n_actions];
  }

  bool operator==(const TargetPolicy& other) const;

 private:
  TargetPolicy() = default;
  void check_table() const;

  HistoryCoder coder_;
  Form form_ = Form::Table;
  Eigen::VectorXd beta_;
  double l_pi_ = 0.0;
  std::vector<std::vector<double>> probs_;
};

struct PolicySet {
  HistoryClass history_class;
  std::vector<TargetPolicy> members;
  std::string provenance = "enumerated";  // "enumerated" | "sampled" | "user"
  std::uint64_t seed = 0;
};

void validate(const PolicySet& set);

struct SoftmaxSpec {
  int n_obs = 0;
  int n_actions = 0;
  int horizon = 0;
  double l_pi = 1.0;
};

// Member 0 is the uniform policy (beta = 0); the others draw beta uniformly
// from the L_pi ball using stream i of the seed.
PolicySet sample_policy_set(const HistoryClass& hc, int count, std::uint64_t seed,
                            const SoftmaxSpec& spec);

}  // namespace p3o
