#pragma once

#include <cstdint>
#include <string>

#include "p3o/model.hpp"
#include "p3o/policy.hpp"

namespace p3o {

struct Instance {
  std::string name;
  TabularPOMDP model;
  BehaviorPolicy behavior;
};

// Two-state MDP seen through an identity emission (O = S).
Instance identity_instance(int horizon = 2);

// Confounded benchmark: noisy emission, behavior keyed to the latent state.
Instance benchmark_instance();

// Same dynamics as the benchmark with every reward zero.
Instance zero_reward_instance();

// Random full-rank instance: each state favours its own observation.
Instance random_instance(int n_states, int n_obs, int n_actions, int horizon, std::uint64_t seed);

// Named builders: "identity", "identity:H", "benchmark", "zero_reward",
// "random:S:O:A:H:seed".
Instance build_instance(const std::string& spec);

// Random table policy with every probability at least min_prob.
TargetPolicy random_table_policy(const HistoryClass& hc, int n_obs, int n_actions, int horizon,
                                 std::uint64_t seed, double min_prob = 0.05);

// History-dependent table policy whose dependence on the window lies in the
// null space of each step's emission matrix, so E[pi(a | O_t, window) | S_t]
// does not vary with the window. This is the case in which bridge functions
// of (A_t, O_t) exist for non-reactive classes. Needs n_obs > n_states.
TargetPolicy nullspace_history_policy(const TabularPOMDP& m, const HistoryClass& hc,
                                      std::uint64_t seed, double strength = 0.1);

}  // namespace p3o
