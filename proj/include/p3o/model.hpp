#pragma once

#include <string>
#include <vector>

namespace p3o {

// Finite episodic POMDP. Tables are stored flat, row-major, 0-based steps.
struct TabularPOMDP {
  int n_states = 0;
  int n_obs = 0;
  int n_actions = 0;
  int horizon = 0;
  double gamma = 1.0;
  std::vector<double> mu1;     // [S]
  std::vector<double> trans;   // [H][S][A][S]
  std::vector<double> emit;    // [H][S][O]
  std::vector<double> emit0;   // [S][O]
  std::vector<double> reward;  // [H][S][A]

  // Allocates zero tables of the right shape.
  static TabularPOMDP zeros(int n_states, int n_obs, int n_actions, int horizon,
                            double gamma = 1.0);

  double* trans_row(int t, int s, int a) {
    return &trans[((static_cast<size_t>(t) * n_states + s) * n_actions + a) * n_states];
  }
  const double* trans_row(int t, int s, int a) const {
    return &trans[((static_cast<size_t>(t) * n_states + s) * n_actions + a) * n_states];
  }
  double* emit_row(int t, int s) { return &emit[(static_cast<size_t>(t) * n_states + s) * n_obs]; }
  const double* emit_row(int t, int s) const {
    return &emit[(static_cast<size_t>(t) * n_states + s) * n_obs];
  }
  double* emit0_row(int s) { return &emit0[static_cast<size_t>(s) * n_obs]; }
  const double* emit0_row(int s) const { return &emit0[static_cast<size_t>(s) * n_obs]; }
  double& R(int t, int s, int a) { return reward[(static_cast<size_t>(t) * n_states + s) * n_actions + a]; }
  double R(int t, int s, int a) const {
    return reward[(static_cast<size_t>(t) * n_states + s) * n_actions + a];
  }

  bool operator==(const TabularPOMDP&) const = default;
};

// Throws ValidationError naming the first violated field.
void validate(const TabularPOMDP& m);

// Checks that p[0..n) is a probability vector; names `field` on failure.
void check_probability_vector(const double* p, int n, const std::string& field);

}  // namespace p3o
