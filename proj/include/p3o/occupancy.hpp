#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "p3o/history.hpp"
#include "p3o/model.hpp"
#include "p3o/policy.hpp"

namespace p3o {

// Exact joint law of (S_t, Z_t, window code) at one step. Column index is
// z * codes + code, so for the reactive class the column is just Z_t.
struct StepLaw {
  std::int64_t codes = 1;
  Eigen::MatrixXd mass;  // S x (O * codes)

  // Joint of (S_t, window), marginal over Z.
  Eigen::MatrixXd state_window() const;
  Eigen::VectorXd state_marginal() const { return mass.rowwise().sum(); }
};

struct Occupancy {
  HistoryCoder coder;
  std::vector<StepLaw> steps;
};

// Forward law under the behavior policy, with histories summarised the way
// the target class hc needs. Throws HistoryExplosion past `cap` atoms.
Occupancy occupancy(const TabularPOMDP& m, const BehaviorPolicy& b, const HistoryClass& hc,
                    std::int64_t cap = 1000000);
// Forward law when actions follow the target policy.
Occupancy occupancy(const TabularPOMDP& m, const TargetPolicy& pi, std::int64_t cap = 1000000);

struct RankDiagnostics {
  double rank_tol = 1e-8;
  std::vector<Eigen::VectorXd> forward_sv;   // P(O_h | S_h), per step
  std::vector<Eigen::VectorXd> backward_sv;  // P(O_{h-1} | S_h), per step
  std::vector<bool> rank_ok;
  bool all_ok() const;
};

// Numerical rank: singular values above rank_tol times the largest.
int numerical_rank(const Eigen::VectorXd& sv, double rank_tol);

RankDiagnostics rank_diagnostics(const TabularPOMDP& m, const BehaviorPolicy& b,
                                 double rank_tol = 1e-8);

// Latent state marginals P^b(S_t) by plain forward recursion.
std::vector<Eigen::VectorXd> latent_marginals(const TabularPOMDP& m, const BehaviorPolicy& b);

}  // namespace p3o
