#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "p3o/model.hpp"
#include "p3o/occupancy.hpp"
#include "p3o/policy.hpp"

namespace p3o {

struct BridgeOptions {
  double solve_tol = 1e-9;  // on ||r|| / max(1, ||rhs||)
  double rank_tol = 1e-8;
  // When false a residual above solve_tol raises BridgeError(Inconsistent).
  bool allow_inconsistent = false;
  std::int64_t cap = 1000000;
};

// Tables are |A| x |O|: b[t](a, w) and q[t](a, z).
struct ValueBridgeExact {
  std::vector<Eigen::MatrixXd> b;
  std::vector<double> residual;
  std::string solution_rule = "minimum_norm";
};

struct WeightBridgeExact {
  std::vector<Eigen::MatrixXd> q;
  std::vector<double> residual;
  // False when the target reaches (s, history) cells the behavior never visits.
  bool coverage_ok = true;
  std::string solution_rule = "minimum_norm";
};

struct CoverageReport {
  double c_pi = 0.0;
  std::vector<double> per_step;
  bool finite = true;
};

struct IdentificationResult {
  double lhs = 0.0;  // J(pi) by forward enumeration
  double rhs = 0.0;  // E^b[sum_a b_1(a, W_1)] from the solved bridge
  double gap = 0.0;
};

double true_value(const TabularPOMDP& m, const TargetPolicy& pi, std::int64_t cap = 1000000);

ValueBridgeExact solve_value_bridge(const TabularPOMDP& m, const BehaviorPolicy& b,
                                    const TargetPolicy& pi, const BridgeOptions& opt = {});

WeightBridgeExact solve_weight_bridge(const TabularPOMDP& m, const BehaviorPolicy& b,
                                      const TargetPolicy& pi, const BridgeOptions& opt = {});

IdentificationResult identification_check(const TabularPOMDP& m, const BehaviorPolicy& b,
                                          const TargetPolicy& pi, const BridgeOptions& opt = {});

CoverageReport concentrability(const TabularPOMDP& m, const BehaviorPolicy& b,
                               const TargetPolicy& pi, const BridgeOptions& opt = {});
CoverageReport concentrability(const TabularPOMDP& m, const BehaviorPolicy& b,
                               const TargetPolicy& pi, const WeightBridgeExact& wb,
                               std::int64_t cap = 1000000);

// F(b) = E^b[sum_a b_1(a, W_1)] for a first-step table b_1 (|A| x |O|).
double bridge_functional(const TabularPOMDP& m, const Eigen::MatrixXd& b1);

}  // namespace p3o
