#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "p3o/dataset.hpp"
#include "p3o/model.hpp"
#include "p3o/occupancy.hpp"
#include "p3o/policy.hpp"
#include "p3o/quadratic.hpp"

namespace p3o {

// Linear primal/dual features. Rows of phi are indexed a * |O| + w and rows
// of nu a * |O| + z (Z and W both range over observations).
struct FeatureMap {
  int n_obs = 0;
  int n_actions = 0;
  int d = 0;
  Eigen::MatrixXd phi;
  Eigen::MatrixXd nu;
  double L_b = 10.0;  // ||theta|| bound
  double L_g = 1.0;   // ||omega|| bound
  double M_B = 1.0;   // bound on sup_w |sum_a b(a, w)|
  double M_G = 1.0;   // bound on sup |g|

  static FeatureMap one_hot(int n_obs, int n_actions, double L_b, double L_g, double M_B,
                            double M_G);

  Eigen::Index row(int a, int o) const { return static_cast<Eigen::Index>(a) * n_obs + o; }
  // b(a, w) for all pairs, as an |A| x |O| table.
  Eigen::MatrixXd table(const Eigen::VectorXd& theta) const;
  // Least-squares theta reproducing an |A| x |O| table (exact for one-hot phi).
  Eigen::VectorXd theta_from_table(const Eigen::MatrixXd& b) const;
  // sum_a phi(a, w)
  Eigen::VectorXd phi_sum(int w) const;
};

void validate(const FeatureMap& fm);

struct LinearBridge {
  Eigen::VectorXd theta;
  int step = 0;
};

// sup_w |sum_a <phi(a, w), theta>|
double bridge_sup(const FeatureMap& fm, const Eigen::VectorXd& theta);

struct ResidualSample {
  double varsigma = 0.0;
  int a = 0;
  int z = 0;
};

// One sample per trajectory at step t. An empty theta_next means the zero
// continuation and is required at the last step.
std::vector<ResidualSample> residuals(const OfflineDataset& data, const TargetPolicy& pi,
                                      const FeatureMap& fm, const Eigen::VectorXd& theta,
                                      const Eigen::VectorXd& theta_next, int t, double gamma);

struct InnerMaxResult {
  double value = 0.0;
  Eigen::VectorXd omega;
  bool constraint_active = false;
  double ridge = 0.0;
};

// max_omega u'omega - lambda omega'(Sigma + ridge I)omega over ||omega|| <= L_g,
// ridge = ridge_scale * trace(Sigma) / d. Sigma is factored once.
class DualSolver {
 public:
  DualSolver(const Eigen::MatrixXd& sigma, double lambda, double L_g, double ridge_scale = 1e-8);
  InnerMaxResult solve(const Eigen::VectorXd& u) const;
  const Eigen::MatrixXd& sigma_reg() const { return sigma_reg_; }
  double ridge() const { return ridge_; }

 private:
  Eigen::MatrixXd sigma_reg_;
  double lambda_;
  double L_g_;
  double ridge_;
  BallQp qp_;
};

InnerMaxResult inner_max(const Eigen::VectorXd& u, const Eigen::MatrixXd& sigma, double lambda,
                         double L_g, double ridge_scale = 1e-8);
InnerMaxResult inner_max(const std::vector<ResidualSample>& samples, const FeatureMap& fm,
                         double lambda, double L_g, double ridge_scale = 1e-8);

// Sufficient statistics of the step-t moment u(theta, theta') = A theta - c - gamma D theta'.
struct StepMoments {
  int t = 0;
  std::size_t n = 0;
  Eigen::MatrixXd sigma;  // mean nu nu'
  Eigen::MatrixXd A;      // mean nu phi(A, W)'
  Eigen::VectorXd c;      // mean nu R pi
  Eigen::MatrixXd D;      // mean nu pi sum_a' phi(a', W_next)'; zero at the last step

  Eigen::VectorXd u(const Eigen::VectorXd& theta, const Eigen::VectorXd& theta_next,
                    double gamma) const;
};

StepMoments step_moments(const OfflineDataset& data, const TargetPolicy& pi, const FeatureMap& fm,
                         int t);
std::vector<StepMoments> chain_moments(const OfflineDataset& data, const TargetPolicy& pi,
                                       const FeatureMap& fm);
// F_hat(theta) = f' theta with f = mean sum_a phi(a, W_1).
Eigen::VectorXd head_functional(const OfflineDataset& data, const FeatureMap& fm);

struct FitConfig {
  double lambda = 1.0;
  double gamma = 1.0;
  double ridge_scale = 1e-8;
};

struct StepFit {
  int t = 0;
  Eigen::VectorXd theta;
  double m_hat = 0.0;
  bool primal_active = false;
  bool dual_active = false;
  double primal_ridge = 0.0;
  double dual_ridge = 0.0;
  double sup_sum = 0.0;       // sup_w |sum_a b(a, w)|
  bool mb_violation = false;  // sup_sum > M_B
};

struct MinimaxFit {
  std::vector<StepFit> steps;  // indexed by step, computed from the last step down
};

// Closed-form GMM step: argmin over ||theta|| <= L_b of u'Sigma^-1 u, then the
// achieved inner-max value. An empty theta_next is the zero continuation.
StepFit fit_step(const StepMoments& mom, const Eigen::VectorXd& theta_next, const FeatureMap& fm,
                 const FitConfig& cfg);
StepFit fit_step(const OfflineDataset& data, const TargetPolicy& pi, const FeatureMap& fm,
                 const Eigen::VectorXd& theta_next, int t, const FitConfig& cfg);
MinimaxFit fit_chain(const std::vector<StepMoments>& moms, const FeatureMap& fm,
                     const FitConfig& cfg);
MinimaxFit fit_chain(const OfflineDataset& data, const TargetPolicy& pi, const FeatureMap& fm,
                     const FitConfig& cfg);

// Exact population Bellman residual at step t, tabulated over cells (a, z):
// num = P^b(a, z) * ell(a, z), den = P^b(a, z).
struct PopulationResidual {
  Eigen::MatrixXd num;
  Eigen::MatrixXd den;
  double rmse() const;          // L = E[ell^2]
  Eigen::MatrixXd ell() const;  // zero where den = 0
};

// b_next empty means zero continuation. behavior_occ must use pi's history class.
PopulationResidual population_residual(const TabularPOMDP& m, const BehaviorPolicy& b,
                                       const TargetPolicy& pi, const Occupancy& behavior_occ,
                                       const Eigen::MatrixXd& b_t, const Eigen::MatrixXd& b_next,
                                       int t);
double population_rmse(const TabularPOMDP& m, const BehaviorPolicy& b, const TargetPolicy& pi,
                       const Eigen::MatrixXd& b_t, const Eigen::MatrixXd& b_next, int t,
                       std::int64_t cap = 1000000);

// Population counterpart of inner_max for dual features nu.
InnerMaxResult population_inner_max(const PopulationResidual& pr, const FeatureMap& fm,
                                    double lambda, double L_g, double ridge_scale = 0.0);

}  // namespace p3o

namespace p3o {

// Step-t fitting with all factorizations done once; used for the fitted chain
// and for refits against alternative continuations.
class StepFitter {
 public:
  StepFitter(const StepMoments& mom, const FeatureMap& fm, const FitConfig& cfg);

  StepFit fit(const Eigen::VectorXd& theta_next) const;
  InnerMaxResult evaluate(const Eigen::VectorXd& theta, const Eigen::VectorXd& theta_next) const;
  double m_hat(const Eigen::VectorXd& theta, const Eigen::VectorXd& theta_next) const {
    return evaluate(theta, theta_next).value;
  }
  const StepMoments& moments() const { return mom_; }
  // N = A' (Sigma + ridge)^-1 A plus the primal ridge; near the unconstrained
  // minimizer m_hat grows like delta' N delta / (4 lambda).
  const Eigen::MatrixXd& normal_matrix() const { return N_; }
  double lambda() const { return cfg_.lambda; }
  // d theta_hat_t / d theta_{t+1} for the unconstrained minimizer.
  Eigen::MatrixXd sensitivity() const;

 private:
  StepMoments mom_;
  FeatureMap fm_;
  FitConfig cfg_;
  DualSolver dual_;
  Eigen::MatrixXd AtW_;  // A' (Sigma + ridge)^-1
  Eigen::MatrixXd N_;
  double primal_ridge_ = 0.0;
  BallQp primal_;
};

}  // namespace p3o
