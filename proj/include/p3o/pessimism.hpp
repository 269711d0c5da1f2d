#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "p3o/dataset.hpp"
#include "p3o/minimax.hpp"
#include "p3o/policy.hpp"

namespace p3o {

// Linear-class schedule: C1 M_B^2 M_G^2 d H log(1 + L_b L_pi H n / delta) / n.
double xi_schedule(double n, double d, double H, double M_B, double M_G, double L_b, double L_pi,
                   double delta, double C1);

struct GridParams {
  int perturbations = 16;  // random directions per layer
  double radius = 1.0;     // largest perturbation, see region_scaled
  int levels = 4;          // lengths radius * 2^-(j mod levels)
  std::uint64_t seed = 0;  // directions depend only on (seed, step, j)
  bool refits = true;      // add argmin_b m_hat(b, b_next) for every continuation candidate
  // When set, a length of 1 reaches the xi level set of the quadratic model of
  // m_hat around the fitted bridge; otherwise radius is a Euclidean length.
  bool region_scaled = true;
  // Candidates along the direction that lowers F_hat fastest through the chain.
  bool directed = true;
};

// Finite candidate set per step. Member 0 is the fitted bridge and member 1
// the zero bridge in every layer.
struct CandidateGrid {
  std::vector<std::vector<Eigen::VectorXd>> layers;
  std::vector<std::vector<std::string>> provenance;  // fitted | zero | user | perturbed | refit

  int steps() const { return static_cast<int>(layers.size()); }
  int size(int t) const { return static_cast<int>(layers[t].size()); }
};

// head is the F_hat functional (empty disables directed candidates);
// injected[t] lists user candidates for step t (e.g. the oracle bridge).
CandidateGrid make_grid(const std::vector<StepFitter>& fitters, const MinimaxFit& fit,
                        const FeatureMap& fm, const GridParams& params, double xi,
                        const Eigen::VectorXd& head = {},
                        const std::vector<std::vector<Eigen::VectorXd>>& injected = {});

struct ConfidenceRegion {
  double xi = 0.0;
  std::vector<Eigen::MatrixXd> m_hat;  // step t: size(t) x size(t+1); last step: size x 1
  std::vector<Eigen::VectorXd> col_min;
  std::vector<Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>> feasible;
};

// Feasibility from precomputed m_hat tables: m_hat(i, j) - min_i' m_hat(i', j) <= xi.
ConfidenceRegion region_from_values(std::vector<Eigen::MatrixXd> m_hat, double xi);
ConfidenceRegion build_region(const std::vector<StepFitter>& fitters, const CandidateGrid& grid,
                              double xi);

std::vector<StepFitter> make_fitters(const OfflineDataset& data, const TargetPolicy& pi,
                                     const FeatureMap& fm, const FitConfig& cfg);

// Slack of a given chain against the stepwise minimizers over the whole ball:
// excess[t] = m_hat(theta_t, theta_{t+1}) - min_b m_hat(b, theta_{t+1}).
struct ChainCheck {
  std::vector<double> excess;
  bool feasible = true;
};
ChainCheck chain_feasibility(const std::vector<StepFitter>& fitters,
                             const std::vector<Eigen::VectorXd>& chain, double xi);

struct PessimisticValue {
  double value = 0.0;
  std::vector<int> chain;      // witness candidate index per step
  std::vector<int> reachable;  // reachable candidates per step
};

// head[i] = F_hat of layer-0 candidate i. Ties go to the lowest index.
// Throws EmptyRegion when nothing is reachable.
PessimisticValue pessimistic_value(const ConfidenceRegion& region, const Eigen::VectorXd& head);

struct P3OConfig {
  FeatureMap features;
  FitConfig fit;
  GridParams grid;
  double c1 = 1.0;
  double delta = 0.1;
  double l_pi = 1.0;
  std::optional<double> xi;  // overrides the schedule when set
};

double scheduled_xi(const P3OConfig& cfg, std::size_t n, int horizon);

struct PolicyOutcome {
  std::string status = "ok";
  double j_pess = -std::numeric_limits<double>::infinity();
  double f_hat_fitted = 0.0;  // F_hat of the fitted chain head
  bool fitted_feasible = false;
  std::vector<int> grid_sizes;
  std::vector<int> reachable;
  std::vector<int> chain;
  std::vector<double> m_hat_fitted;  // per step
  std::optional<double> true_value;
};

struct PessimismReport {
  double xi = 0.0;
  std::size_t n = 0;
  std::vector<PolicyOutcome> policies;
  int selected = -1;
  std::optional<int> optimal;     // argmax of true values
  std::optional<double> subopt;  // J(pi*) - J(pi_hat)
};

PessimismReport p3o(const OfflineDataset& data, const PolicySet& set, const P3OConfig& cfg);

// Argmax over a score vector with lowest-index tie-break; -inf never wins
// unless every entry is -inf (then -1).
int argmax_lowest(const std::vector<double>& scores);

// Adds J(pi) for every member and SubOpt of the selection.
void attach_truth(PessimismReport& rep, const std::vector<double>& true_values);

}  // namespace p3o
