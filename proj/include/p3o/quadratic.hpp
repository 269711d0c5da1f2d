#pragma once

#include <Eigen/Dense>

namespace p3o {

struct BallQpResult {
  Eigen::VectorXd x;
  bool active = false;     // norm constraint binds
  double multiplier = 0.0; // KKT multiplier of the ball constraint
};

// min 1/2 x'Hx - g'x  s.t. ||x|| <= radius, for symmetric PSD H.
// H is eigen-decomposed once; each solve is O(d^2) plus a bisection on the
// secular equation sum_i g_i^2 / (e_i + mu)^2 = radius^2 when the
// unconstrained minimiser is infeasible or does not exist.
class BallQp {
 public:
  explicit BallQp(const Eigen::MatrixXd& H);

  BallQpResult solve(const Eigen::VectorXd& g, double radius) const;

  double min_eigenvalue() const { return evals_.size() ? evals_.minCoeff() : 0.0; }
  double max_eigenvalue() const { return evals_.size() ? evals_.maxCoeff() : 0.0; }

 private:
  Eigen::MatrixXd Q_;
  Eigen::VectorXd evals_;
};

}  // namespace p3o
