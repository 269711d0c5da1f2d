#include "p3o/quadratic.hpp"

#include <cmath>
#include <limits>

namespace p3o {

BallQp::BallQp(const Eigen::MatrixXd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()));
  Q_ = es.eigenvectors();
  evals_ = es.eigenvalues().cwiseMax(0.0);
}

BallQpResult BallQp::solve(const Eigen::VectorXd& g, double radius) const {
  const Eigen::VectorXd gh = Q_.transpose() * g;
  const Eigen::Index d = gh.size();
  const double top = std::max(max_eigenvalue(), std::numeric_limits<double>::min());
  const double zero_eval = 1e-14 * top;
  const double zero_grad = 1e-14 * std::max(1.0, g.norm());

  // Pseudo-inverse minimiser; unbounded if g has weight on a null direction.
  bool bounded = true;
  Eigen::VectorXd y(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (evals_[i] > zero_eval) {
      y[i] = gh[i] / evals_[i];
    } else {
      y[i] = 0.0;
      if (std::abs(gh[i]) > zero_grad) bounded = false;
    }
  }
  BallQpResult out;
  if (bounded && y.norm() <= radius) {
    out.x = Q_ * y;
    return out;
  }
  out.active = true;
  if (radius <= 0.0) {
    out.x = Eigen::VectorXd::Zero(d);
    out.multiplier = std::numeric_limits<double>::infinity();
    return out;
  }
  auto norm_at = [&](double mu) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double v = gh[i] / (evals_[i] + mu);
      acc += v * v;
    }
    return std::sqrt(acc);
  };
  // At mu = ||g|| / radius the step is already inside the ball.
  double lo = 0.0, hi = gh.norm() / radius;
  const double tol = 1e-12 * std::max(1.0, hi);
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (norm_at(mid) > radius)
      lo = mid;
    else
      hi = mid;
  }
  for (Eigen::Index i = 0; i < d; ++i) y[i] = gh[i] / (evals_[i] + hi);
  out.x = Q_ * y;
  out.multiplier = hi;
  return out;
}

}  // namespace p3o
