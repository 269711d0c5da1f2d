#include <doctest.h>

#include <cmath>

#include "p3o/quadratic.hpp"
#include "p3o/rng.hpp"

using namespace p3o;

namespace {

double objective(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::VectorXd& x) {
  return 0.5 * x.dot(H * x) - g.dot(x);
}

Eigen::VectorXd normal_vec(RandomStream& rng, int d) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = rng.normal();
  return v;
}

}  // namespace

TEST_SUITE("quadratic") {

TEST_CASE("interior solution is the Newton step") {
  Eigen::MatrixXd H(2, 2);
  H << 2, 0.5, 0.5, 1;
  Eigen::VectorXd g(2);
  g << 0.3, -0.2;
  const auto r = BallQp(H).solve(g, 10.0);
  CHECK_FALSE(r.active);
  CHECK((r.x - H.ldlt().solve(g)).norm() <= 1e-12);
}

TEST_CASE("boundary solution satisfies KKT") {
  RandomStream rng(4, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const int d = 1 + rep % 5;
    const Eigen::MatrixXd B = Eigen::MatrixXd::NullaryExpr(d, d, [&] { return rng.normal(); });
    Eigen::MatrixXd H = B * B.transpose();
    if (rep % 3 == 0) H.col(0).setZero(), H.row(0).setZero();  // singular direction
    const Eigen::VectorXd g = 5.0 * normal_vec(rng, d);
    const double radius = 0.3;
    const auto r = BallQp(H).solve(g, radius);
    CHECK(r.x.norm() <= radius * (1.0 + 1e-9));
    // Stationarity (H + mu I) x = g with mu >= 0 and complementary slackness.
    const Eigen::VectorXd kkt = H * r.x + r.multiplier * r.x - g;
    CHECK(kkt.norm() <= 1e-7 * std::max(1.0, g.norm()));
    CHECK(r.multiplier >= 0.0);
    if (r.multiplier > 1e-9) CHECK(std::abs(r.x.norm() - radius) <= 1e-9);
    // No random feasible point does better.
    const double best = objective(H, g, r.x);
    for (int k = 0; k < 200; ++k) {
      Eigen::VectorXd y = normal_vec(rng, d);
      y *= radius * std::pow(rng.uniform(), 1.0 / d) / y.norm();
      CHECK(objective(H, g, y) >= best - 1e-10);
    }
  }
}

TEST_CASE("scalar cases") {
  Eigen::MatrixXd H(1, 1);
  H << 2.0;
  Eigen::VectorXd g(1);
  g << 10.0;
  auto r = BallQp(H).solve(g, 1.0);
  CHECK(r.x[0] == doctest::Approx(1.0));
  CHECK(r.active);
  g << 0.0;
  r = BallQp(H).solve(g, 1.0);
  CHECK(r.x[0] == 0.0);
  // Zero curvature with a linear pull goes straight to the boundary.
  H << 0.0;
  g << -3.0;
  r = BallQp(H).solve(g, 2.0);
  CHECK(r.x[0] == doctest::Approx(-2.0));
}

}
