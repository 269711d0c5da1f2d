#include <doctest.h>

#include <cmath>

#include "p3o/baseline.hpp"
#include "p3o/dataset.hpp"
#include "p3o/errors.hpp"
#include "p3o/instances.hpp"
#include "p3o/oracle.hpp"
#include "p3o/pessimism.hpp"

using namespace p3o;

TEST_SUITE("baseline") {

TEST_CASE("one-step fitted Q by hand") {
  OfflineDataset d;
  d.horizon = 1;
  d.trajectories = {Trajectory{0, {Step{0, 0, 1.0}}}, Trajectory{0, {Step{0, 0, 0.0}}},
                    Trajectory{1, {Step{0, 1, 2.0}}}, Trajectory{0, {Step{1, 0, 4.0}}}};
  // Q(0, 0) = 0.5, Q(0, 1) = 2, Q(1, 0) = 4, Q(1, 1) unvisited = 0.
  const auto pi = TargetPolicy::table(HistoryClass::reactive(), 2, 2, 1, {{0.25, 0.75, 0.5, 0.5}});
  const double v0 = 0.25 * 0.5 + 0.75 * 2.0, v1 = 0.5 * 4.0;
  CHECK(naive_fqe(d, pi, 1.0) == doctest::Approx((3 * v0 + v1) / 4).epsilon(1e-15));
}

TEST_CASE("two-step backup by hand") {
  OfflineDataset d;
  d.horizon = 2;
  d.trajectories = {Trajectory{0, {Step{0, 0, 1.0}, Step{1, 1, 3.0}}},
                    Trajectory{0, {Step{0, 0, 0.0}, Step{0, 0, 2.0}}}};
  const auto pi = TargetPolicy::table(HistoryClass::reactive(), 2, 2, 2,
                                      {{0.5, 0.5, 0.5, 0.5}, {0.2, 0.8, 0.6, 0.4}});
  const double gamma = 0.5;
  // Last step: Q(1, 1) = 3, Q(0, 0) = 2. First step targets:
  const double y1 = 1.0 + gamma * (0.4 * 3.0);
  const double y2 = 0.0 + gamma * (0.2 * 2.0);
  const double q00 = (y1 + y2) / 2;
  CHECK(naive_fqe(d, pi, gamma) == doctest::Approx(0.5 * q00).epsilon(1e-15));
}

TEST_CASE("consistent without confounding") {
  // Identity emissions reveal the state, so observation-based FQE is unbiased.
  const Instance id = identity_instance(2);
  const OfflineDataset d = generate(id.model, id.behavior, 100000, 11);
  for (std::uint64_t seed : {1, 2, 3}) {
    const TargetPolicy pi = random_table_policy(HistoryClass::reactive(), 2, 2, 2, seed);
    CHECK(naive_fqe(d, pi, id.model.gamma) == doctest::Approx(true_value(id.model, pi)).epsilon(0.02));
  }
}

TEST_CASE("biased under confounding") {
  const Instance in = benchmark_instance();
  const OfflineDataset d = generate(in.model, in.behavior, 100000, 11);
  const PolicySet set = sample_policy_set(HistoryClass::reactive(), 20, 7, SoftmaxSpec{2, 2, 2, 5.0});
  double worst = 0.0;
  for (const auto& pi : set.members)
    worst = std::max(worst, std::abs(naive_fqe(d, pi, in.model.gamma) - true_value(in.model, pi)));
  CHECK(worst > 0.1);
}

TEST_CASE("selection") {
  const Instance in = benchmark_instance();
  const OfflineDataset d = generate(in.model, in.behavior, 500, 2);
  const PolicySet set = sample_policy_set(HistoryClass::reactive(), 6, 7, SoftmaxSpec{2, 2, 2, 5.0});
  const BaselineResult r = naive_select(d, set, 1.0);
  REQUIRE(r.estimates.size() == 6);
  CHECK(r.selected == argmax_lowest(r.estimates));
  CHECK_THROWS_AS(naive_fqe(OfflineDataset{}, set.members[0], 1.0), ValidationError);
}

}
