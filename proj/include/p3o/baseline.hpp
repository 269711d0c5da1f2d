#pragma once

#include <vector>

#include "p3o/dataset.hpp"
#include "p3o/policy.hpp"

namespace p3o {

// Confounder-ignoring comparison method: tabular fitted-Q evaluation that
// treats O_t as the state, followed by greedy selection without pessimism.
// Unvisited (o, a) cells get Q = 0.
double naive_fqe(const OfflineDataset& data, const TargetPolicy& pi, double gamma);

struct BaselineResult {
  std::vector<double> estimates;
  int selected = -1;
};

BaselineResult naive_select(const OfflineDataset& data, const PolicySet& set, double gamma);

}  // namespace p3o
