#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "p3o/model.hpp"
#include "p3o/policy.hpp"

namespace p3o {

struct Step {
  int o = 0;
  int a = 0;
  double r = 0.0;
  bool operator==(const Step&) const = default;
};

// One logged episode. There is deliberately no latent-state field.
struct Trajectory {
  int o0 = 0;
  std::vector<Step> steps;
  bool operator==(const Trajectory&) const = default;
};

struct OfflineDataset {
  std::string model_fingerprint;
  std::string behavior_fingerprint;
  std::uint64_t seed = 0;
  int horizon = 0;
  std::vector<Trajectory> trajectories;

  std::size_t size() const { return trajectories.size(); }
  bool operator==(const OfflineDataset&) const = default;
};

// Trajectory i uses RandomStream(seed, i); draws per episode in order:
// S_1, O_0, then for each step O_t, A_t and (except at the last step) S_{t+1}.
OfflineDataset generate(const TabularPOMDP& m, const BehaviorPolicy& b, std::size_t n,
                        std::uint64_t seed);

double empirical_mean(const OfflineDataset& d, const std::function<double(const Trajectory&)>& f);

// Throws ValidationError if indices fall outside the model's spaces.
void check_compatible(const OfflineDataset& d, const TabularPOMDP& m);

// JSON Lines persistence; load throws FormatError with the 1-based line.
void save_dataset(const OfflineDataset& d, const std::string& path);
OfflineDataset load_dataset(const std::string& path);
std::string dataset_to_string(const OfflineDataset& d);
OfflineDataset dataset_from_string(const std::string& text);

}  // namespace p3o
