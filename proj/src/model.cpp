#include "p3o/model.hpp"

#include <cmath>

#include "p3o/errors.hpp"

namespace p3o {

namespace {
constexpr double kSumTol = 1e-12;

std::string idx(const std::string& name, std::initializer_list<int> ids) {
  std::string s = name;
  for (int i : ids) s += "[" + std::to_string(i) + "]";
  return s;
}
}  // namespace

TabularPOMDP TabularPOMDP::zeros(int S, int O, int A, int H, double gamma) {
  TabularPOMDP m;
  m.n_states = S;
  m.n_obs = O;
  m.n_actions = A;
  m.horizon = H;
  m.gamma = gamma;
  m.mu1.assign(S, 0.0);
  m.trans.assign(static_cast<size_t>(H) * S * A * S, 0.0);
  m.emit.assign(static_cast<size_t>(H) * S * O, 0.0);
  m.emit0.assign(static_cast<size_t>(S) * O, 0.0);
  m.reward.assign(static_cast<size_t>(H) * S * A, 0.0);
  return m;
}

void check_probability_vector(const double* p, int n, const std::string& field) {
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(p[i])) throw ValidationError(field, "non-finite entry");
    if (p[i] < 0.0) throw ValidationError(field, "negative entry");
    sum += p[i];
  }
  if (std::abs(sum - 1.0) > kSumTol)
    throw ValidationError(field, "sums to " + std::to_string(sum));
}

void validate(const TabularPOMDP& m) {
  if (m.n_states < 1) throw ValidationError("n_states", "must be positive");
  if (m.n_obs < 1) throw ValidationError("n_obs", "must be positive");
  if (m.n_actions < 1) throw ValidationError("n_actions", "must be positive");
  if (m.horizon < 1) throw ValidationError("horizon", "must be at least 1");
  if (!std::isfinite(m.gamma) || m.gamma <= 0.0 || m.gamma > 1.0)
    throw ValidationError("gamma", "must lie in (0,1]");
  const int S = m.n_states, O = m.n_obs, A = m.n_actions, H = m.horizon;
  if (m.mu1.size() != static_cast<size_t>(S)) throw ValidationError("mu1", "wrong length");
  if (m.trans.size() != static_cast<size_t>(H) * S * A * S) throw ValidationError("trans", "wrong shape");
  if (m.emit.size() != static_cast<size_t>(H) * S * O) throw ValidationError("emit", "wrong shape");
  if (m.emit0.size() != static_cast<size_t>(S) * O) throw ValidationError("emit0", "wrong shape");
  if (m.reward.size() != static_cast<size_t>(H) * S * A) throw ValidationError("reward", "wrong shape");

  check_probability_vector(m.mu1.data(), S, "mu1");
  for (int t = 0; t < H; ++t)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) check_probability_vector(m.trans_row(t, s, a), S, idx("trans", {t, s, a}));
  for (int t = 0; t < H; ++t)
    for (int s = 0; s < S; ++s) check_probability_vector(m.emit_row(t, s), O, idx("emit", {t, s}));
  for (int s = 0; s < S; ++s) check_probability_vector(m.emit0_row(s), O, idx("emit0", {s}));
  for (int t = 0; t < H; ++t)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const double r = m.R(t, s, a);
        if (!std::isfinite(r) || r < 0.0 || r > 1.0)
          throw ValidationError(idx("reward", {t, s, a}), "must lie in [0,1]");
      }
}

}  // namespace p3o
