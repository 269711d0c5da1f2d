#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace p3o {

// Steps are 0-based in code: step t is the paper's h = t + 1. The observation
// sequence is obs[0] = O_0 (prior observation), obs[t + 1] = O at step t.
struct HistoryClass {
  enum class Kind { Reactive, FiniteHistory, FullHistory };
  Kind kind = Kind::Reactive;
  int k = 0;  // window, only meaningful for FiniteHistory

  static HistoryClass reactive() { return {Kind::Reactive, 0}; }
  static HistoryClass finite(int k);
  static HistoryClass full() { return {Kind::FullHistory, 0}; }

  // Number of (o, a) pairs the policy sees at step t.
  int window(int t) const;
  // Index into obs[] of the negative control action Z at step t.
  int z_index(int t) const { return t - window(t); }

  std::string name() const;  // "reactive", "finite:2", "full"
  static HistoryClass parse(const std::string& s);

  bool operator==(const HistoryClass&) const = default;
};

struct NegativeControls {
  int z_obs;  // Z_h = O_{z_obs}
  int w_obs;  // W_h = O_{w_obs}
};

// Paper-indexed: h is 1-based and the result names observations O_i.
NegativeControls negative_controls(const HistoryClass& hc, int h);

// Dense coding of history atoms. A window of w pairs is a base-(|O||A|)
// number, oldest pair most significant; pair code = o * |A| + a.
// A full atom at step t adds the Z observation: z * codes(t) + window code.
struct HistoryCoder {
  HistoryClass hc;
  int n_obs = 0;
  int n_actions = 0;
  int horizon = 0;

  HistoryCoder() = default;
  // Throws HistoryExplosion if any step would need more than cap atoms.
  HistoryCoder(HistoryClass hc, int n_obs, int n_actions, int horizon,
               std::int64_t cap = 1000000);

  std::int64_t base() const { return static_cast<std::int64_t>(n_obs) * n_actions; }
  std::int64_t codes(int t) const { return codes_[t]; }
  std::int64_t atoms(int t) const { return codes_[t] * n_obs; }

  // Window code at step t for a trajectory given obs[] and actions a[] (0-based steps).
  std::int64_t window_code(int t, const int* obs, const int* actions) const;

  // Transition of a full atom (z, code) at step t after (o, a) is appended.
  void advance(int t, int z, std::int64_t code, int o, int a, int& z_next,
               std::int64_t& code_next) const;

 private:
  std::vector<std::int64_t> codes_;
};

}  // namespace p3o
