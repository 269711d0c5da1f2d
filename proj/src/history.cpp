#include "p3o/history.hpp"

#include <algorithm>
#include <climits>

#include "p3o/errors.hpp"

namespace p3o {

HistoryClass HistoryClass::finite(int k) {
  if (k < 1) throw ValidationError("history_class.k", "finite history needs k >= 1");
  return {Kind::FiniteHistory, k};
}

int HistoryClass::window(int t) const {
  switch (kind) {
    case Kind::Reactive:
      return 0;
    case Kind::FiniteHistory:
      return std::min(t, k);
    case Kind::FullHistory:
      return t;
  }
  return 0;
}

std::string HistoryClass::name() const {
  switch (kind) {
    case Kind::Reactive:
      return "reactive";
    case Kind::FiniteHistory:
      return "finite:" + std::to_string(k);
    case Kind::FullHistory:
      return "full";
  }
  return "?";
}

HistoryClass HistoryClass::parse(const std::string& s) {
  if (s == "reactive") return reactive();
  if (s == "full") return full();
  if (s.rfind("finite:", 0) == 0) {
    try {
      return finite(std::stoi(s.substr(7)));
    } catch (const std::logic_error&) {
    }
  }
  throw ValidationError("history_class", "unknown history class '" + s + "'");
}

NegativeControls negative_controls(const HistoryClass& hc, int h) {
  return {hc.z_index(h - 1), h};
}

HistoryCoder::HistoryCoder(HistoryClass hc_, int n_obs_, int n_actions_, int horizon_,
                           std::int64_t cap)
    : hc(hc_), n_obs(n_obs_), n_actions(n_actions_), horizon(horizon_) {
  codes_.resize(horizon);
  const std::int64_t b = base();
  for (int t = 0; t < horizon; ++t) {
    std::int64_t c = 1;
    for (int i = 0; i < hc.window(t); ++i) {
      if (c > cap / b) throw HistoryExplosion("history support exceeds cap at step " + std::to_string(t));
      c *= b;
    }
    if (c > cap / n_obs)
      throw HistoryExplosion("history support exceeds cap at step " + std::to_string(t));
    codes_[t] = c;
  }
}

std::int64_t HistoryCoder::window_code(int t, const int* obs, const int* actions) const {
  const int first = hc.z_index(t);  // first windowed step
  std::int64_t code = 0;
  for (int s = first; s < t; ++s) code = code * base() + obs[s + 1] * n_actions + actions[s];
  return code;
}

void HistoryCoder::advance(int t, int z, std::int64_t code, int o, int a, int& z_next,
                           std::int64_t& code_next) const {
  std::int64_t c = code * base() + o * n_actions + a;
  const std::int64_t next_codes = codes_[t + 1];
  if (hc.window(t + 1) < hc.window(t) + 1) {
    // Oldest pair leaves the window; its observation becomes the new Z.
    const std::int64_t popped = c / next_codes;
    z_next = static_cast<int>(popped / n_actions);
    code_next = c % next_codes;
  } else {
    z_next = z;
    code_next = c;
  }
}

}  // namespace p3o
