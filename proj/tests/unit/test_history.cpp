#include <doctest.h>

#include "brute.hpp"
#include "p3o/errors.hpp"
#include "p3o/history.hpp"

using namespace p3o;

TEST_SUITE("history") {

TEST_CASE("window sizes per class") {
  const auto r = HistoryClass::reactive();
  const auto f = HistoryClass::finite(2);
  const auto u = HistoryClass::full();
  for (int t = 0; t < 5; ++t) {
    CHECK(r.window(t) == 0);
    CHECK(f.window(t) == std::min(t, 2));
    CHECK(u.window(t) == t);
    CHECK(r.z_index(t) == t);
    CHECK(u.z_index(t) == 0);
  }
  CHECK(f.z_index(4) == 2);
  CHECK_THROWS_AS(HistoryClass::finite(0), ValidationError);
}

TEST_CASE("negative controls use paper indexing") {
  // Reactive: Z_h = O_{h-1}, W_h = O_h.
  auto nc = negative_controls(HistoryClass::reactive(), 1);
  CHECK(nc.z_obs == 0);
  CHECK(nc.w_obs == 1);
  nc = negative_controls(HistoryClass::reactive(), 3);
  CHECK(nc.z_obs == 2);
  // Finite window k: Z_h = O_{max(h-1-k, 0)}.
  nc = negative_controls(HistoryClass::finite(1), 3);
  CHECK(nc.z_obs == 1);
  CHECK(nc.w_obs == 3);
  // Full history: Z_h = O_0 always.
  nc = negative_controls(HistoryClass::full(), 4);
  CHECK(nc.z_obs == 0);
}

TEST_CASE("names round trip") {
  for (const auto& hc : {HistoryClass::reactive(), HistoryClass::finite(3), HistoryClass::full()})
    CHECK(HistoryClass::parse(hc.name()) == hc);
  CHECK(HistoryClass::finite(3).name() == "finite:3");
  CHECK_THROWS_AS(HistoryClass::parse("finite:x"), ValidationError);
  CHECK_THROWS_AS(HistoryClass::parse("partial"), ValidationError);
}

TEST_CASE("coder matches an explicit window walk") {
  const int O = 3, A = 2, H = 4;
  for (const auto& hc : {HistoryClass::reactive(), HistoryClass::finite(2), HistoryClass::full()}) {
    HistoryCoder coder(hc, O, A, H);
    // Every observation/action sequence of length H.
    std::vector<int> obs(H + 1), acts(H);
    const int total = 1 << 12;
    for (int mask = 0; mask < total; ++mask) {
      int m = mask;
      for (int i = 0; i <= H; ++i) { obs[i] = m % O; m /= O; }
      for (int i = 0; i < H; ++i) { acts[i] = m % A; m /= A; }
      int z = obs[hc.z_index(0)];
      std::int64_t code = coder.window_code(0, obs.data(), acts.data());
      for (int t = 0; t < H; ++t) {
        REQUIRE(code == brute::code_of(hc, t, obs, acts, O, A));
        REQUIRE(code < coder.codes(t));
        REQUIRE(z == obs[t - brute::window_of(hc, t)]);
        if (t + 1 < H) coder.advance(t, z, code, obs[t + 1], acts[t], z, code);
      }
    }
  }
}

TEST_CASE("support cap raises HistoryExplosion") {
  CHECK_THROWS_AS(HistoryCoder(HistoryClass::full(), 6, 3, 8, 1000000), HistoryExplosion);
  CHECK_NOTHROW(HistoryCoder(HistoryClass::finite(1), 6, 3, 8, 1000000));
}

}
