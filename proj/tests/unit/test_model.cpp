#include <doctest.h>

#include <cmath>
#include <limits>

#include "brute.hpp"
#include "p3o/errors.hpp"
#include "p3o/instances.hpp"
#include "p3o/json_io.hpp"
#include "p3o/occupancy.hpp"

using namespace p3o;

namespace {

std::string field_of(const TabularPOMDP& m) {
  try {
    validate(m);
  } catch (const ValidationError& e) {
    return e.field();
  }
  return "";
}

// Reference SVD through the eigenvalues of M'M, independent of the JacobiSVD
// the library uses.
Eigen::VectorXd singular_values_by_eig(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M.transpose() * M);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  std::sort(ev.data(), ev.data() + ev.size(), std::greater<double>());
  return ev;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("validation names the offending field") {
  TabularPOMDP m = identity_instance(2).model;
  CHECK(field_of(m).empty());
  m.trans_row(0, 1, 0)[0] -= 0.02;  // row now sums to 0.98
  CHECK(field_of(m) == "trans[0][1][0]");

  m = identity_instance(2).model;
  m.R(1, 0, 1) = 1.5;
  CHECK(field_of(m) == "reward[1][0][1]");

  m = identity_instance(2).model;
  m.emit_row(1, 0)[0] = -0.1;
  m.emit_row(1, 0)[1] = 1.1;
  CHECK(field_of(m) == "emit[1][0]");

  m = identity_instance(2).model;
  m.gamma = 0.0;
  CHECK(field_of(m) == "gamma");
}

TEST_CASE("json round trip and fingerprints") {
  const TabularPOMDP m = random_instance(3, 4, 2, 3, 11).model;
  const TabularPOMDP back = model_from_json(json::parse(to_json(m).dump()));
  CHECK(back == m);
  CHECK(fingerprint(back) == fingerprint(m));
  TabularPOMDP other = m;
  other.R(0, 0, 0) = 0.5 * other.R(0, 0, 0) + 0.25;
  CHECK(fingerprint(other) != fingerprint(m));
}

TEST_CASE("emit0 defaults to the first emission table") {
  json j = to_json(identity_instance(2).model);
  j.erase("emit0");
  const TabularPOMDP m = model_from_json(j);
  for (int s = 0; s < m.n_states; ++s)
    for (int o = 0; o < m.n_obs; ++o) CHECK(m.emit0_row(s)[o] == m.emit_row(0, s)[o]);
}

TEST_CASE("non-finite and missing fields are format errors") {
  json j = to_json(identity_instance(2).model);
  j["mu1"][0] = std::numeric_limits<double>::quiet_NaN();  // dumps as null
  CHECK_THROWS_AS(model_from_json(json::parse(j.dump())), FormatError);
  j = to_json(identity_instance(2).model);
  j.erase("trans");
  CHECK_THROWS_AS(model_from_json(j), FormatError);
}

TEST_CASE("occupancy at the first step is mu1") {
  const Instance in = random_instance(3, 3, 2, 1, 5);
  const Occupancy occ = occupancy(in.model, in.behavior, HistoryClass::reactive());
  const Eigen::VectorXd p = occ.steps[0].state_marginal();
  for (int s = 0; s < 3; ++s) CHECK(p[s] == doctest::Approx(in.model.mu1[s]).epsilon(1e-14));
}

TEST_CASE("occupancy agrees with trajectory enumeration") {
  const Instance in = random_instance(2, 3, 2, 3, 21);
  for (const auto& hc : {HistoryClass::reactive(), HistoryClass::finite(1), HistoryClass::full()}) {
    const Occupancy occ = occupancy(in.model, in.behavior, hc);
    for (int t = 0; t < in.model.horizon; ++t) {
      const auto laws = brute::step_laws(in.model, brute::behavior_actor(in.behavior), hc, t);
      const StepLaw& L = occ.steps[t];
      double total = 0.0;
      for (const auto& [key, p] : laws.scz) {
        const auto [s, code, z] = key;
        CHECK(L.mass(s, z * L.codes + code) == doctest::Approx(p).epsilon(1e-12));
        total += p;
      }
      CHECK(L.mass.sum() == doctest::Approx(total).epsilon(1e-12));
    }
  }
}

TEST_CASE("history marginal equals the plain latent recursion") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const Instance in = random_instance(3, 4, 2, 4, seed);
    const auto lat = latent_marginals(in.model, in.behavior);
    for (const auto& hc : {HistoryClass::reactive(), HistoryClass::finite(2), HistoryClass::full()}) {
      const Occupancy occ = occupancy(in.model, in.behavior, hc);
      for (int t = 0; t < in.model.horizon; ++t)
        CHECK((occ.steps[t].state_marginal() - lat[t]).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("deterministic two-state chain by hand") {
  // State 0 always moves to 1 and 1 to 0; behavior is uniform.
  TabularPOMDP m = TabularPOMDP::zeros(2, 2, 2, 3);
  m.mu1 = {0.7, 0.3};
  for (int s = 0; s < 2; ++s) {
    m.emit0_row(s)[s] = 1.0;
    for (int t = 0; t < 3; ++t) {
      m.emit_row(t, s)[s] = 1.0;
      for (int a = 0; a < 2; ++a) m.trans_row(t, s, a)[1 - s] = 1.0;
    }
  }
  validate(m);
  const auto lat = latent_marginals(m, BehaviorPolicy::uniform(3, 2, 2));
  CHECK(lat[1][0] == doctest::Approx(0.3));
  CHECK(lat[2][0] == doctest::Approx(0.7));
}

TEST_CASE("rank diagnostics") {
  const Instance id = identity_instance(3);
  const RankDiagnostics rd = rank_diagnostics(id.model, id.behavior);
  CHECK(rd.all_ok());
  for (const auto& sv : rd.forward_sv) CHECK((sv.array() - 1.0).abs().maxCoeff() <= 1e-12);

  Instance flat = identity_instance(2);
  for (int t = 0; t < 2; ++t)
    for (int s = 0; s < 2; ++s) {
      flat.model.emit_row(t, s)[0] = 1.0;
      flat.model.emit_row(t, s)[1] = 0.0;
    }
  const RankDiagnostics bad = rank_diagnostics(flat.model, flat.behavior);
  CHECK_FALSE(bad.all_ok());
  CHECK(numerical_rank(bad.forward_sv[0], 1e-8) == 1);

  const Instance r = random_instance(3, 3, 2, 2, 8);
  const RankDiagnostics rr = rank_diagnostics(r.model, r.behavior);
  CHECK(rr.all_ok());
  for (int t = 0; t < 2; ++t) {
    Eigen::MatrixXd E(3, 3);
    for (int s = 0; s < 3; ++s)
      for (int o = 0; o < 3; ++o) E(s, o) = r.model.emit_row(t, s)[o];
    const Eigen::VectorXd ref = singular_values_by_eig(E);
    CHECK(rr.forward_sv[t].minCoeff() == doctest::Approx(ref.minCoeff()).epsilon(1e-9));
  }
}

TEST_CASE("rank diagnostics ignore observation relabeling") {
  const Instance in = random_instance(3, 4, 2, 3, 17);
  Instance perm = in;
  const int order[4] = {2, 0, 3, 1};
  for (int s = 0; s < 3; ++s) {
    for (int o = 0; o < 4; ++o) perm.model.emit0_row(s)[order[o]] = in.model.emit0_row(s)[o];
    for (int t = 0; t < 3; ++t)
      for (int o = 0; o < 4; ++o) perm.model.emit_row(t, s)[order[o]] = in.model.emit_row(t, s)[o];
  }
  const RankDiagnostics a = rank_diagnostics(in.model, in.behavior);
  const RankDiagnostics b = rank_diagnostics(perm.model, perm.behavior);
  for (int t = 0; t < 3; ++t) {
    CHECK((a.forward_sv[t] - b.forward_sv[t]).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((a.backward_sv[t] - b.backward_sv[t]).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

}
