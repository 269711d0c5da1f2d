#include "p3o/occupancy.hpp"

#include "p3o/errors.hpp"

namespace p3o {

Eigen::MatrixXd StepLaw::state_window() const {
  const auto n_obs = mass.cols() / codes;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(mass.rows(), codes);
  for (Eigen::Index z = 0; z < n_obs; ++z) out += mass.middleCols(z * codes, codes);
  return out;
}

namespace {

// actor(t, s, o, code) -> pointer to |A| action probabilities.
template <class Actor>
Occupancy forward(const TabularPOMDP& m, const HistoryClass& hc, std::int64_t cap, Actor actor) {
  Occupancy occ;
  occ.coder = HistoryCoder(hc, m.n_obs, m.n_actions, m.horizon, cap);
  const auto& coder = occ.coder;
  const int S = m.n_states, O = m.n_obs, A = m.n_actions, H = m.horizon;
  occ.steps.resize(H);

  auto& first = occ.steps[0];
  first.codes = coder.codes(0);
  first.mass = Eigen::MatrixXd::Zero(S, O * first.codes);
  for (int s = 0; s < S; ++s)
    for (int z = 0; z < O; ++z) first.mass(s, z) = m.mu1[s] * m.emit0_row(s)[z];

  for (int t = 0; t + 1 < H; ++t) {
    const auto& cur = occ.steps[t];
    auto& nxt = occ.steps[t + 1];
    nxt.codes = coder.codes(t + 1);
    nxt.mass = Eigen::MatrixXd::Zero(S, O * nxt.codes);
    for (Eigen::Index col = 0; col < cur.mass.cols(); ++col) {
      const int z = static_cast<int>(col / cur.codes);
      const std::int64_t code = col % cur.codes;
      for (int s = 0; s < S; ++s) {
        const double ms = cur.mass(s, col);
        if (ms == 0.0) continue;
        for (int o = 0; o < O; ++o) {
          const double mo = ms * m.emit_row(t, s)[o];
          if (mo == 0.0) continue;
          const double* pa = actor(t, s, o, code);
          for (int a = 0; a < A; ++a) {
            const double ma = mo * pa[a];
            if (ma == 0.0) continue;
            int z2;
            std::int64_t code2;
            coder.advance(t, z, code, o, a, z2, code2);
            const Eigen::Index col2 = z2 * nxt.codes + code2;
            const double* tr = m.trans_row(t, s, a);
            for (int s2 = 0; s2 < S; ++s2) nxt.mass(s2, col2) += ma * tr[s2];
          }
        }
      }
    }
  }
  return occ;
}

}  // namespace

Occupancy occupancy(const TabularPOMDP& m, const BehaviorPolicy& b, const HistoryClass& hc,
                    std::int64_t cap) {
  return forward(m, hc, cap, [&](int t, int s, int, std::int64_t) { return b.row(t, s); });
}

Occupancy occupancy(const TabularPOMDP& m, const TargetPolicy& pi, std::int64_t cap) {
  if (pi.n_obs() != m.n_obs || pi.n_actions() != m.n_actions || pi.horizon() != m.horizon)
    throw ValidationError("policy", "shape does not match model");
  return forward(m, pi.history_class(), cap, [&](int t, int, int o, std::int64_t code) {
    return pi.probs_unchecked(t, o, code);
  });
}

bool RankDiagnostics::all_ok() const {
  for (bool ok : rank_ok)
    if (!ok) return false;
  return true;
}

int numerical_rank(const Eigen::VectorXd& sv, double rank_tol) {
  if (sv.size() == 0) return 0;
  const double top = sv.maxCoeff();
  if (top <= 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > rank_tol * top) ++r;
  return r;
}

std::vector<Eigen::VectorXd> latent_marginals(const TabularPOMDP& m, const BehaviorPolicy& b) {
  const int S = m.n_states, A = m.n_actions;
  std::vector<Eigen::VectorXd> out(m.horizon);
  out[0] = Eigen::Map<const Eigen::VectorXd>(m.mu1.data(), S);
  for (int t = 0; t + 1 < m.horizon; ++t) {
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(S, S);  // P(s' | s) under behavior
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a)
        for (int s2 = 0; s2 < S; ++s2) P(s, s2) += b.row(t, s)[a] * m.trans_row(t, s, a)[s2];
    out[t + 1] = P.transpose() * out[t];
  }
  return out;
}

RankDiagnostics rank_diagnostics(const TabularPOMDP& m, const BehaviorPolicy& b, double rank_tol) {
  const int S = m.n_states, O = m.n_obs, A = m.n_actions, H = m.horizon;
  RankDiagnostics rd;
  rd.rank_tol = rank_tol;
  const auto marg = latent_marginals(m, b);
  for (int t = 0; t < H; ++t) {
    Eigen::MatrixXd fwd(S, O);
    for (int s = 0; s < S; ++s)
      for (int o = 0; o < O; ++o) fwd(s, o) = m.emit_row(t, s)[o];
    Eigen::MatrixXd bwd = Eigen::MatrixXd::Zero(S, O);
    if (t == 0) {
      for (int s = 0; s < S; ++s)
        for (int o = 0; o < O; ++o) bwd(s, o) = m.emit0_row(s)[o];
    } else {
      for (int sp = 0; sp < S; ++sp)
        for (int o = 0; o < O; ++o)
          for (int a = 0; a < A; ++a)
            for (int s = 0; s < S; ++s)
              bwd(s, o) += marg[t - 1][sp] * m.emit_row(t - 1, sp)[o] * b.row(t - 1, sp)[a] *
                           m.trans_row(t - 1, sp, a)[s];
      for (int s = 0; s < S; ++s)
        if (marg[t][s] > 0.0) bwd.row(s) /= marg[t][s];
    }
    rd.forward_sv.push_back(Eigen::JacobiSVD<Eigen::MatrixXd>(fwd).singularValues());
    rd.backward_sv.push_back(Eigen::JacobiSVD<Eigen::MatrixXd>(bwd).singularValues());
    rd.rank_ok.push_back(numerical_rank(rd.forward_sv.back(), rank_tol) == S &&
                         numerical_rank(rd.backward_sv.back(), rank_tol) == S);
  }
  return rd;
}

}  // namespace p3o
