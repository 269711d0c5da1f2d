#include "p3o/oracle.hpp"

#include <cmath>

#include "p3o/errors.hpp"

namespace p3o {

namespace {

void check_shapes(const TabularPOMDP& m, const BehaviorPolicy& b, const TargetPolicy& pi) {
  validate(b, &m);
  if (pi.n_obs() != m.n_obs || pi.n_actions() != m.n_actions || pi.horizon() != m.horizon)
    throw ValidationError("policy", "shape does not match model");
}

struct Solved {
  Eigen::MatrixXd x;
  double residual;
};

// Minimum-norm least squares for every column of rhs; residual is the worst
// column's ||Mx - r|| / max(1, ||r||).
Solved min_norm_solve(const Eigen::MatrixXd& M, const Eigen::MatrixXd& rhs) {
  if (M.rows() == 0) return {Eigen::MatrixXd::Zero(M.cols(), rhs.cols()), 0.0};
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(M);
  Solved out{cod.solve(rhs), 0.0};
  for (Eigen::Index c = 0; c < rhs.cols(); ++c) {
    const double r = (M * out.x.col(c) - rhs.col(c)).norm() / std::max(1.0, rhs.col(c).norm());
    out.residual = std::max(out.residual, r);
  }
  return out;
}

void check_residual(double residual, int t, const BridgeOptions& opt, const char* what) {
  if (residual > opt.solve_tol && !opt.allow_inconsistent)
    throw BridgeError(BridgeFailure::Inconsistent, t,
                      std::string(what) + " system inconsistent at step " + std::to_string(t) +
                          " (relative residual " + std::to_string(residual) + ")");
}

}  // namespace

double true_value(const TabularPOMDP& m, const TargetPolicy& pi, std::int64_t cap) {
  const Occupancy occ = occupancy(m, pi, cap);
  const int S = m.n_states, O = m.n_obs, A = m.n_actions;
  double J = 0.0, disc = 1.0;
  for (int t = 0; t < m.horizon; ++t) {
    const auto& law = occ.steps[t];
    const Eigen::MatrixXd sw = law.state_window();
    double step = 0.0;
    for (int s = 0; s < S; ++s)
      for (std::int64_t code = 0; code < law.codes; ++code) {
        const double ms = sw(s, code);
        if (ms == 0.0) continue;
        for (int o = 0; o < O; ++o) {
          const double* p = pi.probs_unchecked(t, o, code);
          double r = 0.0;
          for (int a = 0; a < A; ++a) r += p[a] * m.R(t, s, a);
          step += ms * m.emit_row(t, s)[o] * r;
        }
      }
    J += disc * step;
    disc *= m.gamma;
  }
  return J;
}

double bridge_functional(const TabularPOMDP& m, const Eigen::MatrixXd& b1) {
  double F = 0.0;
  for (int s = 0; s < m.n_states; ++s)
    for (int o = 0; o < m.n_obs; ++o) F += m.mu1[s] * m.emit_row(0, s)[o] * b1.col(o).sum();
  return F;
}

ValueBridgeExact solve_value_bridge(const TabularPOMDP& m, const BehaviorPolicy& b,
                                    const TargetPolicy& pi, const BridgeOptions& opt) {
  check_shapes(m, b, pi);
  const RankDiagnostics rd = rank_diagnostics(m, b, opt.rank_tol);
  for (int t = 0; t < m.horizon; ++t)
    if (!rd.rank_ok[t])
      throw BridgeError(BridgeFailure::RankDeficient, t,
                        "emission rank condition fails at step " + std::to_string(t));

  const Occupancy occ = occupancy(m, b, pi.history_class(), opt.cap);
  const int S = m.n_states, O = m.n_obs, A = m.n_actions, H = m.horizon;
  ValueBridgeExact out;
  out.b.resize(H);
  out.residual.resize(H);
  Eigen::VectorXd v_next = Eigen::VectorXd::Zero(S);  // V_{t+1}(s') implied by b_{t+1}

  for (int t = H - 1; t >= 0; --t) {
    const auto& law = occ.steps[t];
    const Eigen::MatrixXd sw = law.state_window();
    Eigen::MatrixXd table = Eigen::MatrixXd::Zero(A, O);
    double worst = 0.0;
    for (int a = 0; a < A; ++a) {
      std::vector<std::pair<int, std::int64_t>> rows;
      for (int s = 0; s < S; ++s) {
        if (b.row(t, s)[a] <= 0.0) continue;
        for (std::int64_t code = 0; code < law.codes; ++code)
          if (sw(s, code) > 0.0) rows.emplace_back(s, code);
      }
      Eigen::MatrixXd M(rows.size(), O);
      Eigen::VectorXd rhs(rows.size());
      for (size_t r = 0; r < rows.size(); ++r) {
        const auto [s, code] = rows[r];
        double p = 0.0;  // P_pi(A = a | S = s, window = code)
        for (int o = 0; o < O; ++o) {
          M(r, o) = m.emit_row(t, s)[o];
          p += m.emit_row(t, s)[o] * pi.probs_unchecked(t, o, code)[a];
        }
        double k = m.R(t, s, a);
        const double* tr = m.trans_row(t, s, a);
        for (int s2 = 0; s2 < S; ++s2) k += m.gamma * tr[s2] * v_next[s2];
        rhs[r] = p * k;
      }
      const Solved sol = min_norm_solve(M, rhs);
      table.row(a) = sol.x.col(0).transpose();
      worst = std::max(worst, sol.residual);
    }
    check_residual(worst, t, opt, "value bridge");
    out.b[t] = table;
    out.residual[t] = worst;
    Eigen::VectorXd v(S);
    for (int s = 0; s < S; ++s) {
      v[s] = 0.0;
      for (int o = 0; o < O; ++o) v[s] += m.emit_row(t, s)[o] * table.col(o).sum();
    }
    v_next = v;
  }
  return out;
}

WeightBridgeExact solve_weight_bridge(const TabularPOMDP& m, const BehaviorPolicy& b,
                                      const TargetPolicy& pi, const BridgeOptions& opt) {
  check_shapes(m, b, pi);
  const Occupancy beh = occupancy(m, b, pi.history_class(), opt.cap);
  const Occupancy tgt = occupancy(m, pi, opt.cap);
  const int S = m.n_states, O = m.n_obs, A = m.n_actions, H = m.horizon;
  WeightBridgeExact out;
  out.q.resize(H);
  out.residual.resize(H);

  for (int t = 0; t < H; ++t) {
    const auto& law = beh.steps[t];
    const std::int64_t codes = law.codes;
    const Eigen::MatrixXd pb = law.state_window();
    const Eigen::MatrixXd pt = tgt.steps[t].state_window();

    // Backward rank condition on P^b(Z_t | S_t).
    Eigen::MatrixXd zs = Eigen::MatrixXd::Zero(S, O);
    for (int s = 0; s < S; ++s) {
      for (int z = 0; z < O; ++z) zs(s, z) = law.mass.middleCols(z * codes, codes).row(s).sum();
      const double ps = zs.row(s).sum();
      if (ps > 0.0) zs.row(s) /= ps;
    }
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(zs).singularValues();
    if (numerical_rank(sv, opt.rank_tol) != S)
      throw BridgeError(BridgeFailure::RankDeficient, t,
                        "backward rank condition fails at step " + std::to_string(t));

    std::vector<std::pair<int, std::int64_t>> rows;
    for (int s = 0; s < S; ++s)
      for (std::int64_t code = 0; code < codes; ++code) {
        if (pb(s, code) > 0.0)
          rows.emplace_back(s, code);
        else if (pt(s, code) > 0.0)
          out.coverage_ok = false;
      }
    Eigen::MatrixXd M(rows.size(), O);
    Eigen::MatrixXd rhs(rows.size(), A);
    for (size_t r = 0; r < rows.size(); ++r) {
      const auto [s, code] = rows[r];
      const double mu = pt(s, code) / pb(s, code);
      for (int z = 0; z < O; ++z) M(r, z) = law.mass(s, z * codes + code) / pb(s, code);
      for (int a = 0; a < A; ++a) {
        const double pa = b.row(t, s)[a];
        if (pa <= 0.0)
          throw BridgeError(BridgeFailure::ZeroBehaviorProb, t,
                            "behavior probability zero on the support at step " + std::to_string(t));
        rhs(r, a) = mu / pa;
      }
    }
    const Solved sol = min_norm_solve(M, rhs);
    check_residual(sol.residual, t, opt, "weight bridge");
    out.q[t] = sol.x.transpose();
    out.residual[t] = sol.residual;
  }
  return out;
}

IdentificationResult identification_check(const TabularPOMDP& m, const BehaviorPolicy& b,
                                          const TargetPolicy& pi, const BridgeOptions& opt) {
  IdentificationResult r;
  r.lhs = true_value(m, pi, opt.cap);
  const ValueBridgeExact vb = solve_value_bridge(m, b, pi, opt);
  r.rhs = bridge_functional(m, vb.b[0]);
  r.gap = std::abs(r.lhs - r.rhs);
  return r;
}

CoverageReport concentrability(const TabularPOMDP& m, const BehaviorPolicy& b,
                               const TargetPolicy& pi, const WeightBridgeExact& wb,
                               std::int64_t cap) {
  const Occupancy beh = occupancy(m, b, pi.history_class(), cap);
  CoverageReport rep;
  rep.finite = wb.coverage_ok;
  for (int t = 0; t < m.horizon; ++t) {
    const auto& law = beh.steps[t];
    double e = 0.0;
    for (Eigen::Index col = 0; col < law.mass.cols(); ++col) {
      const int z = static_cast<int>(col / law.codes);
      for (int s = 0; s < m.n_states; ++s) {
        const double ms = law.mass(s, col);
        if (ms == 0.0) continue;
        for (int a = 0; a < m.n_actions; ++a) {
          const double q = wb.q[t](a, z);
          e += ms * b.row(t, s)[a] * q * q;
        }
      }
    }
    rep.per_step.push_back(e);
    rep.finite = rep.finite && std::isfinite(e);
    rep.c_pi = std::max(rep.c_pi, e);
  }
  return rep;
}

CoverageReport concentrability(const TabularPOMDP& m, const BehaviorPolicy& b,
                               const TargetPolicy& pi, const BridgeOptions& opt) {
  return concentrability(m, b, pi, solve_weight_bridge(m, b, pi, opt), opt.cap);
}

}  // namespace p3o
