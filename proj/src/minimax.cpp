#include "p3o/minimax.hpp"

#include <cmath>

#include "p3o/errors.hpp"

namespace p3o {

FeatureMap FeatureMap::one_hot(int n_obs, int n_actions, double L_b, double L_g, double M_B,
                               double M_G) {
  FeatureMap fm;
  fm.n_obs = n_obs;
  fm.n_actions = n_actions;
  fm.d = n_obs * n_actions;
  fm.phi = Eigen::MatrixXd::Identity(fm.d, fm.d);
  fm.nu = Eigen::MatrixXd::Identity(fm.d, fm.d);
  fm.L_b = L_b;
  fm.L_g = L_g;
  fm.M_B = M_B;
  fm.M_G = M_G;
  return fm;
}

Eigen::MatrixXd FeatureMap::table(const Eigen::VectorXd& theta) const {
  Eigen::MatrixXd t(n_actions, n_obs);
  for (int a = 0; a < n_actions; ++a)
    for (int w = 0; w < n_obs; ++w) t(a, w) = phi.row(row(a, w)).dot(theta);
  return t;
}

Eigen::VectorXd FeatureMap::theta_from_table(const Eigen::MatrixXd& b) const {
  Eigen::VectorXd target(phi.rows());
  for (int a = 0; a < n_actions; ++a)
    for (int w = 0; w < n_obs; ++w) target(row(a, w)) = b(a, w);
  return phi.completeOrthogonalDecomposition().solve(target);
}

Eigen::VectorXd FeatureMap::phi_sum(int w) const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(d);
  for (int a = 0; a < n_actions; ++a) s += phi.row(row(a, w)).transpose();
  return s;
}

void validate(const FeatureMap& fm) {
  const Eigen::Index rows = static_cast<Eigen::Index>(fm.n_obs) * fm.n_actions;
  if (fm.d < 1 || fm.phi.rows() != rows || fm.nu.rows() != rows || fm.phi.cols() != fm.d ||
      fm.nu.cols() != fm.d)
    throw ValidationError("features", "wrong shape");
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (fm.phi.row(r).norm() > 1.0 + 1e-12) throw ValidationError("features.phi", "row norm above 1");
    if (fm.nu.row(r).norm() > 1.0 + 1e-12) throw ValidationError("features.nu", "row norm above 1");
  }
  if (!(fm.L_b > 0 && fm.L_g > 0 && fm.M_B > 0 && fm.M_G > 0))
    throw ValidationError("features", "bounds must be positive");
}

double bridge_sup(const FeatureMap& fm, const Eigen::VectorXd& theta) {
  double sup = 0.0;
  for (int w = 0; w < fm.n_obs; ++w) sup = std::max(sup, std::abs(fm.phi_sum(w).dot(theta)));
  return sup;
}

namespace {

// Observation sequence obs[0] = O_0, obs[t+1] = O at step t, plus actions.
struct Unrolled {
  std::vector<int> obs;
  std::vector<int> act;
  explicit Unrolled(const Trajectory& tr) : obs(tr.steps.size() + 1), act(tr.steps.size()) {
    obs[0] = tr.o0;
    for (size_t t = 0; t < tr.steps.size(); ++t) {
      obs[t + 1] = tr.steps[t].o;
      act[t] = tr.steps[t].a;
    }
  }
};

void check_inputs(const OfflineDataset& data, const TargetPolicy& pi, const FeatureMap& fm, int t) {
  if (data.horizon != pi.horizon()) throw ValidationError("dataset.horizon", "does not match policy");
  if (fm.n_obs != pi.n_obs() || fm.n_actions != pi.n_actions())
    throw ValidationError("features", "shape does not match policy");
  if (t < 0 || t >= data.horizon) throw ValidationError("step", "out of range");
  if (data.trajectories.empty()) throw ValidationError("dataset", "empty");
}

}  // namespace

std::vector<ResidualSample> residuals(const OfflineDataset& data, const TargetPolicy& pi,
                                      const FeatureMap& fm, const Eigen::VectorXd& theta,
                                      const Eigen::VectorXd& theta_next, int t, double gamma) {
  check_inputs(data, pi, fm, t);
  const bool last = t + 1 == data.horizon;
  if (last && theta_next.size() != 0 && theta_next.norm() != 0.0)
    throw ValidationError("theta_next", "must be the zero continuation at the last step");
  const HistoryCoder& coder = pi.coder();
  std::vector<ResidualSample> out;
  out.reserve(data.size());
  for (const auto& tr : data.trajectories) {
    const Unrolled u(tr);
    const int a = u.act[t], w = u.obs[t + 1];
    const double p = pi.probs(t, w, coder.window_code(t, u.obs.data(), u.act.data()))[a];
    double cont = 0.0;
    if (!last && theta_next.size() != 0) cont = fm.phi_sum(u.obs[t + 2]).dot(theta_next);
    ResidualSample rs;
    rs.varsigma = fm.phi.row(fm.row(a, w)).dot(theta) - tr.steps[t].r * p - gamma * cont * p;
    rs.a = a;
    rs.z = u.obs[pi.history_class().z_index(t)];
    out.push_back(rs);
  }
  return out;
}

namespace {
double ridge_for(const Eigen::MatrixXd& sigma, double ridge_scale) {
  return sigma.rows() ? ridge_scale * sigma.trace() / static_cast<double>(sigma.rows()) : 0.0;
}
Eigen::MatrixXd add_ridge(Eigen::MatrixXd sigma, double ridge) {
  sigma.diagonal().array() += ridge;
  return sigma;
}
}  // namespace

DualSolver::DualSolver(const Eigen::MatrixXd& sigma, double lambda, double L_g, double ridge_scale)
    : sigma_reg_(add_ridge(sigma, ridge_for(sigma, ridge_scale))),
      lambda_(lambda),
      L_g_(L_g),
      ridge_(ridge_for(sigma, ridge_scale)),
      qp_(2.0 * lambda * sigma_reg_) {
  if (!(lambda > 0.0)) throw ValidationError("lambda", "must be positive");
  const double top = qp_.max_eigenvalue();
  if (!(top > 0.0) || qp_.min_eigenvalue() <= 1e-14 * top)
    throw DegenerateDual("dual covariance is numerically singular");
}

InnerMaxResult DualSolver::solve(const Eigen::VectorXd& u) const {
  const BallQpResult r = qp_.solve(u, L_g_);
  InnerMaxResult out;
  out.omega = r.x;
  out.constraint_active = r.active;
  out.ridge = ridge_;
  // Concave objective with 0 feasible, so the maximum is >= 0 up to rounding.
  out.value = std::max(0.0, u.dot(r.x) - lambda_ * r.x.dot(sigma_reg_ * r.x));
  return out;
}

InnerMaxResult inner_max(const Eigen::VectorXd& u, const Eigen::MatrixXd& sigma, double lambda,
                         double L_g, double ridge_scale) {
  return DualSolver(sigma, lambda, L_g, ridge_scale).solve(u);
}

InnerMaxResult inner_max(const std::vector<ResidualSample>& samples, const FeatureMap& fm,
                         double lambda, double L_g, double ridge_scale) {
  if (samples.empty()) throw ValidationError("samples", "need at least one sample");
  Eigen::VectorXd u = Eigen::VectorXd::Zero(fm.d);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(fm.d, fm.d);
  for (const auto& s : samples) {
    const Eigen::VectorXd v = fm.nu.row(fm.row(s.a, s.z)).transpose();
    u += s.varsigma * v;
    sigma += v * v.transpose();
  }
  const double n = static_cast<double>(samples.size());
  return inner_max(u / n, sigma / n, lambda, L_g, ridge_scale);
}

Eigen::VectorXd StepMoments::u(const Eigen::VectorXd& theta, const Eigen::VectorXd& theta_next,
                               double gamma) const {
  Eigen::VectorXd out = A * theta - c;
  if (theta_next.size() != 0) out.noalias() -= gamma * (D * theta_next);
  return out;
}

StepMoments step_moments(const OfflineDataset& data, const TargetPolicy& pi, const FeatureMap& fm,
                         int t) {
  check_inputs(data, pi, fm, t);
  const int O = fm.n_obs, A = fm.n_actions;
  const bool last = t + 1 == data.horizon;
  const HistoryCoder& coder = pi.coder();
  const int zi = pi.history_class().z_index(t);
  // Cell-level tallies; features are applied once at the end.
  Eigen::MatrixXd cnt = Eigen::MatrixXd::Zero(A, O);      // (a, z)
  Eigen::MatrixXd rew = Eigen::MatrixXd::Zero(A, O);      // (a, z): sum R pi
  Eigen::MatrixXd cntw = Eigen::MatrixXd::Zero(A * O, O); // (a, z) x w
  Eigen::MatrixXd cont = Eigen::MatrixXd::Zero(A * O, O); // (a, z) x w_next: sum pi
  for (const auto& tr : data.trajectories) {
    const Unrolled u(tr);
    const int a = u.act[t], w = u.obs[t + 1], z = u.obs[zi];
    const double p = pi.probs(t, w, coder.window_code(t, u.obs.data(), u.act.data()))[a];
    cnt(a, z) += 1.0;
    rew(a, z) += tr.steps[t].r * p;
    cntw(a * O + z, w) += 1.0;
    if (!last) cont(a * O + z, u.obs[t + 2]) += p;
  }
  const double n = static_cast<double>(data.size());
  StepMoments m;
  m.t = t;
  m.n = data.size();
  m.sigma = Eigen::MatrixXd::Zero(fm.d, fm.d);
  m.A = Eigen::MatrixXd::Zero(fm.d, fm.d);
  m.D = Eigen::MatrixXd::Zero(fm.d, fm.d);
  m.c = Eigen::VectorXd::Zero(fm.d);
  std::vector<Eigen::VectorXd> psum(O);
  for (int w = 0; w < O; ++w) psum[w] = fm.phi_sum(w);
  for (int a = 0; a < A; ++a)
    for (int z = 0; z < O; ++z) {
      if (cnt(a, z) == 0.0) continue;
      const Eigen::VectorXd v = fm.nu.row(fm.row(a, z)).transpose();
      m.sigma += (cnt(a, z) / n) * v * v.transpose();
      m.c += (rew(a, z) / n) * v;
      for (int w = 0; w < O; ++w) {
        const double k = cntw(a * O + z, w);
        if (k != 0.0) m.A += (k / n) * v * fm.phi.row(fm.row(a, w));
        const double q = cont(a * O + z, w);
        if (q != 0.0) m.D += (q / n) * v * psum[w].transpose();
      }
    }
  return m;
}

std::vector<StepMoments> chain_moments(const OfflineDataset& data, const TargetPolicy& pi,
                                       const FeatureMap& fm) {
  std::vector<StepMoments> out;
  for (int t = 0; t < data.horizon; ++t) out.push_back(step_moments(data, pi, fm, t));
  return out;
}

Eigen::VectorXd head_functional(const OfflineDataset& data, const FeatureMap& fm) {
  if (data.trajectories.empty()) throw ValidationError("dataset", "empty");
  Eigen::VectorXd cnt = Eigen::VectorXd::Zero(fm.n_obs);
  for (const auto& tr : data.trajectories) cnt[tr.steps.at(0).o] += 1.0;
  Eigen::VectorXd f = Eigen::VectorXd::Zero(fm.d);
  for (int w = 0; w < fm.n_obs; ++w) f += (cnt[w] / static_cast<double>(data.size())) * fm.phi_sum(w);
  return f;
}

StepFitter::StepFitter(const StepMoments& mom, const FeatureMap& fm, const FitConfig& cfg)
    : mom_(mom),
      fm_(fm),
      cfg_(cfg),
      dual_(mom.sigma, cfg.lambda, fm.L_g, cfg.ridge_scale),
      primal_(Eigen::MatrixXd::Identity(1, 1)) {
  // (Sigma + ridge)^-1 through a Cholesky factor of the regularised matrix.
  Eigen::LLT<Eigen::MatrixXd> llt(dual_.sigma_reg());
  if (llt.info() != Eigen::Success) throw DegenerateDual("dual covariance not positive definite");
  AtW_ = llt.solve(mom.A).transpose();
  Eigen::MatrixXd N = AtW_ * mom.A;
  N = 0.5 * (N + N.transpose());
  const double tr = N.trace();
  if (!(tr > 0.0)) throw DegeneratePrimal("primal normal matrix is zero at step " + std::to_string(mom.t));
  primal_ridge_ = cfg.ridge_scale * tr / static_cast<double>(N.rows());
  N.diagonal().array() += primal_ridge_;
  N_ = N;
  primal_ = BallQp(2.0 * N);
  if (primal_.min_eigenvalue() <= 1e-14 * primal_.max_eigenvalue())
    throw DegeneratePrimal("primal normal matrix singular beyond ridge at step " +
                           std::to_string(mom.t));
}

Eigen::MatrixXd StepFitter::sensitivity() const {
  return cfg_.gamma * N_.ldlt().solve(AtW_ * mom_.D);
}

InnerMaxResult StepFitter::evaluate(const Eigen::VectorXd& theta,
                                    const Eigen::VectorXd& theta_next) const {
  return dual_.solve(mom_.u(theta, theta_next, cfg_.gamma));
}

StepFit StepFitter::fit(const Eigen::VectorXd& theta_next) const {
  Eigen::VectorXd c_eff = mom_.c;
  if (theta_next.size() != 0) c_eff.noalias() += cfg_.gamma * (mom_.D * theta_next);
  const BallQpResult r = primal_.solve(2.0 * (AtW_ * c_eff), fm_.L_b);
  StepFit f;
  f.t = mom_.t;
  f.theta = r.x;
  f.primal_active = r.active;
  f.primal_ridge = primal_ridge_;
  const InnerMaxResult im = evaluate(f.theta, theta_next);
  f.m_hat = im.value;
  f.dual_active = im.constraint_active;
  f.dual_ridge = im.ridge;
  f.sup_sum = bridge_sup(fm_, f.theta);
  f.mb_violation = f.sup_sum > fm_.M_B;
  return f;
}

StepFit fit_step(const StepMoments& mom, const Eigen::VectorXd& theta_next, const FeatureMap& fm,
                 const FitConfig& cfg) {
  return StepFitter(mom, fm, cfg).fit(theta_next);
}

StepFit fit_step(const OfflineDataset& data, const TargetPolicy& pi, const FeatureMap& fm,
                 const Eigen::VectorXd& theta_next, int t, const FitConfig& cfg) {
  return fit_step(step_moments(data, pi, fm, t), theta_next, fm, cfg);
}

MinimaxFit fit_chain(const std::vector<StepMoments>& moms, const FeatureMap& fm,
                     const FitConfig& cfg) {
  MinimaxFit out;
  out.steps.resize(moms.size());
  Eigen::VectorXd next;  // zero continuation after the last step
  for (int t = static_cast<int>(moms.size()) - 1; t >= 0; --t) {
    try {
      out.steps[t] = fit_step(moms[t], next, fm, cfg);
    } catch (const DegenerateDual& e) {
      throw DegenerateDual(std::string(e.what()) + " (step " + std::to_string(t) + ")");
    }
    next = out.steps[t].theta;
  }
  return out;
}

MinimaxFit fit_chain(const OfflineDataset& data, const TargetPolicy& pi, const FeatureMap& fm,
                     const FitConfig& cfg) {
  return fit_chain(chain_moments(data, pi, fm), fm, cfg);
}

double PopulationResidual::rmse() const {
  double L = 0.0;
  for (Eigen::Index i = 0; i < num.size(); ++i)
    if (den(i) > 0.0) L += num(i) * num(i) / den(i);
  return L;
}

Eigen::MatrixXd PopulationResidual::ell() const {
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(num.rows(), num.cols());
  for (Eigen::Index i = 0; i < num.size(); ++i)
    if (den(i) > 0.0) e(i) = num(i) / den(i);
  return e;
}

PopulationResidual population_residual(const TabularPOMDP& m, const BehaviorPolicy& b,
                                       const TargetPolicy& pi, const Occupancy& occ,
                                       const Eigen::MatrixXd& b_t, const Eigen::MatrixXd& b_next,
                                       int t) {
  const int S = m.n_states, O = m.n_obs, A = m.n_actions;
  if (!(occ.coder.hc == pi.history_class()))
    throw ValidationError("occupancy", "history class differs from policy");
  Eigen::VectorXd v_next = Eigen::VectorXd::Zero(S);
  if (t + 1 < m.horizon && b_next.size() != 0)
    for (int s = 0; s < S; ++s)
      for (int o = 0; o < O; ++o) v_next[s] += m.emit_row(t + 1, s)[o] * b_next.col(o).sum();
  PopulationResidual pr;
  pr.num = Eigen::MatrixXd::Zero(A, O);
  pr.den = Eigen::MatrixXd::Zero(A, O);
  const auto& law = occ.steps[t];
  for (Eigen::Index col = 0; col < law.mass.cols(); ++col) {
    const int z = static_cast<int>(col / law.codes);
    const std::int64_t code = col % law.codes;
    for (int s = 0; s < S; ++s) {
      const double ms = law.mass(s, col);
      if (ms == 0.0) continue;
      for (int a = 0; a < A; ++a) {
        double k = m.R(t, s, a);
        const double* tr = m.trans_row(t, s, a);
        for (int s2 = 0; s2 < S; ++s2) k += m.gamma * tr[s2] * v_next[s2];
        for (int o = 0; o < O; ++o) {
          const double w = ms * m.emit_row(t, s)[o] * b.row(t, s)[a];
          if (w == 0.0) continue;
          pr.den(a, z) += w;
          pr.num(a, z) += w * (b_t(a, o) - pi.probs_unchecked(t, o, code)[a] * k);
        }
      }
    }
  }
  return pr;
}

double population_rmse(const TabularPOMDP& m, const BehaviorPolicy& b, const TargetPolicy& pi,
                       const Eigen::MatrixXd& b_t, const Eigen::MatrixXd& b_next, int t,
                       std::int64_t cap) {
  const Occupancy occ = occupancy(m, b, pi.history_class(), cap);
  return population_residual(m, b, pi, occ, b_t, b_next, t).rmse();
}

InnerMaxResult population_inner_max(const PopulationResidual& pr, const FeatureMap& fm,
                                    double lambda, double L_g, double ridge_scale) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(fm.d);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(fm.d, fm.d);
  for (int a = 0; a < fm.n_actions; ++a)
    for (int z = 0; z < fm.n_obs; ++z) {
      const Eigen::VectorXd v = fm.nu.row(fm.row(a, z)).transpose();
      u += pr.num(a, z) * v;
      sigma += pr.den(a, z) * v * v.transpose();
    }
  return inner_max(u, sigma, lambda, L_g, ridge_scale);
}

}  // namespace p3o
