#include "p3o/pessimism.hpp"

#include <algorithm>
#include <cmath>

#include "p3o/errors.hpp"
#include "p3o/rng.hpp"

namespace p3o {

double xi_schedule(double n, double d, double H, double M_B, double M_G, double L_b, double L_pi,
                   double delta, double C1) {
  if (!(n > 0 && d > 0 && H > 0 && M_B > 0 && M_G > 0 && L_b > 0 && L_pi > 0))
    throw ValidationError("xi_schedule", "arguments must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta", "must lie in (0,1)");
  if (C1 < 0.0) throw ValidationError("c1", "must be nonnegative");
  return C1 * M_B * M_B * M_G * M_G * d * H * std::log(1.0 + L_b * L_pi * H * n / delta) / n;
}

double scheduled_xi(const P3OConfig& cfg, std::size_t n, int horizon) {
  if (cfg.xi) return *cfg.xi;
  const FeatureMap& fm = cfg.features;
  return xi_schedule(static_cast<double>(n), fm.d, horizon, fm.M_B, fm.M_G, fm.L_b, cfg.l_pi,
                     cfg.delta, cfg.c1);
}

namespace {

Eigen::VectorXd clip_to_ball(Eigen::VectorXd th, double L_b) {
  const double nrm = th.norm();
  if (nrm > L_b) th *= L_b / nrm;
  return th;
}

// Euclidean length along unit v that reaches the xi level set of the local
// quadratic model; falls back to 1 when the curvature vanishes.
double region_length(const StepFitter& f, const Eigen::VectorXd& v, double xi) {
  const double q = v.dot(f.normal_matrix() * v) / (4.0 * f.lambda());
  if (!(q > 0.0) || !(xi > 0.0)) return 1.0;
  return std::sqrt(xi / q);
}

}  // namespace

CandidateGrid make_grid(const std::vector<StepFitter>& fitters, const MinimaxFit& fit,
                        const FeatureMap& fm, const GridParams& params, double xi,
                        const Eigen::VectorXd& head,
                        const std::vector<std::vector<Eigen::VectorXd>>& injected) {
  const int H = static_cast<int>(fitters.size());
  const int levels = std::max(1, params.levels);
  // Gradient of F_hat(theta_0(theta_t)) through unconstrained refits.
  std::vector<Eigen::VectorXd> grad(H);
  if (params.directed && head.size() == fm.d) {
    grad[0] = head;
    for (int t = 1; t < H; ++t) grad[t] = fitters[t - 1].sensitivity().transpose() * grad[t - 1];
  }
  CandidateGrid g;
  g.layers.resize(H);
  g.provenance.resize(H);
  for (int t = H - 1; t >= 0; --t) {
    auto& L = g.layers[t];
    auto& P = g.provenance[t];
    const Eigen::VectorXd& fitted = fit.steps[t].theta;
    L.push_back(fitted);
    P.push_back("fitted");
    L.push_back(Eigen::VectorXd::Zero(fm.d));
    P.push_back("zero");
    if (t < static_cast<int>(injected.size()))
      for (const auto& th : injected[t]) {
        L.push_back(th);
        P.push_back("user");
      }
    if (grad[t].size() == fm.d && grad[t].norm() > 0.0) {
      // Minimizer of grad'delta over the quadratic level set, in both signs.
      const Eigen::VectorXd w = fitters[t].normal_matrix().ldlt().solve(grad[t]);
      const Eigen::VectorXd v = w / w.norm();
      const double len = params.region_scaled ? params.radius * region_length(fitters[t], v, xi)
                                              : params.radius;
      for (int j = 0; j < levels; ++j)
        for (double sign : {-1.0, 1.0}) {
          L.push_back(clip_to_ball(fitted + sign * std::ldexp(len, -j) * v, fm.L_b));
          P.push_back("directed");
        }
    }
    RandomStream rng(params.seed, static_cast<std::uint64_t>(t));
    for (int j = 0; j < params.perturbations; ++j) {
      Eigen::VectorXd dir(fm.d);
      for (int k = 0; k < fm.d; ++k) dir[k] = rng.normal();
      dir /= dir.norm();
      double r = params.radius * std::ldexp(1.0, -(j % levels));
      if (params.region_scaled) r *= region_length(fitters[t], dir, xi);
      L.push_back(clip_to_ball(fitted + r * dir, fm.L_b));
      P.push_back("perturbed");
    }
    if (params.refits && t + 1 < H) {
      // Candidate 0 of the next layer is the fitted bridge, whose refit is ours.
      const auto& next = g.layers[t + 1];
      for (size_t j = 1; j < next.size(); ++j) {
        L.push_back(fitters[t].fit(next[j]).theta);
        P.push_back("refit");
      }
    }
  }
  return g;
}

ConfidenceRegion region_from_values(std::vector<Eigen::MatrixXd> m_hat, double xi) {
  if (std::isnan(xi) || xi < 0.0) throw ValidationError("xi", "must be nonnegative");
  ConfidenceRegion r;
  r.xi = xi;
  r.m_hat = std::move(m_hat);
  for (const auto& M : r.m_hat) {
    if (M.rows() == 0 || M.cols() == 0) throw ValidationError("grid", "empty layer");
    const Eigen::VectorXd cmin = M.colwise().minCoeff().transpose();
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> F(M.rows(), M.cols());
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      for (Eigen::Index i = 0; i < M.rows(); ++i) F(i, j) = M(i, j) - cmin[j] <= xi;
    r.col_min.push_back(cmin);
    r.feasible.push_back(F);
  }
  return r;
}

ConfidenceRegion build_region(const std::vector<StepFitter>& fitters, const CandidateGrid& grid,
                              double xi) {
  const int H = grid.steps();
  std::vector<Eigen::MatrixXd> tables(H);
  const Eigen::VectorXd zero;
  for (int t = 0; t < H; ++t) {
    const int m = grid.size(t);
    const int mn = t + 1 < H ? grid.size(t + 1) : 1;
    tables[t].resize(m, mn);
    for (int j = 0; j < mn; ++j) {
      const Eigen::VectorXd& next = t + 1 < H ? grid.layers[t + 1][j] : zero;
      for (int i = 0; i < m; ++i) tables[t](i, j) = fitters[t].m_hat(grid.layers[t][i], next);
    }
  }
  return region_from_values(std::move(tables), xi);
}

std::vector<StepFitter> make_fitters(const OfflineDataset& data, const TargetPolicy& pi,
                                     const FeatureMap& fm, const FitConfig& cfg) {
  std::vector<StepFitter> fitters;
  for (const auto& m : chain_moments(data, pi, fm)) fitters.emplace_back(m, fm, cfg);
  return fitters;
}

ChainCheck chain_feasibility(const std::vector<StepFitter>& fitters,
                             const std::vector<Eigen::VectorXd>& chain, double xi) {
  if (chain.size() != fitters.size()) throw ValidationError("chain", "one bridge per step expected");
  ChainCheck c;
  const Eigen::VectorXd none;
  for (size_t t = 0; t < fitters.size(); ++t) {
    const Eigen::VectorXd& next = t + 1 < chain.size() ? chain[t + 1] : none;
    const double e = fitters[t].m_hat(chain[t], next) - fitters[t].fit(next).m_hat;
    c.excess.push_back(e);
    if (e > xi) c.feasible = false;
  }
  return c;
}

PessimisticValue pessimistic_value(const ConfidenceRegion& region, const Eigen::VectorXd& head) {
  const int H = static_cast<int>(region.feasible.size());
  if (H == 0) throw EmptyRegion("region has no steps");
  if (head.size() != region.feasible[0].rows()) throw ValidationError("head", "size mismatch");
  std::vector<std::vector<char>> reach(H);
  for (int t = H - 1; t >= 0; --t) {
    const auto& F = region.feasible[t];
    reach[t].assign(F.rows(), 0);
    for (Eigen::Index i = 0; i < F.rows(); ++i) {
      if (t == H - 1) {
        reach[t][i] = F(i, 0);
      } else {
        for (Eigen::Index j = 0; j < F.cols() && !reach[t][i]; ++j)
          reach[t][i] = F(i, j) && reach[t + 1][j];
      }
    }
  }
  PessimisticValue out;
  int best = -1;
  for (Eigen::Index i = 0; i < head.size(); ++i)
    if (reach[0][i] && (best < 0 || head[i] < head[best])) best = static_cast<int>(i);
  if (best < 0) throw EmptyRegion("no reachable candidate chain");
  out.value = head[best];
  for (int t = 0; t < H; ++t) {
    int cnt = 0;
    for (char c : reach[t]) cnt += c;
    out.reachable.push_back(cnt);
  }
  out.chain.push_back(best);
  for (int t = 0; t + 1 < H; ++t) {
    const int i = out.chain.back();
    const auto& F = region.feasible[t];
    for (Eigen::Index j = 0; j < F.cols(); ++j)
      if (F(i, j) && reach[t + 1][j]) {
        out.chain.push_back(static_cast<int>(j));
        break;
      }
  }
  return out;
}

int argmax_lowest(const std::vector<double>& scores) {
  int best = -1;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i]) || scores[i] == -std::numeric_limits<double>::infinity()) continue;
    if (best < 0 || scores[i] > scores[best]) best = static_cast<int>(i);
  }
  return best;
}

PessimismReport p3o(const OfflineDataset& data, const PolicySet& set, const P3OConfig& cfg) {
  validate(set);
  validate(cfg.features);
  PessimismReport rep;
  rep.n = data.size();
  rep.xi = scheduled_xi(cfg, data.size(), data.horizon);
  const Eigen::VectorXd f = head_functional(data, cfg.features);
  std::vector<double> scores;
  for (const auto& pi : set.members) {
    PolicyOutcome out;
    try {
      const std::vector<StepFitter> fitters = make_fitters(data, pi, cfg.features, cfg.fit);
      MinimaxFit fit;
      fit.steps.resize(fitters.size());
      Eigen::VectorXd next;
      for (int t = data.horizon - 1; t >= 0; --t) {
        fit.steps[t] = fitters[t].fit(next);
        next = fit.steps[t].theta;
      }
      for (const auto& s : fit.steps) out.m_hat_fitted.push_back(s.m_hat);
      const CandidateGrid grid = make_grid(fitters, fit, cfg.features, cfg.grid, rep.xi, f);
      for (int t = 0; t < grid.steps(); ++t) out.grid_sizes.push_back(grid.size(t));
      const ConfidenceRegion region = build_region(fitters, grid, rep.xi);
      Eigen::VectorXd head(grid.size(0));
      for (int i = 0; i < grid.size(0); ++i) head[i] = f.dot(grid.layers[0][i]);
      out.f_hat_fitted = head[0];
      out.fitted_feasible = true;
      for (int t = 0; t < grid.steps(); ++t) out.fitted_feasible = out.fitted_feasible && region.feasible[t](0, 0);
      const PessimisticValue pv = pessimistic_value(region, head);
      out.j_pess = pv.value;
      out.chain = pv.chain;
      out.reachable = pv.reachable;
    } catch (const Error& e) {
      out.status = e.what();
      out.j_pess = -std::numeric_limits<double>::infinity();
    }
    scores.push_back(out.j_pess);
    rep.policies.push_back(std::move(out));
  }
  rep.selected = argmax_lowest(scores);
  return rep;
}

void attach_truth(PessimismReport& rep, const std::vector<double>& true_values) {
  if (true_values.size() != rep.policies.size()) throw ValidationError("true_values", "size mismatch");
  for (size_t i = 0; i < true_values.size(); ++i) rep.policies[i].true_value = true_values[i];
  rep.optimal = argmax_lowest(true_values);
  if (rep.selected >= 0 && *rep.optimal >= 0)
    rep.subopt = true_values[*rep.optimal] - true_values[rep.selected];
}

}  // namespace p3o
