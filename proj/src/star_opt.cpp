#include "stariscc/star_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stariscc/conic.hpp"
#include "stariscc/core_model.hpp"
#include "stariscc/metrics.hpp"

namespace stariscc {

namespace {
constexpr double kTargetCushion = 1.0 - 1e-6;
constexpr double kActiveTarget = 1e-300;

MatrixXcd dominant_eigvec_outer(const MatrixXcd& v, VectorXcd* vec_out = nullptr) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(v);
  const int top = static_cast<int>(v.rows()) - 1;  // ascending order
  VectorXcd b = es.eigenvectors().col(top);
  // deterministic global phase: first nonzero entry made real positive
  for (int i = 0; i < b.size(); ++i) {
    if (std::abs(b(i)) > 1e-12) {
      b *= std::polar(1.0, -std::arg(b(i)));
      break;
    }
  }
  if (vec_out) *vec_out = b;
  return b * b.adjoint();
}
}  // namespace

OffloadTargets build_offload_targets(const RateAllocation& rates,
                                     const BeamformerSet& bf,
                                     const ChannelSet& ch,
                                     const SystemConfig& cfg) {
  OffloadTargets t;
  const int n_dr = ch.n_dr();
  const int n = cfg.n_ris;
  t.n_ris = n;
  t.side = ch.side;
  t.gamma_dr = VectorXd::Zero(n_dr);
  t.noise_terms = VectorXd::Zero(n_dr);
  for (int l = 0; l < n_dr; ++l) {
    t.gamma_dr(l) = sinr_from_rate(rates.r_dr(l), cfg.bandwidth_hz, cfg);
    const VectorXcd& ul = bf.u_dr[l];
    t.noise_terms(l) = std::norm(ul.dot(ch.a_total * bf.w)) +
                       cfg.noise_watt * ul.squaredNorm();
  }
  t.b_matrices.resize(n_dr);
  for (int l = 0; l < n_dr; ++l) {
    t.b_matrices[l].resize(n_dr);
    const VectorXcd hu_l = ch.h_bs_ris * bf.u_dr[l];  // H u_l
    for (int i = 0; i < n_dr; ++i) {
      const VectorXcd b =
          ch.h_ris_dr[i].conjugate().asDiagonal() * hu_l;  // diag(h^H) H u_l
      t.b_matrices[l][i] = cfg.p_dr_watt * (b * b.adjoint());
    }
  }
  return t;
}

std::pair<MatrixXcd, MatrixXcd> lift_star(const StarCoefficients& c) {
  const VectorXcd vt = star_diagonal(c, Side::transmission);
  const VectorXcd vr = star_diagonal(c, Side::reflection);
  return {vt * vt.adjoint(), vr * vr.adjoint()};
}

double penalty_residual(const MatrixXcd& v) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(v, Eigen::EigenvaluesOnly);
  const VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  return ev.sum() - ev.maxCoeff();
}

SpectralSurrogate sca_surrogate(const MatrixXcd& v_prev) {
  SpectralSurrogate s;
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(v_prev);
  const int top = static_cast<int>(v_prev.rows()) - 1;
  VectorXcd b = es.eigenvectors().col(top);
  for (int i = 0; i < b.size(); ++i) {
    if (std::abs(b(i)) > 1e-12) {
      b *= std::polar(1.0, -std::arg(b(i)));
      break;
    }
  }
  s.bbh = b * b.adjoint();
  s.expansion = v_prev;
  s.value_at_expansion = -es.eigenvalues()(top);
  return s;
}

VectorXd target_margins(const MatrixXcd& v_t, const MatrixXcd& v_r,
                        const OffloadTargets& targets) {
  const int n_dr = static_cast<int>(targets.side.size());
  VectorXd m(n_dr);
  for (int l = 0; l < n_dr; ++l) {
    if (targets.gamma_dr(l) <= kActiveTarget) {
      m(l) = std::numeric_limits<double>::infinity();
      continue;
    }
    const auto& vl = targets.side[l] == Side::transmission ? v_t : v_r;
    double lhs = (targets.b_matrices[l][l] * vl).trace().real() /
                 targets.gamma_dr(l);
    double rhs = targets.noise_terms(l);
    for (int i = 0; i < n_dr; ++i) {
      if (i == l) continue;
      const auto& vi = targets.side[i] == Side::transmission ? v_t : v_r;
      rhs += (targets.b_matrices[l][i] * vi).trace().real();
    }
    m(l) = lhs - rhs;
  }
  return m;
}

namespace {

struct SdpResult {
  MatrixXcd v_t;
  MatrixXcd v_r;
  bool ok = false;
  bool infeasible = false;
};

// Elements whose diagonal is pinned to zero force zero rows and columns;
// they are eliminated so the PSD blocks keep a strict interior.
struct ActiveSets {
  std::vector<int> t;
  std::vector<int> r;
};

ActiveSets active_elements(int n, const StarDiagTemplate& tmpl) {
  ActiveSets a;
  for (int k = 0; k < n; ++k) {
    if (tmpl.kind == StarDiagTemplate::Kind::sum_to_one ||
        tmpl.diag_t(k) > 0.0) {
      a.t.push_back(k);
    }
    if (tmpl.kind == StarDiagTemplate::Kind::sum_to_one ||
        tmpl.diag_r(k) > 0.0) {
      a.r.push_back(k);
    }
  }
  return a;
}

MatrixXcd restrict_to(const MatrixXcd& m, const std::vector<int>& idx) {
  MatrixXcd out(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = m(idx[i], idx[j]);
  }
  return out;
}

MatrixXcd expand_from(const MatrixXcd& m, const std::vector<int>& idx, int n) {
  MatrixXcd out = MatrixXcd::Zero(n, n);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = 0; j < idx.size(); ++j) out(idx[i], idx[j]) = m(i, j);
  }
  return out;
}

/// One SCA step: minimize
///   sum_i rho (tr V_i - b_i^H V_i b_i) - margin_weight * sum_l delta_l / N_l
/// over the cushioned trace-SINR rows, diag template and PSD cones.
SdpResult solve_sca_sdp(const MatrixXcd& bbh_t, const MatrixXcd& bbh_r,
                        const OffloadTargets& targets, const SystemConfig& cfg,
                        const StarDiagTemplate& tmpl, double margin_weight,
                        const ActiveSets& act, double accept_residual) {
  const int n = targets.n_ris;
  const int nt_el = static_cast<int>(act.t.size());
  const int nr_el = static_cast<int>(act.r.size());
  const int dim_t = 2 * nt_el;
  const int dim_r = 2 * nr_el;
  const int klen_t = conic::svec_len(dim_t);
  const int klen_r = conic::svec_len(dim_r);
  const int n_dr = static_cast<int>(targets.side.size());

  std::vector<int> rows;
  for (int l = 0; l < n_dr; ++l) {
    if (targets.gamma_dr(l) > kActiveTarget) rows.push_back(l);
  }
  const bool with_margin = margin_weight > 0.0 && !rows.empty();

  conic::ConicProblem p;
  const int off_t = p.add_vars(klen_t);
  const int off_r = p.add_vars(klen_r);
  p.annotations.push_back({"v_t_embedded", off_t, klen_t, 2.0});
  p.annotations.push_back({"v_r_embedded", off_r, klen_r, 2.0});

  p.objective = VectorXd::Zero(p.nvar);
  p.objective.segment(off_t, klen_t) =
      0.5 * cfg.penalty_rho *
      (conic::svec(MatrixXd::Identity(dim_t, dim_t)) -
       conic::svec(conic::embed_hermitian(restrict_to(bbh_t, act.t))));
  p.objective.segment(off_r, klen_r) =
      0.5 * cfg.penalty_rho *
      (conic::svec(MatrixXd::Identity(dim_r, dim_r)) -
       conic::svec(conic::embed_hermitian(restrict_to(bbh_r, act.r))));

  // Diagonal rows over the active elements.
  auto unit_diag_row = [](int dim, int d) {
    MatrixXd e = MatrixXd::Zero(dim, dim);
    e(d, d) = 1.0;
    return conic::svec(e);
  };
  if (tmpl.kind == StarDiagTemplate::Kind::sum_to_one) {
    MatrixXd a = MatrixXd::Zero(2 * n, p.nvar);
    for (int d = 0; d < 2 * n; ++d) {
      const int el = d % n;
      const int part = d / n;  // 0: Re-diag block, 1: duplicated block
      const auto it = std::find(act.t.begin(), act.t.end(), el);
      const auto ir = std::find(act.r.begin(), act.r.end(), el);
      if (it != act.t.end()) {
        const int pos = static_cast<int>(it - act.t.begin()) + part * nt_el;
        a.row(d).segment(off_t, klen_t) = unit_diag_row(dim_t, pos).transpose();
      }
      if (ir != act.r.end()) {
        const int pos = static_cast<int>(ir - act.r.begin()) + part * nr_el;
        a.row(d).segment(off_r, klen_r) = unit_diag_row(dim_r, pos).transpose();
      }
    }
    p.add_zero(a, VectorXd::Constant(2 * n, -1.0));
  } else {
    const int mrows = dim_t + dim_r;
    MatrixXd a = MatrixXd::Zero(mrows, p.nvar);
    VectorXd b(mrows);
    for (int d = 0; d < dim_t; ++d) {
      a.row(d).segment(off_t, klen_t) = unit_diag_row(dim_t, d).transpose();
      b(d) = -tmpl.diag_t(act.t[d % nt_el]);
    }
    for (int d = 0; d < dim_r; ++d) {
      a.row(dim_t + d).segment(off_r, klen_r) =
          unit_diag_row(dim_r, d).transpose();
      b(dim_t + d) = -tmpl.diag_r(act.r[d % nr_el]);
    }
    p.add_zero(a, b);
  }

  // Cushioned trace-SINR rows; the margin objective rewards their slack
  // directly, so no auxiliary variables are needed.
  if (!rows.empty()) {
    MatrixXd a = MatrixXd::Zero(static_cast<int>(rows.size()), p.nvar);
    VectorXd b(static_cast<int>(rows.size()));
    for (std::size_t idx = 0; idx < rows.size(); ++idx) {
      const int l = rows[idx];
      const double gamma = targets.gamma_dr(l) * kTargetCushion;
      for (int i = 0; i < n_dr; ++i) {
        const bool trans = targets.side[i] == Side::transmission;
        const int off = trans ? off_t : off_r;
        const int klen = trans ? klen_t : klen_r;
        const auto& sel = trans ? act.t : act.r;
        const double coef = (i == l) ? 0.5 / gamma : -0.5;
        const VectorXd row = conic::svec(conic::embed_hermitian(
            restrict_to(targets.b_matrices[l][i], sel)));
        a.row(static_cast<int>(idx)).segment(off, klen) +=
            coef * row.transpose();
      }
      b(static_cast<int>(idx)) = -targets.noise_terms(l);
      if (with_margin) {
        const double wl = margin_weight / std::max(targets.noise_terms(l), 1e-300);
        p.objective -= wl * a.row(static_cast<int>(idx)).transpose();
      }
    }
    p.add_nonnegative(a, b);
  }

  p.add_psd_slice(off_t, dim_t);
  p.add_psd_slice(off_r, dim_r);

  conic::SolveOptions opt;
  opt.tol_feas = 1.0e-8;
  opt.tol_gap = 1.0e-8;
  const auto sol = conic::solve(p, opt);

  SdpResult out;
  if (sol.status == conic::SolveStatus::infeasible) {
    out.infeasible = true;
    return out;
  }
  const bool usable =
      sol.status == conic::SolveStatus::optimal ||
      (sol.status == conic::SolveStatus::numerical_limit &&
       sol.residuals.primal <= accept_residual &&
       sol.residuals.dual <= accept_residual &&
       sol.residuals.gap <= accept_residual);
  if (!usable) return out;
  out.ok = true;
  out.v_t = expand_from(
      conic::recover_hermitian(conic::smat(sol.x.segment(off_t, klen_t))),
      act.t, n);
  out.v_r = expand_from(
      conic::recover_hermitian(conic::smat(sol.x.segment(off_r, klen_r))),
      act.r, n);
  return out;
}

double combined_objective(const MatrixXcd& v_t, const MatrixXcd& v_r,
                          const OffloadTargets& targets,
                          const SystemConfig& cfg, double margin_weight) {
  double f = cfg.penalty_rho * (penalty_residual(v_t) + penalty_residual(v_r));
  if (margin_weight > 0.0) {
    const VectorXd m = target_margins(v_t, v_r, targets);
    for (int l = 0; l < m.size(); ++l) {
      if (std::isfinite(m(l))) {
        f -= margin_weight * m(l) / std::max(targets.noise_terms(l), 1e-300);
      }
    }
  }
  return f;
}

double diag_violation(const MatrixXcd& v_t, const MatrixXcd& v_r,
                      const StarDiagTemplate& tmpl) {
  double worst = 0.0;
  for (int d = 0; d < v_t.rows(); ++d) {
    if (tmpl.kind == StarDiagTemplate::Kind::sum_to_one) {
      worst = std::max(worst,
                       std::abs((v_t(d, d) + v_r(d, d)).real() - 1.0));
    } else {
      const int nn = static_cast<int>(tmpl.diag_t.size());
      worst = std::max(worst, std::abs(v_t(d, d).real() - tmpl.diag_t(d % nn)));
      worst = std::max(worst, std::abs(v_r(d, d).real() - tmpl.diag_r(d % nn)));
    }
  }
  return worst;
}

}  // namespace

LiftedStar algorithm2(const MatrixXcd& v_init_t, const MatrixXcd& v_init_r,
                      const OffloadTargets& targets, const SystemConfig& cfg,
                      const StarDiagTemplate& tmpl) {
  LiftedStar ls;
  ls.v_t = v_init_t;
  ls.v_r = v_init_r;

  const double rank_tol_t = cfg.rank_tol_factor *
      std::max(ls.v_t.trace().real(), 1.0e-12);
  const double rank_tol_r = cfg.rank_tol_factor *
      std::max(ls.v_r.trace().real(), 1.0e-12);
  const ActiveSets act = active_elements(targets.n_ris, tmpl);

  // Margin-improvement stage: same SCA machinery with the slack objective,
  // run on a share of the iteration budget with a coarse stall threshold.
  const int explore_cap =
      cfg.margin_weight > 0.0 ? std::min(8, cfg.sca_max_iter / 2) : 0;
  double f_cur = combined_objective(ls.v_t, ls.v_r, targets, cfg,
                                    cfg.margin_weight);
  ls.margin_trajectory.push_back(f_cur);
  for (int it = 0; it < explore_cap; ++it) {
    const MatrixXcd bbh_t = dominant_eigvec_outer(ls.v_t);
    const MatrixXcd bbh_r = dominant_eigvec_outer(ls.v_r);
    const SdpResult res = solve_sca_sdp(bbh_t, bbh_r, targets, cfg, tmpl,
                                        cfg.margin_weight, act, 3e-5);
    if (res.infeasible) throw StarInfeasible("lifted feasibility problem empty");
    if (!res.ok) break;
    ++ls.iterations;
    const double f_new =
        combined_objective(res.v_t, res.v_r, targets, cfg, cfg.margin_weight);
    if (f_new > f_cur - 1e-12) break;  // no further progress; keep incumbent
    ls.v_t = res.v_t;
    ls.v_r = res.v_r;
    ls.worst_diag_violation = std::max(
        ls.worst_diag_violation, diag_violation(ls.v_t, ls.v_r, tmpl));
    ls.margin_trajectory.push_back(f_new);
    const bool stalled = f_cur - f_new <= 1e-3 * std::abs(f_cur);
    f_cur = f_new;
    if (stalled) break;
  }

  // Penalty stage: the plain nuclear-minus-spectral SCA, which also defines
  // the reported surrogate trajectory.
  double f_pen = cfg.penalty_rho *
                 (penalty_residual(ls.v_t) + penalty_residual(ls.v_r));
  ls.trajectory.push_back(f_pen);
  for (int it = ls.iterations; it < cfg.sca_max_iter; ++it) {
    if (penalty_residual(ls.v_t) <= rank_tol_t &&
        penalty_residual(ls.v_r) <= rank_tol_r) {
      break;
    }
    const MatrixXcd bbh_t = dominant_eigvec_outer(ls.v_t);
    const MatrixXcd bbh_r = dominant_eigvec_outer(ls.v_r);
    const SdpResult res =
        solve_sca_sdp(bbh_t, bbh_r, targets, cfg, tmpl, 0.0, act, 1e-6);
    if (res.infeasible) throw StarInfeasible("lifted feasibility problem empty");
    if (!res.ok) break;
    ++ls.iterations;
    const double f_new = cfg.penalty_rho * (penalty_residual(res.v_t) +
                                            penalty_residual(res.v_r));
    if (f_new > f_pen - 1e-12) break;
    ls.v_t = res.v_t;
    ls.v_r = res.v_r;
    ls.worst_diag_violation = std::max(
        ls.worst_diag_violation, diag_violation(ls.v_t, ls.v_r, tmpl));
    ls.trajectory.push_back(f_new);
    const bool stalled =
        f_pen - f_new <= cfg.sca_tol * std::max(1.0, std::abs(f_pen));
    f_pen = f_new;
    if (stalled) break;
  }

  ls.residual_t = penalty_residual(ls.v_t);
  ls.residual_r = penalty_residual(ls.v_r);
  ls.rank_converged = ls.residual_t <= rank_tol_t && ls.residual_r <= rank_tol_r;
  return ls;
}

ExtractionResult extract_rank_one(const LiftedStar& ls,
                                  const OffloadTargets& targets) {
  ExtractionResult out;
  const int n = static_cast<int>(ls.v_t.rows());
  StarCoefficients c;
  c.amp_t = VectorXd::Zero(n);
  c.amp_r = VectorXd::Zero(n);
  c.phase_t = VectorXd::Zero(n);
  c.phase_r = VectorXd::Zero(n);

  auto fill_side = [&](const MatrixXcd& v, VectorXd& amp, VectorXd& phase) {
    if (v.trace().real() <= 1e-12) {
      amp.setZero();
      phase.setZero();
      return;
    }
    VectorXcd b;
    dominant_eigvec_outer(v, &b);
    for (int k = 0; k < n; ++k) {
      amp(k) = std::max(0.0, v(k, k).real());
      phase(k) = std::abs(b(k)) > 1e-12 ? wrap_phase(std::arg(b(k))) : 0.0;
    }
  };
  fill_side(ls.v_t, c.amp_t, c.phase_t);
  fill_side(ls.v_r, c.amp_r, c.phase_r);

  // exact renormalization of the amplitude pairs
  for (int k = 0; k < n; ++k) {
    const double s = c.amp_t(k) + c.amp_r(k);
    if (s > 1e-12) {
      c.amp_t(k) /= s;
      c.amp_r(k) /= s;
    } else {
      c.amp_t(k) = 0.0;
      c.amp_r(k) = 1.0;
    }
  }
  out.coeffs = c;

  // re-evaluate the trace-SINR rows on the extracted rank-one matrices;
  // degradation is 1 - gamma_achieved / gamma_target, clipped at zero
  const auto [vt, vr] = lift_star(c);
  const int n_dr = static_cast<int>(targets.side.size());
  double worst = 0.0;
  for (int l = 0; l < n_dr; ++l) {
    if (targets.gamma_dr(l) <= kActiveTarget) continue;
    const auto& vl = targets.side[l] == Side::transmission ? vt : vr;
    const double sig = (targets.b_matrices[l][l] * vl).trace().real();
    double den = targets.noise_terms(l);
    for (int i = 0; i < n_dr; ++i) {
      if (i == l) continue;
      const auto& vi = targets.side[i] == Side::transmission ? vt : vr;
      den += (targets.b_matrices[l][i] * vi).trace().real();
    }
    const double achieved = sig / std::max(den, 1e-300);
    worst = std::max(worst, 1.0 - achieved / targets.gamma_dr(l));
  }
  out.degradation = std::max(0.0, worst);
  out.extraction_loss = out.degradation > 1e-3;
  return out;
}

}  // namespace stariscc
