#include "stariscc/ao.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "stariscc/baselines.hpp"
#include "stariscc/core_model.hpp"
#include "stariscc/metrics.hpp"

namespace stariscc {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

StarCoefficients scheme_initial_star(const SystemConfig& cfg, SchemeKind scheme,
                                     Rng& rng) {
  const int n = cfg.n_ris;
  StarCoefficients c = StarCoefficients::equal_split(n);
  switch (scheme) {
    case SchemeKind::conventional_ris:
      for (int k = 0; k < n; ++k) {
        c.amp_t(k) = k < n / 2 ? 1.0 : 0.0;
        c.amp_r(k) = 1.0 - c.amp_t(k);
      }
      break;
    case SchemeKind::equal_split_star:
    case SchemeKind::proposed_star:
    case SchemeKind::offloading_only:
      break;
  }
  for (int k = 0; k < n; ++k) {
    c.phase_t(k) = rng.uniform(0.0, kTwoPi);
    c.phase_r(k) = rng.uniform(0.0, kTwoPi);
  }
  return c;
}

VectorXcd matched_sensing_beamformer(const SystemConfig& cfg,
                                     const ChannelSet& ch) {
  Eigen::JacobiSVD<MatrixXcd> svd(ch.a_target, Eigen::ComputeFullV);
  VectorXcd v = svd.matrixV().col(0);
  return std::sqrt(0.9 * cfg.p_bs_watt) * v;
}

/// Rates still supported under new coefficients with MMSE receivers.
VectorXd capped_rates(const VectorXd& rates, const VectorXcd& w,
                      const StarCoefficients& star, const ChannelSet& ch,
                      const SystemConfig& cfg) {
  const CovarianceBundle cov = build_covariances(w, star, ch, cfg);
  const auto [u, u_dr] = mmse_receivers(w, cov, ch, cfg);
  (void)u;
  VectorXd out = rates;
  BeamformerSet bf;
  bf.w = w;
  bf.u_dr = u_dr;
  for (int l = 0; l < ch.n_dr(); ++l) {
    const double gamma = uplink_sinr(l, bf, ch, star, cfg);
    const double cap = cfg.bandwidth_hz * rate_from_sinr(gamma, cfg);
    if (out(l) > cap) out(l) = cap;
  }
  return out;
}
}  // namespace

std::pair<VectorXcd, StarCoefficients> initialize(const SystemConfig& cfg,
                                                  const ChannelSet& ch,
                                                  Rng& rng) {
  StarCoefficients c = scheme_initial_star(cfg, SchemeKind::proposed_star, rng);
  return {matched_sensing_beamformer(cfg, ch), c};
}

SolveReport algorithm3(const SystemConfig& cfg, const ChannelSet& ch, Rng& rng) {
  return algorithm3_scheme(cfg, ch, rng, SchemeKind::proposed_star);
}

SolveReport algorithm3_scheme(const SystemConfig& cfg, const ChannelSet& ch,
                              Rng& rng, SchemeKind scheme) {
  SolveReport rep;
  rep.scheme = scheme;

  SystemConfig cfg_eff = cfg;
  StarDiagTemplate tmpl = StarDiagTemplate::sum_to_one();
  switch (scheme) {
    case SchemeKind::conventional_ris:
      tmpl = conventional_ris_template(cfg.n_ris);
      break;
    case SchemeKind::equal_split_star:
      tmpl = equal_split_template(cfg.n_ris);
      break;
    case SchemeKind::offloading_only:
      cfg_eff.gamma_rad_linear = 0.0;
      break;
    case SchemeKind::proposed_star:
      break;
  }
  const bool offloading = scheme == SchemeKind::offloading_only;

  StarCoefficients star = scheme_initial_star(cfg, scheme, rng);
  VectorXcd w = offloading ? VectorXcd(VectorXcd::Zero(cfg.n_tx))
                           : matched_sensing_beamformer(cfg, ch);

  WmmseState inner;
  RateAllocation rates;
  double r_accepted = -1.0;
  int rank_fail_streak = 0;
  rep.incumbent_margin_min = std::numeric_limits<double>::infinity();
  rep.termination_reason = "iteration_cap";

  for (int j = 0; j < cfg.ao_max_iter; ++j) {
    const auto t0 = std::chrono::steady_clock::now();
    WmmseState st;
    try {
      st = algorithm1(w, star, ch, cfg_eff);
    } catch (const InfeasibleSensing&) {
      if (j == 0) {
        const double a0 = ch.a_target.jacobiSvd().singularValues()(0);
        const double p_req = cfg.gamma_rad_linear * cfg.noise_watt /
                             std::max(a0 * a0, 1e-300);
        std::ostringstream msg;
        msg << "sensing threshold unreachable: needs at least " << p_req
            << " W of transmit power against a budget of " << cfg.p_bs_watt
            << " W";
        throw InfeasibleSensing(msg.str());
      }
      rep.termination_reason = "sensing_infeasible_midway";
      break;
    }
    rep.alg1_seconds += seconds_since(t0);
    if (offloading) {
      st.bf.w.setZero();
      st.rates.p_sense = 0.0;
    }

    ++rep.outer_iterations;
    rep.inner_trajectories.push_back(st.trajectory);

    const double r_cand = st.rates.sum_rate;
    if (j == 0 || r_cand >= r_accepted) {
      inner = st;
      rates = st.rates;
      w = st.bf.w;
      r_accepted = r_cand;
    }
    rep.outer_trajectory.push_back(r_accepted);

    if (j > 0) {
      const double prev = rep.outer_trajectory[j - 1];
      if (r_accepted - prev <= cfg.ao_tol * std::max(prev, 1e-30)) {
        rep.termination_reason = "converged";
        break;
      }
    }
    if (j + 1 >= cfg.ao_max_iter) break;

    // STAR stage
    const auto t1 = std::chrono::steady_clock::now();
    const OffloadTargets targets =
        build_offload_targets(rates, inner.bf, ch, cfg_eff);
    auto [v_t, v_r] = lift_star(star);
    {
      const VectorXd margins = target_margins(v_t, v_r, targets);
      for (int l = 0; l < margins.size(); ++l) {
        if (std::isfinite(margins(l))) {
          rep.incumbent_margin_min = std::min(
              rep.incumbent_margin_min,
              margins(l) / std::max(targets.noise_terms(l), 1e-300));
        }
      }
    }
    LiftedStar ls = algorithm2(v_t, v_r, targets, cfg_eff, tmpl);
    ExtractionResult ext = extract_rank_one(ls, targets);
    rep.alg2_seconds += seconds_since(t1);
    rep.penalty_residual_t = ls.residual_t;
    rep.penalty_residual_r = ls.residual_r;
    rep.extraction_degradation = ext.degradation;

    if (!ls.rank_converged) {
      if (++rank_fail_streak >= 2) {
        rep.termination_reason = "rank_residual_stall";
        break;
      }
    } else {
      rank_fail_streak = 0;
    }

    StarCoefficients star_new = ext.coeffs;
    if (tmpl.kind == StarDiagTemplate::Kind::fixed) {
      star_new.amp_t = tmpl.diag_t;
      star_new.amp_r = tmpl.diag_r;
    }

    // keep the new coefficients only if they still support the rates
    const VectorXd capped = capped_rates(rates.r_dr, w, star_new, ch, cfg_eff);
    if (capped.sum() >= r_accepted * (1.0 - 1e-12)) {
      star = star_new;
      if ((capped - rates.r_dr).cwiseAbs().maxCoeff() > 0.0) {
        rates = RateAllocation::from_rates(capped, rates.p_sense, cfg_eff);
        r_accepted = rates.sum_rate;
      }
    }
  }

  rep.bf = inner.bf;
  rep.star = star;
  rep.rates = rates;

  if (!offloading && rep.bf.u.size() > 0 && rep.bf.u.norm() > 0.0) {
    rep.sensing_sinr_achieved = sensing_sinr(rep.bf.u, rep.bf.w, ch, cfg);
  }
  const double budget_used = rates.p_sense + rates.p_compute.sum();
  rep.budget_violation =
      std::max(0.0, (budget_used - cfg.p_bs_watt) / cfg.p_bs_watt);
  const VectorXd recheck = capped_rates(rates.r_dr, rep.bf.w, star, ch, cfg_eff);
  rep.consistency_gap = std::abs(recheck.sum() - rates.sum_rate) /
                        std::max(rates.sum_rate, 1e-30);
  return rep;
}

}  // namespace stariscc
