#include "stariscc/wmmse.hpp"

#include <cmath>

#include "stariscc/conic.hpp"
#include "stariscc/core_model.hpp"

namespace stariscc {

namespace {

// Rates are optimized in Mbit/s so every subproblem variable is O(1).
constexpr double kRateUnit = 1.0e6;

// Rows of Re(r^H w) and Im(r^H w) over the layout [Re w; Im w; ...].
void complex_form_rows(const VectorXcd& r, int nt, int nvar,
                       Eigen::RowVectorXd& re_row, Eigen::RowVectorXd& im_row) {
  re_row = Eigen::RowVectorXd::Zero(nvar);
  im_row = Eigen::RowVectorXd::Zero(nvar);
  for (int j = 0; j < nt; ++j) {
    re_row(j) = r(j).real();
    re_row(nt + j) = r(j).imag();
    im_row(j) = -r(j).imag();
    im_row(nt + j) = r(j).real();
  }
}

}  // namespace

std::pair<VectorXcd, std::vector<VectorXcd>> mmse_receivers(
    const VectorXcd& w, const CovarianceBundle& cov, const ChannelSet& ch,
    const SystemConfig& cfg) {
  const Eigen::LDLT<MatrixXcd> r1(cov.r_equiv);
  const Eigen::LDLT<MatrixXcd> r2(cov.r_total_rx);
  if (r1.info() != Eigen::Success || r2.info() != Eigen::Success) {
    throw NumericalError("received covariance is not positive definite");
  }
  VectorXcd u = r1.solve(ch.a_target * w);
  std::vector<VectorXcd> u_dr;
  const double root_pu = std::sqrt(cfg.p_dr_watt);
  for (int l = 0; l < ch.n_dr(); ++l) {
    u_dr.push_back(root_pu * r2.solve(cov.g[l]));
  }
  return {std::move(u), std::move(u_dr)};
}

std::pair<double, std::vector<double>> auxiliary_weights(
    double e_rad, const std::vector<double>& e_dr) {
  if (!(e_rad > 0.0)) throw NumericalError("nonpositive radar MSE");
  std::vector<double> lam(e_dr.size());
  for (std::size_t l = 0; l < e_dr.size(); ++l) {
    if (!(e_dr[l] > 0.0)) throw NumericalError("nonpositive DR MSE");
    lam[l] = 1.0 / e_dr[l];
  }
  return {1.0 / e_rad, std::move(lam)};
}

RatePowerResult rate_power_subproblem(const BeamformerSet& bf,
                                      const ChannelSet& ch,
                                      const StarCoefficients& star,
                                      const SystemConfig& cfg) {
  const int nt = cfg.n_tx;
  const int n_dr = ch.n_dr();
  const double sigma2 = cfg.noise_watt;
  const auto g = effective_uplink_channels(ch, star);

  conic::ConicProblem p;
  const int w_off = p.add_vars(2 * nt);
  const int r_off = p.add_vars(n_dr);
  const int t_off = p.add_vars(n_dr);
  p.objective = VectorXd::Zero(p.nvar);
  for (int l = 0; l < n_dr; ++l) p.objective(r_off + l) = -1.0;
  p.annotations.push_back({"w", w_off, 2 * nt, 1.0});
  p.annotations.push_back({"rates_mbit", r_off, n_dr, kRateUnit});

  // Sensing bound r_rad <= eta(w), expanded into a ball on (z0, zI).
  const double r_rad_nats = std::log1p(cfg.gamma_rad_linear);
  const bool sensing_active = cfg.gamma_rad_linear > 0.0 && bf.u.size() > 0 &&
                              bf.u.norm() > 0.0;
  if (sensing_active) {
    const double e_bar =
        (std::log(bf.lambda_rad) + 1.0 - r_rad_nats) / bf.lambda_rad;
    const double rhs = e_bar - sigma2 * bf.u.squaredNorm();
    if (rhs < 0.0) {
      throw InfeasibleSensing(
          "sensing requirement cannot be met for the current receiver");
    }
    const VectorXcd r0 = ch.a_target.adjoint() * bf.u;  // z0 = r0^H w
    const VectorXcd ri = ch.a_interf.adjoint() * bf.u;
    MatrixXd a = MatrixXd::Zero(4, p.nvar);
    Eigen::RowVectorXd re, im;
    complex_form_rows(r0, nt, p.nvar, re, im);
    a.row(0) = re;
    a.row(1) = im;
    complex_form_rows(ri, nt, p.nvar, re, im);
    a.row(2) = re;
    a.row(3) = im;
    VectorXd b = VectorXd::Zero(4);
    b(0) = -1.0;
    conic::quadratic_upper_bound(p, a, b, VectorXd::Zero(p.nvar), rhs);
  }

  // Per-DR capacity bound r_l <= S * eta_l(w).
  const double rate_scale = cfg.rate_scale();
  for (int l = 0; l < n_dr; ++l) {
    const VectorXcd& ul = bf.u_dr[l];
    const double lam = bf.lambda_dr[l];
    double k_l = sigma2 * ul.squaredNorm() + 1.0 -
                 2.0 * std::sqrt(cfg.p_dr_watt) * ul.dot(g[l]).real();
    for (int i = 0; i < n_dr; ++i) {
      k_l += cfg.p_dr_watt * std::norm(ul.dot(g[i]));
    }
    const VectorXcd rl = ch.a_total.adjoint() * ul;  // z_l = rl^H w
    MatrixXd a = MatrixXd::Zero(2, p.nvar);
    Eigen::RowVectorXd re, im;
    complex_form_rows(rl, nt, p.nvar, re, im);
    const double s = std::sqrt(lam);
    a.row(0) = s * re;
    a.row(1) = s * im;
    VectorXd d = VectorXd::Zero(p.nvar);
    d(r_off + l) = -kRateUnit / rate_scale;
    const double e = std::log(lam) + 1.0 - lam * k_l;
    conic::quadratic_upper_bound(p, a, VectorXd::Zero(2), d, e);
  }

  // Shared budget ||w||^2 + sum t_l <= P_b with t_l >= kappa (phi r_l)^3.
  {
    MatrixXd a = MatrixXd::Zero(2 * nt, p.nvar);
    for (int j = 0; j < 2 * nt; ++j) a(j, w_off + j) = 1.0;
    VectorXd d = VectorXd::Zero(p.nvar);
    for (int l = 0; l < n_dr; ++l) d(t_off + l) = -1.0;
    conic::quadratic_upper_bound(p, a, VectorXd::Zero(2 * nt), d, cfg.p_bs_watt);
  }
  const double c3 = cfg.kappa * std::pow(cfg.phi_cycles_per_bit * kRateUnit, 3.0);
  for (int l = 0; l < n_dr; ++l) {
    conic::cubic_power_constraint(p, r_off + l, t_off + l, c3);
  }
  if (n_dr > 0) {
    MatrixXd a = MatrixXd::Zero(n_dr, p.nvar);
    for (int l = 0; l < n_dr; ++l) a(l, r_off + l) = 1.0;
    p.add_nonnegative(a, VectorXd::Zero(n_dr));
  }

  conic::SolveOptions opt;
  opt.tol_feas = 1.0e-8;
  opt.tol_gap = 1.0e-8;
  const auto sol = conic::solve(p, opt);
  if (sol.status == conic::SolveStatus::infeasible) {
    throw InfeasibleSensing("no beamformer meets the sensing bound in budget");
  }
  const bool usable =
      sol.status == conic::SolveStatus::optimal ||
      (sol.status == conic::SolveStatus::numerical_limit &&
       sol.residuals.primal <= 1e-6 && sol.residuals.dual <= 1e-6 &&
       sol.residuals.gap <= 1e-6);
  if (!usable) {
    throw NumericalError("rate/power subproblem did not converge");
  }

  RatePowerResult out;
  out.w = VectorXcd(nt);
  for (int j = 0; j < nt; ++j) {
    out.w(j) = cplx(sol.x(w_off + j), sol.x(w_off + nt + j));
  }
  out.rates = VectorXd(n_dr);
  for (int l = 0; l < n_dr; ++l) {
    out.rates(l) = std::max(0.0, sol.x(r_off + l)) * kRateUnit;
  }
  out.objective = out.rates.sum();
  out.violation = conic::max_cone_violation(p, sol.x);
  return out;
}

WmmseState algorithm1(const VectorXcd& w_init, const StarCoefficients& star,
                      const ChannelSet& ch, const SystemConfig& cfg) {
  if (w_init.squaredNorm() > cfg.p_bs_watt * (1.0 + 1e-9)) {
    throw NumericalError("initial beamformer exceeds the power budget");
  }
  WmmseState st;
  const auto g = effective_uplink_channels(ch, star);
  bool all_zero = ch.n_dr() > 0;
  for (const auto& gl : g) {
    if (gl.norm() > 0.0) all_zero = false;
  }
  if (all_zero) {
    st.bf.w = w_init;
    st.bf.u = VectorXcd::Zero(cfg.n_rx);
    st.bf.u_dr.assign(ch.n_dr(), VectorXcd::Zero(cfg.n_rx));
    st.bf.lambda_dr.assign(ch.n_dr(), 1.0);
    st.rates = RateAllocation::from_rates(VectorXd::Zero(ch.n_dr()),
                                          w_init.squaredNorm(), cfg);
    st.converged = true;
    return st;
  }

  VectorXcd w = w_init;
  VectorXd rates = VectorXd::Zero(ch.n_dr());
  double prev = -1.0;
  BeamformerSet bf;
  for (int it = 0; it < cfg.wmmse_max_iter; ++it) {
    const CovarianceBundle cov = build_covariances(w, star, ch, cfg);
    auto [u, u_dr] = mmse_receivers(w, cov, ch, cfg);
    const double e_rad = mse_rad(u, w, cov, ch);
    std::vector<double> e_dr(ch.n_dr());
    for (int l = 0; l < ch.n_dr(); ++l) e_dr[l] = mse_dr(l, u_dr[l], cov, cfg);
    auto [lam, lam_dr] = auxiliary_weights(e_rad, e_dr);
    bf.w = w;
    bf.u = std::move(u);
    bf.u_dr = std::move(u_dr);
    bf.lambda_rad = lam;
    bf.lambda_dr = std::move(lam_dr);

    const RatePowerResult res = rate_power_subproblem(bf, ch, star, cfg);
    st.worst_constraint_violation =
        std::max(st.worst_constraint_violation, res.violation);
    ++st.iterations;

    double obj = res.objective;
    if (it == 0 || obj >= prev) {
      w = res.w;
      rates = res.rates;
    } else {
      obj = prev;  // keep the incumbent; the trajectory stays flat
    }
    st.trajectory.push_back(obj);
    if (it > 0 && obj - prev <= cfg.wmmse_tol * std::max(prev, 1e-30)) {
      st.converged = true;
      prev = obj;
      break;
    }
    prev = obj;
  }
  bf.w = w;
  st.bf = bf;
  st.rates = RateAllocation::from_rates(rates, w.squaredNorm(), cfg);
  return st;
}

}  // namespace stariscc
