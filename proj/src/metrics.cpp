#include "stariscc/metrics.hpp"

#include <cmath>

#include "stariscc/core_model.hpp"

namespace stariscc {

CovarianceBundle build_covariances(const VectorXcd& w, const StarCoefficients& c,
                                   const ChannelSet& ch, const SystemConfig& cfg) {
  CovarianceBundle cov;
  const int nr = cfg.n_rx;
  cov.g = effective_uplink_channels(ch, c);

  const VectorXcd a0w = ch.a_target * w;
  const VectorXcd aiw = ch.a_interf * w;
  const VectorXcd aw = ch.a_total * w;
  const MatrixXcd noise = cfg.noise_watt * MatrixXcd::Identity(nr, nr);

  cov.r_rad_noise = aiw * aiw.adjoint() + noise;
  cov.r_equiv = a0w * a0w.adjoint() + cov.r_rad_noise;

  MatrixXcd sig_sum = MatrixXcd::Zero(nr, nr);
  for (const auto& gl : cov.g) sig_sum += cfg.p_dr_watt * (gl * gl.adjoint());
  cov.r_total_rx = sig_sum + aw * aw.adjoint() + noise;

  for (int l = 0; l < ch.n_dr(); ++l) {
    MatrixXcd rl = aw * aw.adjoint() + noise;
    for (int i = 0; i < ch.n_dr(); ++i) {
      if (i == l) continue;
      rl += cfg.p_dr_watt * (cov.g[i] * cov.g[i].adjoint());
    }
    cov.r_interf_dr.push_back(std::move(rl));
  }
  return cov;
}

double uplink_sinr(int l, const BeamformerSet& bf, const ChannelSet& ch,
                   const StarCoefficients& c, const SystemConfig& cfg) {
  const VectorXcd& ul = bf.u_dr.at(l);
  if (ul.norm() == 0.0) throw DegenerateReceiver("zero receiver for DR");
  const auto g = effective_uplink_channels(ch, c);
  const double num = cfg.p_dr_watt * std::norm(ul.dot(g[l]));
  double den = cfg.noise_watt * ul.squaredNorm();
  for (int i = 0; i < ch.n_dr(); ++i) {
    if (i == l) continue;
    den += cfg.p_dr_watt * std::norm(ul.dot(g[i]));
  }
  den += std::norm(ul.dot(ch.a_total * bf.w));
  return num / den;
}

double sensing_sinr(const VectorXcd& u, const VectorXcd& w, const ChannelSet& ch,
                    const SystemConfig& cfg) {
  if (u.norm() == 0.0) throw DegenerateReceiver("zero sensing receiver");
  const double num = std::norm(u.dot(ch.a_target * w));
  const double den =
      std::norm(u.dot(ch.a_interf * w)) + cfg.noise_watt * u.squaredNorm();
  return num / den;
}

double rate_from_sinr(double gamma, const SystemConfig& cfg) {
  const double nats = std::log1p(gamma);
  return cfg.rate_log_base == RateLogBase::base2 ? nats / std::log(2.0) : nats;
}

double sinr_from_rate(double r, double bandwidth_hz, const SystemConfig& cfg) {
  const double x = r / bandwidth_hz;
  return cfg.rate_log_base == RateLogBase::base2 ? std::exp2(x) - 1.0
                                                 : std::expm1(x);
}

double compute_power(double r, const SystemConfig& cfg) {
  const double f = cfg.phi_cycles_per_bit * r;
  return cfg.kappa * f * f * f;
}

double mse_rad(const VectorXcd& u, const VectorXcd& w, const CovarianceBundle& cov,
               const ChannelSet& ch) {
  const cplx quad = u.dot(cov.r_equiv * u);
  const cplx cross = u.dot(ch.a_target * w);
  return quad.real() - 2.0 * cross.real() + 1.0;
}

double mse_dr(int l, const VectorXcd& u_l, const CovarianceBundle& cov,
              const SystemConfig& cfg) {
  const cplx quad = u_l.dot(cov.r_total_rx * u_l);
  const cplx cross = u_l.dot(cov.g.at(l));
  return quad.real() - 2.0 * std::sqrt(cfg.p_dr_watt) * cross.real() + 1.0;
}

VectorXd beampattern(const VectorXcd& u, const VectorXcd& w,
                     const std::vector<double>& theta_grid) {
  const int n = static_cast<int>(theta_grid.size());
  VectorXd gains(n);
  for (int i = 0; i < n; ++i) {
    const VectorXcd ar = steering_vector(theta_grid[i], static_cast<int>(u.size()));
    const VectorXcd at = steering_vector(theta_grid[i], static_cast<int>(w.size()));
    gains(i) = std::norm(u.dot(ar) * at.dot(w));
  }
  const double peak = gains.maxCoeff();
  if (!(peak > 0.0)) throw DegeneratePattern("all-zero beampattern");
  return gains / peak;
}

}  // namespace stariscc
