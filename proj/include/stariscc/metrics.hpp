#pragma once

#include "stariscc/types.hpp"

namespace stariscc {

/// Receive covariances for a fixed (w, star) pair. All matrices are
/// Hermitian positive definite (sigma^2 > 0).
struct CovarianceBundle {
  std::vector<MatrixXcd> r_interf_dr;  // R_l: interference-plus-noise for DR l
  MatrixXcd r_total_rx;                // R_2: full received covariance
  MatrixXcd r_equiv;                   // R_1: equivalent-system covariance
  MatrixXcd r_rad_noise;               // R_rad = A_I w w^H A_I^H + sigma^2 I
  std::vector<VectorXcd> g;            // effective uplink channels
};

CovarianceBundle build_covariances(const VectorXcd& w, const StarCoefficients& c,
                                   const ChannelSet& ch, const SystemConfig& cfg);

/// Uplink communication SINR for DR l.
double uplink_sinr(int l, const BeamformerSet& bf, const ChannelSet& ch,
                   const StarCoefficients& c, const SystemConfig& cfg);

/// Sensing SINR for receiver u and beamformer w.
double sensing_sinr(const VectorXcd& u, const VectorXcd& w, const ChannelSet& ch,
                    const SystemConfig& cfg);

/// R = log_base(1 + gamma), in rate-per-Hz units of the configured base.
double rate_from_sinr(double gamma, const SystemConfig& cfg);
/// Gamma_{u,l} = base^{r/B} - 1.
double sinr_from_rate(double r, double bandwidth_hz, const SystemConfig& cfg);

/// P = kappa * (phi * r)^3.
double compute_power(double r, const SystemConfig& cfg);

/// e_rad = u^H R_1 u - 2 Re(u^H A_0 w) + 1.
double mse_rad(const VectorXcd& u, const VectorXcd& w, const CovarianceBundle& cov,
               const ChannelSet& ch);

/// e_l = u_l^H R_2 u_l - 2 sqrt(P_u) Re(u_l^H g_l) + 1.
double mse_dr(int l, const VectorXcd& u_l, const CovarianceBundle& cov,
              const SystemConfig& cfg);

/// Normalized gains |u^H a_r(th) a_t(th)^H w|^2 / max over the grid.
VectorXd beampattern(const VectorXcd& u, const VectorXcd& w,
                     const std::vector<double>& theta_grid);

}  // namespace stariscc
