#pragma once

#include "stariscc/types.hpp"

namespace stariscc {

/// ULA array response at angle theta: element k is exp(j*k*sin(theta))/sqrt(n).
VectorXcd steering_vector(double theta, int n);

struct SensingChannels {
  MatrixXcd a_target;  // A_0
  MatrixXcd a_interf;  // A_I
  MatrixXcd a_total;   // A
};

/// A_0 = alpha_0 a_r(theta_0) a_t(theta_0)^H and the interferer sum.
SensingChannels build_sensing_channels(double theta_target,
                                       const std::vector<double>& thetas_interf,
                                       cplx alpha_target,
                                       const std::vector<cplx>& alphas_interf,
                                       int n_tx, int n_rx);

struct StarMatrices {
  MatrixXcd phi_t;  // diagonal N x N
  MatrixXcd phi_r;
};

/// Diagonal entry n of Phi_i is sqrt(amp_i[n]) * exp(j*phase_i[n]).
StarMatrices star_matrices(const StarCoefficients& c);

/// Diagonal of Phi(l) for DR l as a vector (v(l) in the lifted problem).
VectorXcd star_diagonal(const StarCoefficients& c, Side s);

/// Effective uplink channel g_l = H^H Phi(l) h_{u,l}.
VectorXcd effective_uplink_channel(const ChannelSet& ch,
                                   const StarCoefficients& c, int l);

/// All effective uplink channels at once.
std::vector<VectorXcd> effective_uplink_channels(const ChannelSet& ch,
                                                 const StarCoefficients& c);

/// Wraps an angle into [0, 2*pi).
double wrap_phase(double phase);

}  // namespace stariscc
