#pragma once

#include "stariscc/metrics.hpp"
#include "stariscc/types.hpp"

namespace stariscc {

struct WmmseState {
  BeamformerSet bf;
  RateAllocation rates;
  std::vector<double> trajectory;  // accepted sum rates, non-decreasing
  int iterations = 0;
  bool converged = false;
  double worst_constraint_violation = 0.0;
};

/// u = R_1^{-1} A_0 w and u_l = sqrt(P_u) R_2^{-1} g_l.
std::pair<VectorXcd, std::vector<VectorXcd>> mmse_receivers(
    const VectorXcd& w, const CovarianceBundle& cov, const ChannelSet& ch,
    const SystemConfig& cfg);

/// Reciprocals of the MSEs.
std::pair<double, std::vector<double>> auxiliary_weights(
    double e_rad, const std::vector<double>& e_dr);

struct RatePowerResult {
  VectorXcd w;
  VectorXd rates;  // bit/s
  double objective = 0.0;
  double violation = 0.0;  // verified feasibility residual of the conic point
};

/// Convex subproblem over (w, rates) with receivers and weights fixed:
/// maximize the sum rate subject to the sensing bound, per-DR capacity
/// bounds and the shared power budget.
RatePowerResult rate_power_subproblem(const BeamformerSet& bf,
                                      const ChannelSet& ch,
                                      const StarCoefficients& star,
                                      const SystemConfig& cfg);

/// Alternates closed-form receiver and weight updates with the conic
/// subproblem until the sum rate stalls.
WmmseState algorithm1(const VectorXcd& w_init, const StarCoefficients& star,
                      const ChannelSet& ch, const SystemConfig& cfg);

/// Lower bound eta = log(lambda) - lambda*e + 1 on a link capacity, nats.
inline double wmmse_eta(double lambda, double e) {
  return std::log(lambda) - lambda * e + 1.0;
}

}  // namespace stariscc
