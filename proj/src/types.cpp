#include "stariscc/types.hpp"

#include <cmath>

namespace stariscc {

double SystemConfig::rate_scale() const {
  return rate_log_base == RateLogBase::base2 ? bandwidth_hz / std::log(2.0)
                                             : bandwidth_hz;
}

void SystemConfig::validate() const {
  if (n_tx < 1 || n_rx < 1 || n_ris < 1) {
    throw ConfigError("antenna/element counts must be at least 1");
  }
  if (n_dr < 0 || n_interferer < 0) {
    throw ConfigError("negative node count");
  }
  if (!(bandwidth_hz > 0.0) || !(p_dr_watt > 0.0) || !(p_bs_watt > 0.0) ||
      !(noise_watt > 0.0) || !(kappa > 0.0) || !(phi_cycles_per_bit > 0.0)) {
    throw ConfigError("powers, kappa, phi and bandwidth must be positive");
  }
  if (!(gamma_rad_linear > 0.0)) {
    throw ConfigError("sensing threshold must be positive");
  }
  if (pathloss_exp <= 0.0 || ref_loss_linear <= 0.0 || rician_factor_linear < 0.0) {
    throw ConfigError("invalid propagation parameters");
  }
  if (wmmse_max_iter < 1 || sca_max_iter < 1 || ao_max_iter < 1) {
    throw ConfigError("iteration caps must be at least 1");
  }
}

RateAllocation RateAllocation::from_rates(const VectorXd& rates, double p_sense,
                                          const SystemConfig& cfg) {
  RateAllocation a;
  a.r_dr = rates;
  a.p_compute = VectorXd(rates.size());
  for (int l = 0; l < rates.size(); ++l) {
    const double f = cfg.phi_cycles_per_bit * rates(l);
    a.p_compute(l) = cfg.kappa * f * f * f;
  }
  a.p_sense = p_sense;
  a.sum_rate = rates.sum();
  return a;
}

}  // namespace stariscc
