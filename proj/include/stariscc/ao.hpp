#pragma once

#include "stariscc/rng.hpp"
#include "stariscc/star_opt.hpp"
#include "stariscc/types.hpp"
#include "stariscc/wmmse.hpp"

namespace stariscc {

struct SolveReport {
  SchemeKind scheme = SchemeKind::proposed_star;
  std::vector<double> outer_trajectory;  // accepted sum rates per outer step
  std::vector<std::vector<double>> inner_trajectories;
  BeamformerSet bf;
  StarCoefficients star;
  RateAllocation rates;
  double sensing_sinr_achieved = 0.0;
  double penalty_residual_t = 0.0;
  double penalty_residual_r = 0.0;
  double extraction_degradation = 0.0;
  double alg1_seconds = 0.0;
  double alg2_seconds = 0.0;
  int outer_iterations = 0;
  std::string termination_reason;
  double budget_violation = 0.0;   // relative overflow of the power budget
  double consistency_gap = 0.0;    // reported vs re-evaluated sum rate
  double incumbent_margin_min = 0.0;
};

/// Equal-split STAR state with i.i.d. phases and the matched-filter
/// sensing beamformer at 90% of the budget.
std::pair<VectorXcd, StarCoefficients> initialize(const SystemConfig& cfg,
                                                  const ChannelSet& ch,
                                                  Rng& rng);

/// Outer alternation between the WMMSE stage and the STAR stage.
SolveReport algorithm3(const SystemConfig& cfg, const ChannelSet& ch, Rng& rng);

/// Same loop with a baseline's constraint template and toggles.
SolveReport algorithm3_scheme(const SystemConfig& cfg, const ChannelSet& ch,
                              Rng& rng, SchemeKind scheme);

}  // namespace stariscc
