#pragma once

#include "stariscc/ao.hpp"

namespace stariscc {

/// Two conventional RISs: the first N/2 elements transmit at full
/// amplitude, the rest reflect. Requires even N.
StarDiagTemplate conventional_ris_template(int n_ris);

/// Every element splits its energy evenly; only phases are optimized.
StarDiagTemplate equal_split_template(int n_ris);

/// No sensing: w = 0, sensing constraint removed, the whole budget goes
/// to computation.
SolveReport offloading_only_pipeline(const SystemConfig& cfg,
                                     const ChannelSet& ch, Rng& rng);

/// Dispatch on the scheme enum.
SolveReport run_scheme(SchemeKind scheme, const SystemConfig& cfg,
                       const ChannelSet& ch, Rng& rng);

}  // namespace stariscc
