#pragma once

#include "stariscc/rng.hpp"
#include "stariscc/types.hpp"

namespace stariscc {

/// BS at the origin, RIS at (0,20), TR at (0,10), interferers on the
/// radius-10 circle, DRs on the radius-5 circle around the RIS with an
/// equal transmission/reflection split. Requires even n_dr.
Geometry place_geometry(const SystemConfig& cfg, Rng& rng);

/// beta = D * d^-alpha. Sensing links use effective distance 2d.
double path_loss(double d, const SystemConfig& cfg);
double path_loss_sensing(double d, const SystemConfig& cfg);

/// sqrt(beta) * ( sqrt(eps/(eps+1)) * LoS + sqrt(1/(eps+1)) * NLoS ), with
/// i.i.d. unit-variance circular Gaussian NLoS entries.
MatrixXcd rician_channel(int rows, int cols, double beta, double eps,
                         const MatrixXcd& los, Rng& rng);

/// Unit-modulus LoS matrix for a link: outer product of the array phase
/// ramps at the two ends (RIS treated as a linear array).
MatrixXcd los_component(int rows, int cols, double theta_rows, double theta_cols);

/// Draws every propagation matrix for one coherence block.
ChannelSet realize_channels(const SystemConfig& cfg, const Geometry& geom, Rng& rng);

}  // namespace stariscc
