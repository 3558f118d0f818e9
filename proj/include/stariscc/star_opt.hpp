#pragma once

#include "stariscc/types.hpp"

namespace stariscc {

/// Per-DR SINR targets and the lifted constraint data
/// B_l^i = P_u diag(h_{u,i}^H) H u_l u_l^H H^H diag(h_{u,i}).
struct OffloadTargets {
  VectorXd gamma_dr;    // linear SINR target per DR
  VectorXd noise_terms; // N_l = |u_l^H A w|^2 + sigma^2 ||u_l||^2
  std::vector<std::vector<MatrixXcd>> b_matrices;  // [l][i], N x N Hermitian
  std::vector<Side> side;  // which lifted matrix V(i) applies per DR
  int n_ris = 0;
};

OffloadTargets build_offload_targets(const RateAllocation& rates,
                                     const BeamformerSet& bf,
                                     const ChannelSet& ch,
                                     const SystemConfig& cfg);

/// Diagonal constraint pattern for the lifted matrices.
struct StarDiagTemplate {
  enum class Kind { sum_to_one, fixed } kind = Kind::sum_to_one;
  VectorXd diag_t;  // used when kind == fixed
  VectorXd diag_r;

  static StarDiagTemplate sum_to_one() { return {}; }
  static StarDiagTemplate fixed(VectorXd t, VectorXd r) {
    StarDiagTemplate out;
    out.kind = Kind::fixed;
    out.diag_t = std::move(t);
    out.diag_r = std::move(r);
    return out;
  }
};

struct LiftedStar {
  MatrixXcd v_t;
  MatrixXcd v_r;
  double residual_t = 0.0;  // nuclear minus spectral norm per side
  double residual_r = 0.0;
  std::vector<double> trajectory;         // penalty surrogate per SCA iterate
  std::vector<double> margin_trajectory;  // exploration stage objective
  int iterations = 0;
  bool rank_converged = true;
  double worst_diag_violation = 0.0;
};

/// Linear majorant of -||V||_2 at the expansion point: the functional
/// V -> -||Vprev||_2 - tr(b b^H (V - Vprev)) with b the dominant eigenvector.
struct SpectralSurrogate {
  MatrixXcd bbh;
  double value_at_expansion = 0.0;
  MatrixXcd expansion;

  double operator()(const MatrixXcd& v) const {
    return value_at_expansion - (bbh * (v - expansion)).trace().real();
  }
};

SpectralSurrogate sca_surrogate(const MatrixXcd& v_prev);

/// SCA on the lifted feasibility problem: a margin-improvement stage
/// followed by the pure nuclear-minus-spectral penalty stage that drives
/// both matrices to rank one.
LiftedStar algorithm2(const MatrixXcd& v_init_t, const MatrixXcd& v_init_r,
                      const OffloadTargets& targets, const SystemConfig& cfg,
                      const StarDiagTemplate& tmpl = {});

struct ExtractionResult {
  StarCoefficients coeffs;
  double degradation = 0.0;  // worst relative SINR-constraint slip
  bool extraction_loss = false;
};

/// Phases from the dominant eigenvectors, amplitudes from the diagonals,
/// amplitude pairs renormalized to exact energy conservation.
ExtractionResult extract_rank_one(const LiftedStar& ls,
                                  const OffloadTargets& targets);

/// Lifts coefficients into V_i = v_i v_i^H.
std::pair<MatrixXcd, MatrixXcd> lift_star(const StarCoefficients& c);

/// Nuclear minus spectral norm of a Hermitian PSD matrix.
double penalty_residual(const MatrixXcd& v);

/// Constraint margins (lhs - rhs) of the trace-SINR rows for given lifted
/// matrices, one entry per DR (zero-target rows report +inf margin).
VectorXd target_margins(const MatrixXcd& v_t, const MatrixXcd& v_r,
                        const OffloadTargets& targets);

}  // namespace stariscc
