#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace stariscc {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidCoefficients : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateReceiver : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegeneratePattern : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InfeasibleSensing : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StarInfeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class RateLogBase { base2, natural };

/// All physical and algorithmic parameters. Internals are linear SI units;
/// dB/dBm conversion happens once at config load (see harness).
struct SystemConfig {
  int n_tx = 4;          // BS transmit antennas
  int n_rx = 4;          // BS receive antennas
  int n_ris = 8;         // STAR-RIS elements
  int n_dr = 2;          // decision robots
  int n_interferer = 2;  // sensing interference clusters

  double bandwidth_hz = 20.0e3;
  double p_dr_watt = 1.0e-2;        // 10 dBm
  double p_bs_watt = 1.0;           // 30 dBm
  double noise_watt = 1.0e-12;      // -90 dBm
  double gamma_rad_linear = 1.0e3;  // 30 dB
  double kappa = 1.0e-26;           // W s^3 / cycle^3
  double phi_cycles_per_bit = 3.0e3;
  double rician_factor_linear = 2.0;  // 3 dB
  double pathloss_exp = 2.2;
  double ref_loss_linear = 1.0e-3;  // -30 dB at 1 m
  double penalty_rho = 1.0e3;       // rho_t = rho_r

  // Secondary weight on the per-DR SINR margin in the STAR subproblem.
  double margin_weight = 1.0e3;

  // Algorithm 1 (WMMSE inner loop)
  double wmmse_tol = 1.0e-4;
  int wmmse_max_iter = 50;
  // Algorithm 2 (SCA over lifted STAR coefficients)
  double sca_tol = 1.0e-4;
  int sca_max_iter = 30;
  double rank_tol_factor = 1.0e-6;  // residual cap: factor * tr(V)
  // Algorithm 3 (outer alternation)
  double ao_tol = 1.0e-3;
  int ao_max_iter = 20;

  RateLogBase rate_log_base = RateLogBase::base2;
  std::uint64_t rng_seed = 1;

  /// Rate per nat of mutual information, bit/s (or nat/s in natural mode).
  double rate_scale() const;

  /// Throws ConfigError when a field is out of its documented range.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

enum class Side { transmission, reflection };

enum class SchemeKind {
  proposed_star,
  conventional_ris,
  equal_split_star,
  offloading_only,
};

std::string scheme_name(SchemeKind k);
SchemeKind scheme_from_name(const std::string& name);

/// Per-element transmission/reflection amplitudes and phases.
/// Invariant: amp_t[n] + amp_r[n] = 1, amps in [0,1], phases in [0, 2*pi).
struct StarCoefficients {
  VectorXd amp_t;
  VectorXd amp_r;
  VectorXd phase_t;
  VectorXd phase_r;

  int size() const { return static_cast<int>(amp_t.size()); }
  /// Max violation of the per-element energy-conservation equality.
  double conservation_residual() const;
  void validate(double tol = 1e-9) const;

  static StarCoefficients equal_split(int n);
};

/// One realization of all propagation matrices.
struct ChannelSet {
  MatrixXcd h_bs_ris;                // H, N x Nr
  std::vector<VectorXcd> h_ris_dr;   // h_{u,l}, each N
  std::vector<Side> side;            // membership in L_t / L_r
  MatrixXcd a_target;                // A_0, Nr x Nt
  MatrixXcd a_interf;                // A_I = sum_m A_m
  MatrixXcd a_total;                 // A = A_0 + A_I
  cplx alpha_target;                 // alpha_0
  std::vector<cplx> alpha_interf;    // alpha_m
  std::vector<double> theta_interf;  // interferer angles (for reporting)
  double theta_target = 0.0;

  int n_dr() const { return static_cast<int>(h_ris_dr.size()); }
};

/// Sensing transmit beamformer, sensing receiver, per-DR receivers and
/// the auxiliary WMMSE weights.
struct BeamformerSet {
  VectorXcd w;                  // Nt
  VectorXcd u;                  // Nr, equivalent-system / sensing receiver
  std::vector<VectorXcd> u_dr;  // Nr each
  double lambda_rad = 1.0;
  std::vector<double> lambda_dr;
};

/// Computation rates and the implied power split.
struct RateAllocation {
  VectorXd r_dr;      // bit/s
  VectorXd p_compute; // watt, kappa*(phi*r)^3
  double p_sense = 0.0;
  double sum_rate = 0.0;

  static RateAllocation from_rates(const VectorXd& rates, double p_sense,
                                   const SystemConfig& cfg);
};

/// Placement of all nodes plus derived angles/distances.
struct Geometry {
  Eigen::Vector2d pos_bs;
  Eigen::Vector2d pos_ris;
  Eigen::Vector2d pos_tr;
  std::vector<Eigen::Vector2d> pos_dr;
  double theta_target = 0.0;
  std::vector<double> thetas_interf;
  double dist_bs_ris = 0.0;
  std::vector<double> dist_ris_dr;
  double dist_bs_tr = 0.0;
  std::vector<double> dist_bs_interf;
  std::vector<Side> side;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

}  // namespace stariscc
