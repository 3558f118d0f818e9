#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stariscc/ao.hpp"
#include "stariscc/types.hpp"

namespace stariscc {

struct SweepSpec {
  enum class Param { p_bs, gamma_rad, n_ris, none };
  Param param = Param::p_bs;
  std::vector<double> values;  // linear units of the swept field
  std::vector<SchemeKind> schemes = {SchemeKind::proposed_star};
  int draws = 5;
  std::uint64_t seed = 1;

  void validate() const;
  static std::string param_name(Param p);
};

struct ResultRow {
  std::string scheme;
  double swept_value = 0.0;
  int draw = 0;
  double sum_rate_bps = 0.0;
  double sensing_sinr_db = 0.0;
  int iterations = 0;
  double wall_seconds = 0.0;
  std::string termination;
};

/// Desk-scale defaults (CI-sized) and the paper-scale profile.
SystemConfig desk_config();
SystemConfig paper_config();

/// Key/value JSON document mirroring SystemConfig fields; powers are given
/// in dBm/dB and converted once here.
SystemConfig load_config(const std::string& path);
SystemConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const SystemConfig& cfg);
std::optional<SweepSpec> sweep_from_config_file(const std::string& path,
                                                const SystemConfig& cfg);

/// One full solve; also serializes report.json when out_dir is nonempty.
SolveReport run_single(const SystemConfig& cfg, SchemeKind scheme,
                       const std::string& out_dir);

/// Outer-iteration trajectories for the (L, P_u) grid of the convergence
/// figure; writes convergence.csv.
void run_convergence(const SystemConfig& cfg, const std::string& out_dir,
                     const std::vector<int>& l_values = {4, 8},
                     const std::vector<double>& p_u_dbm = {10.0, 15.0},
                     int draws = 1);

/// Monte Carlo sweep with matched channel draws across schemes; writes
/// sweep_<param>.csv (per-draw rows) and sweep_<param>_summary.csv.
std::vector<ResultRow> run_sweep(const SweepSpec& spec, const SystemConfig& cfg,
                                 const std::string& out_dir);

/// Solves the default instance and writes the normalized pattern on a
/// one-degree grid to beampattern.csv.
struct BeampatternResult {
  std::vector<double> theta_deg;
  std::vector<double> gain;  // normalized, max exactly 1
  std::vector<bool> is_interferer;
  double argmax_deg = 0.0;
  double worst_interferer_gain_db = 0.0;
};
BeampatternResult run_beampattern(const SystemConfig& cfg,
                                  const std::string& out_dir);

/// Invariant/property suite plus the tiny-instance oracle gap report.
struct ValidationLine {
  std::string name;
  bool passed = false;
  std::string detail;
};
struct ValidationReport {
  std::vector<ValidationLine> lines;
  bool all_passed() const;
};
ValidationReport run_validate(const SystemConfig& cfg);

/// Exhaustive-grid upper bound for the two-antenna single-DR instance.
struct TinyOracleResult {
  double oracle_bps = 0.0;
  double ao_bps = 0.0;
};
SystemConfig tiny_instance_config();
ChannelSet tiny_instance_channels(const SystemConfig& cfg, std::uint64_t seed);
double tiny_instance_grid_oracle(const SystemConfig& cfg, const ChannelSet& ch,
                                 int min_points = 10000);
TinyOracleResult tiny_instance_oracle(std::uint64_t seed);

/// Mean over draws for each (scheme, value) pair of a sweep result.
double sweep_mean(const std::vector<ResultRow>& rows, SchemeKind scheme,
                  double value);

}  // namespace stariscc
