#include "stariscc/baselines.hpp"

namespace stariscc {

std::string scheme_name(SchemeKind k) {
  switch (k) {
    case SchemeKind::proposed_star: return "proposed_star";
    case SchemeKind::conventional_ris: return "conventional_ris";
    case SchemeKind::equal_split_star: return "equal_split_star";
    case SchemeKind::offloading_only: return "offloading_only";
  }
  return "unknown";
}

SchemeKind scheme_from_name(const std::string& name) {
  if (name == "proposed_star") return SchemeKind::proposed_star;
  if (name == "conventional_ris") return SchemeKind::conventional_ris;
  if (name == "equal_split_star") return SchemeKind::equal_split_star;
  if (name == "offloading_only") return SchemeKind::offloading_only;
  throw ConfigError("unknown scheme: " + name);
}

StarDiagTemplate conventional_ris_template(int n_ris) {
  if (n_ris % 2 != 0) {
    throw ConfigError("conventional RIS split needs an even element count");
  }
  VectorXd t = VectorXd::Zero(n_ris);
  VectorXd r = VectorXd::Zero(n_ris);
  for (int k = 0; k < n_ris / 2; ++k) t(k) = 1.0;
  for (int k = n_ris / 2; k < n_ris; ++k) r(k) = 1.0;
  return StarDiagTemplate::fixed(std::move(t), std::move(r));
}

StarDiagTemplate equal_split_template(int n_ris) {
  return StarDiagTemplate::fixed(VectorXd::Constant(n_ris, 0.5),
                                 VectorXd::Constant(n_ris, 0.5));
}

SolveReport offloading_only_pipeline(const SystemConfig& cfg,
                                     const ChannelSet& ch, Rng& rng) {
  return algorithm3_scheme(cfg, ch, rng, SchemeKind::offloading_only);
}

SolveReport run_scheme(SchemeKind scheme, const SystemConfig& cfg,
                       const ChannelSet& ch, Rng& rng) {
  return algorithm3_scheme(cfg, ch, rng, scheme);
}

}  // namespace stariscc
