#include "stariscc/channel_gen.hpp"

#include <cmath>

#include "stariscc/core_model.hpp"

namespace stariscc {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Geometry place_geometry(const SystemConfig& cfg, Rng& rng) {
  if (cfg.n_dr % 2 != 0) {
    throw ConfigError("equal side-split placement needs an even DR count");
  }
  Geometry g;
  g.pos_bs = {0.0, 0.0};
  g.pos_ris = {0.0, 20.0};
  g.pos_tr = {0.0, 10.0};

  g.dist_bs_ris = (g.pos_ris - g.pos_bs).norm();
  g.dist_bs_tr = (g.pos_tr - g.pos_bs).norm();
  // Angles are measured from the BS array broadside (the +y axis here).
  g.theta_target = std::atan2(g.pos_tr.x(), g.pos_tr.y());

  static const double kInterfererAngles[4] = {-kPi / 3.0, -kPi / 6.0,
                                              kPi / 6.0, kPi / 3.0};
  for (int m = 0; m < cfg.n_interferer; ++m) {
    const double th = kInterfererAngles[m % 4];
    g.thetas_interf.push_back(th);
    g.dist_bs_interf.push_back(10.0);
  }

  const int half = cfg.n_dr / 2;
  for (int l = 0; l < cfg.n_dr; ++l) {
    const bool upper = l < half;  // transmission side: beyond the RIS
    const double ang = upper ? rng.uniform(0.0, kPi) : rng.uniform(-kPi, 0.0);
    Eigen::Vector2d p = g.pos_ris + 5.0 * Eigen::Vector2d(std::cos(ang), std::sin(ang));
    g.pos_dr.push_back(p);
    g.dist_ris_dr.push_back(5.0);
    g.side.push_back(upper ? Side::transmission : Side::reflection);
  }
  return g;
}

double path_loss(double d, const SystemConfig& cfg) {
  return cfg.ref_loss_linear * std::pow(d, -cfg.pathloss_exp);
}

double path_loss_sensing(double d, const SystemConfig& cfg) {
  return cfg.ref_loss_linear * std::pow(2.0 * d, -cfg.pathloss_exp);
}

MatrixXcd los_component(int rows, int cols, double theta_rows, double theta_cols) {
  VectorXcd a(rows), b(cols);
  const double sr = std::sin(theta_rows);
  const double sc = std::sin(theta_cols);
  for (int k = 0; k < rows; ++k) a(k) = std::polar(1.0, sr * k);
  for (int k = 0; k < cols; ++k) b(k) = std::polar(1.0, sc * k);
  return a * b.adjoint();
}

MatrixXcd rician_channel(int rows, int cols, double beta, double eps,
                         const MatrixXcd& los, Rng& rng) {
  MatrixXcd nlos(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) nlos(i, j) = rng.cnormal();
  }
  const double w_los = std::sqrt(eps / (eps + 1.0));
  const double w_nlos = std::sqrt(1.0 / (eps + 1.0));
  return std::sqrt(beta) * (w_los * los + w_nlos * nlos);
}

ChannelSet realize_channels(const SystemConfig& cfg, const Geometry& geom, Rng& rng) {
  ChannelSet ch;
  const int n = cfg.n_ris;
  const int nr = cfg.n_rx;

  // BS->RIS link: ULA response at the BS seen from the RIS direction,
  // phase ramp across RIS elements.
  const double th_bs_ris =
      std::atan2(geom.pos_ris.x() - geom.pos_bs.x(), geom.pos_ris.y() - geom.pos_bs.y());
  const MatrixXcd los_h = los_component(n, nr, -th_bs_ris, th_bs_ris);
  ch.h_bs_ris = rician_channel(n, nr, path_loss(geom.dist_bs_ris, cfg),
                               cfg.rician_factor_linear, los_h, rng);

  const int n_dr = static_cast<int>(geom.pos_dr.size());
  for (int l = 0; l < n_dr; ++l) {
    const double th =
        std::atan2(geom.pos_dr[l].x() - geom.pos_ris.x(), geom.pos_dr[l].y() - geom.pos_ris.y());
    const MatrixXcd los = los_component(n, 1, th, 0.0);
    ch.h_ris_dr.push_back(rician_channel(n, 1, path_loss(geom.dist_ris_dr[l], cfg),
                                         cfg.rician_factor_linear, los, rng));
    ch.side.push_back(geom.side[l]);
  }

  // Sensing coefficients: magnitude from the round-trip path loss,
  // phase uniform per realization.
  ch.theta_target = geom.theta_target;
  ch.theta_interf = geom.thetas_interf;
  const double mag0 = std::sqrt(path_loss_sensing(geom.dist_bs_tr, cfg));
  ch.alpha_target = mag0 * std::polar(1.0, rng.uniform(0.0, 2.0 * kPi));
  for (std::size_t m = 0; m < geom.thetas_interf.size(); ++m) {
    const double mag = std::sqrt(path_loss_sensing(geom.dist_bs_interf[m], cfg));
    ch.alpha_interf.push_back(mag * std::polar(1.0, rng.uniform(0.0, 2.0 * kPi)));
  }
  const SensingChannels sc =
      build_sensing_channels(geom.theta_target, geom.thetas_interf, ch.alpha_target,
                             ch.alpha_interf, cfg.n_tx, cfg.n_rx);
  ch.a_target = sc.a_target;
  ch.a_interf = sc.a_interf;
  ch.a_total = sc.a_total;
  return ch;
}

}  // namespace stariscc
