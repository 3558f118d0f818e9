#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stariscc/channel_gen.hpp"

using namespace stariscc;

namespace {
constexpr double kPi = 3.14159265358979323846;

SystemConfig desk() {
  SystemConfig cfg;
  cfg.n_tx = 4;
  cfg.n_rx = 4;
  cfg.n_ris = 8;
  cfg.n_dr = 2;
  cfg.n_interferer = 2;
  return cfg;
}
}  // namespace

TEST_CASE("geometry: fixed node positions") {
  SystemConfig cfg = desk();
  Rng rng(1);
  const Geometry g = place_geometry(cfg, rng);
  CHECK(g.pos_ris.x() == 0.0);
  CHECK(g.pos_ris.y() == 20.0);
  CHECK(g.pos_tr.x() == 0.0);
  CHECK(g.pos_tr.y() == 10.0);
  CHECK(g.pos_bs.norm() == 0.0);
  CHECK(g.theta_target == doctest::Approx(0.0));
}

TEST_CASE("geometry: four interferer angles") {
  SystemConfig cfg = desk();
  cfg.n_interferer = 4;
  Rng rng(1);
  const Geometry g = place_geometry(cfg, rng);
  REQUIRE(g.thetas_interf.size() == 4);
  CHECK(g.thetas_interf[0] == doctest::Approx(-kPi / 3.0));
  CHECK(g.thetas_interf[1] == doctest::Approx(-kPi / 6.0));
  CHECK(g.thetas_interf[2] == doctest::Approx(kPi / 6.0));
  CHECK(g.thetas_interf[3] == doctest::Approx(kPi / 3.0));
  for (double d : g.dist_bs_interf) CHECK(d == doctest::Approx(10.0));
}

TEST_CASE("geometry: DRs sit on the radius-5 circle, split evenly") {
  SystemConfig cfg = desk();
  cfg.n_dr = 6;
  Rng rng(42);
  const Geometry g = place_geometry(cfg, rng);
  int n_t = 0, n_r = 0;
  for (int l = 0; l < cfg.n_dr; ++l) {
    CHECK(g.dist_ris_dr[l] == doctest::Approx(5.0));
    CHECK((g.pos_dr[l] - g.pos_ris).norm() == doctest::Approx(5.0).epsilon(1e-12));
    if (g.side[l] == Side::transmission) {
      ++n_t;
      CHECK(g.pos_dr[l].y() >= 20.0);
    } else {
      ++n_r;
      CHECK(g.pos_dr[l].y() <= 20.0);
    }
  }
  CHECK(n_t == 3);
  CHECK(n_r == 3);
}

TEST_CASE("geometry: odd DR count is rejected") {
  SystemConfig cfg = desk();
  cfg.n_dr = 3;
  Rng rng(1);
  CHECK_THROWS_AS(place_geometry(cfg, rng), ConfigError);
}

TEST_CASE("path loss closed forms") {
  SystemConfig cfg = desk();
  CHECK(path_loss(1.0, cfg) == doctest::Approx(1.0e-3).epsilon(1e-15));
  CHECK(path_loss(10.0, cfg) == doctest::Approx(6.30957344480193e-6).epsilon(1e-12));
  CHECK(path_loss_sensing(10.0, cfg) ==
        doctest::Approx(1.0e-3 * std::pow(20.0, -2.2)).epsilon(1e-12));
}

TEST_CASE("rician: infinite K-factor recovers the LoS component") {
  SystemConfig cfg = desk();
  Rng rng(3);
  const double beta = 2.5e-4;
  const MatrixXcd los = los_component(4, 3, 0.4, -0.2);
  const MatrixXcd h = rician_channel(4, 3, beta, 1e12, los, rng);
  const MatrixXcd want = std::sqrt(beta) * los;
  CHECK((h - want).cwiseAbs().maxCoeff() <= 1e-4 * std::sqrt(beta));
}

TEST_CASE("rician: zero path loss gives the zero matrix") {
  Rng rng(3);
  const MatrixXcd los = los_component(2, 2, 0.0, 0.0);
  CHECK(rician_channel(2, 2, 0.0, 2.0, los, rng).norm() == 0.0);
}

TEST_CASE("rician: mean squared Frobenius norm matches beta*rows*cols") {
  Rng rng(17);
  const double beta = 3.7e-2;
  const double eps = 2.0;
  const int rows = 2, cols = 2;
  const MatrixXcd los = los_component(rows, cols, 0.3, 0.9);
  double acc = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    acc += rician_channel(rows, cols, beta, eps, los, rng).squaredNorm();
  }
  const double want = beta * rows * cols;
  CHECK(acc / draws == doctest::Approx(want).epsilon(0.02));
}

TEST_CASE("rician: empirical K-factor matches the configured ratio") {
  Rng rng(23);
  const double eps = 2.0;
  const int draws = 20000;
  const MatrixXcd los = los_component(2, 2, 0.5, -0.1);
  MatrixXcd mean = MatrixXcd::Zero(2, 2);
  double pow_acc = 0.0;
  std::vector<MatrixXcd> all;
  all.reserve(draws);
  for (int i = 0; i < draws; ++i) {
    const MatrixXcd h = rician_channel(2, 2, 1.0, eps, los, rng);
    mean += h;
    all.push_back(h);
  }
  mean /= draws;
  for (const auto& h : all) pow_acc += (h - mean).squaredNorm();
  const double nlos_power = pow_acc / draws;
  const double los_power = mean.squaredNorm();
  CHECK(los_power / nlos_power == doctest::Approx(eps).epsilon(0.05));
}

TEST_CASE("realize_channels is deterministic for a fixed seed") {
  SystemConfig cfg = desk();
  Rng rng_a(99);
  Rng rng_b(99);
  const Geometry ga = place_geometry(cfg, rng_a);
  const Geometry gb = place_geometry(cfg, rng_b);
  const ChannelSet a = realize_channels(cfg, ga, rng_a);
  const ChannelSet b = realize_channels(cfg, gb, rng_b);
  CHECK((a.h_bs_ris - b.h_bs_ris).norm() == 0.0);
  CHECK((a.a_total - b.a_total).norm() == 0.0);
  for (int l = 0; l < a.n_dr(); ++l) {
    CHECK((a.h_ris_dr[l] - b.h_ris_dr[l]).norm() == 0.0);
    CHECK(a.side[l] == b.side[l]);
  }
}

TEST_CASE("realize_channels with no DRs still builds sensing channels") {
  SystemConfig cfg = desk();
  cfg.n_dr = 0;
  Rng rng(5);
  const Geometry g = place_geometry(cfg, rng);
  const ChannelSet ch = realize_channels(cfg, g, rng);
  CHECK(ch.n_dr() == 0);
  CHECK(ch.a_target.norm() > 0.0);
  Eigen::JacobiSVD<MatrixXcd> svd(ch.a_target);
  CHECK(svd.singularValues()(1) <= 1e-12 * svd.singularValues()(0));
}

TEST_CASE("mean DR link energy matches the path-loss budget") {
  SystemConfig cfg = desk();
  cfg.n_dr = 2;
  Rng rng(31);
  const Geometry g = place_geometry(cfg, rng);
  double acc = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const ChannelSet ch = realize_channels(cfg, g, rng);
    acc += ch.h_ris_dr[0].squaredNorm();
  }
  const double want =
      cfg.n_ris * cfg.ref_loss_linear * std::pow(5.0, -cfg.pathloss_exp);
  CHECK(acc / draws == doctest::Approx(want).epsilon(0.02));
}
