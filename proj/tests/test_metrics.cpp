#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stariscc/channel_gen.hpp"
#include "stariscc/core_model.hpp"
#include "stariscc/metrics.hpp"

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

StarCoefficients random_star(int n, Rng& rng) {
  StarCoefficients c;
  c.amp_t = VectorXd(n);
  c.amp_r = VectorXd(n);
  c.phase_t = VectorXd(n);
  c.phase_r = VectorXd(n);
  for (int k = 0; k < n; ++k) {
    c.amp_t(k) = rng.uniform();
    c.amp_r(k) = 1.0 - c.amp_t(k);
    c.phase_t(k) = rng.uniform(0.0, 2.0 * kPi);
    c.phase_r(k) = rng.uniform(0.0, 2.0 * kPi);
  }
  return c;
}

struct Instance {
  SystemConfig cfg;
  ChannelSet ch;
  StarCoefficients star;
  VectorXcd w;
};

Instance desk_instance(std::uint64_t seed) {
  Instance in;
  in.cfg = desk();
  Rng rng(seed);
  const Geometry g = place_geometry(in.cfg, rng);
  in.ch = realize_channels(in.cfg, g, rng);
  in.star = random_star(in.cfg.n_ris, rng);
  in.w = VectorXcd(in.cfg.n_tx);
  for (int i = 0; i < in.cfg.n_tx; ++i) in.w(i) = rng.cnormal();
  in.w *= std::sqrt(0.5 * in.cfg.p_bs_watt) / in.w.norm();
  return in;
}
}  // namespace

TEST_CASE("uplink SINR: matched filter without interference") {
  Instance in = desk_instance(2);
  in.cfg.n_dr = 1;
  in.ch.h_ris_dr.resize(1);
  in.ch.side.resize(1);
  BeamformerSet bf;
  bf.w = VectorXcd::Zero(in.cfg.n_tx);
  const VectorXcd g = effective_uplink_channel(in.ch, in.star, 0);
  bf.u_dr = {g};
  const double got = uplink_sinr(0, bf, in.ch, in.star, in.cfg);
  const double want = in.cfg.p_dr_watt * g.squaredNorm() / in.cfg.noise_watt;
  CHECK(got == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("uplink SINR: zero effective channel gives zero") {
  Instance in = desk_instance(3);
  // force the DR's side to carry no energy
  for (int k = 0; k < in.cfg.n_ris; ++k) {
    in.star.amp_t(k) = in.ch.side[0] == Side::transmission ? 0.0 : 1.0;
    in.star.amp_r(k) = 1.0 - in.star.amp_t(k);
  }
  BeamformerSet bf;
  bf.w = in.w;
  bf.u_dr = {VectorXcd::Ones(in.cfg.n_rx), VectorXcd::Ones(in.cfg.n_rx)};
  CHECK(uplink_sinr(0, bf, in.ch, in.star, in.cfg) == 0.0);
}

TEST_CASE("uplink SINR matches an independent re-implementation") {
  Instance in = desk_instance(4);
  Rng rng(77);
  BeamformerSet bf;
  bf.w = in.w;
  for (int l = 0; l < in.cfg.n_dr; ++l) {
    VectorXcd u(in.cfg.n_rx);
    for (int i = 0; i < in.cfg.n_rx; ++i) u(i) = rng.cnormal();
    bf.u_dr.push_back(u);
  }
  for (int l = 0; l < in.cfg.n_dr; ++l) {
    // naive loops straight from the received-signal definition
    const VectorXcd& u = bf.u_dr[l];
    std::vector<VectorXcd> gs;
    for (int i = 0; i < in.cfg.n_dr; ++i) {
      VectorXcd gi = VectorXcd::Zero(in.cfg.n_rx);
      const VectorXd& amp =
          in.ch.side[i] == Side::transmission ? in.star.amp_t : in.star.amp_r;
      const VectorXd& ph =
          in.ch.side[i] == Side::transmission ? in.star.phase_t : in.star.phase_r;
      for (int a = 0; a < in.cfg.n_rx; ++a) {
        for (int k = 0; k < in.cfg.n_ris; ++k) {
          gi(a) += std::conj(in.ch.h_bs_ris(k, a)) * std::sqrt(amp(k)) *
                   std::polar(1.0, ph(k)) * in.ch.h_ris_dr[i](k);
        }
      }
      gs.push_back(gi);
    }
    cplx sig(0.0, 0.0);
    for (int a = 0; a < in.cfg.n_rx; ++a) sig += std::conj(u(a)) * gs[l](a);
    double num = in.cfg.p_dr_watt * std::norm(sig);
    double den = in.cfg.noise_watt * u.squaredNorm();
    for (int i = 0; i < in.cfg.n_dr; ++i) {
      if (i == l) continue;
      cplx c(0.0, 0.0);
      for (int a = 0; a < in.cfg.n_rx; ++a) c += std::conj(u(a)) * gs[i](a);
      den += in.cfg.p_dr_watt * std::norm(c);
    }
    cplx echo(0.0, 0.0);
    const VectorXcd aw = in.ch.a_total * in.w;
    for (int a = 0; a < in.cfg.n_rx; ++a) echo += std::conj(u(a)) * aw(a);
    den += std::norm(echo);

    const double got = uplink_sinr(l, bf, in.ch, in.star, in.cfg);
    CHECK(got == doctest::Approx(num / den).epsilon(1e-10));
  }
}

TEST_CASE("sensing SINR: aligned receiver without interference") {
  Instance in = desk_instance(5);
  in.ch.a_interf.setZero();
  in.ch.a_total = in.ch.a_target;
  const VectorXcd u = in.ch.a_target * in.w;
  const double got = sensing_sinr(u, in.w, in.ch, in.cfg);
  const double want = (in.ch.a_target * in.w).squaredNorm() / in.cfg.noise_watt;
  CHECK(got == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("sensing SINR: beamformer orthogonal to the target response") {
  Instance in = desk_instance(6);
  const VectorXcd at = steering_vector(in.ch.theta_target, in.cfg.n_tx);
  // project w onto the orthogonal complement of a_t
  VectorXcd w = in.w - at * (at.dot(in.w));
  const VectorXcd u = VectorXcd::Ones(in.cfg.n_rx);
  CHECK(sensing_sinr(u, w, in.ch, in.cfg) <= 1e-24);
}

TEST_CASE("sensing SINR is invariant to positive scaling of the receiver") {
  Instance in = desk_instance(7);
  Rng rng(50);
  VectorXcd u(in.cfg.n_rx);
  for (int i = 0; i < in.cfg.n_rx; ++i) u(i) = rng.cnormal();
  const double base = sensing_sinr(u, in.w, in.ch, in.cfg);
  for (int t = 0; t < 10; ++t) {
    const double s = std::exp(rng.uniform(-8.0, 8.0));
    CHECK(sensing_sinr(s * u, in.w, in.ch, in.cfg) ==
          doctest::Approx(base).epsilon(1e-11));
  }
}

TEST_CASE("sensing SINR at the MMSE receiver matches the equivalent capacity") {
  Instance in = desk_instance(8);
  const CovarianceBundle cov = build_covariances(in.w, in.star, in.ch, in.cfg);
  const VectorXcd a0w = in.ch.a_target * in.w;
  const VectorXcd u = cov.r_equiv.ldlt().solve(a0w);
  const double gamma_eq =
      a0w.dot(cov.r_rad_noise.ldlt().solve(a0w)).real();
  const double r_rad = std::log1p(gamma_eq);
  const double got = sensing_sinr(u, in.w, in.ch, in.cfg);
  CHECK(got == doctest::Approx(std::exp(r_rad) - 1.0).epsilon(1e-9));
}

TEST_CASE("rate/sinr conversions") {
  SystemConfig cfg = desk();
  CHECK(rate_from_sinr(0.0, cfg) == 0.0);
  CHECK(sinr_from_rate(0.0, 1.0, cfg) == 0.0);

  cfg.rate_log_base = RateLogBase::base2;
  CHECK(rate_from_sinr(1.0, cfg) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sinr_from_rate(1.0, 1.0, cfg) == doctest::Approx(1.0).epsilon(1e-15));

  cfg.rate_log_base = RateLogBase::natural;
  CHECK(sinr_from_rate(1.0, 1.0, cfg) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-15));

  // round trips at both bases
  for (RateLogBase b : {RateLogBase::base2, RateLogBase::natural}) {
    cfg.rate_log_base = b;
    for (double gamma : {1e-6, 0.5, 3.0, 1e4}) {
      const double r = cfg.bandwidth_hz * rate_from_sinr(gamma, cfg);
      CHECK(sinr_from_rate(r, cfg.bandwidth_hz, cfg) ==
            doctest::Approx(gamma).epsilon(1e-12));
    }
  }
}

TEST_CASE("compute power examples") {
  SystemConfig cfg = desk();
  CHECK(compute_power(0.0, cfg) == 0.0);
  cfg.kappa = 1e-26;
  cfg.phi_cycles_per_bit = 3e3;
  const double p = compute_power(1.5466e5, cfg);
  const double direct = 1e-26 * std::pow(3e3 * 1.5466e5, 3.0);
  CHECK(p == doctest::Approx(direct).epsilon(1e-14));
  CHECK(p == doctest::Approx(0.9985).epsilon(2e-3));
  CHECK(compute_power(1.0e5, cfg) < compute_power(1.2e5, cfg));
}

TEST_CASE("mse: zero receiver gives unit error") {
  Instance in = desk_instance(9);
  const CovarianceBundle cov = build_covariances(in.w, in.star, in.ch, in.cfg);
  CHECK(mse_rad(VectorXcd::Zero(in.cfg.n_rx), in.w, cov, in.ch) == 1.0);
}

TEST_CASE("mse: closed-form MMSE value") {
  Instance in = desk_instance(10);
  const CovarianceBundle cov = build_covariances(in.w, in.star, in.ch, in.cfg);
  const VectorXcd a0w = in.ch.a_target * in.w;
  const VectorXcd u = cov.r_equiv.ldlt().solve(a0w);
  const double e = mse_rad(u, in.w, cov, in.ch);
  const double gamma_eq = a0w.dot(cov.r_rad_noise.ldlt().solve(a0w)).real();
  CHECK(e == doctest::Approx(1.0 / (1.0 + gamma_eq)).epsilon(1e-10));
}

TEST_CASE("mse: gradient descent over the receiver reaches the closed form") {
  // benign scales so plain descent converges
  Rng rng(12);
  const int nr = 3, nt = 3;
  MatrixXcd a0(nr, nt), ai(nr, nt);
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < nt; ++j) {
      a0(i, j) = rng.cnormal();
      ai(i, j) = 0.3 * rng.cnormal();
    }
  }
  VectorXcd w(nt);
  for (int i = 0; i < nt; ++i) w(i) = rng.cnormal();

  ChannelSet ch;
  ch.a_target = a0;
  ch.a_interf = ai;
  ch.a_total = a0 + ai;
  SystemConfig cfg = desk();
  cfg.noise_watt = 0.5;
  cfg.n_rx = nr;
  cfg.n_tx = nt;
  cfg.n_dr = 0;
  StarCoefficients star = StarCoefficients::equal_split(1);
  ch.h_bs_ris = MatrixXcd::Zero(1, nr);

  const CovarianceBundle cov = build_covariances(w, star, ch, cfg);
  VectorXcd u = VectorXcd::Zero(nr);
  for (int it = 0; it < 20000; ++it) {
    const VectorXcd grad = 2.0 * (cov.r_equiv * u - a0 * w);
    const double gg = grad.squaredNorm();
    if (gg < 1e-30) break;
    const double curv = 2.0 * grad.dot(cov.r_equiv * grad).real();
    u -= (gg / curv) * grad;
  }
  const double e_num = mse_rad(u, w, cov, ch);
  const VectorXcd a0w = a0 * w;
  const VectorXcd u_star = cov.r_equiv.ldlt().solve(a0w);
  const double e_closed = mse_rad(u_star, w, cov, ch);
  CHECK(e_num == doctest::Approx(e_closed).epsilon(1e-8));
}

TEST_CASE("covariances are Hermitian with noise-floor eigenvalues") {
  Instance in = desk_instance(13);
  const CovarianceBundle cov = build_covariances(in.w, in.star, in.ch, in.cfg);
  auto check_mat = [&](const MatrixXcd& m) {
    CHECK((m - m.adjoint()).norm() <= 1e-10 * m.norm());
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= in.cfg.noise_watt - 1e-12);
  };
  check_mat(cov.r_equiv);
  check_mat(cov.r_total_rx);
  check_mat(cov.r_rad_noise);
  for (const auto& rl : cov.r_interf_dr) check_mat(rl);
}

TEST_CASE("beampattern normalization and matched peak") {
  Instance in = desk_instance(14);
  const double th0 = 0.2;
  SUBCASE("single-point grid") {
    const VectorXd g = beampattern(VectorXcd::Ones(4), VectorXcd::Ones(4), {th0});
    CHECK(g.size() == 1);
    CHECK(g(0) == 1.0);
  }
  SUBCASE("matched pair peaks at the target angle") {
    const VectorXcd u = steering_vector(th0, 6);
    const VectorXcd w = steering_vector(th0, 6);
    std::vector<double> grid;
    for (int i = -90; i <= 90; ++i) grid.push_back(i * kPi / 180.0);
    const VectorXd g = beampattern(u, w, grid);
    Eigen::Index argmax;
    g.maxCoeff(&argmax);
    CHECK(std::abs(grid[argmax] - th0) <= kPi / 180.0 + 1e-12);
    CHECK(g.maxCoeff() == 1.0);
  }
  SUBCASE("all-zero pattern is rejected") {
    CHECK_THROWS_AS(
        beampattern(VectorXcd::Zero(4), VectorXcd::Ones(4), {0.0, 0.1}),
        DegeneratePattern);
  }
}
