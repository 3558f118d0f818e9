#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stariscc/core_model.hpp"
#include "stariscc/rng.hpp"

using namespace stariscc;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("steering vector closed forms") {
  const VectorXcd a = steering_vector(0.0, 4);
  for (int k = 0; k < 4; ++k) {
    CHECK(a(k).real() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(a(k).imag() == doctest::Approx(0.0).epsilon(1e-15));
  }

  const VectorXcd b = steering_vector(kPi / 2.0, 2);
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(b(0) - cplx(s, 0.0)) < 1e-15);
  CHECK(std::abs(b(1) - s * std::polar(1.0, 1.0)) < 1e-15);
}

TEST_CASE("steering vectors have unit norm for random angles and sizes") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const double theta = rng.uniform(-kPi, kPi);
    const int n = 1 + static_cast<int>(rng.uniform() * 16);
    CHECK(steering_vector(theta, n).norm() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("sensing channels: empty interferer sum") {
  const auto sc = build_sensing_channels(0.3, {}, cplx(2.0, -1.0), {}, 4, 4);
  CHECK(sc.a_interf.norm() == 0.0);
  CHECK((sc.a_total - sc.a_target).norm() == 0.0);
}

TEST_CASE("sensing channels: Frobenius norm of A_0 equals |alpha_0|") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const cplx alpha = rng.cnormal();
    const auto sc = build_sensing_channels(rng.uniform(-1.0, 1.0), {}, alpha, {}, 5, 3);
    CHECK(sc.a_target.norm() == doctest::Approx(std::abs(alpha)).epsilon(1e-12));
  }
}

TEST_CASE("sensing channels: broadside all-ones case") {
  const auto sc = build_sensing_channels(0.0, {}, cplx(1.0, 0.0), {}, 2, 2);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      CHECK(std::abs(sc.a_target(i, j) - cplx(0.5, 0.0)) < 1e-15);
    }
  }
}

TEST_CASE("A_0 has exactly one nonzero singular value") {
  Rng rng(11);
  const cplx alpha = 3.0 * rng.cnormal();
  const auto sc = build_sensing_channels(0.7, {}, alpha, {}, 6, 4);
  Eigen::JacobiSVD<MatrixXcd> svd(sc.a_target);
  const auto& sv = svd.singularValues();
  CHECK(sv(0) == doctest::Approx(std::abs(alpha)).epsilon(1e-12));
  for (int i = 1; i < sv.size(); ++i) {
    CHECK(sv(i) <= 1e-12 * std::abs(alpha));
  }
}

TEST_CASE("star matrices: equal split with zero phases") {
  const auto c = StarCoefficients::equal_split(4);
  const auto m = star_matrices(c);
  for (int k = 0; k < 4; ++k) {
    CHECK(std::abs(m.phi_t(k, k) - cplx(std::sqrt(0.5), 0.0)) < 1e-15);
    CHECK(std::abs(m.phi_r(k, k) - cplx(std::sqrt(0.5), 0.0)) < 1e-15);
  }
}

TEST_CASE("star matrices: full transmission side zeroes the reflection matrix") {
  StarCoefficients c;
  c.amp_t = VectorXd::Ones(3);
  c.amp_r = VectorXd::Zero(3);
  c.phase_t = VectorXd::Zero(3);
  c.phase_r = VectorXd::Zero(3);
  const auto m = star_matrices(c);
  CHECK(m.phi_r.norm() == 0.0);
}

TEST_CASE("star matrices: per-element energy conservation") {
  Rng rng(5);
  StarCoefficients c;
  const int n = 6;
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
  const auto m = star_matrices(c);
  for (int k = 0; k < n; ++k) {
    CHECK(std::norm(m.phi_t(k, k)) + std::norm(m.phi_r(k, k)) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("star matrices: violated amplitude invariant is rejected") {
  StarCoefficients c;
  c.amp_t = VectorXd::Constant(2, 0.7);
  c.amp_r = VectorXd::Constant(2, 0.7);
  c.phase_t = VectorXd::Zero(2);
  c.phase_r = VectorXd::Zero(2);
  CHECK_THROWS_AS(star_matrices(c), InvalidCoefficients);
}

TEST_CASE("star matrices round trip through the diagonals") {
  Rng rng(9);
  StarCoefficients c;
  const int n = 5;
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
  const auto m = star_matrices(c);
  for (int k = 0; k < n; ++k) {
    CHECK(std::norm(m.phi_t(k, k)) == doctest::Approx(c.amp_t(k)).epsilon(1e-12));
    CHECK(wrap_phase(std::arg(m.phi_t(k, k))) ==
          doctest::Approx(c.phase_t(k)).epsilon(1e-12));
    CHECK(wrap_phase(std::arg(m.phi_r(k, k))) ==
          doctest::Approx(c.phase_r(k)).epsilon(1e-12));
  }
}

namespace {
ChannelSet tiny_channels(int n, int nr, int nt, const MatrixXcd& h,
                         const VectorXcd& hd, Side side) {
  ChannelSet ch;
  ch.h_bs_ris = h;
  ch.h_ris_dr = {hd};
  ch.side = {side};
  ch.a_target = MatrixXcd::Zero(nr, nt);
  ch.a_interf = MatrixXcd::Zero(nr, nt);
  ch.a_total = MatrixXcd::Zero(nr, nt);
  (void)n;
  return ch;
}
}  // namespace

TEST_CASE("effective channel: zero star matrix gives zero vector") {
  StarCoefficients c;
  c.amp_t = VectorXd::Zero(2);
  c.amp_r = VectorXd::Ones(2);
  c.phase_t = VectorXd::Zero(2);
  c.phase_r = VectorXd::Zero(2);
  const auto ch = tiny_channels(2, 3, 2, MatrixXcd::Random(2, 3),
                                VectorXcd::Random(2), Side::transmission);
  CHECK(effective_uplink_channel(ch, c, 0).norm() == 0.0);
}

TEST_CASE("effective channel: scalar case") {
  StarCoefficients c;
  c.amp_t = VectorXd::Ones(1);
  c.amp_r = VectorXd::Zero(1);
  c.phase_t = VectorXd::Zero(1);
  c.phase_r = VectorXd::Zero(1);
  MatrixXcd h(1, 1);
  h(0, 0) = cplx(2.0, 0.0);
  VectorXcd hd(1);
  hd(0) = cplx(3.0, 0.0);
  const auto ch = tiny_channels(1, 1, 1, h, hd, Side::transmission);
  const VectorXcd g = effective_uplink_channel(ch, c, 0);
  CHECK(std::abs(g(0) - cplx(6.0, 0.0)) < 1e-15);
}

TEST_CASE("effective channel matches a naive triple loop") {
  Rng rng(21);
  const int n = 6, nr = 4;
  MatrixXcd h(n, nr);
  VectorXcd hd(n);
  for (int i = 0; i < n; ++i) {
    hd(i) = rng.cnormal();
    for (int j = 0; j < nr; ++j) h(i, j) = rng.cnormal();
  }
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
  auto ch = tiny_channels(n, nr, 2, h, hd, Side::reflection);

  const VectorXcd g = effective_uplink_channel(ch, c, 0);

  // independent elementwise evaluation of H^H Phi h
  VectorXcd expect = VectorXcd::Zero(nr);
  for (int j = 0; j < nr; ++j) {
    cplx acc(0.0, 0.0);
    for (int i = 0; i < n; ++i) {
      const cplx phi =
          std::sqrt(c.amp_r(i)) * std::polar(1.0, c.phase_r(i));
      acc += std::conj(h(i, j)) * phi * hd(i);
    }
    expect(j) = acc;
  }
  CHECK((g - expect).norm() < 1e-12 * expect.norm());
}
