#include "stariscc/core_model.hpp"

#include <cmath>

namespace stariscc {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double wrap_phase(double phase) {
  double p = std::fmod(phase, kTwoPi);
  if (p < 0.0) p += kTwoPi;
  if (p >= kTwoPi) p = 0.0;
  return p;
}

VectorXcd steering_vector(double theta, int n) {
  VectorXcd a(n);
  const double step = std::sin(theta);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int k = 0; k < n; ++k) {
    a(k) = scale * std::polar(1.0, step * static_cast<double>(k));
  }
  return a;
}

SensingChannels build_sensing_channels(double theta_target,
                                       const std::vector<double>& thetas_interf,
                                       cplx alpha_target,
                                       const std::vector<cplx>& alphas_interf,
                                       int n_tx, int n_rx) {
  SensingChannels out;
  const VectorXcd ar0 = steering_vector(theta_target, n_rx);
  const VectorXcd at0 = steering_vector(theta_target, n_tx);
  out.a_target = alpha_target * (ar0 * at0.adjoint());
  out.a_interf = MatrixXcd::Zero(n_rx, n_tx);
  for (std::size_t m = 0; m < thetas_interf.size(); ++m) {
    const VectorXcd ar = steering_vector(thetas_interf[m], n_rx);
    const VectorXcd at = steering_vector(thetas_interf[m], n_tx);
    out.a_interf += alphas_interf[m] * (ar * at.adjoint());
  }
  out.a_total = out.a_target + out.a_interf;
  return out;
}

double StarCoefficients::conservation_residual() const {
  double worst = 0.0;
  for (int n = 0; n < size(); ++n) {
    worst = std::max(worst, std::abs(amp_t(n) + amp_r(n) - 1.0));
  }
  return worst;
}

void StarCoefficients::validate(double tol) const {
  if (amp_t.size() != amp_r.size() || amp_t.size() != phase_t.size() ||
      amp_t.size() != phase_r.size()) {
    throw InvalidCoefficients("coefficient arrays have mismatched lengths");
  }
  if (conservation_residual() > tol) {
    throw InvalidCoefficients("amplitude pair violates energy conservation");
  }
  for (int n = 0; n < size(); ++n) {
    if (amp_t(n) < -tol || amp_t(n) > 1.0 + tol || amp_r(n) < -tol ||
        amp_r(n) > 1.0 + tol) {
      throw InvalidCoefficients("amplitude outside [0,1]");
    }
  }
}

StarCoefficients StarCoefficients::equal_split(int n) {
  StarCoefficients c;
  c.amp_t = VectorXd::Constant(n, 0.5);
  c.amp_r = VectorXd::Constant(n, 0.5);
  c.phase_t = VectorXd::Zero(n);
  c.phase_r = VectorXd::Zero(n);
  return c;
}

StarMatrices star_matrices(const StarCoefficients& c) {
  c.validate();
  const int n = c.size();
  StarMatrices out;
  out.phi_t = MatrixXcd::Zero(n, n);
  out.phi_r = MatrixXcd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    out.phi_t(k, k) = std::sqrt(std::max(0.0, c.amp_t(k))) *
                      std::polar(1.0, c.phase_t(k));
    out.phi_r(k, k) = std::sqrt(std::max(0.0, c.amp_r(k))) *
                      std::polar(1.0, c.phase_r(k));
  }
  return out;
}

VectorXcd star_diagonal(const StarCoefficients& c, Side s) {
  const int n = c.size();
  VectorXcd v(n);
  const VectorXd& amp = (s == Side::transmission) ? c.amp_t : c.amp_r;
  const VectorXd& phase = (s == Side::transmission) ? c.phase_t : c.phase_r;
  for (int k = 0; k < n; ++k) {
    v(k) = std::sqrt(std::max(0.0, amp(k))) * std::polar(1.0, phase(k));
  }
  return v;
}

VectorXcd effective_uplink_channel(const ChannelSet& ch,
                                   const StarCoefficients& c, int l) {
  const VectorXcd v = star_diagonal(c, ch.side.at(l));
  // H^H diag(v) h = H^H (v .* h)
  return ch.h_bs_ris.adjoint() * (v.array() * ch.h_ris_dr.at(l).array()).matrix();
}

std::vector<VectorXcd> effective_uplink_channels(const ChannelSet& ch,
                                                 const StarCoefficients& c) {
  std::vector<VectorXcd> g(ch.n_dr());
  for (int l = 0; l < ch.n_dr(); ++l) g[l] = effective_uplink_channel(ch, c, l);
  return g;
}

}  // namespace stariscc
