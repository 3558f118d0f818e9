#include <cmath>
#include <ostream>

#include "stariscc/conic.hpp"

namespace stariscc::conic {

int ConicProblem::add_vars(int k) {
  const int at = nvar;
  nvar += k;
  if (objective.size() < nvar) {
    VectorXd c = VectorXd::Zero(nvar);
    if (objective.size() > 0) c.head(objective.size()) = objective;
    objective = c;
  }
  return at;
}

namespace {
void check_shape(const MatrixXd& a, const VectorXd& b, int nvar) {
  if (a.rows() != b.size() || a.cols() != nvar) {
    throw NumericalError("constraint dimensions do not match variable vector");
  }
}
}  // namespace

void ConicProblem::add_zero(const MatrixXd& a, const VectorXd& b) {
  check_shape(a, b, nvar);
  constraints.push_back({ConeType::zero, a, b, 0.0, 0});
}

void ConicProblem::add_nonnegative(const MatrixXd& a, const VectorXd& b) {
  check_shape(a, b, nvar);
  constraints.push_back({ConeType::nonnegative, a, b, 0.0, 0});
}

void ConicProblem::add_second_order(const MatrixXd& a, const VectorXd& b) {
  check_shape(a, b, nvar);
  if (a.rows() < 2) throw NumericalError("second-order cone needs >= 2 rows");
  constraints.push_back({ConeType::second_order, a, b, 0.0, 0});
}

void ConicProblem::add_power3(const MatrixXd& a, const VectorXd& b, double exponent) {
  check_shape(a, b, nvar);
  if (a.rows() != 3) throw NumericalError("power3 cone needs exactly 3 rows");
  if (!(exponent > 0.0 && exponent < 1.0)) {
    throw NumericalError("power cone exponent must lie in (0,1)");
  }
  constraints.push_back({ConeType::power3, a, b, exponent, 0});
}

void ConicProblem::add_psd_slice(int offset, int dim) {
  const int len = svec_len(dim);
  if (offset < 0 || offset + len > nvar) {
    throw NumericalError("psd slice outside variable vector");
  }
  MatrixXd a = MatrixXd::Zero(len, nvar);
  for (int i = 0; i < len; ++i) a(i, offset + i) = 1.0;
  constraints.push_back({ConeType::psd, std::move(a), VectorXd::Zero(len),
                         0.0, dim});
}

void ConicProblem::validate() const {
  if (objective.size() != nvar) throw NumericalError("objective length mismatch");
  for (const auto& c : constraints) {
    if (c.map.cols() != nvar || c.map.rows() != c.offset.size()) {
      throw NumericalError("constraint shape mismatch");
    }
    if (c.type == ConeType::psd && svec_len(c.dim) != c.map.rows()) {
      throw NumericalError("psd block row count does not match its dimension");
    }
    if (c.type == ConeType::power3 && !(c.exponent > 0.0 && c.exponent < 1.0)) {
      throw NumericalError("power cone exponent must lie in (0,1)");
    }
  }
}

// ---------------------------------------------------------------------------
// svec / Hermitian embedding
// ---------------------------------------------------------------------------

int svec_len(int dim) { return dim * (dim + 1) / 2; }

VectorXd svec(const MatrixXd& s) {
  const int p = static_cast<int>(s.rows());
  const double rt2 = std::sqrt(2.0);
  VectorXd v(svec_len(p));
  int k = 0;
  for (int j = 0; j < p; ++j) {
    v(k++) = s(j, j);
    for (int i = j + 1; i < p; ++i) v(k++) = rt2 * 0.5 * (s(i, j) + s(j, i));
  }
  return v;
}

MatrixXd smat(const VectorXd& v) {
  const int len = static_cast<int>(v.size());
  const int p = static_cast<int>((std::sqrt(8.0 * len + 1.0) - 1.0) / 2.0 + 0.5);
  const double inv_rt2 = 1.0 / std::sqrt(2.0);
  MatrixXd s(p, p);
  int k = 0;
  for (int j = 0; j < p; ++j) {
    s(j, j) = v(k++);
    for (int i = j + 1; i < p; ++i) {
      s(i, j) = s(j, i) = inv_rt2 * v(k++);
    }
  }
  return s;
}

HermitianEmbedding embed_hermitian_psd(int n) {
  if (n < 1) throw NumericalError("embedding dimension must be positive");
  return {n, 2 * n, 2.0};
}

MatrixXd embed_hermitian(const MatrixXcd& m) {
  const MatrixXcd h = 0.5 * (m + m.adjoint());
  const int n = static_cast<int>(h.rows());
  MatrixXd s(2 * n, 2 * n);
  s.topLeftCorner(n, n) = h.real();
  s.bottomRightCorner(n, n) = h.real();
  s.topRightCorner(n, n) = -h.imag();
  s.bottomLeftCorner(n, n) = h.imag();
  return s;
}

MatrixXcd recover_hermitian(const MatrixXd& s) {
  const int n = static_cast<int>(s.rows()) / 2;
  const MatrixXd re = 0.5 * (s.topLeftCorner(n, n) + s.bottomRightCorner(n, n));
  const MatrixXd im = 0.5 * (s.bottomLeftCorner(n, n) - s.topRightCorner(n, n));
  MatrixXcd m = re.cast<cplx>() + cplx(0.0, 1.0) * im.cast<cplx>();
  return 0.5 * (m + m.adjoint());
}

// ---------------------------------------------------------------------------
// Constraint gadgets
// ---------------------------------------------------------------------------

void cubic_power_constraint(ConicProblem& p, int r_var, int t_var, double c) {
  if (!(c > 0.0)) throw NumericalError("cubic coefficient must be positive");
  MatrixXd a = MatrixXd::Zero(3, p.nvar);
  VectorXd b = VectorXd::Zero(3);
  a(0, t_var) = 1.0 / c;
  b(1) = 1.0;
  a(2, r_var) = 1.0;
  p.add_power3(a, b, 1.0 / 3.0);
}

void quadratic_upper_bound(ConicProblem& p, const MatrixXd& a, const VectorXd& b,
                           const VectorXd& d, double e) {
  // ||Ax+b||^2 <= d.x + e  <=>  || [2(Ax+b); d.x+e-1] || <= d.x + e + 1
  const int k = static_cast<int>(a.rows());
  MatrixXd m = MatrixXd::Zero(k + 2, p.nvar);
  VectorXd off = VectorXd::Zero(k + 2);
  m.row(0) = d.transpose();
  off(0) = e + 1.0;
  m.middleRows(1, k) = 2.0 * a;
  off.segment(1, k) = 2.0 * b;
  m.row(k + 1) = d.transpose();
  off(k + 1) = e - 1.0;
  p.add_second_order(m, off);
}

// ---------------------------------------------------------------------------
// Independent membership verifier
// ---------------------------------------------------------------------------

double max_cone_violation(const ConicProblem& p, const VectorXd& x) {
  double worst = 0.0;
  for (const auto& c : p.constraints) {
    const VectorXd s = c.map * x + c.offset;
    double v = 0.0;
    switch (c.type) {
      case ConeType::zero:
        v = s.cwiseAbs().maxCoeff();
        break;
      case ConeType::nonnegative:
        v = std::max(0.0, -s.minCoeff());
        break;
      case ConeType::second_order:
        v = std::max(0.0, s.tail(s.size() - 1).norm() - s(0));
        break;
      case ConeType::power3: {
        const double px = s(0), py = s(1), pz = s(2);
        v = std::max({0.0, -px, -py});
        if (px >= 0.0 && py >= 0.0) {
          const double cap = std::pow(px, c.exponent) * std::pow(py, 1.0 - c.exponent);
          v = std::max(v, std::abs(pz) - cap);
        }
        break;
      }
      case ConeType::psd: {
        const MatrixXd m = smat(s);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
        v = std::max(0.0, -es.eigenvalues().minCoeff());
        break;
      }
    }
    worst = std::max(worst, v);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Text dump
// ---------------------------------------------------------------------------

namespace {
const char* cone_name(ConeType t) {
  switch (t) {
    case ConeType::zero: return "ZERO";
    case ConeType::nonnegative: return "NONNEG";
    case ConeType::second_order: return "SOC";
    case ConeType::power3: return "POW3";
    case ConeType::psd: return "PSD";
  }
  return "?";
}
}  // namespace

void dump_problem(const ConicProblem& p, std::ostream& os) {
  os << "CONIC 1\n";
  os << "VARS " << p.nvar << "\n";
  os << "OBJ";
  for (int i = 0; i < p.objective.size(); ++i) {
    if (p.objective(i) != 0.0) os << " " << i << ":" << p.objective(i);
  }
  os << "\n";
  for (std::size_t k = 0; k < p.constraints.size(); ++k) {
    const auto& c = p.constraints[k];
    os << "CON " << k << " " << cone_name(c.type) << " " << c.map.rows();
    if (c.type == ConeType::power3) os << " a=" << c.exponent;
    if (c.type == ConeType::psd) os << " dim=" << c.dim;
    os << "\n";
    for (int i = 0; i < c.map.rows(); ++i) {
      os << "  R " << i;
      for (int j = 0; j < c.map.cols(); ++j) {
        if (c.map(i, j) != 0.0) os << " " << j << ":" << c.map(i, j);
      }
      if (c.offset(i) != 0.0) os << " b:" << c.offset(i);
      os << "\n";
    }
  }
  os << "END\n";
}

}  // namespace stariscc::conic
