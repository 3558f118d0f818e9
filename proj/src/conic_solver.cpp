#include <algorithm>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <vector>

#include "stariscc/conic.hpp"

// Primal-dual interior-point method on the homogeneous self-dual embedding
// with Nesterov-Todd scaling and Mehrotra predictor-corrector steps, for
// the compiled form
//     min c.x  s.t.  Aeq x = beq,  G x + s = h,  s in K,
// K a product of nonnegative, second-order and PSD blocks. power3
// constraints compile into exact second-order reformulations.

namespace stariscc::conic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Rational {
  long p = 0;
  long q = 1;
};

Rational to_rational(double a, long max_den) {
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double x = a;
  for (int it = 0; it < 64; ++it) {
    const double fl = std::floor(x);
    const long ai = static_cast<long>(fl);
    const long p2 = ai * p1 + p0;
    const long q2 = ai * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    if (q1 > 0 &&
        std::abs(a - static_cast<double>(p1) / static_cast<double>(q1)) < 1e-13) {
      break;
    }
    const double frac = x - fl;
    if (frac < 1e-15) break;
    x = 1.0 / frac;
  }
  return {p1, q1};
}

struct Block {
  enum Kind { kNonNeg, kSoc, kPsd } kind = kNonNeg;
  int off = 0;
  int size = 0;
  int dim = 0;           // psd matrix dimension
  int ident_slice = -1;  // psd: variable slice when map is the identity
};

struct DualMap {
  int internal_off = 0;  // first-pass: block index; second-pass: row offset
  int rows = 0;
  VectorXd row_scale;
  bool is_eq = false;
  bool lowered = false;
};

struct Compiled {
  int n = 0;
  VectorXd c;
  MatrixXd aeq;
  VectorXd beq;
  MatrixXd g;
  VectorXd h;
  std::vector<Block> blocks;
  std::vector<DualMap> dual_map;
  int n_orig = 0;
};

struct AffineRow {
  VectorXd coef;  // over the widened variable vector
  double rhs = 0.0;
};

Compiled compile(const ConicProblem& p) {
  p.validate();
  Compiled cp;
  cp.n_orig = p.nvar;

  int extra = 0;
  for (const auto& cc : p.constraints) {
    if (cc.type != ConeType::power3) continue;
    const Rational r = to_rational(cc.exponent, 64);
    if (r.q < 2 || r.p <= 0 || r.p >= r.q ||
        std::abs(cc.exponent - double(r.p) / double(r.q)) > 1e-12) {
      throw NumericalError("power cone exponent is not a small rational");
    }
    int cap = 1;
    while (cap < r.q) cap *= 2;
    extra += cap - 1;
  }
  cp.n = p.nvar + extra;
  cp.c = VectorXd::Zero(cp.n);
  cp.c.head(p.nvar) = p.objective;

  std::vector<AffineRow> eq_rows;   // Aeq x = beq
  std::vector<AffineRow> nn_rows;   // rows of G,h with s >= 0
  struct RowBlock {
    MatrixXd g;
    VectorXd h;
    int dim = 0;
    int ident_slice = -1;
  };
  std::vector<RowBlock> socs;
  std::vector<RowBlock> psds;

  int next_aux = p.nvar;
  cp.dual_map.resize(p.constraints.size());

  auto widen_row = [&](const Eigen::RowVectorXd& r) {
    VectorXd row = VectorXd::Zero(cp.n);
    row.head(r.size()) = r.transpose();
    return row;
  };

  for (std::size_t k = 0; k < p.constraints.size(); ++k) {
    const auto& cc = p.constraints[k];
    DualMap& dm = cp.dual_map[k];
    dm.rows = static_cast<int>(cc.map.rows());
    switch (cc.type) {
      case ConeType::zero: {
        dm.is_eq = true;
        dm.internal_off = static_cast<int>(eq_rows.size());
        dm.row_scale = VectorXd::Ones(dm.rows);
        for (int i = 0; i < dm.rows; ++i) {
          VectorXd row = widen_row(cc.map.row(i));
          double b = -cc.offset(i);
          const double sc = std::max(row.cwiseAbs().maxCoeff(), std::abs(b));
          const double mult = sc > 0.0 ? 1.0 / sc : 1.0;
          dm.row_scale(i) = mult;
          eq_rows.push_back({mult * row, mult * b});
        }
        break;
      }
      case ConeType::nonnegative: {
        dm.internal_off = static_cast<int>(nn_rows.size());
        dm.row_scale = VectorXd::Ones(dm.rows);
        for (int i = 0; i < dm.rows; ++i) {
          // s = A x + b >= 0  ->  G = -A, h = b
          VectorXd row = -widen_row(cc.map.row(i));
          double b = cc.offset(i);
          const double sc = std::max(row.cwiseAbs().maxCoeff(), std::abs(b));
          const double mult = sc > 0.0 ? 1.0 / sc : 1.0;
          dm.row_scale(i) = mult;
          nn_rows.push_back({mult * row, mult * b});
        }
        break;
      }
      case ConeType::second_order: {
        dm.internal_off = static_cast<int>(socs.size());
        MatrixXd g = MatrixXd::Zero(dm.rows, cp.n);
        g.leftCols(p.nvar) = -cc.map;
        VectorXd h = cc.offset;
        const double sc =
            std::max(g.cwiseAbs().maxCoeff(), h.cwiseAbs().maxCoeff());
        const double mult = sc > 0.0 ? 1.0 / sc : 1.0;
        dm.row_scale = VectorXd::Constant(dm.rows, mult);
        socs.push_back({mult * g, mult * h, 0, -1});
        break;
      }
      case ConeType::psd: {
        dm.internal_off = static_cast<int>(psds.size());
        dm.row_scale = VectorXd::Ones(dm.rows);
        int slice = -1;
        bool ident = cc.offset.isZero(0.0);
        if (ident) {
          int first = -1;
          for (int j = 0; j < cc.map.cols() && first < 0; ++j) {
            if (cc.map(0, j) != 0.0) first = j;
          }
          ident = first >= 0;
          for (int i = 0; ident && i < cc.map.rows(); ++i) {
            for (int j = 0; j < cc.map.cols(); ++j) {
              const double want = (j == first + i) ? 1.0 : 0.0;
              if (cc.map(i, j) != want) {
                ident = false;
                break;
              }
            }
          }
          if (ident) slice = first;
        }
        MatrixXd g = MatrixXd::Zero(dm.rows, cp.n);
        g.leftCols(p.nvar) = -cc.map;
        psds.push_back({std::move(g), cc.offset, cc.dim, slice});
        break;
      }
      case ConeType::power3: {
        dm.lowered = true;
        const Rational r = to_rational(cc.exponent, 64);
        int cap = 1;
        while (cap < r.q) cap *= 2;
        const int t_var = next_aux;
        int node_counter = next_aux + 1;
        next_aux += cap - 1;

        std::vector<AffineRow> level;
        for (long i = 0; i < r.p; ++i) {
          level.push_back({widen_row(cc.map.row(0)), cc.offset(0)});
        }
        for (long i = 0; i < r.q - r.p; ++i) {
          level.push_back({widen_row(cc.map.row(1)), cc.offset(1)});
        }
        for (int i = 0; i < cap - static_cast<int>(r.q); ++i) {
          VectorXd row = VectorXd::Zero(cp.n);
          row(t_var) = 1.0;
          level.push_back({row, 0.0});
        }
        while (level.size() > 1) {
          std::vector<AffineRow> next;
          for (std::size_t i = 0; i < level.size(); i += 2) {
            const AffineRow& a = level[i];
            const AffineRow& b = level[i + 1];
            const int w_var = (level.size() == 2) ? t_var : node_counter++;
            // w^2 <= a*b  <=>  (a+b, 2w, a-b) in SOC
            MatrixXd g = MatrixXd::Zero(3, cp.n);
            VectorXd h = VectorXd::Zero(3);
            g.row(0) = -(a.coef + b.coef).transpose();
            h(0) = a.rhs + b.rhs;
            g(1, w_var) = -2.0;
            g.row(2) = -(a.coef - b.coef).transpose();
            h(2) = a.rhs - b.rhs;
            socs.push_back({std::move(g), std::move(h), 0, -1});
            VectorXd w_row = VectorXd::Zero(cp.n);
            w_row(w_var) = 1.0;
            next.push_back({std::move(w_row), 0.0});
          }
          level = std::move(next);
        }
        // |z| <= t  ->  t - z >= 0 and t + z >= 0
        const VectorXd z_row = widen_row(cc.map.row(2));
        const double z_rhs = cc.offset(2);
        VectorXd t_row = VectorXd::Zero(cp.n);
        t_row(t_var) = 1.0;
        nn_rows.push_back({-(t_row - z_row), -z_rhs});
        nn_rows.push_back({-(t_row + z_row), z_rhs});
        break;
      }
    }
  }

  const int meq = static_cast<int>(eq_rows.size());
  cp.aeq = MatrixXd::Zero(meq, cp.n);
  cp.beq = VectorXd::Zero(meq);
  for (int i = 0; i < meq; ++i) {
    cp.aeq.row(i) = eq_rows[i].coef.transpose();
    cp.beq(i) = eq_rows[i].rhs;
  }

  int m = static_cast<int>(nn_rows.size());
  for (const auto& b : socs) m += static_cast<int>(b.g.rows());
  for (const auto& b : psds) m += static_cast<int>(b.g.rows());
  if (m == 0) throw NumericalError("problem has no conic rows");

  cp.g = MatrixXd::Zero(m, cp.n);
  cp.h = VectorXd::Zero(m);
  int off = 0;
  if (!nn_rows.empty()) {
    for (std::size_t i = 0; i < nn_rows.size(); ++i) {
      cp.g.row(off + static_cast<int>(i)) = nn_rows[i].coef.transpose();
      cp.h(off + static_cast<int>(i)) = nn_rows[i].rhs;
    }
    cp.blocks.push_back(
        {Block::kNonNeg, off, static_cast<int>(nn_rows.size()), 0, -1});
    off += static_cast<int>(nn_rows.size());
  }
  std::vector<int> soc_offsets;
  for (const auto& b : socs) {
    const int rows = static_cast<int>(b.g.rows());
    soc_offsets.push_back(off);
    cp.g.middleRows(off, rows) = b.g;
    cp.h.segment(off, rows) = b.h;
    cp.blocks.push_back({Block::kSoc, off, rows, 0, -1});
    off += rows;
  }
  std::vector<int> psd_offsets;
  for (const auto& b : psds) {
    const int rows = static_cast<int>(b.g.rows());
    psd_offsets.push_back(off);
    cp.g.middleRows(off, rows) = b.g;
    cp.h.segment(off, rows) = b.h;
    cp.blocks.push_back({Block::kPsd, off, rows, b.dim, b.ident_slice});
    off += rows;
  }

  for (std::size_t k = 0; k < p.constraints.size(); ++k) {
    DualMap& dm = cp.dual_map[k];
    switch (p.constraints[k].type) {
      case ConeType::second_order:
        dm.internal_off = soc_offsets[dm.internal_off];
        break;
      case ConeType::psd:
        dm.internal_off = psd_offsets[dm.internal_off];
        break;
      default:
        break;  // zero / nonneg offsets already in block-local rows
    }
  }
  return cp;
}

// ---------------------------------------------------------------------------
// Cone kernels
// ---------------------------------------------------------------------------

double jdet(const VectorXd& u) {
  return u(0) * u(0) - u.tail(u.size() - 1).squaredNorm();
}

VectorXd japply(const VectorXd& u) {
  VectorXd v = -u;
  v(0) = u(0);
  return v;
}

struct Scaling {
  VectorXd d;  // nonneg: sqrt(s/z)
  double eta = 1.0;
  VectorXd w, w_half, w_inv;  // soc NT point, its Jordan sqrt and inverse
  MatrixXd r, rinv, t, tinv;  // psd
  VectorXd sig;
};

class Kernel {
 public:
  explicit Kernel(const Block& b) : b_(b) {}
  const Block& blk() const { return b_; }

  int degree() const {
    switch (b_.kind) {
      case Block::kNonNeg: return b_.size;
      case Block::kSoc: return 1;
      case Block::kPsd: return b_.dim;
    }
    return 0;
  }

  VectorXd identity() const {
    switch (b_.kind) {
      case Block::kNonNeg: return VectorXd::Ones(b_.size);
      case Block::kSoc: {
        VectorXd e = VectorXd::Zero(b_.size);
        e(0) = 1.0;
        return e;
      }
      case Block::kPsd: return svec(MatrixXd::Identity(b_.dim, b_.dim));
    }
    return {};
  }

  double margin(const VectorXd& u) const {
    switch (b_.kind) {
      case Block::kNonNeg: return u.minCoeff();
      case Block::kSoc: return u(0) - u.tail(u.size() - 1).norm();
      case Block::kPsd: {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(smat(u), Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
      }
    }
    return 0.0;
  }

  void compute(const VectorXd& s, const VectorXd& z, Scaling& sc) const {
    switch (b_.kind) {
      case Block::kNonNeg:
        sc.d = (s.array() / z.array()).sqrt();
        break;
      case Block::kSoc: {
        const double a = std::sqrt(jdet(s));
        const double b = std::sqrt(jdet(z));
        sc.eta = std::sqrt(a / b);
        const VectorXd sb = s / a;
        const VectorXd zb = z / b;
        const double gamma = std::sqrt((1.0 + sb.dot(zb)) / 2.0);
        const VectorXd wbar = (sb + japply(zb)) / (2.0 * gamma);
        sc.w = sc.eta * wbar;
        const double rr = std::sqrt(sc.eta * (wbar(0) + 1.0) / 2.0);
        sc.w_half = sc.w / (2.0 * rr);
        sc.w_half(0) = rr;
        sc.w_inv = japply(sc.w) / (sc.eta * sc.eta);
        break;
      }
      case Block::kPsd: {
        Eigen::LLT<MatrixXd> ls(smat(s));
        Eigen::LLT<MatrixXd> lz(smat(z));
        if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) {
          throw NumericalError("psd iterate lost definiteness");
        }
        const MatrixXd lsm = ls.matrixL();
        const MatrixXd lzm = lz.matrixL();
        Eigen::JacobiSVD<MatrixXd> svd(lzm.transpose() * lsm,
                                       Eigen::ComputeFullU | Eigen::ComputeFullV);
        sc.sig = svd.singularValues();
        const VectorXd isq = sc.sig.cwiseSqrt().cwiseInverse();
        sc.r = lsm * svd.matrixV() * isq.asDiagonal();
        sc.rinv = isq.asDiagonal() * svd.matrixU().transpose() * lzm.transpose();
        sc.t = sc.r * sc.r.transpose();
        sc.tinv = sc.rinv.transpose() * sc.rinv;
        break;
      }
    }
  }

  VectorXd lambda(const Scaling& sc, const VectorXd& s, const VectorXd& z) const {
    switch (b_.kind) {
      case Block::kNonNeg: return (s.array() * z.array()).sqrt();
      case Block::kSoc: return apply_w(sc, z);
      case Block::kPsd: {
        MatrixXd lm = MatrixXd::Zero(b_.dim, b_.dim);
        lm.diagonal() = sc.sig;
        return svec(lm);
      }
    }
    return {};
  }

  VectorXd apply_w(const Scaling& sc, const VectorXd& v) const {
    switch (b_.kind) {
      case Block::kNonNeg: return sc.d.cwiseProduct(v);
      case Block::kSoc:
        return 2.0 * sc.w_half * sc.w_half.dot(v) - sc.eta * japply(v);
      case Block::kPsd:
        return svec(sc.r.transpose() * smat(v) * sc.r);
    }
    return {};
  }

  VectorXd apply_wt(const Scaling& sc, const VectorXd& v) const {
    if (b_.kind == Block::kPsd) return svec(sc.r * smat(v) * sc.r.transpose());
    return apply_w(sc, v);
  }

  VectorXd apply_h(const Scaling& sc, const VectorXd& v) const {
    switch (b_.kind) {
      case Block::kNonNeg: return sc.d.array().square().matrix().cwiseProduct(v);
      case Block::kSoc:
        return 2.0 * sc.w * sc.w.dot(v) - sc.eta * sc.eta * japply(v);
      case Block::kPsd:
        return svec(sc.t * smat(v) * sc.t);
    }
    return {};
  }

  VectorXd apply_hinv(const Scaling& sc, const VectorXd& v) const {
    switch (b_.kind) {
      case Block::kNonNeg:
        return v.cwiseQuotient(sc.d.array().square().matrix());
      case Block::kSoc:
        return 2.0 * sc.w_inv * sc.w_inv.dot(v) -
               (1.0 / (sc.eta * sc.eta)) * japply(v);
      case Block::kPsd:
        return svec(sc.tinv * smat(v) * sc.tinv);
    }
    return {};
  }

  VectorXd jordan_mul(const VectorXd& u, const VectorXd& v) const {
    switch (b_.kind) {
      case Block::kNonNeg: return u.cwiseProduct(v);
      case Block::kSoc: {
        VectorXd out(b_.size);
        out(0) = u.dot(v);
        out.tail(b_.size - 1) =
            u(0) * v.tail(b_.size - 1) + v(0) * u.tail(b_.size - 1);
        return out;
      }
      case Block::kPsd: {
        const MatrixXd um = smat(u);
        const MatrixXd vm = smat(v);
        return svec(0.5 * (um * vm + vm * um));
      }
    }
    return {};
  }

  VectorXd jordan_div(const Scaling& sc, const VectorXd& lambda,
                      const VectorXd& rhs) const {
    switch (b_.kind) {
      case Block::kNonNeg: return rhs.cwiseQuotient(lambda);
      case Block::kSoc: {
        const double det = jdet(lambda);
        const VectorXd l1 = lambda.tail(b_.size - 1);
        const VectorXd r1 = rhs.tail(b_.size - 1);
        VectorXd out(b_.size);
        out(0) = (lambda(0) * rhs(0) - l1.dot(r1)) / det;
        out.tail(b_.size - 1) = (r1 - out(0) * l1) / lambda(0);
        return out;
      }
      case Block::kPsd: {
        const MatrixXd rm = smat(rhs);
        MatrixXd xm(b_.dim, b_.dim);
        for (int i = 0; i < b_.dim; ++i) {
          for (int j = 0; j < b_.dim; ++j) {
            xm(i, j) = 2.0 * rm(i, j) / (sc.sig(i) + sc.sig(j));
          }
        }
        return svec(xm);
      }
    }
    return {};
  }

  double max_step(const Scaling& sc, const VectorXd& lambda,
                  const VectorXd& dir) const {
    switch (b_.kind) {
      case Block::kNonNeg: {
        double best = kInf;
        for (int i = 0; i < b_.size; ++i) {
          if (dir(i) < 0.0) best = std::min(best, -lambda(i) / dir(i));
        }
        return best;
      }
      case Block::kSoc: {
        const double a = jdet(dir);
        const double b =
            2.0 * (lambda(0) * dir(0) -
                   lambda.tail(b_.size - 1).dot(dir.tail(b_.size - 1)));
        const double cdet = jdet(lambda);
        double af = kInf;
        if (std::abs(a) < 1e-300) {
          if (b < 0.0) af = -cdet / b;
        } else {
          const double disc = b * b - 4.0 * a * cdet;
          if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            const double qq = -0.5 * (b + (b >= 0.0 ? sq : -sq));
            const double cand[2] = {qq != 0.0 ? cdet / qq : kInf,
                                    a != 0.0 && qq != 0.0 ? qq / a : kInf};
            for (double rt : cand) {
              if (rt > 0.0 && std::isfinite(rt)) af = std::min(af, rt);
            }
          }
        }
        double alin = kInf;
        if (dir(0) < 0.0) alin = -lambda(0) / dir(0);
        return std::min(af, alin);
      }
      case Block::kPsd: {
        const VectorXd isq = sc.sig.cwiseSqrt().cwiseInverse();
        const MatrixXd scaled = isq.asDiagonal() * smat(dir) * isq.asDiagonal();
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(scaled, Eigen::EigenvaluesOnly);
        const double emin = es.eigenvalues().minCoeff();
        return emin >= 0.0 ? kInf : -1.0 / emin;
      }
    }
    return kInf;
  }

  void add_schur(const Scaling& sc, const MatrixXd& g, MatrixXd& hx) const {
    const auto gb = g.middleRows(b_.off, b_.size);
    switch (b_.kind) {
      case Block::kNonNeg: {
        const MatrixXd scaled = sc.d.cwiseInverse().asDiagonal() * gb;
        hx.noalias() += scaled.transpose() * scaled;
        break;
      }
      case Block::kSoc: {
        const Eigen::RowVectorXd wg = sc.w_inv.transpose() * gb;
        MatrixXd jg = -gb;
        jg.row(0) = gb.row(0);
        hx.noalias() +=
            gb.transpose() *
            (2.0 * sc.w_inv * wg - (1.0 / (sc.eta * sc.eta)) * jg);
        break;
      }
      case Block::kPsd: {
        if (b_.ident_slice >= 0) {
          add_symkron(sc.tinv, hx, b_.ident_slice, b_.dim);
        } else {
          MatrixXd hg(b_.size, gb.cols());
          for (int j = 0; j < gb.cols(); ++j) {
            hg.col(j) = apply_hinv(sc, gb.col(j));
          }
          hx.noalias() += gb.transpose() * hg;
        }
        break;
      }
    }
  }

 private:
  // hx[slice,slice] += matrix of the map  M -> T M T  in svec coordinates.
  static void add_symkron(const MatrixXd& t, MatrixXd& hx, int slice, int p) {
    const double irt2 = 1.0 / std::sqrt(2.0);
    int col = 0;
    for (int j = 0; j < p; ++j) {
      {
        const MatrixXd m = t.col(j) * t.col(j).transpose();
        hx.block(slice, slice + col, svec_len(p), 1) += svec(m);
        ++col;
      }
      for (int i = j + 1; i < p; ++i) {
        const MatrixXd m = irt2 * (t.col(i) * t.col(j).transpose() +
                                   t.col(j) * t.col(i).transpose());
        hx.block(slice, slice + col, svec_len(p), 1) += svec(m);
        ++col;
      }
    }
  }

  Block b_;
};

// ---------------------------------------------------------------------------
// Interior-point driver
// ---------------------------------------------------------------------------

class Ipm {
 public:
  Ipm(const Compiled& cp, const SolveOptions& opt) : cp_(cp), opt_(opt) {
    for (const auto& b : cp.blocks) kernels_.emplace_back(b);
    n_ = cp.n;
    meq_ = static_cast<int>(cp.beq.size());
    m_ = static_cast<int>(cp.h.size());
    nu_ = 0;
    for (const auto& k : kernels_) nu_ += k.degree();
    scalings_.resize(kernels_.size());
    detect_structure();
  }

  struct Result {
    SolveStatus status = SolveStatus::numerical_limit;
    VectorXd x, y, z, s;
    KktResiduals res;
    double pcost = 0.0, dcost = 0.0;
    int iterations = 0;
  };

  Result run() {
    init_point();
    Result out;
    double best_score = kInf;
    int no_progress = 0;
    struct Snapshot {
      VectorXd x, y, z, s;
      double tau = 1.0, kappa = 1.0;
      KktResiduals res;
      double pcost = 0.0, dcost = 0.0;
      int it = 0;
      bool set = false;
    } best;
    for (int it = 0; it < opt_.max_iter; ++it) {
      if (!std::isfinite(tau_) || !std::isfinite(kappa_) ||
          !x_.allFinite() || !s_.allFinite() || !z_.allFinite()) {
        break;
      }
      const VectorXd rd =
          cp_.aeq.transpose() * y_ + gt_mul(z_) + cp_.c * tau_;
      const VectorXd rp = cp_.aeq * x_ - cp_.beq * tau_;
      const VectorXd rg = g_mul(x_) + s_ - cp_.h * tau_;
      const double rt =
          -cp_.c.dot(x_) - cp_.beq.dot(y_) - cp_.h.dot(z_) - kappa_;
      const double gap = s_.dot(z_);

      const double pcost = cp_.c.dot(x_) / tau_;
      const double dcost = -(cp_.beq.dot(y_) + cp_.h.dot(z_)) / tau_;
      const double pres =
          std::max(meq_ > 0 ? rp.norm() / std::max(1.0, cp_.beq.norm()) : 0.0,
                   rg.norm() / std::max(1.0, cp_.h.norm())) /
          tau_;
      const double dres = rd.norm() / std::max(1.0, cp_.c.norm()) / tau_;
      const double relgap =
          (gap / (tau_ * tau_)) / std::max(1.0, std::abs(pcost));

      if (opt_.verbose) {
        std::printf(
            "it %3d pres %9.2e dres %9.2e relgap %9.2e tau %8.2e kap %8.2e\n",
            it, pres, dres, relgap, tau_, kappa_);
      }

      out.iterations = it;
      out.res = {pres, dres, relgap};
      const double score = std::max({pres / opt_.tol_feas, dres / opt_.tol_feas,
                                     relgap / opt_.tol_gap});
      if (score < best_score) {
        best_score = score;
        best.x = x_;
        best.y = y_;
        best.z = z_;
        best.s = s_;
        best.tau = tau_;
        best.kappa = kappa_;
        best.res = {pres, dres, relgap};
        best.pcost = pcost;
        best.dcost = dcost;
        best.it = it;
        best.set = true;
        no_progress = 0;
      } else if (++no_progress > 8) {
        break;
      }
      if (score <= 1.0) {
        out.status = SolveStatus::optimal;
        finalize(out, pcost, dcost);
        return out;
      }

      const double by_hz = cp_.beq.dot(y_) + cp_.h.dot(z_);
      const VectorXd cert = cp_.aeq.transpose() * y_ + gt_mul(z_);
      if (by_hz < 0.0) {
        const double pinf = cert.norm() / std::max(1.0, cp_.c.norm()) / (-by_hz);
        if (pinf <= opt_.tol_feas) {
          out.status = SolveStatus::infeasible;
          finalize(out, pcost, dcost);
          return out;
        }
      }
      const double cx = cp_.c.dot(x_);
      if (cx < 0.0) {
        const double dinf =
            std::max(meq_ > 0
                         ? (cp_.aeq * x_).norm() / std::max(1.0, cp_.beq.norm())
                         : 0.0,
                     (g_mul(x_) + s_).norm() / std::max(1.0, cp_.h.norm())) /
            (-cx);
        if (dinf <= opt_.tol_feas) {
          out.status = SolveStatus::unbounded;
          finalize(out, pcost, dcost);
          return out;
        }
      }

      VectorXd lambda(m_);
      for (std::size_t b = 0; b < kernels_.size(); ++b) {
        const auto& blk = kernels_[b].blk();
        kernels_[b].compute(s_.segment(blk.off, blk.size),
                            z_.segment(blk.off, blk.size), scalings_[b]);
        lambda.segment(blk.off, blk.size) =
            kernels_[b].lambda(scalings_[b], s_.segment(blk.off, blk.size),
                               z_.segment(blk.off, blk.size));
      }
      const double mu = (gap + tau_ * kappa_) / (nu_ + 1);

      factor(false);
      VectorXd v1, v2, v3;
      kkt_solve(-cp_.c, cp_.beq, cp_.h, v1, v2, v3);
      const double den = std::max(
          kappa_ / tau_ - (cp_.c.dot(v1) + cp_.beq.dot(v2) + cp_.h.dot(v3)),
          1e-300);

      // Affine direction.
      VectorXd u1, u2, u3;
      kkt_solve(-rd, -rp, -rg + apply_wt(lambda), u1, u2, u3);
      double num =
          -rt + cp_.c.dot(u1) + cp_.beq.dot(u2) + cp_.h.dot(u3) - kappa_;
      double dtau = num / den;
      VectorXd dz = u3 + dtau * v3;
      VectorXd dzt = apply_w(dz);
      VectorXd dst = -lambda - dzt;
      double dkappa = -kappa_ - (kappa_ / tau_) * dtau;
      const double alpha_aff =
          std::min(1.0, step_length(lambda, dst, dzt, dtau, dkappa));

      const double sigma = std::pow(std::clamp(1.0 - alpha_aff, 0.0, 1.0), 3.0);

      VectorXd rhs5(m_);
      for (std::size_t b = 0; b < kernels_.size(); ++b) {
        const auto& blk = kernels_[b].blk();
        const VectorXd lam = lambda.segment(blk.off, blk.size);
        const VectorXd ll = kernels_[b].jordan_mul(lam, lam);
        const VectorXd corr = kernels_[b].jordan_mul(
            dst.segment(blk.off, blk.size), dzt.segment(blk.off, blk.size));
        rhs5.segment(blk.off, blk.size) = kernels_[b].jordan_div(
            scalings_[b], lam,
            (-ll - corr + sigma * mu * kernels_[b].identity()).eval());
      }
      const double d6 = -tau_ * kappa_ - dtau * dkappa + sigma * mu;

      kkt_solve(-(1.0 - sigma) * rd, -(1.0 - sigma) * rp,
                -(1.0 - sigma) * rg - apply_wt(rhs5), u1, u2, u3);
      num = -(1.0 - sigma) * rt + cp_.c.dot(u1) + cp_.beq.dot(u2) +
            cp_.h.dot(u3) + d6 / tau_;
      dtau = num / den;
      const VectorXd dx = u1 + dtau * v1;
      const VectorXd dy = meq_ > 0 ? VectorXd(u2 + dtau * v2) : VectorXd();
      dz = u3 + dtau * v3;
      dzt = apply_w(dz);
      dst = rhs5 - dzt;
      const VectorXd ds = apply_wt(dst);
      dkappa = (d6 - kappa_ * dtau) / tau_;

      const double alpha =
          std::min(1.0, 0.99 * step_length(lambda, dst, dzt, dtau, dkappa));
      if (!(alpha > 1e-13)) break;

      x_ += alpha * dx;
      if (meq_ > 0) y_ += alpha * dy;
      z_ += alpha * dz;
      s_ += alpha * ds;
      tau_ += alpha * dtau;
      kappa_ += alpha * dkappa;
    }
    // Restore the best iterate seen; report optimal only if it met the
    // tolerances, otherwise be explicit about hitting the numerical floor.
    if (best.set) {
      x_ = best.x;
      y_ = best.y;
      z_ = best.z;
      s_ = best.s;
      tau_ = best.tau;
      kappa_ = best.kappa;
      out.res = best.res;
      out.iterations = best.it;
      out.status = best_score <= 1.0 ? SolveStatus::optimal
                                     : SolveStatus::numerical_limit;
      finalize(out, best.pcost, best.dcost);
      return out;
    }
    out.status = SolveStatus::numerical_limit;
    finalize(out, cp_.c.dot(x_) / tau_,
             -(cp_.beq.dot(y_) + cp_.h.dot(z_)) / tau_);
    return out;
  }

 private:
  void finalize(Result& out, double pcost, double dcost) {
    const bool cert = out.status == SolveStatus::infeasible ||
                      out.status == SolveStatus::unbounded;
    const double sc = cert ? 1.0 : 1.0 / tau_;
    out.x = sc * x_;
    out.y = sc * y_;
    out.z = sc * z_;
    out.s = sc * s_;
    out.pcost = pcost;
    out.dcost = dcost;
  }

  using KernelOp = VectorXd (Kernel::*)(const Scaling&, const VectorXd&) const;

  VectorXd apply_blockwise(const VectorXd& v, KernelOp op) {
    VectorXd out(m_);
    for (std::size_t b = 0; b < kernels_.size(); ++b) {
      const auto& blk = kernels_[b].blk();
      out.segment(blk.off, blk.size) =
          (kernels_[b].*op)(scalings_[b], v.segment(blk.off, blk.size));
    }
    return out;
  }

  VectorXd apply_w(const VectorXd& v) {
    return apply_blockwise(v, &Kernel::apply_w);
  }
  VectorXd apply_wt(const VectorXd& v) {
    return apply_blockwise(v, &Kernel::apply_wt);
  }
  VectorXd apply_h(const VectorXd& v) {
    return apply_blockwise(v, &Kernel::apply_h);
  }
  VectorXd apply_hinv(const VectorXd& v) {
    return apply_blockwise(v, &Kernel::apply_hinv);
  }

  double step_length(const VectorXd& lambda, const VectorXd& dst,
                     const VectorXd& dzt, double dtau, double dkappa) {
    double a = kInf;
    for (std::size_t b = 0; b < kernels_.size(); ++b) {
      const auto& blk = kernels_[b].blk();
      const VectorXd lam = lambda.segment(blk.off, blk.size);
      a = std::min(a, kernels_[b].max_step(scalings_[b], lam,
                                           dst.segment(blk.off, blk.size)));
      a = std::min(a, kernels_[b].max_step(scalings_[b], lam,
                                           dzt.segment(blk.off, blk.size)));
    }
    if (dtau < 0.0) a = std::min(a, -tau_ / dtau);
    if (dkappa < 0.0) a = std::min(a, -kappa_ / dkappa);
    return a;
  }

  // The STAR subproblems have the shape "every variable sits in an
  // identity-mapped PSD slice, plus a handful of dense rows". There the
  // scaled Hessian is blockdiag(symkron(Tinv_i)) + U C U' whose inverse
  // applies analytically through a small Woodbury system, avoiding the
  // dense n^3 factorization.
  void detect_structure() {
    structured_ok_ = false;
    std::vector<bool> covered(n_, false);
    int small_rows = 0;
    psd_structured_.clear();
    for (std::size_t b = 0; b < kernels_.size(); ++b) {
      const auto& blk = kernels_[b].blk();
      if (blk.kind == Block::kPsd) {
        if (blk.ident_slice < 0) return;
        for (int j = 0; j < blk.size; ++j) {
          if (covered[blk.ident_slice + j]) return;
          covered[blk.ident_slice + j] = true;
        }
        psd_structured_.push_back(static_cast<int>(b));
      } else {
        small_rows += blk.size;
      }
    }
    if (psd_structured_.empty() || small_rows > 256) return;
    for (int j = 0; j < n_; ++j) {
      if (!covered[j]) return;
    }
    // U = G_small' over the non-PSD rows, fixed across iterations.
    u_small_.resize(n_, small_rows);
    small_blocks_.clear();
    int col = 0;
    for (std::size_t b = 0; b < kernels_.size(); ++b) {
      const auto& blk = kernels_[b].blk();
      if (blk.kind == Block::kPsd) continue;
      u_small_.middleCols(col, blk.size) =
          cp_.g.middleRows(blk.off, blk.size).transpose();
      small_blocks_.push_back({static_cast<int>(b), col});
      col += blk.size;
    }
    k_small_ = small_rows;
    structured_ok_ = true;
  }

  // G and G' products exploiting the identity PSD slices.
  VectorXd g_mul(const VectorXd& x) const {
    if (!structured_ok_) return cp_.g * x;
    VectorXd out(m_);
    for (const auto& [bi, col] : small_blocks_) {
      const auto& blk = kernels_[bi].blk();
      out.segment(blk.off, blk.size).noalias() =
          u_small_.middleCols(col, blk.size).transpose() * x;
    }
    for (int bi : psd_structured_) {
      const auto& blk = kernels_[bi].blk();
      out.segment(blk.off, blk.size) = -x.segment(blk.ident_slice, blk.size);
    }
    return out;
  }

  VectorXd gt_mul(const VectorXd& z) const {
    if (!structured_ok_) return cp_.g.transpose() * z;
    VectorXd out = VectorXd::Zero(n_);
    for (const auto& [bi, col] : small_blocks_) {
      const auto& blk = kernels_[bi].blk();
      out.noalias() +=
          u_small_.middleCols(col, blk.size) * z.segment(blk.off, blk.size);
    }
    for (int bi : psd_structured_) {
      const auto& blk = kernels_[bi].blk();
      out.segment(blk.ident_slice, blk.size) -= z.segment(blk.off, blk.size);
    }
    return out;
  }

  // D^{-1} v: per PSD slice, the svec-coordinates map M -> T M T.
  VectorXd apply_dinv(const VectorXd& v) const {
    if (identity_scaling_) return v;
    VectorXd out(n_);
    for (int bi : psd_structured_) {
      const auto& blk = kernels_[bi].blk();
      const auto& sc = scalings_[bi];
      out.segment(blk.ident_slice, blk.size) =
          svec(sc.t * smat(v.segment(blk.ident_slice, blk.size)) * sc.t);
    }
    return out;
  }

  VectorXd hx_solve(const VectorXd& b) {
    if (!use_structured_) return hx_llt_.solve(b);
    VectorXd d = apply_dinv(b);
    if (k_small_ > 0) {
      const VectorXd y = k_llt_.solve(u_small_.transpose() * d);
      d -= w_dinv_u_ * y;
    }
    return d;
  }

  void factor(bool identity_scaling) {
    identity_scaling_ = identity_scaling;
    use_structured_ = structured_ok_;
    if (use_structured_) {
      if (k_small_ > 0) {
        // K = C^{-1} + U' D^{-1} U with C = blkdiag(Hinv of small blocks)
        MatrixXd cinv = MatrixXd::Zero(k_small_, k_small_);
        for (const auto& [bi, col] : small_blocks_) {
          const auto& blk = kernels_[bi].blk();
          for (int j = 0; j < blk.size; ++j) {
            VectorXd e = VectorXd::Zero(blk.size);
            e(j) = 1.0;
            if (identity_scaling) {
              cinv.block(col, col + j, blk.size, 1) = e;
            } else {
              cinv.block(col, col + j, blk.size, 1) =
                  kernels_[bi].apply_h(scalings_[bi], e);
            }
          }
        }
        w_dinv_u_.resize(n_, k_small_);
        for (int j = 0; j < k_small_; ++j) {
          w_dinv_u_.col(j) = apply_dinv(u_small_.col(j));
        }
        MatrixXd kk = cinv + u_small_.transpose() * w_dinv_u_;
        k_llt_.compute(kk);
        if (k_llt_.info() != Eigen::Success) {
          use_structured_ = false;  // fall through to the dense path
        }
      }
    }
    if (!use_structured_) {
      MatrixXd hx;
      if (identity_scaling) {
        hx.noalias() = cp_.g.transpose() * cp_.g;
      } else {
        hx = MatrixXd::Zero(n_, n_);
        for (std::size_t b = 0; b < kernels_.size(); ++b) {
          kernels_[b].add_schur(scalings_[b], cp_.g, hx);
        }
      }
      const double scale = std::max(1.0, hx.diagonal().mean());
      double delta = 1e-14 * scale;
      for (int attempt = 0;; ++attempt) {
        MatrixXd reg = hx;
        reg.diagonal().array() += delta;
        hx_llt_.compute(reg);
        if (hx_llt_.info() == Eigen::Success) break;
        if (attempt >= 6) throw NumericalError("kkt factorization failed");
        delta *= 100.0;
      }
    }
    if (meq_ > 0) {
      MatrixXd hi_at(n_, meq_);
      if (use_structured_) {
        for (int j = 0; j < meq_; ++j) {
          hi_at.col(j) = hx_solve(cp_.aeq.row(j).transpose());
        }
      } else {
        hi_at = hx_llt_.solve(cp_.aeq.transpose());
      }
      MatrixXd sm = cp_.aeq * hi_at;
      const double es = std::max(1.0, sm.diagonal().mean());
      double de = 1e-12 * es;
      for (int attempt = 0;; ++attempt) {
        MatrixXd reg = sm;
        reg.diagonal().array() += de;
        s_llt_.compute(reg);
        if (s_llt_.info() == Eigen::Success) break;
        if (attempt >= 6) {
          throw NumericalError("equality schur factorization failed");
        }
        de *= 100.0;
      }
    }
  }

  void base_solve(const VectorXd& bx, const VectorXd& by, const VectorXd& bz,
                  VectorXd& dx, VectorXd& dy, VectorXd& dz) {
    const VectorXd hib = identity_scaling_ ? bz : apply_hinv(bz);
    const VectorXd t1 = bx + gt_mul(hib);
    if (meq_ > 0) {
      const VectorXd rhs_y = cp_.aeq * hx_solve(t1) - by;
      dy = s_llt_.solve(rhs_y);
      dx = hx_solve(t1 - cp_.aeq.transpose() * dy);
    } else {
      dy.resize(0);
      dx = hx_solve(t1);
    }
    const VectorXd gdx = g_mul(dx);
    dz = identity_scaling_ ? VectorXd(gdx - bz) : apply_hinv(gdx - bz);
  }

  void kkt_solve(const VectorXd& bx, const VectorXd& by, const VectorXd& bz,
                 VectorXd& dx, VectorXd& dy, VectorXd& dz) {
    base_solve(bx, by, bz, dx, dy, dz);
    // iterative refinement against the unregularized system
    for (int round = 0; round < 3; ++round) {
      const VectorXd hdz = identity_scaling_ ? dz : apply_h(dz);
      VectorXd r1 = bx - gt_mul(dz);
      if (meq_ > 0) r1 -= cp_.aeq.transpose() * dy;
      const VectorXd r2 = meq_ > 0 ? VectorXd(by - cp_.aeq * dx) : VectorXd();
      const VectorXd r3 = bz - (g_mul(dx) - hdz);
      const double rn = std::sqrt(r1.squaredNorm() + r2.squaredNorm() +
                                  r3.squaredNorm());
      const double bn = std::sqrt(bx.squaredNorm() + by.squaredNorm() +
                                  bz.squaredNorm());
      if (rn <= 1e-14 * std::max(1.0, bn)) break;
      VectorXd ex, ey, ez;
      base_solve(r1, r2, r3, ex, ey, ez);
      dx += ex;
      if (meq_ > 0) dy += ey;
      dz += ez;
    }
  }

  void init_point() {
    x_ = VectorXd::Zero(n_);
    y_ = VectorXd::Zero(meq_);
    z_ = VectorXd::Zero(m_);
    s_ = VectorXd::Zero(m_);
    factor(true);
    VectorXd dx, dy, dz;
    kkt_solve(VectorXd::Zero(n_), cp_.beq, cp_.h, dx, dy, dz);
    x_ = dx;
    s_ = -dz;
    shift_interior(s_);
    kkt_solve(-cp_.c, VectorXd::Zero(meq_), VectorXd::Zero(m_), dx, dy, dz);
    y_ = dy;
    z_ = dz;
    shift_interior(z_);
    tau_ = 1.0;
    kappa_ = 1.0;
  }

  void shift_interior(VectorXd& v) {
    for (const auto& k : kernels_) {
      const auto& blk = k.blk();
      auto seg = v.segment(blk.off, blk.size);
      const double mg = k.margin(seg);
      if (mg <= 1e-8 * (1.0 + seg.cwiseAbs().maxCoeff())) {
        seg += (1.0 - mg) * k.identity();
      }
    }
  }

  const Compiled& cp_;
  SolveOptions opt_;
  std::vector<Kernel> kernels_;
  std::vector<Scaling> scalings_;
  int n_ = 0, meq_ = 0, m_ = 0;
  int nu_ = 0;
  VectorXd x_, y_, z_, s_;
  double tau_ = 1.0, kappa_ = 1.0;
  Eigen::LLT<MatrixXd> hx_llt_;
  Eigen::LLT<MatrixXd> s_llt_;
  bool identity_scaling_ = false;
  // structured path
  bool structured_ok_ = false;
  bool use_structured_ = false;
  std::vector<int> psd_structured_;
  std::vector<std::pair<int, int>> small_blocks_;  // kernel index, U column
  MatrixXd u_small_;
  MatrixXd w_dinv_u_;
  Eigen::LLT<MatrixXd> k_llt_;
  int k_small_ = 0;
};

}  // namespace

ConicSolution solve(const ConicProblem& p, const SolveOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const Compiled cp = compile(p);
  const auto t1 = std::chrono::steady_clock::now();
  Ipm ipm(cp, opt);
  const Ipm::Result res = ipm.run();
  if (std::getenv("STARISCC_CONIC_STATS")) {
    const auto t2 = std::chrono::steady_clock::now();
    std::fprintf(stderr, "[conic] n=%d m=%d compile %.1fms run %.1fms iters %d\n",
                 cp.n, static_cast<int>(cp.h.size()),
                 1e3 * std::chrono::duration<double>(t1 - t0).count(),
                 1e3 * std::chrono::duration<double>(t2 - t1).count(),
                 res.iterations);
  }

  ConicSolution sol;
  sol.status = res.status;
  sol.iterations = res.iterations;
  sol.residuals = res.res;
  sol.obj_primal = res.pcost;
  sol.obj_dual = res.dcost;
  sol.x = res.x.head(cp.n_orig);

  int total_rows = 0;
  for (const auto& c : p.constraints) {
    total_rows += static_cast<int>(c.map.rows());
  }
  sol.dual = VectorXd::Zero(total_rows);
  int at = 0;
  for (std::size_t k = 0; k < p.constraints.size(); ++k) {
    const auto& dm = cp.dual_map[k];
    if (!dm.lowered) {
      for (int i = 0; i < dm.rows; ++i) {
        const double zi = dm.is_eq ? res.y(dm.internal_off + i)
                                   : res.z(dm.internal_off + i);
        sol.dual(at + i) = dm.row_scale(i) * zi;
      }
    }
    at += dm.rows;
  }
  return sol;
}

}  // namespace stariscc::conic
