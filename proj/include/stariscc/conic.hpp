#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "stariscc/types.hpp"

namespace stariscc::conic {

// ---------------------------------------------------------------------------
// Problem representation
// ---------------------------------------------------------------------------

enum class ConeType { zero, nonnegative, second_order, power3, psd };

/// One constraint: map(x) = A x + b must lie in the cone.
///   zero          A x + b = 0
///   nonnegative   A x + b >= 0 elementwise
///   second_order  (A x + b) = (t, v) with t >= ||v||
///   power3        (A x + b) = (p, q, r) with p^a q^(1-a) >= |r|, p,q >= 0
///   psd           A x + b = svec(S) with S symmetric PSD (dim x dim)
struct ConeConstraint {
  ConeType type = ConeType::zero;
  MatrixXd map;  // rows x nvar
  VectorXd offset;
  double exponent = 0.0;  // power3 only, in (0,1)
  int dim = 0;            // psd only: matrix dimension
};

/// Maps a complex model quantity to a slice of the real variable vector.
struct VariableAnnotation {
  std::string name;
  int offset = 0;
  int length = 0;
  double scale = 1.0;  // e.g. real-trace = 2 * complex-trace for embeddings
};

struct ConicProblem {
  int nvar = 0;
  VectorXd objective;  // minimize objective . x
  std::vector<ConeConstraint> constraints;
  std::vector<VariableAnnotation> annotations;

  int add_vars(int k);
  void add_zero(const MatrixXd& a, const VectorXd& b);
  void add_nonnegative(const MatrixXd& a, const VectorXd& b);
  void add_second_order(const MatrixXd& a, const VectorXd& b);
  void add_power3(const MatrixXd& a, const VectorXd& b, double exponent);
  /// Declares the variable slice [offset, offset+svec_len(dim)) to be the
  /// svec of a PSD matrix.
  void add_psd_slice(int offset, int dim);
  void validate() const;
};

enum class SolveStatus { optimal, infeasible, unbounded, numerical_limit };

struct KktResiduals {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
};

struct ConicSolution {
  SolveStatus status = SolveStatus::numerical_limit;
  VectorXd x;
  /// Dual values per constraint, stacked in declaration order (zero-cone
  /// rows carry the equality multipliers). power3 duals refer to the
  /// internal second-order reformulation and are reported per original row
  /// as zeros.
  VectorXd dual;
  KktResiduals residuals;
  double obj_primal = 0.0;
  double obj_dual = 0.0;
  int iterations = 0;
};

struct SolveOptions {
  double tol_feas = 1.0e-8;
  double tol_gap = 1.0e-8;
  int max_iter = 200;
  bool verbose = false;
};

ConicSolution solve(const ConicProblem& p, const SolveOptions& opt = {});

/// Worst cone-membership violation of a candidate point, measured
/// independently of the solver internals.
double max_cone_violation(const ConicProblem& p, const VectorXd& x);

/// Writes the problem in a plain sparse text format (one problem per file;
/// see README for the grammar).
void dump_problem(const ConicProblem& p, std::ostream& os);

// ---------------------------------------------------------------------------
// Hermitian embedding and svec utilities
// ---------------------------------------------------------------------------

/// Length of svec for a dim x dim symmetric matrix.
int svec_len(int dim);
/// Scaled column-stack of the lower triangle; preserves trace inner products.
VectorXd svec(const MatrixXd& s);
MatrixXd smat(const VectorXd& v);

struct HermitianEmbedding {
  int complex_dim = 0;
  int real_dim = 0;           // 2 * complex_dim
  double trace_factor = 2.0;  // real trace = trace_factor * complex trace
};

HermitianEmbedding embed_hermitian_psd(int n);
/// M -> [[Re M, -Im M], [Im M, Re M]], symmetrized first.
MatrixXd embed_hermitian(const MatrixXcd& m);
/// Inverse of embed_hermitian; averages the redundant blocks.
MatrixXcd recover_hermitian(const MatrixXd& s);

// ---------------------------------------------------------------------------
// Reusable constraint gadgets
// ---------------------------------------------------------------------------

/// Rows encoding t >= c * r^3, r >= 0 through a power3 cone on the tuple
/// (t/c, 1, r); t_var and r_var index into the problem variables.
void cubic_power_constraint(ConicProblem& p, int r_var, int t_var, double c);

/// Rows encoding ||A x + b||^2 <= l(x) via a second-order cone, where
/// l(x) = d . x + e is affine.
void quadratic_upper_bound(ConicProblem& p, const MatrixXd& a, const VectorXd& b,
                           const VectorXd& d, double e);

}  // namespace stariscc::conic
