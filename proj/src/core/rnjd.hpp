#pragma once

#include <vector>

#include "types.hpp"

namespace cps5 {

/// Real non-orthogonal joint diagonalization by congruence: G_k ~ F diag(lambda_k) F^T.
struct JdProblem {
  std::vector<RealMatrix> targets;
  int max_sweeps = 200;
  double tol = 1e-12;
  std::vector<RealMatrix> initial_F;  // extra starting points besides whitening; the best final result wins
};

struct JdSweepRecord {
  double before = 0.0;  // criterion entering the sweep's elementary updates
  double after = 0.0;   // criterion after them
};

struct JdSolution {
  RealMatrix F;                   // invertible, columns ordered by descending norm
  std::vector<RealVector> diags;  // diag(F^-1 G_k F^-T), matching F's column order
  double offdiag_final = 0.0;     // row-scale invariant relative criterion at exit
  int sweeps = 0;
  bool converged = false;
  std::vector<JdSweepRecord> sweep_log;
};

/// sum_k ||off(W G_k W^T)||_F^2 for a candidate demixing matrix W = F^-1.
double offdiag_criterion(const RealMatrix& W, const std::vector<RealMatrix>& targets);

/// Alternating lower/upper elementary-triangular Jacobi sweeps from a whitening start. Every elementary update
/// W <- (I + a e_i e_j^T) W takes the exact minimizer `a` of the criterion, which is quadratic
/// in `a`. Rows of W are balanced before every sweep and normalized at exit. Throws Error(Divergence) when a sweep
/// grows the criterion by more than 1e3.
JdSolution rnjd_solve(const JdProblem& problem);

}  // namespace cps5
