#pragma once

#include <string>
#include <vector>

#include "detectors.hpp"
#include "rnjd.hpp"
#include "tensor.hpp"

namespace cps5 {

enum class FEstimator {
  Rnjd,           // real joint diagonalization of Re/Im of M_r and W_r^-1
  ComplexPencil,  // eigenvectors of M_1 M_2^-1 in complex arithmetic, then realified
};

struct Cps5JdOptions {
  Index rank = 1;
  double svd_rcond = 1e-12;
  double gap_warning = 10.0;
  double w_condition_cap = 1e10;
  double symmetry_warning = 1e-6;
  int rnjd_max_sweeps = 200;
  double rnjd_tol = 1e-12;
  bool refit_d = true;
  FEstimator f_estimator = FEstimator::Rnjd;
};

struct StageCounts {
  int svd = 0;
  int alpha_normalizations = 0;
  int detection_solves = 0;
  int rnjd_calls = 0;
  int rank1_recoveries = 0;
};

struct Cps5Report {
  RealVector singular_values;  // every singular value of the I^2 x J^2 K unfolding
  std::vector<cplx> alphas;
  double symmetry_deviation = 0.0;  // max partial-symmetry defect / max |T|
  double p_gap = 0.0;
  double q_gap = 0.0;
  int w_dropped = 0;
  int targets_used = 0;
  double rnjd_criterion = 0.0;
  int rnjd_sweeps = 0;
  double f_imag_defect = 0.0;  // of the complex-pencil estimate of F
  double bd_imag_residue = 0.0;
  double d_refit_imag = 0.0;
  StageCounts stages;
  std::vector<std::string> warnings;
};

struct AlphaNormalization {
  cplx alpha{1.0, 0.0};
  ComplexMatrix U;  // alpha * Ur, Hermitian
  ComplexTensor V;  // conj(alpha) * Vr, Hermitian frontal slices
  double u_hermitian_deviation = 0.0;
  double v_hermitian_deviation = 0.0;  // max over slices
};

/// Phase that makes Ur Hermitian. `Vr` is the cube of the right factor that multiplies F^-T,
/// i.e. the reshaped column of conj(V) diag(S), so the rotation keeps Ur Vr^T unchanged.
AlphaNormalization alpha_normalize(const ComplexMatrix& Ur, const ComplexTensor& Vr);

/// Unit-modulus alpha with alpha^2 = conj(tr(M M) / |tr(M M)|); alpha * M is Hermitian when M is
/// a phase-rotated Hermitian matrix.
cplx hermitian_phase(const ComplexMatrix& M);

struct RealifiedF {
  RealMatrix F;
  double defect = 0.0;  // ||Im F_raw||_F / ||F_raw||_F
};
RealifiedF realify_f(const ComplexMatrix& F_raw);

/// F from the pencil M_1 M_2^-1 in complex arithmetic, each column unit norm with the phase convention.
ComplexMatrix estimate_f_complex(const std::vector<ComplexMatrix>& M);

struct ARecovery {
  ComplexMatrix A;
  RealVector mu;  // column scale: UF(:,r) ~ mu_r vec(a_r a_r^H)
};
ARecovery recover_a(const ComplexMatrix& UF);

struct BdRecovery {
  ComplexMatrix B;
  RealMatrix D;
  double imag_residue = 0.0;  // max over columns of ||Im d|| / ||d||
};
BdRecovery recover_bd(const ComplexMatrix& VF, Index J, Index K);

/// Least-squares D for fixed A, B in the partially symmetric model (imaginary part dropped).
RealMatrix refit_d(const ComplexTensor& T, const ComplexMatrix& A, const ComplexMatrix& B, double* imag_ratio = nullptr);

double relative_residual(const ComplexTensor& T, const FactorSet& f);

struct Cps5JdResult {
  FactorSet factors;
  Cps5Report report;
};

/// Non-iterative partially symmetric CPD: SVD of the unfolding, phase normalization,
/// rank-1 detection systems, real joint diagonalization for F, rank-1 recovery of A, B, D.
Cps5JdResult cps5_jd(const ComplexTensor& T, const Cps5JdOptions& opts);

}  // namespace cps5
