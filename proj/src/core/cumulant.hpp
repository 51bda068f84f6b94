#pragma once

#include <vector>

#include "tensor.hpp"

namespace cps5 {

/// Fourth-order cumulant matrix cum(x, x*, x*, x) of an n-channel process.
/// Entry (i*n + j, k*n + l) holds cum(x_i, x_j*, x_k*, x_l).
struct QuadricovarianceMatrix {
  Index n = 0;
  ComplexMatrix C;  // n^2 x n^2, Hermitian
};

struct EigenmatrixSet {
  std::vector<ComplexMatrix> E;  // R Hermitian n x n matrices, sqrt(|lambda_r|) * reshape(e_r)
  RealVector lambdas;            // retained eigenvalues, descending |lambda|
  std::vector<int> signs;        // sign(lambda_r)
  RealVector spectrum;           // every eigenvalue of C, descending |lambda|
};

/// Sample estimate from X (n x T) with zero-mean moments, T >= 2.
QuadricovarianceMatrix sample_quadricov(const ComplexMatrix& X);

/// Exact cumulant of x = M s for independent circular sources with the given kurtoses:
/// C = sum_r kappa_r vec(m_r m_r^H) vec(m_r m_r^H)^H.
QuadricovarianceMatrix analytic_quadricov(const ComplexMatrix& M, const RealVector& kurtoses);

/// The R eigenmatrices of largest |lambda|. The eigenproblem is solved in the real basis of
/// Hermitian n x n matrices, so every eigenvector reshapes to a Hermitian matrix by construction.
EigenmatrixSet dominant_eigenmatrices(const QuadricovarianceMatrix& C, Index R);

/// T(i1,j1,i2,j2,k) = E_k(i1*J + j1, i2*J + j2).
ComplexTensor assemble_t5(const EigenmatrixSet& E, Index I, Index J);

}  // namespace cps5
