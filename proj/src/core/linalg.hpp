#pragma once

#include <vector>

#include "types.hpp"

namespace cps5 {

/// M ~ U diag(S) V^H with S nonincreasing.
struct SvdResult {
  ComplexMatrix U;
  RealVector S;
  ComplexMatrix V;
};

/// Eigenpairs sorted by descending |lambda|; ties keep solver order.
struct EvdResult {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;
};

struct NullspaceResult {
  std::vector<ComplexVector> vectors;  // right singular vectors, smallest singular value first
  RealVector singular_values;          // all singular values, descending
};

struct HermitianRank1 {
  ComplexVector a;  // unit norm, largest-modulus entry real positive
  double mu = 0.0;  // eigenvalue of largest magnitude
  double hermitian_deviation = 0.0;  // ||M - M^H||_F / ||M||_F of the input
};

struct Rank1Triple {
  ComplexVector u;
  ComplexVector v;
  double sigma = 0.0;
};

inline constexpr double kDefaultRcond = 1e-12;

SvdResult truncated_svd(const ComplexMatrix& M, Index r);
EvdResult hermitian_evd(const ComplexMatrix& M, bool assume_hermitian = true);
ComplexMatrix pseudo_inverse(const ComplexMatrix& M, double rcond = kDefaultRcond);
NullspaceResult nullspace_vectors(const ComplexMatrix& M, Index count);
HermitianRank1 hermitian_rank1_vector(const ComplexMatrix& M);
Rank1Triple rank1_matrix_approx(const ComplexMatrix& M);
ComplexMatrix least_squares(const ComplexMatrix& A, const ComplexMatrix& Y, double rcond = kDefaultRcond);

/// ||M - M^H||_F / ||M||_F (0 for the zero matrix).
double hermitian_deviation(const ComplexMatrix& M);

}  // namespace cps5
