#include "linalg.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include <Eigen/SVD>

#include "tensor.hpp"

namespace cps5 {

namespace {

using ColMajor = Eigen::MatrixXcd;

Eigen::JacobiSVD<ColMajor> thin_svd(const ComplexMatrix& M) {
  return Eigen::JacobiSVD<ColMajor>(ColMajor(M), Eigen::ComputeThinU | Eigen::ComputeThinV);
}

std::vector<Index> order_by_magnitude(const RealVector& values) {
  std::vector<Index> idx(static_cast<std::size_t>(values.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Index a, Index b) { return std::abs(values(a)) > std::abs(values(b)); });
  return idx;
}

}  // namespace

double hermitian_deviation(const ComplexMatrix& M) {
  const double n = M.norm();
  if (n == 0.0) return 0.0;
  return (M - M.adjoint()).norm() / n;
}

SvdResult truncated_svd(const ComplexMatrix& M, Index r) {
  const Index full = std::min(M.rows(), M.cols());
  require(r >= 1 && r <= full, ErrorCode::RankOutOfRange,
          "truncated_svd: rank " + std::to_string(r) + " outside [1, " + std::to_string(full) + "]");
  const auto svd = thin_svd(M);
  return {svd.matrixU().leftCols(r), svd.singularValues().head(r), svd.matrixV().leftCols(r)};
}

EvdResult hermitian_evd(const ComplexMatrix& M, bool assume_hermitian) {
  require(M.rows() == M.cols(), ErrorCode::DimensionMismatch, "hermitian_evd: matrix is not square");
  if (assume_hermitian) {
    const double dev = (M - M.adjoint()).norm();
    require(dev <= 1e-8 * M.norm(), ErrorCode::Numerical,
            "hermitian_evd: input deviates from Hermitian by " + std::to_string(dev));
  }
  const ColMajor H = 0.5 * (ColMajor(M) + ColMajor(M.adjoint()));
  Eigen::SelfAdjointEigenSolver<ColMajor> es(H);
  require(es.info() == Eigen::Success, ErrorCode::Numerical, "hermitian_evd: eigensolver did not converge");

  const auto order = order_by_magnitude(es.eigenvalues());
  EvdResult out{RealVector(M.rows()), ComplexMatrix(M.rows(), M.rows())};
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.eigenvalues(static_cast<Index>(k)) = es.eigenvalues()(order[k]);
    out.eigenvectors.col(static_cast<Index>(k)) = es.eigenvectors().col(order[k]);
  }
  return out;
}

ComplexMatrix pseudo_inverse(const ComplexMatrix& M, double rcond) {
  if (M.size() == 0) return ComplexMatrix::Zero(M.cols(), M.rows());
  const auto svd = thin_svd(M);
  const RealVector& s = svd.singularValues();
  const double cutoff = rcond * (s.size() > 0 ? s(0) : 0.0);
  RealVector inv = RealVector::Zero(s.size());
  for (Index k = 0; k < s.size(); ++k)
    if (s(k) > cutoff && s(k) > 0.0) inv(k) = 1.0 / s(k);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

NullspaceResult nullspace_vectors(const ComplexMatrix& M, Index count) {
  require(count >= 1 && count <= M.cols(), ErrorCode::RankOutOfRange,
          "nullspace_vectors: count " + std::to_string(count) + " outside [1, " + std::to_string(M.cols()) + "]");
  Eigen::JacobiSVD<ColMajor> svd(ColMajor(M), Eigen::ComputeFullV);
  // Wide inputs have cols - rows directions with exactly zero singular value.
  RealVector sv = RealVector::Zero(M.cols());
  sv.head(svd.singularValues().size()) = svd.singularValues();

  NullspaceResult out;
  out.singular_values = sv;
  for (Index k = 0; k < count; ++k) out.vectors.emplace_back(svd.matrixV().col(M.cols() - 1 - k));
  return out;
}

HermitianRank1 hermitian_rank1_vector(const ComplexMatrix& M) {
  require(M.rows() > 0 && M.rows() == M.cols(), ErrorCode::DimensionMismatch,
          "hermitian_rank1_vector: needs a non-empty square matrix");
  HermitianRank1 out;
  out.hermitian_deviation = hermitian_deviation(M);
  const auto evd = hermitian_evd(0.5 * (M + M.adjoint()), false);
  out.mu = evd.eigenvalues(0);
  out.a = evd.eigenvectors.col(0);
  out.a.normalize();
  apply_phase_convention(out.a);
  return out;
}

Rank1Triple rank1_matrix_approx(const ComplexMatrix& M) {
  require(M.rows() > 0 && M.cols() > 0, ErrorCode::DimensionMismatch, "rank1_matrix_approx: empty matrix");
  const auto svd = thin_svd(M);
  Rank1Triple out{svd.matrixU().col(0), svd.matrixV().col(0), svd.singularValues()(0)};
  if (out.sigma == 0.0) {
    out.u = ComplexVector::Unit(M.rows(), 0);
    out.v = ComplexVector::Unit(M.cols(), 0);
  }
  return out;
}

ComplexMatrix least_squares(const ComplexMatrix& A, const ComplexMatrix& Y, double rcond) {
  require(A.rows() == Y.rows(), ErrorCode::DimensionMismatch, "least_squares: row counts differ");
  return pseudo_inverse(A, rcond) * Y;
}

}  // namespace cps5
