#include "cumulant.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

namespace cps5 {

namespace {

// Orthonormal basis of vec(H) for Hermitian H, one column per (p, q):
//   p == q : e_pp
//   p <  q : (e_pq + e_qp) / sqrt 2
//   p >  q : i (e_qp - e_pq) / sqrt 2
// Column b = p*n + q, so the basis shares the vec index layout.
struct HermitianBasisEntry {
  Index row;
  cplx coeff;
};

std::vector<std::array<HermitianBasisEntry, 2>> hermitian_basis(Index n) {
  const double s = 1.0 / std::sqrt(2.0);
  std::vector<std::array<HermitianBasisEntry, 2>> basis(static_cast<std::size_t>(n * n));
  for (Index p = 0; p < n; ++p)
    for (Index q = 0; q < n; ++q) {
      auto& col = basis[static_cast<std::size_t>(p * n + q)];
      if (p == q)
        col = {HermitianBasisEntry{p * n + p, {1.0, 0.0}}, HermitianBasisEntry{p * n + p, {0.0, 0.0}}};
      else if (p < q)
        col = {HermitianBasisEntry{p * n + q, {s, 0.0}}, HermitianBasisEntry{q * n + p, {s, 0.0}}};
      else
        col = {HermitianBasisEntry{q * n + p, {0.0, s}}, HermitianBasisEntry{p * n + q, {0.0, -s}}};
    }
  return basis;
}

}  // namespace

QuadricovarianceMatrix sample_quadricov(const ComplexMatrix& X) {
  const Index n = X.rows(), T = X.cols();
  require(n >= 1, ErrorCode::InvalidArgument, "sample_quadricov: no channels");
  require(T >= 2, ErrorCode::InvalidArgument, "sample_quadricov: need at least 2 samples, got " + std::to_string(T));
  const double invT = 1.0 / static_cast<double>(T);

  // Y(i*n + j, t) = x_i x_j^*, so T^-1 sum_t x_i x_j^* x_k^* x_l = (Y Y^H / T)(ij, kl).
  Eigen::MatrixXcd Y(n * n, T);
  for (Index t = 0; t < T; ++t)
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) Y(i * n + j, t) = X(i, t) * std::conj(X(j, t));
  Eigen::MatrixXcd M4 = Eigen::MatrixXcd::Zero(n * n, n * n);
  M4.selfadjointView<Eigen::Lower>().rankUpdate(Y, invT);
  M4.triangularView<Eigen::StrictlyUpper>() = M4.adjoint();

  const ComplexMatrix Rx = X * X.adjoint() * invT;    // E x_i x_j^*
  const ComplexMatrix Px = X * X.transpose() * invT;  // E x_i x_l

  QuadricovarianceMatrix out{n, ComplexMatrix(n * n, n * n)};
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < n; ++k)
        for (Index l = 0; l < n; ++l) {
          const Index row = i * n + j, col = k * n + l;
          out.C(row, col) = M4(row, col) - Rx(i, j) * std::conj(Rx(k, l)) - Rx(i, k) * std::conj(Rx(j, l)) -
                            Px(i, l) * std::conj(Px(j, k));
        }
  return out;
}

QuadricovarianceMatrix analytic_quadricov(const ComplexMatrix& M, const RealVector& kurtoses) {
  require(M.cols() == kurtoses.size(), ErrorCode::DimensionMismatch, "analytic_quadricov: one kurtosis per column");
  const Index n = M.rows();
  QuadricovarianceMatrix out{n, ComplexMatrix::Zero(n * n, n * n)};
  for (Index r = 0; r < M.cols(); ++r) {
    const ComplexVector m = M.col(r);
    const ComplexMatrix outer = m * m.adjoint();
    const ComplexVector v = square_to_column(outer);
    out.C.noalias() += kurtoses(r) * (v * v.adjoint());
  }
  return out;
}

EigenmatrixSet dominant_eigenmatrices(const QuadricovarianceMatrix& C, Index R) {
  const Index n = C.n, N = n * n;
  require(C.C.rows() == N && C.C.cols() == N, ErrorCode::DimensionMismatch, "dominant_eigenmatrices: C is not n^2 x n^2");
  require(R >= 1 && R <= N, ErrorCode::RankOutOfRange,
          "dominant_eigenmatrices: R = " + std::to_string(R) + " outside [1, " + std::to_string(N) + "]");

  const auto basis = hermitian_basis(n);
  // CQ, then Q^H (CQ); each basis column has at most two non-zeros.
  ComplexMatrix CQ(N, N);
  for (Index b = 0; b < N; ++b) {
    const auto& e = basis[static_cast<std::size_t>(b)];
    CQ.col(b) = C.C.col(e[0].row) * e[0].coeff + C.C.col(e[1].row) * e[1].coeff;
  }
  Eigen::MatrixXd Creal(N, N);
  for (Index b = 0; b < N; ++b) {
    const auto& e = basis[static_cast<std::size_t>(b)];
    const auto row = (CQ.row(e[0].row) * std::conj(e[0].coeff) + CQ.row(e[1].row) * std::conj(e[1].coeff)).eval();
    Creal.row(b) = row.real();
  }
  Creal = 0.5 * (Creal + Creal.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Creal);
  require(es.info() == Eigen::Success, ErrorCode::Numerical, "dominant_eigenmatrices: eigensolver failed");
  const RealVector& lam = es.eigenvalues();
  std::vector<Index> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return std::abs(lam(a)) > std::abs(lam(b)); });

  EigenmatrixSet out;
  out.spectrum.resize(N);
  for (Index k = 0; k < N; ++k) out.spectrum(k) = lam(order[static_cast<std::size_t>(k)]);
  out.lambdas = out.spectrum.head(R);
  for (Index r = 0; r < R; ++r) {
    const Eigen::VectorXd x = es.eigenvectors().col(order[static_cast<std::size_t>(r)]);
    ComplexVector e = ComplexVector::Zero(N);
    for (Index b = 0; b < N; ++b) {
      const auto& be = basis[static_cast<std::size_t>(b)];
      e(be[0].row) += x(b) * be[0].coeff;
      e(be[1].row) += x(b) * be[1].coeff;
    }
    const double lr = out.lambdas(r);
    out.signs.push_back(lr < 0.0 ? -1 : 1);
    out.E.push_back(std::sqrt(std::abs(lr)) * column_to_square(e, n));
  }
  return out;
}

ComplexTensor assemble_t5(const EigenmatrixSet& E, Index I, Index J) {
  require(!E.E.empty(), ErrorCode::InvalidArgument, "assemble_t5: empty eigenmatrix set");
  const Index n = E.E.front().rows();
  require(I >= 1 && J >= 1 && n == I * J, ErrorCode::DimensionMismatch,
          "assemble_t5: eigenmatrix size " + std::to_string(n) + " != I*J");
  const Index K = static_cast<Index>(E.E.size());
  ComplexTensor T({I, J, I, J, K});
  for (Index k = 0; k < K; ++k) {
    const ComplexMatrix& Ek = E.E[static_cast<std::size_t>(k)];
    require(Ek.rows() == n && Ek.cols() == n, ErrorCode::DimensionMismatch, "assemble_t5: ragged eigenmatrices");
    for (Index i1 = 0; i1 < I; ++i1)
      for (Index j1 = 0; j1 < J; ++j1)
        for (Index i2 = 0; i2 < I; ++i2)
          for (Index j2 = 0; j2 < J; ++j2) T(i1, j1, i2, j2, k) = Ek(i1 * J + j1, i2 * J + j2);
  }
  return T;
}

}  // namespace cps5
