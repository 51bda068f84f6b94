#include "detectors.hpp"
#include "doctest.h"
#include "linalg.hpp"
#include "support.hpp"

using namespace cps5;
using namespace cps5::test;

namespace {

ComplexMatrix unit(ComplexMatrix M) { return M / M.norm(); }

}  // namespace

TEST_CASE("phi1 entries follow the defining formula") {
  std::mt19937_64 rng(31);
  const ComplexMatrix X = crandn(3, 3, rng), Y = crandn(3, 3, rng);
  const ComplexTensor P = phi1(X, Y);
  REQUIRE(P.dims() == std::vector<Index>{3, 3, 3, 3});
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j)
      for (Index k = 0; k < 3; ++k)
        for (Index l = 0; l < 3; ++l) {
          const cplx ref = X(i, k) * Y(j, l) + X(j, l) * Y(i, k) - X(i, l) * Y(j, k) - X(j, k) * Y(i, l);
          CHECK(std::abs(P(i, j, k, l) - ref) < 1e-14);
        }
  CHECK(max_abs_diff(phi1(X, Y), phi1(Y, X)) < 1e-14);
}

TEST_CASE("phi1(X, X) vanishes iff X has rank one") {
  std::mt19937_64 rng(32);
  for (int s = 0; s < 100; ++s) {
    const ComplexMatrix X1 = unit(crandn(4, 1, rng) * crandn(1, 4, rng));
    CHECK(phi1(X1, X1).norm() < 1e-13);
    const ComplexMatrix X2 = unit(crandn(4, 2, rng) * crandn(2, 4, rng));
    CHECK(phi1(X2, X2).norm() > 1e-3);
  }
}

TEST_CASE("phi2 is phi1 of the mode-1 unfoldings") {
  std::mt19937_64 rng(33);
  const Index J = 3, K = 2;
  ComplexTensor X({J, J, K}), Y({J, J, K});
  const ComplexMatrix x = crandn(J * J * K, 1, rng), y = crandn(J * J * K, 1, rng);
  for (Index n = 0; n < X.size(); ++n) X.data()[n] = x(n, 0), Y.data()[n] = y(n, 0);
  const ComplexTensor P = phi2(X, Y);
  REQUIRE(P.dims() == std::vector<Index>{J, J, J, J, K, K});
  for (Index i = 0; i < J; ++i)
    for (Index j = 0; j < J; ++j)
      for (Index k = 0; k < J; ++k)
        for (Index l = 0; l < J; ++l)
          for (Index m = 0; m < K; ++m)
            for (Index n = 0; n < K; ++n) {
              const cplx ref = X(i, k, m) * Y(j, l, n) + X(j, l, n) * Y(i, k, m) - X(j, k, m) * Y(i, l, n) -
                               X(i, l, n) * Y(j, k, m);
              CHECK(std::abs(P(i, j, k, l, m, n) - ref) < 1e-13);
            }
  const ComplexMatrix X1 = mode1_matricize(X);
  CHECK(X1(2, 1 * K + 1) == X(2, 1, 1));
}

TEST_CASE("phi2(X, X) vanishes iff the mode-1 unfolding has rank one") {
  std::mt19937_64 rng(34);
  const Index J = 3, K = 2;
  auto cube = [&](const ComplexMatrix& M) {
    ComplexTensor X({J, J, K});
    for (Index i = 0; i < J; ++i)
      for (Index c = 0; c < J * K; ++c) X(i, c / K, c % K) = M(i, c);
    return X;
  };
  for (int s = 0; s < 100; ++s) {
    const ComplexTensor X1 = cube(unit(crandn(J, 1, rng) * crandn(1, J * K, rng)));
    CHECK(phi2(X1, X1).norm() < 1e-13);
    const ComplexTensor X2 = cube(unit(crandn(J, 2, rng) * crandn(2, J * K, rng)));
    CHECK(phi2(X2, X2).norm() > 1e-3);
  }
}

TEST_CASE("the P system has an R-dimensional null space spanned by symmetric matrices") {
  // U_s = sum_r F_sr-weighted rank-one Hermitian matrices: combinations with c = f_r f_r^T vanish.
  std::mt19937_64 rng(35);
  const Index I = 4, R = 3;
  const ComplexMatrix A = crandn(I, R, rng);
  const RealMatrix W = rrandn(R, R, rng);  // U_s = sum_r W(r, s) a_r a_r^H
  std::vector<ComplexMatrix> U;
  for (Index s = 0; s < R; ++s) {
    ComplexMatrix Us = ComplexMatrix::Zero(I, I);
    for (Index r = 0; r < R; ++r) Us += W(r, s) * A.col(r) * A.col(r).adjoint();
    U.push_back(Us);
  }
  auto sys = build_p_system(U);
  CHECK(sys.stacked.cols() == R * (R + 1) / 2);
  const auto sol = solve_detection(sys, R);
  REQUIRE(sol.mats.size() == static_cast<std::size_t>(R));
  CHECK(sys.singular_values(sys.singular_values.size() - 1) < 1e-12 * sys.singular_values(0));
  CHECK(sol.gap > 1e10);
  CHECK_FALSE(sol.gap_warning);
  for (const auto& M : sol.mats) CHECK((M - M.transpose()).norm() < 1e-14);
}
