// Shared helpers for the unit tests.
#pragma once

#include <random>

#include "tensor.hpp"

namespace cps5::test {

inline ComplexMatrix crandn(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix M(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) M(i, j) = {n(rng), n(rng)};
  return M;
}

inline RealMatrix rrandn(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  RealMatrix M(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) M(i, j) = n(rng);
  return M;
}

inline FactorSet random_set(Index I, Index J, Index K, Index R, std::mt19937_64& rng) {
  return FactorSet{crandn(I, R, rng), crandn(J, R, rng), rrandn(K, R, rng)};
}

// Direct quintuple-loop evaluation of the partially symmetric model.
inline ComplexTensor model_by_loops(const FactorSet& f) {
  const Index I = f.A.rows(), J = f.B.rows(), K = f.D.rows(), R = f.rank();
  ComplexTensor T({I, J, I, J, K});
  for (Index i1 = 0; i1 < I; ++i1)
    for (Index j1 = 0; j1 < J; ++j1)
      for (Index i2 = 0; i2 < I; ++i2)
        for (Index j2 = 0; j2 < J; ++j2)
          for (Index k = 0; k < K; ++k) {
            cplx s = 0.0;
            for (Index r = 0; r < R; ++r)
              s += f.A(i1, r) * f.B(j1, r) * std::conj(f.A(i2, r)) * std::conj(f.B(j2, r)) * f.D(k, r);
            T(i1, j1, i2, j2, k) = s;
          }
  return T;
}

inline double max_abs_diff(const ComplexTensor& a, const ComplexTensor& b) {
  double m = 0.0;
  for (Index i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace cps5::test
