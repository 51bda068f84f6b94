#pragma once

#include <array>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include "types.hpp"

namespace cps5 {

/// Dense N-way complex array, row-major with the last index fastest.
class ComplexTensor {
 public:
  ComplexTensor() = default;
  explicit ComplexTensor(std::vector<Index> dims);
  ComplexTensor(std::vector<Index> dims, std::vector<cplx> data);

  const std::vector<Index>& dims() const noexcept { return dims_; }
  Index dim(std::size_t mode) const { return dims_.at(mode); }
  std::size_t order() const noexcept { return dims_.size(); }
  Index size() const noexcept { return static_cast<Index>(data_.size()); }

  std::span<const cplx> data() const noexcept { return data_; }
  std::span<cplx> data() noexcept { return data_; }

  /// Flat offset of a multi-index; the one place where index tuples become offsets.
  Index offset(std::span<const Index> idx) const;

  template <typename... Is>
  cplx& operator()(Is... is) {
    const std::array<Index, sizeof...(Is)> idx{static_cast<Index>(is)...};
    return data_[static_cast<std::size_t>(offset(idx))];
  }
  template <typename... Is>
  const cplx& operator()(Is... is) const {
    const std::array<Index, sizeof...(Is)> idx{static_cast<Index>(is)...};
    return data_[static_cast<std::size_t>(offset(idx))];
  }

  double norm() const;

 private:
  std::vector<Index> dims_;
  std::vector<cplx> data_;
};

/// Loading matrices of the partially symmetric model
/// T = sum_r a_r o b_r o conj(a_r) o conj(b_r) o d_r.
struct FactorSet {
  ComplexMatrix A;  // I x R
  ComplexMatrix B;  // J x R
  RealMatrix D;     // K x R

  Index rank() const noexcept { return A.cols(); }
};

/// Fixes the largest-modulus entry of `v` to be real positive. Returns the applied unit phase.
cplx apply_phase_convention(Eigen::Ref<ComplexVector> v);

/// Unit-norm columns of A and B with the phase convention; the squared norms move into D.
/// The phases cancel in a o conj(a), so only magnitudes need transferring.
FactorSet normalize_factors(FactorSet f);

/// Column-wise Kronecker product; row index i*J + j.
ComplexMatrix khatri_rao(const ComplexMatrix& A, const ComplexMatrix& B);
/// Khatri-Rao over a list, leftmost factor varying slowest.
ComplexMatrix khatri_rao(std::initializer_list<const ComplexMatrix*> factors);

ComplexTensor synthesize_cp5(const FactorSet& f, const std::optional<RealVector>& weights = std::nullopt);

/// (I,J,I,J,K) -> I^2 x J^2 K with row i1*I + i2 and column (j1*J + j2)*K + k.
ComplexMatrix matricize5(const ComplexTensor& T);
ComplexTensor dematricize5(const ComplexMatrix& M, Index I, Index J, Index K);

/// (I,J,K) -> IJ x K with row i*J + j.
ComplexMatrix matricize3(const ComplexTensor& X);
ComplexTensor dematricize3(const ComplexMatrix& M, Index I, Index J);

/// max |T(i1,j1,i2,j2,k) - conj(T(i2,j2,i1,j1,k))|.
double check_partial_symmetry(const ComplexTensor& T);

ComplexMatrix column_to_square(const ComplexVector& v, Index n);
ComplexVector square_to_column(const ComplexMatrix& M);
ComplexTensor column_to_cube(const ComplexVector& v, Index J, Index K);
ComplexVector cube_to_column(const ComplexTensor& V);

/// General mode-n unfolding: row = index along `mode`, columns = remaining indices in order.
ComplexMatrix unfold(const ComplexTensor& T, std::size_t mode);

}  // namespace cps5
