#include "tensor.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace cps5 {

namespace {

Index product(const std::vector<Index>& dims) {
  return std::accumulate(dims.begin(), dims.end(), Index{1}, std::multiplies<>());
}

void check_dims(const std::vector<Index>& dims) {
  require(!dims.empty(), ErrorCode::InvalidArgument, "tensor needs at least one mode");
  for (Index d : dims) require(d > 0, ErrorCode::InvalidArgument, "tensor dimensions must be positive");
}

}  // namespace

ComplexTensor::ComplexTensor(std::vector<Index> dims) : dims_(std::move(dims)) {
  check_dims(dims_);
  data_.assign(static_cast<std::size_t>(product(dims_)), cplx{});
}

ComplexTensor::ComplexTensor(std::vector<Index> dims, std::vector<cplx> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  check_dims(dims_);
  require(product(dims_) == static_cast<Index>(data_.size()), ErrorCode::DimensionMismatch,
          "tensor data length does not match product of dims");
}

Index ComplexTensor::offset(std::span<const Index> idx) const {
  require(idx.size() == dims_.size(), ErrorCode::DimensionMismatch, "index arity differs from tensor order");
  Index off = 0;
  for (std::size_t m = 0; m < dims_.size(); ++m) {
    require(idx[m] >= 0 && idx[m] < dims_[m], ErrorCode::InvalidArgument, "tensor index out of range");
    off = off * dims_[m] + idx[m];
  }
  return off;
}

double ComplexTensor::norm() const {
  double s = 0.0;
  for (const cplx& z : data_) s += std::norm(z);
  return std::sqrt(s);
}

cplx apply_phase_convention(Eigen::Ref<ComplexVector> v) {
  if (v.size() == 0) return {1.0, 0.0};
  Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  const double mag = std::abs(v(imax));
  if (mag == 0.0) return {1.0, 0.0};
  const cplx phase = std::conj(v(imax)) / mag;
  v *= phase;
  v(imax) = cplx(std::abs(v(imax)), 0.0);
  return phase;
}

FactorSet normalize_factors(FactorSet f) {
  const Index R = f.rank();
  require(f.B.cols() == R && f.D.cols() == R, ErrorCode::DimensionMismatch, "factor column counts differ");
  for (Index r = 0; r < R; ++r) {
    const double na = f.A.col(r).norm();
    const double nb = f.B.col(r).norm();
    if (na > 0.0) f.A.col(r) /= na;
    if (nb > 0.0) f.B.col(r) /= nb;
    f.D.col(r) *= na * na * nb * nb;
    ComplexVector a = f.A.col(r);
    apply_phase_convention(a);
    f.A.col(r) = a;
    ComplexVector b = f.B.col(r);
    apply_phase_convention(b);
    f.B.col(r) = b;
  }
  return f;
}

ComplexMatrix khatri_rao(const ComplexMatrix& A, const ComplexMatrix& B) {
  require(A.cols() == B.cols(), ErrorCode::DimensionMismatch,
          "khatri_rao: column counts differ (" + std::to_string(A.cols()) + " vs " + std::to_string(B.cols()) + ")");
  const Index I = A.rows(), J = B.rows(), R = A.cols();
  ComplexMatrix out(I * J, R);
  for (Index i = 0; i < I; ++i)
    for (Index j = 0; j < J; ++j)
      for (Index r = 0; r < R; ++r) out(i * J + j, r) = A(i, r) * B(j, r);
  return out;
}

ComplexMatrix khatri_rao(std::initializer_list<const ComplexMatrix*> factors) {
  require(factors.size() > 0, ErrorCode::InvalidArgument, "khatri_rao: empty factor list");
  auto it = factors.begin();
  ComplexMatrix acc = **it;
  for (++it; it != factors.end(); ++it) acc = khatri_rao(acc, **it);
  return acc;
}

ComplexTensor synthesize_cp5(const FactorSet& f, const std::optional<RealVector>& weights) {
  const Index R = f.rank();
  require(f.B.cols() == R && f.D.cols() == R, ErrorCode::DimensionMismatch,
          "synthesize_cp5: factor column counts differ");
  require(!weights || weights->size() == R, ErrorCode::DimensionMismatch, "synthesize_cp5: weight length != rank");
  const Index I = f.A.rows(), J = f.B.rows(), K = f.D.rows();

  // Row (i1,j1,i2,j2) of the mode-5 unfolding is the four-fold Khatri-Rao product.
  const ComplexMatrix Ac = f.A.conjugate();
  const ComplexMatrix Bc = f.B.conjugate();
  const ComplexMatrix Z = khatri_rao({&f.A, &f.B, &Ac, &Bc});
  ComplexMatrix Dw = f.D.cast<cplx>();
  if (weights)
    for (Index r = 0; r < R; ++r) Dw.col(r) *= (*weights)(r);
  const ComplexMatrix flat = Z * Dw.transpose();  // (IJIJ) x K, row-major == tensor layout

  return ComplexTensor({I, J, I, J, K}, std::vector<cplx>(flat.data(), flat.data() + flat.size()));
}

ComplexMatrix matricize5(const ComplexTensor& T) {
  require(T.order() == 5, ErrorCode::DimensionMismatch, "matricize5 expects a 5-way tensor");
  const Index I = T.dim(0), J = T.dim(1), K = T.dim(4);
  require(T.dim(2) == I && T.dim(3) == J, ErrorCode::DimensionMismatch, "matricize5 expects dims (I,J,I,J,K)");
  ComplexMatrix M(I * I, J * J * K);
  const auto src = T.data();
  Index off = 0;
  for (Index i1 = 0; i1 < I; ++i1)
    for (Index j1 = 0; j1 < J; ++j1)
      for (Index i2 = 0; i2 < I; ++i2)
        for (Index j2 = 0; j2 < J; ++j2)
          for (Index k = 0; k < K; ++k) M(i1 * I + i2, (j1 * J + j2) * K + k) = src[off++];
  return M;
}

ComplexTensor dematricize5(const ComplexMatrix& M, Index I, Index J, Index K) {
  require(M.rows() == I * I && M.cols() == J * J * K, ErrorCode::DimensionMismatch,
          "dematricize5: matrix shape does not match (I,J,K)");
  ComplexTensor T({I, J, I, J, K});
  auto dst = T.data();
  Index off = 0;
  for (Index i1 = 0; i1 < I; ++i1)
    for (Index j1 = 0; j1 < J; ++j1)
      for (Index i2 = 0; i2 < I; ++i2)
        for (Index j2 = 0; j2 < J; ++j2)
          for (Index k = 0; k < K; ++k) dst[off++] = M(i1 * I + i2, (j1 * J + j2) * K + k);
  return T;
}

ComplexMatrix matricize3(const ComplexTensor& X) {
  require(X.order() == 3, ErrorCode::DimensionMismatch, "matricize3 expects a 3-way tensor");
  const Index IJ = X.dim(0) * X.dim(1), K = X.dim(2);
  // Row-major (i,j,k) flattening already places (i*J + j, k) contiguously.
  return Eigen::Map<const ComplexMatrix>(X.data().data(), IJ, K);
}

ComplexTensor dematricize3(const ComplexMatrix& M, Index I, Index J) {
  require(I > 0 && J > 0 && M.rows() == I * J, ErrorCode::DimensionMismatch, "dematricize3: rows != I*J");
  const ComplexMatrix rm = M;
  return ComplexTensor({I, J, M.cols()}, std::vector<cplx>(rm.data(), rm.data() + rm.size()));
}

double check_partial_symmetry(const ComplexTensor& T) {
  require(T.order() == 5, ErrorCode::DimensionMismatch, "partial symmetry is defined for 5-way tensors");
  const Index I = T.dim(0), J = T.dim(1), K = T.dim(4);
  require(T.dim(2) == I && T.dim(3) == J, ErrorCode::DimensionMismatch, "partial symmetry needs dims (I,J,I,J,K)");
  double dev = 0.0;
  for (Index i1 = 0; i1 < I; ++i1)
    for (Index j1 = 0; j1 < J; ++j1)
      for (Index i2 = 0; i2 < I; ++i2)
        for (Index j2 = 0; j2 < J; ++j2)
          for (Index k = 0; k < K; ++k)
            dev = std::max(dev, std::abs(T(i1, j1, i2, j2, k) - std::conj(T(i2, j2, i1, j1, k))));
  return dev;
}

ComplexMatrix column_to_square(const ComplexVector& v, Index n) {
  require(n > 0 && v.size() == n * n, ErrorCode::DimensionMismatch, "column_to_square: length != n^2");
  ComplexMatrix M(n, n);
  for (Index p = 0; p < n; ++p)
    for (Index q = 0; q < n; ++q) M(p, q) = v(p * n + q);
  return M;
}

ComplexVector square_to_column(const ComplexMatrix& M) {
  require(M.rows() == M.cols(), ErrorCode::DimensionMismatch, "square_to_column: matrix not square");
  const Index n = M.rows();
  ComplexVector v(n * n);
  for (Index p = 0; p < n; ++p)
    for (Index q = 0; q < n; ++q) v(p * n + q) = M(p, q);
  return v;
}

ComplexTensor column_to_cube(const ComplexVector& v, Index J, Index K) {
  require(J > 0 && K > 0 && v.size() == J * J * K, ErrorCode::DimensionMismatch, "column_to_cube: length != J^2 K");
  return ComplexTensor({J, J, K}, std::vector<cplx>(v.data(), v.data() + v.size()));
}

ComplexVector cube_to_column(const ComplexTensor& V) {
  require(V.order() == 3 && V.dim(0) == V.dim(1), ErrorCode::DimensionMismatch, "cube_to_column expects J x J x K");
  return Eigen::Map<const ComplexVector>(V.data().data(), V.size());
}

ComplexMatrix unfold(const ComplexTensor& T, std::size_t mode) {
  require(mode < T.order(), ErrorCode::InvalidArgument, "unfold: mode out of range");
  const auto& dims = T.dims();
  const Index rows = dims[mode];
  const Index cols = T.size() / rows;
  // inner = product of dims after `mode`; outer blocks are the dims before it.
  Index inner = 1;
  for (std::size_t m = mode + 1; m < dims.size(); ++m) inner *= dims[m];
  const Index outer = T.size() / (rows * inner);
  ComplexMatrix M(rows, cols);
  const auto src = T.data();
  for (Index o = 0; o < outer; ++o)
    for (Index r = 0; r < rows; ++r)
      for (Index in = 0; in < inner; ++in) M(r, o * inner + in) = src[(o * rows + r) * inner + in];
  return M;
}

}  // namespace cps5
