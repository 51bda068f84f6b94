#include "detectors.hpp"

#include <limits>
#include <string>

#include "linalg.hpp"

namespace cps5 {

namespace {

std::vector<std::pair<Index, Index>> pair_index(Index R) {
  std::vector<std::pair<Index, Index>> pairs;
  for (Index s = 0; s < R; ++s)
    for (Index t = s; t < R; ++t) pairs.emplace_back(s, t);
  return pairs;
}

// Kept rows (i<j, k<l) of phi1 for rectangular m x c operands, written into column `col`.
void fill_detector_column(const ComplexMatrix& X, const ComplexMatrix& Y, double scale, ComplexMatrix& out, Index col) {
  const Index m = X.rows(), c = X.cols();
  Index row = 0;
  for (Index i = 0; i < m; ++i)
    for (Index j = i + 1; j < m; ++j)
      for (Index k = 0; k < c; ++k)
        for (Index l = k + 1; l < c; ++l)
          out(row++, col) =
              scale * (X(i, k) * Y(j, l) + X(j, l) * Y(i, k) - X(i, l) * Y(j, k) - X(j, k) * Y(i, l));
}

DetectionSystem build_system(const std::vector<ComplexMatrix>& mats) {
  require(!mats.empty(), ErrorCode::InvalidArgument, "detection system needs at least one matrix");
  const Index m = mats.front().rows(), c = mats.front().cols();
  for (const auto& M : mats)
    require(M.rows() == m && M.cols() == c, ErrorCode::DimensionMismatch, "detection system: ragged inputs");
  const Index R = static_cast<Index>(mats.size());
  DetectionSystem sys;
  sys.rank = R;
  sys.index_map = pair_index(R);
  const Index rows = (m * (m - 1) / 2) * (c * (c - 1) / 2);
  sys.stacked = ComplexMatrix::Zero(rows, static_cast<Index>(sys.index_map.size()));
  for (std::size_t col = 0; col < sys.index_map.size(); ++col) {
    const auto [s, t] = sys.index_map[col];
    fill_detector_column(mats[static_cast<std::size_t>(s)], mats[static_cast<std::size_t>(t)], s == t ? 1.0 : 2.0,
                         sys.stacked, static_cast<Index>(col));
  }
  return sys;
}

}  // namespace

ComplexTensor phi1(const ComplexMatrix& X, const ComplexMatrix& Y) {
  require(X.rows() == Y.rows() && X.cols() == Y.cols() && X.rows() == X.cols(), ErrorCode::DimensionMismatch,
          "phi1: operands must be square and of equal size");
  const Index n = X.rows();
  ComplexTensor out({n, n, n, n});
  auto d = out.data();
  Index off = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < n; ++k)
        for (Index l = 0; l < n; ++l)
          d[off++] = X(i, k) * Y(j, l) + X(j, l) * Y(i, k) - X(i, l) * Y(j, k) - X(j, k) * Y(i, l);
  return out;
}

ComplexMatrix mode1_matricize(const ComplexTensor& X) {
  require(X.order() == 3, ErrorCode::DimensionMismatch, "mode1_matricize expects a 3-way tensor");
  return Eigen::Map<const ComplexMatrix>(X.data().data(), X.dim(0), X.dim(1) * X.dim(2));
}

ComplexTensor phi2(const ComplexTensor& X, const ComplexTensor& Y) {
  require(X.order() == 3 && X.dims() == Y.dims() && X.dim(0) == X.dim(1), ErrorCode::DimensionMismatch,
          "phi2: operands must be equal J x J x K cubes");
  const Index J = X.dim(0), K = X.dim(2);
  const ComplexMatrix X1 = mode1_matricize(X), Y1 = mode1_matricize(Y);
  ComplexTensor out({J, J, J, J, K, K});
  auto d = out.data();
  Index off = 0;
  for (Index i = 0; i < J; ++i)
    for (Index j = 0; j < J; ++j)
      for (Index k = 0; k < J; ++k)
        for (Index l = 0; l < J; ++l)
          for (Index m = 0; m < K; ++m)
            for (Index n = 0; n < K; ++n) {
              const Index km = k * K + m, ln = l * K + n;
              d[off++] = X1(i, km) * Y1(j, ln) + X1(j, ln) * Y1(i, km) - X1(j, km) * Y1(i, ln) -
                         X1(i, ln) * Y1(j, km);
            }
  return out;
}

DetectionSystem build_p_system(const std::vector<ComplexMatrix>& U) {
  for (const auto& M : U) require(M.rows() == M.cols(), ErrorCode::DimensionMismatch, "build_p_system: U_r not square");
  return build_system(U);
}

DetectionSystem build_q_system(const std::vector<ComplexTensor>& V) {
  require(!V.empty(), ErrorCode::InvalidArgument, "build_q_system: empty list");
  std::vector<ComplexMatrix> unfolded;
  unfolded.reserve(V.size());
  for (const auto& cube : V) {
    require(cube.order() == 3 && cube.dim(0) == cube.dim(1), ErrorCode::DimensionMismatch,
            "build_q_system: V_r must be J x J x K");
    unfolded.push_back(mode1_matricize(cube));
  }
  return build_system(unfolded);
}

SymmetricMatrixSet solve_detection(DetectionSystem& sys, Index R, double gap_threshold) {
  const Index P = static_cast<Index>(sys.index_map.size());
  require(R >= 1 && R * (R + 1) / 2 == P, ErrorCode::RankOutOfRange, "solve_detection: R does not match system columns");
  require(sys.stacked.rows() >= P - R, ErrorCode::RankOutOfRange,
          "solve_detection: underdetermined system (" + std::to_string(sys.stacked.rows()) + " rows, need " +
              std::to_string(P - R) + ")");

  SymmetricMatrixSet out;
  if (R == 1) {
    sys.singular_values = RealVector::Zero(1);
    out.mats.push_back(ComplexMatrix::Ones(1, 1));
    out.gap = std::numeric_limits<double>::infinity();
    return out;
  }

  const auto ns = nullspace_vectors(sys.stacked, R);
  sys.singular_values = ns.singular_values;
  const double largest_retained = ns.singular_values(P - R);
  const double smallest_discarded = ns.singular_values(P - R - 1);
  out.gap = largest_retained > 0.0 ? smallest_discarded / largest_retained : std::numeric_limits<double>::infinity();
  out.gap_warning = out.gap < gap_threshold;

  for (const auto& v : ns.vectors) {
    ComplexMatrix M(R, R);
    for (Index col = 0; col < P; ++col) {
      const auto [s, t] = sys.index_map[static_cast<std::size_t>(col)];
      M(s, t) = v(col);
      M(t, s) = v(col);
    }
    out.mats.push_back(std::move(M));
  }
  return out;
}

}  // namespace cps5
