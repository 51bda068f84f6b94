#pragma once

#include <utility>
#include <vector>

#include "tensor.hpp"

namespace cps5 {

/// [phi1(X,Y)]_{ijkl} = x_ik y_jl + x_jl y_ik - x_il y_jk - x_jk y_il.
/// phi1(X,X) vanishes exactly when X has rank one.
ComplexTensor phi1(const ComplexMatrix& X, const ComplexMatrix& Y);

/// [phi2(X,Y)]_{ijklmn} = x_ikm y_jln + x_jln y_ikm - x_jkm y_iln - x_iln y_jkm for J x J x K cubes,
/// i.e. phi1 of the mode-1 unfoldings J x (J K). Output dims J x J x J x J x K x K.
ComplexTensor phi2(const ComplexTensor& X, const ComplexTensor& Y);

/// X1(i, j*K + k) = X(i, j, k).
ComplexMatrix mode1_matricize(const ComplexTensor& X);

/// Linear system sum_{s<=t} c_st * detector(s,t) = 0 in the coefficients of a symmetric R x R matrix.
struct DetectionSystem {
  ComplexMatrix stacked;                         // rows x R(R+1)/2
  std::vector<std::pair<Index, Index>> index_map;  // column -> (s, t), s <= t
  RealVector singular_values;                    // filled by solve_detection, descending
  Index rank = 0;
};

struct SymmetricMatrixSet {
  std::vector<ComplexMatrix> mats;  // complex symmetric R x R
  double gap = 0.0;                 // smallest discarded / largest retained singular value
  bool gap_warning = false;
};

/// Columns are detector(U_s, U_t) restricted to rows with i < j and k < l: the detector is
/// antisymmetric under i<->j and under k<->l, so every dropped row is a signed copy of a kept one
/// or zero. The kept system has the same null space and singular values scaled by 1/2.
/// Off-diagonal pair columns carry the factor 2 of the ordered double sum.
DetectionSystem build_p_system(const std::vector<ComplexMatrix>& U);
DetectionSystem build_q_system(const std::vector<ComplexTensor>& V);

/// Unfolds the R smallest right singular vectors into symmetric matrices (c_st at (s,t) and (t,s)).
SymmetricMatrixSet solve_detection(DetectionSystem& sys, Index R, double gap_threshold = 10.0);

}  // namespace cps5
