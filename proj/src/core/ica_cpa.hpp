#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "cps5_eals.hpp"
#include "cps5_jd.hpp"
#include "cumulant.hpp"

namespace cps5 {

enum class Backend { Jd, Eals, EalsJd };

const char* backend_name(Backend b);
std::optional<Backend> parse_backend(std::string_view name);

struct DecomposeOptions {
  Cps5JdOptions jd;   // rank is overridden by the call
  AlsOptions als;     // rank and init are overridden by the call
};

struct DecomposeResult {
  FactorSet factors;
  std::optional<Cps5Report> jd_report;  // jd and eals_jd
  std::optional<AlsTrace> als_trace;    // eals and eals_jd
  double residual = 0.0;                // relative reconstruction residual
  double time_s = 0.0;                  // wall time of the backend stages only
};

/// Runs one CPD backend; eals_jd feeds the cps5_jd factors to cps5_eals as its initialization.
DecomposeResult decompose(const ComplexTensor& T, Index R, Backend backend, const DecomposeOptions& opts);

struct IcaFrontEnd {
  ComplexMatrix X;  // IJ x K
  QuadricovarianceMatrix C;
  EigenmatrixSet E;
  ComplexTensor T5;  // (I, J, I, J, R)
};

/// matricize3 -> cumulant matrix -> R dominant eigenmatrices -> 5-way tensor.
/// `cumulant_override` replaces the sampled cumulant (exact-statistics testing).
IcaFrontEnd ica_front_end(const ComplexTensor& X3, Index R,
                          const std::optional<QuadricovarianceMatrix>& cumulant_override = std::nullopt);

struct IcaCpaOptions {
  DecomposeOptions backend;
  std::optional<QuadricovarianceMatrix> cumulant_override;
};

struct IcaCpaResult {
  ComplexMatrix A;  // I x R
  ComplexMatrix B;  // J x R
  ComplexMatrix S;  // K x R
  DecomposeResult backend;
  RealVector spectrum;  // every eigenvalue of the cumulant matrix, descending |lambda|
  std::vector<int> eigen_signs;
};

IcaCpaResult ica_cpa(const ComplexTensor& X3, Index R, Backend backend, const IcaCpaOptions& opts);

/// S = (pinv(A (.) B) X)^T for X of size IJ x K.
ComplexMatrix recover_sources(const ComplexMatrix& X, const ComplexMatrix& A, const ComplexMatrix& B);

}  // namespace cps5
