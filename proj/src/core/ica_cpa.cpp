#include "ica_cpa.hpp"

#include <chrono>

#include "linalg.hpp"

namespace cps5 {

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Jd:
      return "jd";
    case Backend::Eals:
      return "eals";
    case Backend::EalsJd:
      return "eals_jd";
  }
  return "unknown";
}

std::optional<Backend> parse_backend(std::string_view name) {
  if (name == "jd") return Backend::Jd;
  if (name == "eals") return Backend::Eals;
  if (name == "eals_jd") return Backend::EalsJd;
  return std::nullopt;
}

DecomposeResult decompose(const ComplexTensor& T, Index R, Backend backend, const DecomposeOptions& opts) {
  using clock = std::chrono::steady_clock;
  DecomposeResult out;
  const auto t0 = clock::now();
  std::optional<FactorSet> init;
  if (backend == Backend::Jd || backend == Backend::EalsJd) {
    Cps5JdOptions jo = opts.jd;
    jo.rank = R;
    auto jd = cps5_jd(T, jo);
    out.jd_report = std::move(jd.report);
    if (backend == Backend::Jd)
      out.factors = std::move(jd.factors);
    else
      init = std::move(jd.factors);
  }
  if (backend == Backend::Eals || backend == Backend::EalsJd) {
    AlsOptions ao = opts.als;
    ao.rank = R;
    ao.init = std::move(init);
    auto e = cps5_eals(T, ao);
    out.factors = std::move(e.factors);
    out.als_trace = std::move(e.trace);
  }
  out.time_s = std::chrono::duration<double>(clock::now() - t0).count();
  out.residual = relative_residual(T, out.factors);
  return out;
}

IcaFrontEnd ica_front_end(const ComplexTensor& X3, Index R, const std::optional<QuadricovarianceMatrix>& cumulant_override) {
  require(X3.order() == 3, ErrorCode::DimensionMismatch, "ica_cpa: data tensor must be 3-way");
  const Index I = X3.dim(0), J = X3.dim(1);
  require(R >= 1 && R <= I * J, ErrorCode::RankOutOfRange,
          "ica_cpa: rank " + std::to_string(R) + " outside [1, IJ = " + std::to_string(I * J) + "]");
  IcaFrontEnd fe;
  fe.X = matricize3(X3);
  if (cumulant_override) {
    require(cumulant_override->n == I * J, ErrorCode::DimensionMismatch, "ica_cpa: cumulant override has the wrong size");
    fe.C = *cumulant_override;
  } else {
    fe.C = sample_quadricov(fe.X);
  }
  fe.E = dominant_eigenmatrices(fe.C, R);
  fe.T5 = assemble_t5(fe.E, I, J);
  return fe;
}

IcaCpaResult ica_cpa(const ComplexTensor& X3, Index R, Backend backend, const IcaCpaOptions& opts) {
  const IcaFrontEnd fe = ica_front_end(X3, R, opts.cumulant_override);
  IcaCpaResult res;
  res.backend = decompose(fe.T5, R, backend, opts.backend);
  res.A = res.backend.factors.A;
  res.B = res.backend.factors.B;
  res.S = recover_sources(fe.X, res.A, res.B);
  res.spectrum = fe.E.spectrum;
  res.eigen_signs = fe.E.signs;
  return res;
}

ComplexMatrix recover_sources(const ComplexMatrix& X, const ComplexMatrix& A, const ComplexMatrix& B) {
  require(A.cols() == B.cols() && X.rows() == A.rows() * B.rows(), ErrorCode::DimensionMismatch,
          "recover_sources: X must have I*J rows for A (I x R) and B (J x R)");
  return (pseudo_inverse(khatri_rao(A, B)) * X).transpose();
}

}  // namespace cps5
