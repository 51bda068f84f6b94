#include "cps5_jd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "linalg.hpp"

namespace cps5 {

namespace {

double max_abs(std::span<const cplx> v) {
  double m = 0.0;
  for (const cplx& z : v) m = std::max(m, std::abs(z));
  return m;
}

double max_slice_deviation(const ComplexTensor& V) {
  const Index J = V.dim(0), K = V.dim(2);
  double worst = 0.0;
  for (Index k = 0; k < K; ++k) {
    ComplexMatrix S(J, J);
    for (Index p = 0; p < J; ++p)
      for (Index q = 0; q < J; ++q) S(p, q) = V(p, q, k);
    worst = std::max(worst, hermitian_deviation(S));
  }
  return worst;
}

// J^2 x K view of a J x J x K cube column: row j1*J + j2, column k.
ComplexMatrix cube_column_as_matrix(const ComplexVector& v, Index J, Index K) {
  ComplexMatrix M(J * J, K);
  for (Index r = 0; r < J * J; ++r)
    for (Index k = 0; k < K; ++k) M(r, k) = v(r * K + k);
  return M;
}

}  // namespace

cplx hermitian_phase(const ComplexMatrix& M) {
  require(M.rows() == M.cols(), ErrorCode::DimensionMismatch, "hermitian_phase: matrix must be square");
  const double n2 = M.squaredNorm();
  require(n2 > 0.0, ErrorCode::InvalidArgument, "hermitian_phase: zero matrix");
  const cplx c = (M * M).trace() / n2;
  if (std::abs(c) < 1e-300) return {1.0, 0.0};
  return std::sqrt(std::conj(c) / std::abs(c));
}

AlphaNormalization alpha_normalize(const ComplexMatrix& Ur, const ComplexTensor& Vr) {
  require(Vr.order() == 3 && Vr.dim(0) == Vr.dim(1), ErrorCode::DimensionMismatch,
          "alpha_normalize: Vr must be J x J x K");
  AlphaNormalization out;
  out.alpha = hermitian_phase(Ur);
  out.U = out.alpha * Ur;
  out.V = Vr;
  const cplx ca = std::conj(out.alpha);
  for (cplx& z : out.V.data()) z *= ca;
  out.u_hermitian_deviation = hermitian_deviation(out.U);
  out.v_hermitian_deviation = max_slice_deviation(out.V);
  return out;
}

RealifiedF realify_f(const ComplexMatrix& F_raw) {
  RealifiedF out;
  out.F = F_raw.real();
  const double n = F_raw.norm();
  out.defect = n > 0.0 ? F_raw.imag().norm() / n : 0.0;
  return out;
}

ComplexMatrix estimate_f_complex(const std::vector<ComplexMatrix>& M) {
  require(!M.empty(), ErrorCode::InvalidArgument, "estimate_f_complex: no matrices");
  const Index R = M.front().rows();
  if (R == 1) return ComplexMatrix::Ones(1, 1);
  require(M.size() >= 2, ErrorCode::InvalidArgument, "estimate_f_complex: need two matrices for R > 1");
  // M_0 M_1^-1 = F (S_0 S_1^-1) F^-1: eigenvectors are the columns of F up to scale.
  const Eigen::MatrixXcd Mb = M[1];
  const Eigen::MatrixXcd N = Eigen::MatrixXcd(M[0]) * Mb.partialPivLu().inverse();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(N);
  require(es.info() == Eigen::Success, ErrorCode::Numerical, "estimate_f_complex: eigensolver failed");
  ComplexMatrix F = es.eigenvectors();
  for (Index r = 0; r < R; ++r) {
    ComplexVector c = F.col(r);
    const double n = c.norm();
    if (n > 0.0) c /= n;
    apply_phase_convention(c);
    F.col(r) = c;
  }
  return F;
}

ARecovery recover_a(const ComplexMatrix& UF) {
  const Index I = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(UF.rows()))));
  require(I > 0 && I * I == UF.rows(), ErrorCode::DimensionMismatch, "recover_a: row count is not a square");
  ARecovery out;
  out.A.resize(I, UF.cols());
  out.mu.resize(UF.cols());
  for (Index r = 0; r < UF.cols(); ++r) {
    const ComplexMatrix S = column_to_square(UF.col(r), I);
    const auto h = hermitian_rank1_vector(0.5 * (S + S.adjoint()));
    out.A.col(r) = h.a;
    out.mu(r) = h.mu;
  }
  return out;
}

BdRecovery recover_bd(const ComplexMatrix& VF, Index J, Index K) {
  require(J > 0 && K > 0 && VF.rows() == J * J * K, ErrorCode::DimensionMismatch, "recover_bd: rows must equal J^2 K");
  BdRecovery out;
  out.B.resize(J, VF.cols());
  out.D.resize(K, VF.cols());
  for (Index r = 0; r < VF.cols(); ++r) {
    // column ~ vec(G) x^T with G = b b^H: a rank-1 J^2 x K matrix
    const auto t = rank1_matrix_approx(cube_column_as_matrix(VF.col(r), J, K));
    const ComplexMatrix G = column_to_square(t.u, J);
    // beta G is Hermitian; the conjugate phase moves to the K side.
    const cplx beta = t.sigma > 0.0 ? hermitian_phase(G) : cplx{1.0, 0.0};
    const auto h = hermitian_rank1_vector(beta * G);
    const ComplexVector d = h.mu * t.sigma * std::conj(beta) * t.v.conjugate();
    out.B.col(r) = h.a;
    out.D.col(r) = d.real();
    const double dn = d.norm();
    if (dn > 0.0) out.imag_residue = std::max(out.imag_residue, d.imag().norm() / dn);
  }
  return out;
}

RealMatrix refit_d(const ComplexTensor& T, const ComplexMatrix& A, const ComplexMatrix& B, double* imag_ratio) {
  require(T.order() == 5, ErrorCode::DimensionMismatch, "refit_d: tensor must be 5-way");
  const Index I = T.dim(0), J = T.dim(1), K = T.dim(4);
  require(A.rows() == I && B.rows() == J && A.cols() == B.cols(), ErrorCode::DimensionMismatch,
          "refit_d: factor shapes do not match the tensor");
  const ComplexMatrix Ac = A.conjugate(), Bc = B.conjugate();
  const ComplexMatrix Z = khatri_rao({&A, &B, &Ac, &Bc});  // IJIJ x R
  const ComplexMatrix T5 = Eigen::Map<const ComplexMatrix>(T.data().data(), I * J * I * J, K);
  const ComplexMatrix Dt = least_squares(Z, T5);  // R x K
  if (imag_ratio) {
    const double n = Dt.norm();
    *imag_ratio = n > 0.0 ? Dt.imag().norm() / n : 0.0;
  }
  return Dt.real().transpose();
}

double relative_residual(const ComplexTensor& T, const FactorSet& f) {
  const ComplexTensor That = synthesize_cp5(f);
  require(That.dims() == T.dims(), ErrorCode::DimensionMismatch, "relative_residual: model and tensor shapes differ");
  double num = 0.0;
  for (Index i = 0; i < T.size(); ++i) num += std::norm(T.data()[static_cast<std::size_t>(i)] - That.data()[static_cast<std::size_t>(i)]);
  const double den = T.norm();
  return den > 0.0 ? std::sqrt(num) / den : std::sqrt(num);
}

Cps5JdResult cps5_jd(const ComplexTensor& T, const Cps5JdOptions& opts) {
  require(T.order() == 5, ErrorCode::DimensionMismatch, "cps5_jd: tensor must be 5-way");
  const Index I = T.dim(0), J = T.dim(1), K = T.dim(4), R = opts.rank;
  require(T.dim(2) == I && T.dim(3) == J, ErrorCode::DimensionMismatch, "cps5_jd: dims must be (I, J, I, J, K)");
  require(R >= 1 && R <= std::min(I * I, J * J * K), ErrorCode::RankOutOfRange,
          "cps5_jd: rank " + std::to_string(R) + " outside [1, min(I^2, J^2 K)]");
  require(opts.svd_rcond > 0 && opts.gap_warning > 0 && opts.w_condition_cap > 0 && opts.symmetry_warning > 0 &&
              opts.rnjd_tol > 0 && opts.rnjd_max_sweeps > 0,
          ErrorCode::InvalidArgument, "cps5_jd: thresholds must be positive");

  Cps5JdResult res;
  Cps5Report& rep = res.report;
  const double tmax = max_abs(T.data());
  require(tmax > 0.0, ErrorCode::InvalidArgument, "cps5_jd: zero tensor");
  require(std::isfinite(tmax), ErrorCode::Numerical, "cps5_jd: non-finite tensor entries");
  rep.symmetry_deviation = check_partial_symmetry(T) / tmax;
  if (rep.symmetry_deviation > opts.symmetry_warning)
    rep.warnings.push_back("input deviates from partial symmetry by " + std::to_string(rep.symmetry_deviation) +
                           " (relative)");

  // 1. SVD of the unfolding, singular values folded into the right factor.
  const ComplexMatrix Tm = matricize5(T);
  const auto svd = truncated_svd(Tm, std::min(Tm.rows(), Tm.cols()));
  ++rep.stages.svd;
  rep.singular_values = svd.S;
  require(svd.S(R - 1) > opts.svd_rcond * svd.S(0), ErrorCode::RankOutOfRange,
          "cps5_jd: unfolding has numerical rank below " + std::to_string(R));
  ComplexMatrix U = svd.U.leftCols(R);
  ComplexMatrix Vc = svd.V.leftCols(R).conjugate() * svd.S.head(R).asDiagonal();

  // 2. phase normalization making every U_r and V_r slice Hermitian
  std::vector<ComplexMatrix> Us;
  std::vector<ComplexTensor> Vs;
  for (Index r = 0; r < R; ++r) {
    const auto an = alpha_normalize(column_to_square(U.col(r), I), column_to_cube(Vc.col(r), J, K));
    ++rep.stages.alpha_normalizations;
    rep.alphas.push_back(an.alpha);
    U.col(r) *= an.alpha;
    Vc.col(r) *= std::conj(an.alpha);
    Us.push_back(an.U);
    Vs.push_back(an.V);
  }

  // 3-4. detection systems and joint diagonalization for F
  RealMatrix F = RealMatrix::Ones(1, 1);
  if (R > 1) {
    auto psys = build_p_system(Us);
    auto qsys = build_q_system(Vs);
    const auto Mset = solve_detection(psys, R, opts.gap_warning);
    const auto Wset = solve_detection(qsys, R, opts.gap_warning);
    rep.stages.detection_solves += 2;
    rep.p_gap = Mset.gap;
    rep.q_gap = Wset.gap;
    if (Mset.gap_warning) rep.warnings.push_back("P detection gap " + std::to_string(Mset.gap) + " is small");
    if (Wset.gap_warning) rep.warnings.push_back("Q detection gap " + std::to_string(Wset.gap) + " is small");

    // Each complex matrix is scaled to unit norm before splitting, so a nearly real M_r keeps
    // its rounding-level imaginary part small instead of amplifying it into a full target.
    JdProblem jp;
    jp.max_sweeps = opts.rnjd_max_sweeps;
    jp.tol = opts.rnjd_tol;
    auto add_pair = [&jp](const ComplexMatrix& X) {
      const double n = X.norm();
      if (!(n > 0.0)) return;
      for (const RealMatrix& G : {RealMatrix(X.real() / n), RealMatrix(X.imag() / n)})
        if (G.norm() > 1e-12) jp.targets.push_back(G);
    };
    for (const auto& M : Mset.mats) add_pair(M);
    for (const auto& W : Wset.mats) {
      Eigen::JacobiSVD<Eigen::MatrixXcd> ws(W);
      const auto& s = ws.singularValues();
      const double cond = s(R - 1) > 0.0 ? s(0) / s(R - 1) : std::numeric_limits<double>::infinity();
      if (!(cond <= opts.w_condition_cap)) {
        ++rep.w_dropped;
        continue;
      }
      add_pair(Eigen::MatrixXcd(W).inverse());
    }
    rep.targets_used = static_cast<int>(jp.targets.size());
    const auto fr = realify_f(estimate_f_complex(Mset.mats));
    rep.f_imag_defect = fr.defect;
    jp.initial_F.push_back(fr.F);
    const auto sol = rnjd_solve(jp);
    ++rep.stages.rnjd_calls;
    rep.rnjd_criterion = sol.offdiag_final;
    rep.rnjd_sweeps = sol.sweeps;
    if (!sol.converged)
      rep.warnings.push_back("joint diagonalization stopped at relative criterion " + std::to_string(sol.offdiag_final));

    F = opts.f_estimator == FEstimator::Rnjd ? sol.F : fr.F;
  }

  // 5. rank-1 recovery from U F and conj(V) S F^-T
  const Eigen::MatrixXd Fd = F;
  const ComplexMatrix FinvT = Eigen::MatrixXd(Fd.inverse().transpose()).cast<cplx>();
  require(FinvT.allFinite(), ErrorCode::Numerical, "cps5_jd: F is singular");
  const ComplexMatrix UF = U * F.cast<cplx>();
  const ComplexMatrix VF = Vc * FinvT;
  const auto ar = recover_a(UF);
  const auto bd = recover_bd(VF, J, K);
  rep.stages.rank1_recoveries += static_cast<int>(2 * R);
  rep.stages.alpha_normalizations += static_cast<int>(R);  // the Hermitian rotation inside recover_bd
  rep.bd_imag_residue = bd.imag_residue;

  FactorSet f{ar.A, bd.B, RealMatrix()};
  if (opts.refit_d) {
    f.D = refit_d(T, f.A, f.B, &rep.d_refit_imag);
  } else {
    f.D = bd.D * ar.mu.asDiagonal();
  }
  res.factors = normalize_factors(std::move(f));
  return res;
}

}  // namespace cps5
