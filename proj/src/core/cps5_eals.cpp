#include "cps5_eals.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace cps5 {

namespace {

constexpr int kProbes = 11;

// Unfoldings of T, transposed and arranged as right-hand sides of the factor updates.
struct Unfoldings {
  Index I = 0, J = 0, K = 0;
  ComplexMatrix Y_a;  // [T1^T; conj(T3)^T]
  ComplexMatrix Y_b;  // [T2^T; conj(T4)^T]
  ComplexMatrix Y_d;  // IJIJ x K, i.e. T5^T, which is also the flat layout of T
  double norm = 0.0;
};

Unfoldings prepare(const ComplexTensor& T) {
  require(T.order() == 5 && T.dim(2) == T.dim(0) && T.dim(3) == T.dim(1), ErrorCode::DimensionMismatch,
          "cps5_eals: tensor dims must be (I, J, I, J, K)");
  Unfoldings u;
  u.I = T.dim(0);
  u.J = T.dim(1);
  u.K = T.dim(4);
  const ComplexMatrix T1 = unfold(T, 0), T3 = unfold(T, 2), T2 = unfold(T, 1), T4 = unfold(T, 3);
  u.Y_a.resize(T1.cols() + T3.cols(), u.I);
  u.Y_a << T1.transpose(), T3.adjoint();
  u.Y_b.resize(T2.cols() + T4.cols(), u.J);
  u.Y_b << T2.transpose(), T4.adjoint();
  u.Y_d = Eigen::Map<const ComplexMatrix>(T.data().data(), u.I * u.J * u.I * u.J, u.K);
  u.norm = T.norm();
  return u;
}

void check_factors(const Unfoldings& u, const FactorSet& f) {
  const Index R = f.A.cols();
  require(R >= 1 && f.A.rows() == u.I && f.B.rows() == u.J && f.D.rows() == u.K && f.B.cols() == R && f.D.cols() == R,
          ErrorCode::DimensionMismatch, "cps5_eals: factor shapes do not match the tensor");
}

// Minimum-norm least squares Z X = Y; flags rank deficiency.
ComplexMatrix solve_ls(const ComplexMatrix& Z, const ComplexMatrix& Y, bool& deficient) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(Z);
  cod.setThreshold(1e-12);
  if (cod.rank() < Z.cols()) deficient = true;
  return cod.solve(Eigen::MatrixXcd(Y));
}

ComplexMatrix stack(const ComplexMatrix& top, const ComplexMatrix& bottom) {
  ComplexMatrix S(top.rows() + bottom.rows(), top.cols());
  S << top, bottom;
  return S;
}

FactorSet sweep(const Unfoldings& u, const FactorSet& f, bool& deficient, double& d_imag) {
  FactorSet g = f;
  ComplexMatrix D = g.D.cast<cplx>();
  {
    const ComplexMatrix Ac = g.A.conjugate(), Bc = g.B.conjugate();
    const ComplexMatrix Z1 = khatri_rao({&g.B, &Ac, &Bc, &D});
    const ComplexMatrix Z3 = khatri_rao({&g.A, &g.B, &Bc, &D});
    g.A = solve_ls(stack(Z1, Z3.conjugate()), u.Y_a, deficient).transpose();
  }
  {
    const ComplexMatrix Ac = g.A.conjugate(), Bc = g.B.conjugate();
    const ComplexMatrix Z2 = khatri_rao({&g.A, &Ac, &Bc, &D});
    const ComplexMatrix Z4 = khatri_rao({&g.A, &g.B, &Ac, &D});
    g.B = solve_ls(stack(Z2, Z4.conjugate()), u.Y_b, deficient).transpose();
  }
  const ComplexMatrix Ac = g.A.conjugate(), Bc = g.B.conjugate();
  const ComplexMatrix Z5 = khatri_rao({&g.A, &g.B, &Ac, &Bc});
  const ComplexMatrix Dt = solve_ls(Z5, u.Y_d, deficient);  // R x K
  const double n = Dt.norm();
  d_imag = n > 0.0 ? Dt.imag().norm() / n : 0.0;
  g.D = Dt.real().transpose();
  // Fix the scale gauge so consecutive iterates, and the line between them, stay comparable.
  return normalize_factors(std::move(g));
}

double residual_sq(const Unfoldings& u, const FactorSet& f) {
  const ComplexMatrix Ac = f.A.conjugate(), Bc = f.B.conjugate();
  const ComplexMatrix Z5 = khatri_rao({&f.A, &f.B, &Ac, &Bc});
  return (u.Y_d - Z5 * f.D.cast<cplx>().transpose()).squaredNorm();
}

double relative(const Unfoldings& u, double sq) {
  const double r = std::sqrt(sq);
  return u.norm > 0.0 ? r / u.norm : r;
}

FactorSet axpy(const FactorSet& f, double rho, const FactorSet& dir) {
  return FactorSet{f.A + rho * dir.A, f.B + rho * dir.B, f.D + rho * dir.D};
}

FactorSet difference(const FactorSet& a, const FactorSet& b) {
  return FactorSet{a.A - b.A, a.B - b.B, a.D - b.D};
}

double probe_node(int k) { return std::cos(std::numbers::pi * (k + 0.5) / kProbes); }

double clenshaw(const RealVector& c, double x) {
  double b1 = 0.0, b2 = 0.0;
  for (Index j = c.size() - 1; j >= 1; --j) {
    const double b0 = 2.0 * x * b1 - b2 + c(j);
    b2 = b1;
    b1 = b0;
  }
  return x * b1 - b2 + c(0);
}

ElsPolynomial build_polynomial(const Unfoldings& u, const FactorSet& f, const FactorSet& dir, bool& finite) {
  ElsPolynomial p;
  std::array<double, kProbes> vals{};
  finite = true;
  const double mid = 0.5 * (p.lo + p.hi), half = 0.5 * (p.hi - p.lo);
  for (int k = 0; k < kProbes; ++k) {
    vals[static_cast<std::size_t>(k)] = residual_sq(u, axpy(f, mid + half * probe_node(k), dir));
    finite = finite && std::isfinite(vals[static_cast<std::size_t>(k)]);
  }
  // Interpolation at Chebyshev points of the first kind: discrete cosine transform of the samples.
  p.cheb = RealVector::Zero(kProbes);
  for (int j = 0; j < kProbes; ++j) {
    double s = 0.0;
    for (int k = 0; k < kProbes; ++k)
      s += vals[static_cast<std::size_t>(k)] * std::cos(std::numbers::pi * j * (k + 0.5) / kProbes);
    p.cheb(j) = (j == 0 ? 1.0 : 2.0) * s / kProbes;
  }
  return p;
}

// Monomial coefficients (in x on [-1, 1]) of a Chebyshev series.
RealVector to_monomial(const RealVector& c) {
  const Index n = c.size();
  RealVector out = RealVector::Zero(n);
  RealVector Tm1 = RealVector::Zero(n), T0 = RealVector::Zero(n);
  Tm1(0) = 1.0;  // T_0
  out += c(0) * Tm1;
  if (n == 1) return out;
  T0(1) = 1.0;  // T_1
  out += c(1) * T0;
  for (Index j = 2; j < n; ++j) {
    RealVector Tn = -Tm1;
    for (Index i = 0; i + 1 < n; ++i) Tn(i + 1) += 2.0 * T0(i);
    out += c(j) * Tn;
    Tm1 = T0;
    T0 = Tn;
  }
  return out;
}

std::vector<double> real_roots(const RealVector& mono) {
  Index d = mono.size() - 1;
  const double scale = mono.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) return {};
  while (d > 0 && std::abs(mono(d)) <= 1e-13 * scale) --d;
  if (d < 1) return {};
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(d, d);
  for (Index i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
  for (Index i = 0; i < d; ++i) comp(i, d - 1) = -mono(i) / mono(d);
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  std::vector<double> out;
  if (es.info() != Eigen::Success) return out;
  for (Index i = 0; i < d; ++i) {
    const std::complex<double> z = es.eigenvalues()(i);
    if (std::abs(z.imag()) <= 1e-8 * (1.0 + std::abs(z.real())) && std::isfinite(z.real())) out.push_back(z.real());
  }
  return out;
}

double choose_step(const Unfoldings& u, const FactorSet& f, const FactorSet& dir) {
  if (dir.A.isZero(0.0) && dir.B.isZero(0.0) && dir.D.isZero(0.0)) return 1.0;
  bool finite = true;
  const ElsPolynomial p = build_polynomial(u, f, dir, finite);
  if (!finite) return 1.0;
  const double mid = 0.5 * (p.lo + p.hi), half = 0.5 * (p.hi - p.lo);
  const RealVector mono = to_monomial(p.cheb);
  RealVector deriv(mono.size() - 1);
  for (Index i = 0; i < deriv.size(); ++i) deriv(i) = static_cast<double>(i + 1) * mono(i + 1);
  std::vector<double> xs = real_roots(deriv);
  xs.push_back(-1.0);
  xs.push_back(1.0);
  const double x_one = (1.0 - mid) / half;
  double best_x = x_one, best_v = clenshaw(p.cheb, x_one);
  for (double x : xs) {
    const double v = clenshaw(p.cheb, x);
    if (v < best_v) {
      best_v = v;
      best_x = x;
    }
  }
  return mid + half * best_x;
}

}  // namespace

double ElsPolynomial::operator()(double rho) const {
  const double x = (rho - 0.5 * (lo + hi)) / (0.5 * (hi - lo));
  return clenshaw(cheb, x);
}

FactorSet random_factors(Index I, Index J, Index K, Index R, std::uint64_t seed) {
  require(I > 0 && J > 0 && K > 0 && R > 0, ErrorCode::InvalidArgument, "random_factors: sizes must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> cn(0.0, std::sqrt(0.5)), rn(0.0, 1.0);
  FactorSet f{ComplexMatrix(I, R), ComplexMatrix(J, R), RealMatrix(K, R)};
  for (Index i = 0; i < I; ++i)
    for (Index r = 0; r < R; ++r) f.A(i, r) = {cn(rng), cn(rng)};
  for (Index i = 0; i < J; ++i)
    for (Index r = 0; r < R; ++r) f.B(i, r) = {cn(rng), cn(rng)};
  for (Index i = 0; i < K; ++i)
    for (Index r = 0; r < R; ++r) f.D(i, r) = rn(rng);
  return f;
}

static FactorSet start_from(const Unfoldings& u, Index R, std::uint64_t seed) {
  FactorSet f = normalize_factors(random_factors(u.I, u.J, u.K, R, seed));
  const ComplexMatrix Ac = f.A.conjugate(), Bc = f.B.conjugate();
  const double m = (khatri_rao({&f.A, &f.B, &Ac, &Bc}) * f.D.cast<cplx>().transpose()).norm();
  if (m > 0.0 && u.norm > 0.0) f.D *= u.norm / m;
  return f;
}

FactorSet start_factors(const ComplexTensor& T, Index R, std::uint64_t seed) { return start_from(prepare(T), R, seed); }

double fit_residual(const ComplexTensor& T, const FactorSet& f) {
  const Unfoldings u = prepare(T);
  check_factors(u, f);
  return relative(u, residual_sq(u, f));
}

FactorSet als_sweep(const ComplexTensor& T, const FactorSet& f, bool* rank_deficient, double* d_imag_ratio) {
  const Unfoldings u = prepare(T);
  check_factors(u, f);
  bool deficient = false;
  double d_imag = 0.0;
  FactorSet g = sweep(u, f, deficient, d_imag);
  if (rank_deficient) *rank_deficient = deficient;
  if (d_imag_ratio) *d_imag_ratio = d_imag;
  return g;
}

ElsPolynomial els_polynomial(const ComplexTensor& T, const FactorSet& f, const FactorSet& dir) {
  const Unfoldings u = prepare(T);
  check_factors(u, f);
  check_factors(u, dir);
  bool finite = true;
  return build_polynomial(u, f, dir, finite);
}

double els_step(const ComplexTensor& T, const FactorSet& f, const FactorSet& dir) {
  const Unfoldings u = prepare(T);
  check_factors(u, f);
  check_factors(u, dir);
  return choose_step(u, f, dir);
}

Cps5EalsResult cps5_eals(const ComplexTensor& T, const AlsOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  require(opts.rank >= 1, ErrorCode::RankOutOfRange, "cps5_eals: rank must be at least 1");
  require(opts.max_iters >= 1 && opts.rel_fit_tol > 0.0 && opts.residual_floor > 0.0, ErrorCode::InvalidArgument,
          "cps5_eals: iteration limit and tolerances must be positive");
  require(opts.els_poly_degree == 10, ErrorCode::InvalidArgument, "cps5_eals: the line polynomial has degree 10");
  const Unfoldings u = prepare(T);

  Cps5EalsResult res;
  AlsTrace& tr = res.trace;
  if (opts.init) check_factors(u, *opts.init);
  FactorSet f = opts.init ? normalize_factors(*opts.init) : start_from(u, opts.rank, opts.seed);
  require(f.rank() == opts.rank, ErrorCode::DimensionMismatch, "cps5_eals: initial factors have the wrong rank");

  double r = relative(u, residual_sq(u, f));
  require(std::isfinite(r), ErrorCode::Numerical, "cps5_eals: non-finite initial residual");
  tr.residuals.push_back(r);
  bool warned_deficient = false;
  for (int it = 0; it < opts.max_iters; ++it) {
    if (r < opts.residual_floor) {
      tr.converged = true;
      break;
    }
    bool deficient = false;
    double d_imag = 0.0;
    FactorSet g = sweep(u, f, deficient, d_imag);
    if (deficient && !warned_deficient) {
      tr.warnings.push_back("rank-deficient coefficient matrix in an ALS update; minimum-norm solution used");
      warned_deficient = true;
    }
    double rg = relative(u, residual_sq(u, g));
    double rho = 1.0;
    if (opts.els_enabled) {
      const FactorSet dir = difference(g, f);
      const double cand = choose_step(u, f, dir);
      if (cand != 1.0) {
        FactorSet h = axpy(f, cand, dir);
        const double rh = relative(u, residual_sq(u, h));
        if (rh < rg) {
          g = std::move(h);
          rg = rh;
          rho = cand;
        }
      }
    }
    ++tr.iterations;
    if (!(rg <= r)) {
      // Neither the sweep nor the line search improves: the current point is kept.
      tr.converged = r - rg >= -1e-13 * std::max(r, 1e-300);
      if (!tr.converged) tr.warnings.push_back("stopped: no improving step from the current point");
      break;
    }
    f = std::move(g);
    tr.residuals.push_back(rg);
    tr.rhos.push_back(rho);
    const bool small_change = r - rg < opts.rel_fit_tol;  // change of the relative fit residual
    r = rg;
    if (small_change || r < opts.residual_floor) {
      tr.converged = true;
      break;
    }
  }
  res.factors = normalize_factors(std::move(f));
  tr.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace cps5
