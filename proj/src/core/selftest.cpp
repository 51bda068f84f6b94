#include "selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "ct1.hpp"
#include "cps5_eals.hpp"
#include "cps5_jd.hpp"
#include "cumulant.hpp"
#include "detectors.hpp"
#include "experiment.hpp"
#include "rnjd.hpp"

namespace cps5 {

namespace {

using Check = std::function<std::string(bool inject)>;  // empty string = pass

std::string describe(const char* what, double value, const char* op, double bound) {
  std::ostringstream os;
  os << what << " = " << value << ", required " << op << ' ' << bound;
  return os.str();
}

double tensor_norm(const ComplexTensor& T) { return T.norm(); }

std::string check_cumulant(bool inject) {
  std::mt19937_64 rng(11);
  const Index n = 3, T = 40;
  const ComplexMatrix X = gen_complex_normal(n, T, rng);
  auto C = sample_quadricov(X).C;
  if (inject) C(1, 2) += 1e-6;
  const double invT = 1.0 / static_cast<double>(T);
  double worst = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < n; ++k)
        for (Index l = 0; l < n; ++l) {
          cplx m4 = 0, ab = 0, cd = 0, ac = 0, bd = 0, ad = 0, bc = 0;
          for (Index t = 0; t < T; ++t) {
            const cplx a = X(i, t), b = std::conj(X(j, t)), c = std::conj(X(k, t)), d = X(l, t);
            m4 += a * b * c * d;
            ab += a * b;
            cd += c * d;
            ac += a * c;
            bd += b * d;
            ad += a * d;
            bc += b * c;
          }
          const cplx ref = m4 * invT - (ab * cd + ac * bd + ad * bc) * invT * invT;
          worst = std::max(worst, std::abs(ref - C(i * n + j, k * n + l)));
        }
  return worst < 1e-12 ? "" : describe("max deviation from direct sums", worst, "<", 1e-12);
}

std::string check_phi1(bool inject) {
  std::mt19937_64 rng(12);
  for (int s = 0; s < 10; ++s) {
    const ComplexMatrix u = gen_complex_normal(4, 1, rng), v = gen_complex_normal(4, 1, rng);
    ComplexMatrix X = u * v.transpose();
    X /= X.norm();
    if (inject) X(0, 0) += 1e-3;
    const double n1 = tensor_norm(phi1(X, X));
    if (!(n1 < 1e-13)) return describe("||phi1(X,X)|| for rank-1 X", n1, "<", 1e-13);
    ComplexMatrix Y = X + gen_complex_normal(4, 1, rng) * gen_complex_normal(1, 4, rng);
    Y /= Y.norm();
    const double n2 = tensor_norm(phi1(Y, Y));
    if (!(n2 > 1e-3)) return describe("||phi1(Y,Y)|| for rank-2 Y", n2, ">", 1e-3);
  }
  return "";
}

std::string check_phi2(bool inject) {
  std::mt19937_64 rng(13);
  const Index J = 3, K = 2;
  for (int s = 0; s < 5; ++s) {
    const ComplexMatrix u = gen_complex_normal(J, 1, rng), w = gen_complex_normal(J * K, 1, rng);
    const ComplexMatrix X1 = u * w.transpose();  // J x JK, rank 1
    ComplexTensor X({J, J, K});
    for (Index i = 0; i < J; ++i)
      for (Index c = 0; c < J * K; ++c) X(i, c / K, c % K) = X1(i, c);
    if (inject) X(0, 1, 0) += 1e-3;
    const double n1 = tensor_norm(phi2(X, X));
    if (!(n1 < 1e-13)) return describe("||phi2(X,X)|| for mode-1 rank-1 X", n1, "<", 1e-13);
  }
  return "";
}

std::string check_rnjd(bool inject) {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> n(0.0, 1.0);
  const Index R = 4;
  RealMatrix F0(R, R);
  for (Index i = 0; i < R; ++i)
    for (Index j = 0; j < R; ++j) F0(i, j) = n(rng);
  JdProblem p;
  for (int k = 0; k < 10; ++k) {
    RealVector d(R);
    for (Index i = 0; i < R; ++i) d(i) = n(rng);
    RealMatrix G = F0 * d.asDiagonal() * F0.transpose();
    if (inject && k == 0) G(0, 1) += 1e-2, G(1, 0) += 1e-2;
    p.targets.push_back(G);
  }
  const auto sol = rnjd_solve(p);
  const ComplexMatrix P = (sol.F.inverse() * F0).cast<cplx>();
  const double pi = amari_pi(P);
  return pi < 1e-8 ? "" : describe("Amari index of F^-1 F0", pi, "<", 1e-8);
}

std::string check_cps5_jd(bool inject) {
  FactorSet f = random_factors(4, 4, 3, 3, 15);
  ComplexTensor T = synthesize_cp5(f);
  if (inject) T(0, 0, 0, 0, 0) += 1e-3 * T.norm();
  Cps5JdOptions o;
  o.rank = 3;
  const auto res = cps5_jd(T, o);
  const double r = relative_residual(T, res.factors);
  return r < 1e-10 ? "" : describe("relative residual", r, "<", 1e-10);
}

std::string check_eals(bool inject) {
  const FactorSet f = random_factors(4, 4, 3, 2, 16);
  const ComplexTensor T = synthesize_cp5(f);
  AlsOptions o;
  o.rank = 2;
  o.seed = 17;
  o.max_iters = 50;
  auto res = cps5_eals(T, o);
  if (inject && res.trace.residuals.size() >= 2) res.trace.residuals[1] = 2.0 * res.trace.residuals[0];
  for (std::size_t i = 1; i < res.trace.residuals.size(); ++i)
    if (res.trace.residuals[i] > res.trace.residuals[i - 1] * (1 + 1e-13))
      return "residual increased at iteration " + std::to_string(i);
  return "";
}

std::string check_ct1(bool inject) {
  std::mt19937_64 rng(18);
  const ComplexMatrix M = gen_complex_normal(3, 4, rng);
  const ComplexTensor T = matrix_to_tensor(M);
  auto bytes = encode_ct1(T);
  if (inject) bytes.back() ^= 0x40;
  const ComplexTensor U = decode_ct1(bytes);
  const bool same = U.dims() == T.dims() && std::equal(U.data().begin(), U.data().end(), T.data().begin());
  return same ? "" : "decoded tensor differs from the encoded one";
}

const std::vector<std::pair<std::string, Check>>& registry() {
  static const std::vector<std::pair<std::string, Check>> r{
      {"cumulant_bruteforce", check_cumulant}, {"phi1_rank1_iff", check_phi1},
      {"phi2_rank1_iff", check_phi2},          {"rnjd_exact_recovery", check_rnjd},
      {"cps5_jd_noiseless", check_cps5_jd},    {"eals_monotone", check_eals},
      {"ct1_roundtrip", check_ct1},
  };
  return r;
}

}  // namespace

std::vector<std::string> selftest_names() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : registry()) out.push_back(name);
  return out;
}

std::vector<SelftestCheck> run_selftest(const std::string& inject) {
  const auto names = selftest_names();
  require(inject.empty() || std::find(names.begin(), names.end(), inject) != names.end(), ErrorCode::InvalidArgument,
          "selftest: unknown check '" + inject + "'");
  std::vector<SelftestCheck> out;
  for (const auto& [name, fn] : registry()) {
    SelftestCheck c;
    c.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.detail = fn(name == inject);
      c.passed = c.detail.empty();
    } catch (const std::exception& e) {
      c.passed = false;
      c.detail = std::string("exception: ") + e.what();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace cps5
