#include <algorithm>
#include <set>

#include "doctest.h"
#include "rnjd.hpp"
#include "support.hpp"

using namespace cps5;
using namespace cps5::test;

namespace {

JdProblem congruence_problem(const RealMatrix& F0, int targets, double noise, std::mt19937_64& rng) {
  const Index R = F0.rows();
  JdProblem p;
  for (int k = 0; k < targets; ++k) {
    const RealMatrix d = rrandn(R, 1, rng);
    RealMatrix G = F0 * d.col(0).asDiagonal() * F0.transpose();
    if (noise > 0.0) {
      const RealMatrix N = rrandn(R, R, rng);
      G += noise * G.norm() * (N + N.transpose()) / (N + N.transpose()).norm();
    }
    p.targets.push_back(G);
  }
  return p;
}

// Mass of P outside its row-wise dominant pattern, rows scaled to unit peak; -1 if the pattern
// is not a permutation.
double off_pattern_mass(const RealMatrix& P) {
  std::set<Index> cols;
  double mass = 0.0;
  for (Index i = 0; i < P.rows(); ++i) {
    Index j = 0;
    const double peak = P.row(i).cwiseAbs().maxCoeff(&j);
    cols.insert(j);
    mass += (P.row(i).squaredNorm() - peak * peak) / (peak * peak);
  }
  return cols.size() == static_cast<std::size_t>(P.rows()) ? mass : -1.0;
}

}  // namespace

TEST_CASE("exact congruence problems are solved to a scaled permutation") {
  std::mt19937_64 rng(41);
  for (int s = 0; s < 10; ++s) {
    const RealMatrix F0 = rrandn(5, 5, rng);
    const auto p = congruence_problem(F0, 20, 0.0, rng);
    const auto sol = rnjd_solve(p);
    const double m = off_pattern_mass(sol.F.inverse() * F0);
    CHECK(m >= 0.0);
    CHECK(m < 1e-12);
    CHECK(sol.offdiag_final < 1e-12);
    CHECK(sol.converged);
    for (Index c = 1; c < 5; ++c) CHECK(sol.F.col(c - 1).norm() >= sol.F.col(c).norm());
    REQUIRE(sol.diags.size() == 20);
    const RealMatrix W = sol.F.inverse();
    const RealMatrix C = W * p.targets[3] * W.transpose();
    CHECK((C.diagonal() - sol.diags[3]).norm() < 1e-10 * C.norm());
    for (Index i = 0; i < 5; ++i) CHECK(W.row(i).norm() == doctest::Approx(1.0));
  }
}

TEST_CASE("offdiag_criterion vanishes for the true demixer only") {
  std::mt19937_64 rng(42);
  const RealMatrix F0 = rrandn(4, 4, rng);
  const auto p = congruence_problem(F0, 5, 0.0, rng);
  CHECK(offdiag_criterion(F0.inverse(), p.targets) < 1e-20);
  CHECK(offdiag_criterion(RealMatrix::Identity(4, 4), p.targets) > 1e-3);
}

TEST_CASE("the sweep log never records an increase") {
  std::mt19937_64 rng(43);
  const RealMatrix F0 = rrandn(5, 5, rng);
  const auto p = congruence_problem(F0, 8, 1e-4, rng);
  const auto sol = rnjd_solve(p);
  REQUIRE_FALSE(sol.sweep_log.empty());
  for (const auto& rec : sol.sweep_log) CHECK(rec.after <= rec.before * (1 + 1e-12));
  CHECK(off_pattern_mass(sol.F.inverse() * F0) < 1e-4);
}

TEST_CASE("rnjd_solve is deterministic and accepts an extra start") {
  std::mt19937_64 rng(44);
  const RealMatrix F0 = rrandn(4, 4, rng);
  auto p = congruence_problem(F0, 6, 0.0, rng);
  const auto a = rnjd_solve(p);
  const auto b = rnjd_solve(p);
  CHECK((a.F - b.F).norm() == 0.0);
  p.initial_F.push_back(F0);
  const auto c = rnjd_solve(p);
  CHECK(off_pattern_mass(c.F.inverse() * F0) < 1e-12);
}

TEST_CASE("a single target is handled") {
  std::mt19937_64 rng(45);
  const RealMatrix F0 = rrandn(3, 3, rng);
  const auto p = congruence_problem(F0, 1, 0.0, rng);
  const auto sol = rnjd_solve(p);
  CHECK(sol.offdiag_final < 1e-12);
  JdProblem empty;
  CHECK_THROWS_AS(rnjd_solve(empty), Error);
}
