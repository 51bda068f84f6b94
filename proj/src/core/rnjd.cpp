#include "rnjd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace cps5 {

namespace {

using Dense = Eigen::MatrixXd;

double offdiag_sq(const Dense& C) {
  double s = 0.0;
  for (Index j = 0; j < C.cols(); ++j)
    for (Index i = 0; i < C.rows(); ++i)
      if (i != j) s += C(i, j) * C(i, j);
  return s;
}

// Off-diagonal energy with entry (i,j) weighted by 1/(delta_i delta_j), delta_i^2 = sum_k C_k(i,i)^2.
// Invariant to rescaling the rows of W and to scaling all targets.
double normalized_offdiag(const std::vector<Dense>& C) {
  const Index R = C.front().rows();
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(R);
  for (const Dense& Ck : C) delta += Ck.diagonal().cwiseAbs2();
  delta = delta.cwiseSqrt();
  if (delta.minCoeff() <= 0.0) return 1.0;
  double s = 0.0;
  for (const Dense& Ck : C)
    for (Index j = 0; j < R; ++j)
      for (Index i = 0; i < R; ++i)
        if (i != j) s += Ck(i, j) * Ck(i, j) / (delta(i) * delta(j));
  return s / static_cast<double>(R * (R - 1));
}

// Rescales rows of W (and C accordingly) so every delta_i is 1; the criterion then weighs all pairs alike.
void balance_rows(Dense& W, std::vector<Dense>& C) {
  const Index R = W.rows();
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(R);
  for (const Dense& Ck : C) delta += Ck.diagonal().cwiseAbs2();
  if (delta.minCoeff() <= 0.0 || !delta.allFinite()) return;
  const Eigen::VectorXd s = delta.cwiseSqrt().cwiseSqrt().cwiseInverse();
  W = s.asDiagonal() * W;
  for (Dense& Ck : C) Ck = s.asDiagonal() * Ck * s.asDiagonal();
}

void normalize_rows(Dense& W) {
  for (Index i = 0; i < W.rows(); ++i) {
    const double n = W.row(i).norm();
    if (n > 0.0) W.row(i) /= n;
  }
}

Dense whitening_init(const std::vector<Dense>& G) {
  const Index R = G.front().rows();
  std::size_t best = 0;
  for (std::size_t k = 1; k < G.size(); ++k)
    if (G[k].norm() > G[best].norm()) best = k;
  Eigen::SelfAdjointEigenSolver<Dense> es(G[best]);
  const Eigen::VectorXd lam = es.eigenvalues().cwiseAbs();
  if (es.info() != Eigen::Success || lam.maxCoeff() == 0.0 || lam.minCoeff() < 1e-8 * lam.maxCoeff())
    return Dense::Identity(R, R);
  return lam.cwiseInverse().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

// One elementary update on pair (i, j): row i of W gains a * row j.
void elementary_update(Index i, Index j, Dense& W, std::vector<Dense>& C) {
  double num = 0.0, den = 0.0;
  const Index R = W.rows();
  for (const Dense& Ck : C)
    for (Index q = 0; q < R; ++q) {
      if (q == i) continue;
      num += Ck(i, q) * Ck(j, q);
      den += Ck(j, q) * Ck(j, q);
    }
  if (!(den > 0.0) || !std::isfinite(num)) return;
  const double a = -num / den;
  if (a == 0.0) return;
  for (Dense& Ck : C) {
    Ck.row(i) += a * Ck.row(j);
    Ck.col(i) += a * Ck.col(j);
  }
  W.row(i) += a * W.row(j);
}

std::vector<Dense> transform(const std::vector<Dense>& G, const Dense& W) {
  std::vector<Dense> C;
  C.reserve(G.size());
  for (const Dense& Gk : G) C.emplace_back(W * Gk * W.transpose());
  return C;
}

// Jacobi sweeps from the given W; W is updated in place.
JdSolution descend(const std::vector<Dense>& G, Dense& W, const JdProblem& problem) {
  const Index R = W.rows();
  const auto criterion = [](const std::vector<Dense>& C) {
    double s = 0.0;
    for (const Dense& Ck : C) s += offdiag_sq(Ck);
    return s;
  };

  JdSolution sol;
  std::vector<Dense> C = transform(G, W);
  double rel = normalized_offdiag(C);
  for (int sweep = 0; sweep < problem.max_sweeps && R > 1; ++sweep) {
    // Sweeps continue past `tol` until they stop paying off; the final sweeps converge fast.
    if (rel < 1e-32) break;
    balance_rows(W, C);
    const double crit = criterion(C);
    JdSweepRecord rec{crit, 0.0};
    for (Index i = 1; i < R; ++i)  // lower-triangular pass
      for (Index j = 0; j < i; ++j) elementary_update(i, j, W, C);
    for (Index i = 0; i < R; ++i)  // upper-triangular pass
      for (Index j = i + 1; j < R; ++j) elementary_update(i, j, W, C);
    rec.after = criterion(C);
    sol.sweep_log.push_back(rec);
    ++sol.sweeps;

    const double next = normalized_offdiag(C);
    if (!std::isfinite(next) || !std::isfinite(rec.after) || rec.after > 1e3 * rec.before)
      fail(ErrorCode::Divergence, "rnjd_solve: criterion grew from " + std::to_string(rec.before) + " to " +
                                      std::to_string(rec.after) + " in sweep " + std::to_string(sweep));
    const bool stalled = rec.before - rec.after <= 1e-6 * rec.before;
    rel = next;
    if (stalled) break;
  }
  sol.converged = rel < problem.tol || R == 1;
  sol.offdiag_final = rel;
  return sol;
}

}  // namespace

double offdiag_criterion(const RealMatrix& W, const std::vector<RealMatrix>& targets) {
  double crit = 0.0;
  for (const auto& G : targets) {
    require(G.rows() == W.cols() && G.cols() == W.cols(), ErrorCode::DimensionMismatch,
            "offdiag_criterion: target size differs from W");
    crit += offdiag_sq(Dense(W * G * W.transpose()));
  }
  return crit;
}

JdSolution rnjd_solve(const JdProblem& problem) {
  require(!problem.targets.empty(), ErrorCode::InvalidArgument, "rnjd_solve: no targets");
  const Index R = problem.targets.front().rows();
  require(R >= 1, ErrorCode::InvalidArgument, "rnjd_solve: empty targets");
  std::vector<Dense> G;
  double total = 0.0;  // finiteness probe only
  for (const auto& T : problem.targets) {
    require(T.rows() == R && T.cols() == R, ErrorCode::DimensionMismatch, "rnjd_solve: targets must share one square size");
    G.emplace_back(0.5 * (Dense(T) + Dense(T.transpose())));
    total += G.back().squaredNorm();
  }
  require(std::isfinite(total), ErrorCode::Numerical, "rnjd_solve: non-finite target entries");

  std::vector<Dense> starts{whitening_init(G)};
  for (const auto& F0 : problem.initial_F) {
    require(F0.rows() == R && F0.cols() == R, ErrorCode::DimensionMismatch, "rnjd_solve: initial F has the wrong size");
    Eigen::FullPivLU<Dense> lu{Dense(F0)};
    if (lu.isInvertible() && lu.rcond() > 1e-12) starts.push_back(lu.inverse());
  }
  JdSolution sol;
  Dense W;
  for (const Dense& W0 : starts) {
    Dense Wi = W0;
    JdSolution si = descend(G, Wi, problem);
    if (W.size() == 0 || si.offdiag_final < sol.offdiag_final) {
      sol = std::move(si);
      W = std::move(Wi);
    }
  }

  normalize_rows(W);
  const std::vector<Dense> C = transform(G, W);
  Dense F = W.inverse();
  std::vector<Index> order(static_cast<std::size_t>(R));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return F.col(a).norm() > F.col(b).norm(); });
  sol.F.resize(R, R);
  for (Index c = 0; c < R; ++c) sol.F.col(c) = F.col(order[static_cast<std::size_t>(c)]);
  for (const Dense& Ck : C) {
    RealVector d(R);
    for (Index c = 0; c < R; ++c) d(c) = Ck(order[static_cast<std::size_t>(c)], order[static_cast<std::size_t>(c)]);
    sol.diags.push_back(std::move(d));
  }
  return sol;
}

}  // namespace cps5
