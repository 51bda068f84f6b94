#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace cps5 {

struct AlsOptions {
  Index rank = 1;
  int max_iters = 1000;
  double rel_fit_tol = 1e-8;     // stop when the relative residual drops by less than this
  double residual_floor = 1e-14;  // stop once the relative residual is at rounding level
  bool els_enabled = true;
  int els_poly_degree = 10;  // fixed by the model order: 5 factors, squared
  std::optional<FactorSet> init;  // random(seed) when empty
  std::uint64_t seed = 0;
};

struct AlsTrace {
  std::vector<double> residuals;  // relative fit residual after every accepted iteration, [0] = init
  std::vector<double> rhos;       // accepted step per iteration (1 = plain sweep)
  int iterations = 0;
  double wall_time_s = 0.0;
  bool converged = false;
  bool symmetric_by_construction = true;  // modes 3, 4 are always conj(A), conj(B)
  std::vector<std::string> warnings;
};

/// Standard complex normal A, B and real normal D.
FactorSet random_factors(Index I, Index J, Index K, Index R, std::uint64_t seed);

/// Random start with unit A, B columns and D scaled so the model norm equals ||T||.
FactorSet start_factors(const ComplexTensor& T, Index R, std::uint64_t seed);

/// ||T - model(f)||_F / ||T||_F (absolute norm for a zero tensor).
double fit_residual(const ComplexTensor& T, const FactorSet& f);

/// One sweep of coupled least-squares updates: A from the stacked mode-1 and conjugated mode-3
/// unfoldings, B likewise from modes 2 and 4, D from mode 5 with the imaginary part dropped.
/// `rank_deficient` is set when any coefficient matrix is rank deficient (minimum-norm solution used).
/// The result is normalized: unit A and B columns with the phase convention, scale in D.
FactorSet als_sweep(const ComplexTensor& T, const FactorSet& f, bool* rank_deficient = nullptr,
                    double* d_imag_ratio = nullptr);

/// Squared residual along f + rho * dir for real rho: a degree-10 polynomial, stored as
/// Chebyshev coefficients on the probe interval [lo, hi].
struct ElsPolynomial {
  double lo = -2.0;
  double hi = 3.0;
  RealVector cheb;
  double operator()(double rho) const;
};

ElsPolynomial els_polynomial(const ComplexTensor& T, const FactorSet& f, const FactorSet& dir);

/// Minimizer of the line residual over all real roots of its derivative and both probe endpoints;
/// 1 when nothing beats rho = 1, the directions vanish, or a probe is non-finite.
double els_step(const ComplexTensor& T, const FactorSet& f, const FactorSet& dir);

struct Cps5EalsResult {
  FactorSet factors;
  AlsTrace trace;
};

/// ALS with optional enhanced line search. The recorded residual never increases: a step that is
/// worse than the current point ends the run at the current point.
Cps5EalsResult cps5_eals(const ComplexTensor& T, const AlsOptions& opts);

}  // namespace cps5
