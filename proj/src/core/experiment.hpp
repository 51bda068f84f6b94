#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ica_cpa.hpp"

namespace cps5 {

struct Sim1Config {
  Index I = 6, J = 6, K = 6, R = 5;
  bool collinear = true;
  double collinearity_step = 0.08;
  std::vector<double> snr_db{20, 30, 40, 50, 60, 70, 80};
  int trials = 200;
  std::uint64_t seed = 0;
};

struct Sim2Config {
  Index I = 6, J = 5, K = 1000, R = 3;
  double noise_correlation = 0.9;  // adjacent-channel coefficient of the Toeplitz noise covariance
  std::vector<double> snr_db{-10, 0, 10, 20, 30, 40, 50};
  int trials = 200;
  std::uint64_t seed = 0;
};

struct TrialResult {
  std::string method;
  double snr_db = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double pi_a = 0.0;
  double pi_b = 0.0;
  double time_s = 0.0;
  std::string status = "ok";  // "ok" or "failed"
  std::string detail;          // error message for failed rows, backend summary otherwise
};

/// a_1 = v_1, a_j = a_{j-1} + step * v_j with standard normal real and imaginary parts.
ComplexMatrix gen_collinear_matrix(Index I, Index R, double step, std::mt19937_64& rng);

/// Entries with independent standard normal real and imaginary parts.
ComplexMatrix gen_complex_normal(Index rows, Index cols, std::mt19937_64& rng);

struct Sim1Data {
  ComplexTensor T;
  FactorSet truth;
};
/// T/||T|| + sigma N/||N|| with sigma = 10^(-snr/10); +inf snr gives the scaled noiseless tensor.
Sim1Data gen_sim1(const Sim1Config& cfg, double snr_db, std::uint64_t seed);

struct Sim2Data {
  ComplexTensor X3;  // I x J x K
  ComplexMatrix A, B, S;
};
/// Random-phase sources mixed by A (.) B plus spatially colored Gaussian noise at the exact empirical snr.
Sim2Data gen_sim2(const Sim2Config& cfg, double snr_db, std::uint64_t seed);

/// Amari performance index of a square matrix; 0 iff P is a scaled permutation.
double amari_pi(const ComplexMatrix& P);
double pi_of_estimate(const ComplexMatrix& est, const ComplexMatrix& truth);

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);
/// Per-trial seed: mix64(base ^ mix64(bits(snr) + mix64(trial))).
std::uint64_t trial_seed(std::uint64_t base, double snr_db, int trial);

struct RunOptions {
  std::vector<Backend> methods{Backend::Jd, Backend::Eals, Backend::EalsJd};
  int jobs = 1;
  DecomposeOptions backend;
};

/// Every (snr, trial) generates one data set, shared by all methods. Results are sorted by
/// (method order, snr, trial) regardless of `jobs`.
std::vector<TrialResult> run_sim1(const Sim1Config& cfg, const RunOptions& run);
std::vector<TrialResult> run_sim2(const Sim2Config& cfg, const RunOptions& run);

std::string results_csv(const std::vector<TrialResult>& rows);
/// JSON: array of {method, snr_db, trials, failed, pi_a{median,q1,q3}, pi_b{...}, time_s{mean,median}}.
std::string summary_json(const std::vector<TrialResult>& rows);
/// Methods x snr grid of mean seconds over successful trials.
std::string timing_table(const std::vector<TrialResult>& rows, const std::string& title);

struct SummaryCell {
  std::string method;
  double snr_db = 0.0;
  int trials = 0;
  int failed = 0;
  double pi_a_median = 0.0, pi_a_q1 = 0.0, pi_a_q3 = 0.0;
  double pi_b_median = 0.0, pi_b_q1 = 0.0, pi_b_q3 = 0.0;
  double time_mean = 0.0, time_median = 0.0;
};
std::vector<SummaryCell> summarize(const std::vector<TrialResult>& rows);

/// Quantile with linear interpolation between order statistics; NaN for empty input.
double quantile(std::vector<double> v, double q);

}  // namespace cps5
