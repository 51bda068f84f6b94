#include "experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "linalg.hpp"

namespace cps5 {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double noise_scale(double snr_db) {
  require(!std::isnan(snr_db) && snr_db != -std::numeric_limits<double>::infinity(), ErrorCode::InvalidArgument,
          "snr must be finite or +inf");
  return std::isinf(snr_db) ? 0.0 : std::pow(10.0, -snr_db / 10.0);
}

void check_trials(int trials) { require(trials >= 0, ErrorCode::InvalidArgument, "trial count must be non-negative"); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Runs task(i) for i in [0, n) on `jobs` threads; task must only write to slot i.
template <typename Task>
void parallel_for(int n, int jobs, Task task) {
  jobs = std::clamp(jobs, 1, std::max(n, 1));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) task(i);
    });
  for (auto& t : pool) t.join();
}

DecomposeOptions with_seed(DecomposeOptions o, std::uint64_t seed) {
  o.als.seed = mix64(seed ^ 0xa1b2c3d4e5f60718ULL);
  return o;
}

TrialResult failed_row(Backend m, double snr, int trial, std::uint64_t seed, const std::string& why) {
  TrialResult r;
  r.method = backend_name(m);
  r.snr_db = snr;
  r.trial = trial;
  r.seed = seed;
  r.pi_a = r.pi_b = kNaN;
  r.time_s = kNaN;
  r.status = "failed";
  r.detail = why;
  return r;
}

std::string backend_detail(const DecomposeResult& d) {
  std::ostringstream os;
  os << "residual=" << d.residual;
  if (d.jd_report) os << " rnjd_sweeps=" << d.jd_report->rnjd_sweeps;
  if (d.als_trace) os << " als_iters=" << d.als_trace->iterations;
  return os.str();
}

template <typename Gen, typename Solve>
std::vector<TrialResult> run_grid(const std::vector<double>& snrs, int trials, std::uint64_t base, const RunOptions& run,
                                  Gen gen, Solve solve) {
  check_trials(trials);
  const int n = static_cast<int>(snrs.size()) * trials;
  const std::size_t M = run.methods.size();
  std::vector<std::vector<TrialResult>> slots(static_cast<std::size_t>(n));
  if (M == 0) return {};
  parallel_for(n, run.jobs, [&](int i) {
    const double snr = snrs[static_cast<std::size_t>(i / trials)];
    const int trial = i % trials;
    const std::uint64_t seed = trial_seed(base, snr, trial);
    auto& out = slots[static_cast<std::size_t>(i)];
    try {
      auto data = gen(snr, seed);
      for (Backend m : run.methods) {
        try {
          out.push_back(solve(data, m, with_seed(run.backend, seed)));
          out.back().snr_db = snr;
          out.back().trial = trial;
          out.back().seed = seed;
        } catch (const std::exception& e) {
          out.push_back(failed_row(m, snr, trial, seed, e.what()));
        }
      }
    } catch (const std::exception& e) {
      for (Backend m : run.methods) out.push_back(failed_row(m, snr, trial, seed, e.what()));
    }
  });
  // canonical order: method (as requested), snr (grid order), trial
  std::vector<TrialResult> rows;
  rows.reserve(static_cast<std::size_t>(n) * M);
  for (std::size_t m = 0; m < M; ++m)
    for (const auto& s : slots) rows.push_back(s[m]);
  return rows;
}

}  // namespace

ComplexMatrix gen_complex_normal(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix M(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) {
      const double re = n(rng);
      M(i, j) = {re, n(rng)};
    }
  return M;
}

ComplexMatrix gen_collinear_matrix(Index I, Index R, double step, std::mt19937_64& rng) {
  require(I > 0 && R > 0, ErrorCode::InvalidArgument, "gen_collinear_matrix: sizes must be positive");
  const ComplexMatrix V = gen_complex_normal(I, R, rng);
  ComplexMatrix A(I, R);
  A.col(0) = V.col(0);
  for (Index j = 1; j < R; ++j) A.col(j) = A.col(j - 1) + step * V.col(j);
  return A;
}

Sim1Data gen_sim1(const Sim1Config& cfg, double snr_db, std::uint64_t seed) {
  require(cfg.I > 0 && cfg.J > 0 && cfg.K > 0 && cfg.R > 0, ErrorCode::InvalidArgument, "sim1: sizes must be positive");
  const double sigma = noise_scale(snr_db);
  std::mt19937_64 rng(seed);
  Sim1Data d;
  if (cfg.collinear) {
    d.truth.A = gen_collinear_matrix(cfg.I, cfg.R, cfg.collinearity_step, rng);
    d.truth.B = gen_collinear_matrix(cfg.J, cfg.R, cfg.collinearity_step, rng);
  } else {
    d.truth.A = gen_complex_normal(cfg.I, cfg.R, rng);
    d.truth.B = gen_complex_normal(cfg.J, cfg.R, rng);
  }
  std::normal_distribution<double> n(0.0, 1.0);
  d.truth.D.resize(cfg.K, cfg.R);
  for (Index k = 0; k < cfg.K; ++k)
    for (Index r = 0; r < cfg.R; ++r) d.truth.D(k, r) = n(rng);
  d.T = synthesize_cp5(d.truth);
  const double tn = d.T.norm();
  require(tn > 0.0, ErrorCode::Numerical, "sim1: generated tensor is zero");
  for (cplx& z : d.T.data()) z /= tn;
  if (sigma > 0.0) {
    const ComplexMatrix N = gen_complex_normal(d.T.size(), 1, rng);
    const double nn = N.norm();
    for (Index i = 0; i < d.T.size(); ++i) d.T.data()[static_cast<std::size_t>(i)] += sigma * N(i, 0) / nn;
  }
  return d;
}

Sim2Data gen_sim2(const Sim2Config& cfg, double snr_db, std::uint64_t seed) {
  require(cfg.I > 0 && cfg.J > 0 && cfg.K > 1 && cfg.R > 0, ErrorCode::InvalidArgument, "sim2: sizes must be positive");
  require(std::abs(cfg.noise_correlation) < 1.0, ErrorCode::InvalidArgument, "sim2: noise correlation must lie in (-1, 1)");
  const double sigma = noise_scale(snr_db);
  std::mt19937_64 rng(seed);
  Sim2Data d;
  d.A = gen_complex_normal(cfg.I, cfg.R, rng);
  d.B = gen_complex_normal(cfg.J, cfg.R, rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  d.S.resize(cfg.K, cfg.R);
  for (Index t = 0; t < cfg.K; ++t)
    for (Index r = 0; r < cfg.R; ++r) d.S(t, r) = std::polar(1.0, 2.0 * std::numbers::pi * u(rng));
  const ComplexMatrix X = khatri_rao(d.A, d.B) * d.S.transpose();  // IJ x K
  ComplexMatrix Xn = X;
  const Index n = cfg.I * cfg.J;
  // Always draw the noise so clean and noisy data share the mixing and the sources.
  Eigen::MatrixXd C(n, n);
  for (Index p = 0; p < n; ++p)
    for (Index q = 0; q < n; ++q) C(p, q) = std::pow(cfg.noise_correlation, static_cast<double>(std::abs(p - q)));
  const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(C).matrixL();
  const ComplexMatrix W = gen_complex_normal(n, cfg.K, rng);
  const ComplexMatrix N = L.cast<cplx>() * W;
  if (sigma > 0.0) {
    // snr = 10 log10(p_s / p_n) on the generated samples
    const double ps = X.squaredNorm(), pn = N.squaredNorm();
    Xn += std::sqrt(ps * sigma / pn) * N;
  }
  d.X3 = dematricize3(Xn, cfg.I, cfg.J);
  return d;
}

double amari_pi(const ComplexMatrix& P) {
  const Index R = P.rows();
  require(P.cols() == R, ErrorCode::DimensionMismatch, "amari_pi: matrix must be square");
  require(R >= 2, ErrorCode::InvalidArgument, "amari_pi: needs R >= 2");
  const RealMatrix a = P.cwiseAbs();
  double s = 0.0;
  for (Index i = 0; i < R; ++i) {
    const double m = a.row(i).maxCoeff();
    require(m > 0.0, ErrorCode::Numerical, "amari_pi: zero row");
    s += a.row(i).sum() / m - 1.0;
  }
  for (Index j = 0; j < R; ++j) {
    const double m = a.col(j).maxCoeff();
    require(m > 0.0, ErrorCode::Numerical, "amari_pi: zero column");
    s += a.col(j).sum() / m - 1.0;
  }
  return s / (2.0 * static_cast<double>(R) * static_cast<double>(R - 1));
}

double pi_of_estimate(const ComplexMatrix& est, const ComplexMatrix& truth) {
  require(est.rows() == truth.rows() && est.cols() == truth.cols(), ErrorCode::DimensionMismatch,
          "pi_of_estimate: estimate and truth shapes differ");
  return amari_pi(pseudo_inverse(est) * truth);
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t base, double snr_db, int trial) {
  const double s = snr_db == 0.0 ? 0.0 : snr_db;  // -0 and +0 share a seed
  return mix64(base ^ mix64(std::bit_cast<std::uint64_t>(s) + mix64(static_cast<std::uint64_t>(trial))));
}

std::vector<TrialResult> run_sim1(const Sim1Config& cfg, const RunOptions& run) {
  return run_grid(
      cfg.snr_db, cfg.trials, cfg.seed, run, [&](double snr, std::uint64_t seed) { return gen_sim1(cfg, snr, seed); },
      [&](const Sim1Data& d, Backend m, const DecomposeOptions& opts) {
        const auto res = decompose(d.T, cfg.R, m, opts);
        TrialResult r;
        r.method = backend_name(m);
        r.pi_a = pi_of_estimate(res.factors.A, d.truth.A);
        r.pi_b = pi_of_estimate(res.factors.B, d.truth.B);
        r.time_s = res.time_s;
        r.detail = backend_detail(res);
        return r;
      });
}

std::vector<TrialResult> run_sim2(const Sim2Config& cfg, const RunOptions& run) {
  struct Prepared {
    Sim2Data data;
    IcaFrontEnd fe;
  };
  return run_grid(
      cfg.snr_db, cfg.trials, cfg.seed, run,
      [&](double snr, std::uint64_t seed) {
        Prepared p{gen_sim2(cfg, snr, seed), {}};
        p.fe = ica_front_end(p.data.X3, cfg.R);
        return p;
      },
      [&](const Prepared& p, Backend m, const DecomposeOptions& opts) {
        const auto res = decompose(p.fe.T5, cfg.R, m, opts);
        TrialResult r;
        r.method = backend_name(m);
        r.pi_a = pi_of_estimate(res.factors.A, p.data.A);
        r.pi_b = pi_of_estimate(res.factors.B, p.data.B);
        r.time_s = res.time_s;
        r.detail = backend_detail(res);
        return r;
      });
}

std::string results_csv(const std::vector<TrialResult>& rows) {
  std::ostringstream os;
  os << "method,snr_db,trial,seed,pi_a,pi_b,time_s,status\n";
  for (const auto& r : rows)
    os << r.method << ',' << fmt("%g", r.snr_db) << ',' << r.trial << ',' << r.seed << ',' << fmt("%.17g", r.pi_a) << ','
       << fmt("%.17g", r.pi_b) << ',' << fmt("%.6f", r.time_s) << ',' << r.status << '\n';
  return os.str();
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<SummaryCell> summarize(const std::vector<TrialResult>& rows) {
  struct Acc {
    std::vector<double> a, b, t;
    int trials = 0, failed = 0;
  };
  std::vector<std::pair<std::string, double>> order;
  std::map<std::pair<std::string, double>, Acc> acc;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.method, r.snr_db);
    if (!acc.count(key)) order.push_back(key);
    Acc& x = acc[key];
    ++x.trials;
    if (r.status != "ok") {
      ++x.failed;
      continue;
    }
    x.a.push_back(r.pi_a);
    x.b.push_back(r.pi_b);
    x.t.push_back(r.time_s);
  }
  std::vector<SummaryCell> out;
  for (const auto& key : order) {
    const Acc& x = acc[key];
    SummaryCell c;
    c.method = key.first;
    c.snr_db = key.second;
    c.trials = x.trials;
    c.failed = x.failed;
    c.pi_a_median = quantile(x.a, 0.5);
    c.pi_a_q1 = quantile(x.a, 0.25);
    c.pi_a_q3 = quantile(x.a, 0.75);
    c.pi_b_median = quantile(x.b, 0.5);
    c.pi_b_q1 = quantile(x.b, 0.25);
    c.pi_b_q3 = quantile(x.b, 0.75);
    double s = 0.0;
    for (double t : x.t) s += t;
    c.time_mean = x.t.empty() ? kNaN : s / static_cast<double>(x.t.size());
    c.time_median = quantile(x.t, 0.5);
    out.push_back(c);
  }
  return out;
}

std::string summary_json(const std::vector<TrialResult>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : summarize(rows)) {
    arr.push_back({{"method", c.method},
                   {"snr_db", c.snr_db},
                   {"trials", c.trials},
                   {"failed", c.failed},
                   {"pi_a", {{"median", c.pi_a_median}, {"q1", c.pi_a_q1}, {"q3", c.pi_a_q3}}},
                   {"pi_b", {{"median", c.pi_b_median}, {"q1", c.pi_b_q1}, {"q3", c.pi_b_q3}}},
                   {"time_s", {{"mean", c.time_mean}, {"median", c.time_median}}}});
  }
  return arr.dump(2) + "\n";
}

std::string timing_table(const std::vector<TrialResult>& rows, const std::string& title) {
  const auto cells = summarize(rows);
  std::vector<double> snrs;
  std::vector<std::string> methods;
  for (const auto& c : cells) {
    if (std::find(snrs.begin(), snrs.end(), c.snr_db) == snrs.end()) snrs.push_back(c.snr_db);
    if (std::find(methods.begin(), methods.end(), c.method) == methods.end()) methods.push_back(c.method);
  }
  std::ostringstream os;
  os << title << " (mean seconds)\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-10s", "snr (dB)");
  os << buf;
  for (double s : snrs) {
    std::snprintf(buf, sizeof buf, "%10g", s);
    os << buf;
  }
  os << '\n';
  for (const auto& m : methods) {
    std::snprintf(buf, sizeof buf, "%-10s", m.c_str());
    os << buf;
    for (double s : snrs) {
      double v = kNaN;
      for (const auto& c : cells)
        if (c.method == m && c.snr_db == s) v = c.time_mean;
      std::snprintf(buf, sizeof buf, "%10.4f", v);
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace cps5
