#include <set>
#include <sstream>

#include "doctest.h"
#include "experiment.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace cps5;
using namespace cps5::test;

TEST_CASE("amari_pi reference values and invariances") {
  CHECK(amari_pi(ComplexMatrix::Identity(3, 3)) == 0.0);
  CHECK(amari_pi(ComplexMatrix::Ones(2, 2)) == doctest::Approx(1.0));
  std::mt19937_64 rng(101);
  ComplexMatrix P = ComplexMatrix::Zero(4, 4);
  P(0, 2) = {2, 1};
  P(1, 0) = -3;
  P(2, 3) = {0, 0.5};
  P(3, 1) = 7;
  CHECK(amari_pi(P) == 0.0);
  const ComplexMatrix Q = crandn(4, 4, rng);
  const double base = amari_pi(Q);
  CHECK(base > 0.0);
  CHECK(base <= 1.0);
  // Row/column permutations leave the index unchanged.
  Eigen::PermutationMatrix<Eigen::Dynamic> p1(4), p2(4);
  p1.indices() << 2, 0, 3, 1;
  p2.indices() << 1, 3, 0, 2;
  CHECK(amari_pi(p1 * Q * p2) == doctest::Approx(base).epsilon(1e-12));
  // Row scaling leaves the row term unchanged; so does column scaling for the column term.
  ComplexMatrix D = ComplexMatrix::Zero(4, 4);
  for (Index i = 0; i < 4; ++i) D(i, i) = double(i + 1);
  auto row_term = [](const ComplexMatrix& M) {
    const RealMatrix a = M.cwiseAbs();
    double s = 0.0;
    for (Index i = 0; i < a.rows(); ++i) s += a.row(i).sum() / a.row(i).maxCoeff() - 1.0;
    return s;
  };
  CHECK(row_term(D * Q) == doctest::Approx(row_term(Q)).epsilon(1e-12));
  CHECK_THROWS_AS(amari_pi(ComplexMatrix::Ones(1, 1)), Error);
  CHECK_THROWS_AS(amari_pi(ComplexMatrix::Zero(2, 2)), Error);
}

TEST_CASE("pi_of_estimate ignores scaling and permutation of columns") {
  std::mt19937_64 rng(102);
  const ComplexMatrix A = crandn(6, 4, rng);
  ComplexMatrix E(6, 4);
  E << A.col(2) * cplx(0, 2), A.col(0) * -1.5, A.col(3), A.col(1) * 4.0;
  CHECK(pi_of_estimate(A, A) < 1e-14);
  CHECK(pi_of_estimate(E, A) < 1e-14);
  double sum = 0.0;
  for (int s = 0; s < 50; ++s) sum += pi_of_estimate(crandn(6, 4, rng), A);
  CHECK(sum / 50 > 0.3);
}

TEST_CASE("collinear generator") {
  std::mt19937_64 rng(103);
  const ComplexMatrix Z = gen_collinear_matrix(6, 5, 0.0, rng);
  for (Index j = 1; j < 5; ++j) CHECK((Z.col(j) - Z.col(0)).norm() == 0.0);
  int high = 0, total = 0;
  for (int s = 0; s < 100; ++s) {
    const ComplexMatrix A = gen_collinear_matrix(6, 5, 0.08, rng);
    for (Index j = 1; j < 5; ++j, ++total)
      if (std::abs(A.col(j).dot(A.col(j - 1))) / (A.col(j).norm() * A.col(j - 1).norm()) > 0.99) ++high;
  }
  CHECK(high > total * 9 / 10);
}

TEST_CASE("sim1 noise has the exact norm and the generator is deterministic") {
  Sim1Config cfg;
  const auto clean = gen_sim1(cfg, std::numeric_limits<double>::infinity(), 7);
  const auto noisy = gen_sim1(cfg, 20.0, 7);
  CHECK(clean.T.norm() == doctest::Approx(1.0));
  CHECK((clean.truth.A - noisy.truth.A).norm() == 0.0);
  double d2 = 0.0;
  for (Index i = 0; i < clean.T.size(); ++i) d2 += std::norm(noisy.T.data()[i] - clean.T.data()[i]);
  CHECK(std::sqrt(d2) == doctest::Approx(0.01).epsilon(1e-12));
  const auto again = gen_sim1(cfg, 20.0, 7);
  CHECK(max_abs_diff(again.T, noisy.T) == 0.0);
}

TEST_CASE("sim2 measured snr matches the target and sources have unit modulus") {
  Sim2Config cfg;
  const auto clean = gen_sim2(cfg, std::numeric_limits<double>::infinity(), 11);
  for (double snr : {-10.0, 7.0, 50.0}) {
    const auto d = gen_sim2(cfg, snr, 11);
    double ps = 0.0, pn = 0.0;
    for (Index i = 0; i < d.X3.size(); ++i) {
      ps += std::norm(clean.X3.data()[i]);
      pn += std::norm(d.X3.data()[i] - clean.X3.data()[i]);
    }
    CHECK(std::abs(10.0 * std::log10(ps / pn) - snr) < 0.1);
  }
  CHECK((clean.S.cwiseAbs() - RealMatrix::Ones(cfg.K, cfg.R)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("sim2 noise is spatially correlated with coefficient 0.9") {
  Sim2Config cfg;
  cfg.K = 20000;
  const auto clean = gen_sim2(cfg, std::numeric_limits<double>::infinity(), 12);
  const auto d = gen_sim2(cfg, 0.0, 12);
  const ComplexMatrix N = matricize3(d.X3) - matricize3(clean.X3);
  const ComplexMatrix C = N * N.adjoint() / double(cfg.K);
  double adj = 0.0, far = 0.0;
  for (Index p = 0; p + 1 < 30; ++p) adj += (C(p, p + 1) / std::sqrt(C(p, p).real() * C(p + 1, p + 1).real())).real();
  for (Index p = 0; p + 20 < 30; ++p) far += std::abs(C(p, p + 20)) / std::sqrt(C(p, p).real() * C(p + 20, p + 20).real());
  CHECK(adj / 29 == doctest::Approx(0.9).epsilon(0.02));
  CHECK(far / 10 < 0.2);
}

TEST_CASE("random-phase sources have kurtosis -1") {
  Sim2Config cfg;
  cfg.K = 10000;
  const auto d = gen_sim2(cfg, std::numeric_limits<double>::infinity(), 13);
  for (Index r = 0; r < cfg.R; ++r) {
    double m2 = 0.0, m4 = 0.0;
    for (Index t = 0; t < cfg.K; ++t) {
      const double p = std::norm(d.S(t, r));
      m2 += p;
      m4 += p * p;
    }
    m2 /= double(cfg.K);
    m4 /= double(cfg.K);
    CHECK(m4 - 2 * m2 * m2 == doctest::Approx(-1.0).epsilon(0.05));
  }
}

TEST_CASE("trial seeds are distinct and stable") {
  std::set<std::uint64_t> seen;
  for (double snr : {20.0, 30.0, -10.0})
    for (int t = 0; t < 50; ++t) seen.insert(trial_seed(1, snr, t));
  CHECK(seen.size() == 150);
  CHECK(trial_seed(1, 0.0, 3) == trial_seed(1, -0.0, 3));
  CHECK(trial_seed(1, 20.0, 3) != trial_seed(2, 20.0, 3));
  CHECK(mix64(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("quantile interpolates between order statistics") {
  CHECK(quantile({3.0, 1.0, 2.0, 4.0}, 0.5) == doctest::Approx(2.5));
  CHECK(quantile({3.0, 1.0, 2.0, 4.0}, 0.25) == doctest::Approx(1.75));
  CHECK(std::isnan(quantile({}, 0.5)));
}

TEST_CASE("run_sim1: canonical order, row counts, determinism under jobs") {
  Sim1Config cfg;
  cfg.I = cfg.J = cfg.K = 4;
  cfg.R = 3;
  cfg.snr_db = {60.0, 30.0};
  cfg.trials = 3;
  cfg.seed = 17;
  RunOptions one;
  one.backend.als.max_iters = 50;
  RunOptions many = one;
  many.jobs = 3;
  const auto a = run_sim1(cfg, one);
  const auto b = run_sim1(cfg, many);
  REQUIRE(a.size() == 18);
  CHECK(a.front().method == "jd");
  CHECK(a.back().method == "eals_jd");
  CHECK(a[0].snr_db == 60.0);
  CHECK(a[3].snr_db == 30.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].method == b[i].method);
    CHECK(a[i].seed == b[i].seed);
    CHECK(a[i].pi_a == b[i].pi_a);
    CHECK(a[i].pi_b == b[i].pi_b);
    CHECK(a[i].status == "ok");
    CHECK(a[i].time_s > 0.0);
  }
  const std::string csv = results_csv(a);
  CHECK(csv.rfind("method,snr_db,trial,seed,pi_a,pi_b,time_s,status\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 19);

  const auto j = nlohmann::json::parse(summary_json(a));
  REQUIRE(j.size() == 6);
  CHECK(j[0]["trials"] == 3);
  CHECK(j[0].contains("pi_a"));
  CHECK(timing_table(a, "t").find("eals_jd") != std::string::npos);

  RunOptions none = one;
  none.methods.clear();
  CHECK(run_sim1(cfg, none).empty());
  RunOptions jd_only = one;
  jd_only.methods = {Backend::Jd};
  CHECK(run_sim1(cfg, jd_only).size() == 6);
}

TEST_CASE("failed trials become failed rows") {
  Sim1Config cfg;
  cfg.I = cfg.J = cfg.K = 2;
  cfg.R = 5;  // exceeds min(I^2, J^2 K)
  cfg.snr_db = {60.0};
  cfg.trials = 2;
  RunOptions run;
  run.methods = {Backend::Jd};
  const auto rows = run_sim1(cfg, run);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.status == "failed");
    CHECK_FALSE(r.detail.empty());
  }
  CHECK(results_csv(rows).find(",failed\n") != std::string::npos);
}

TEST_CASE("default simulation grids") {
  CHECK(Sim1Config{}.snr_db == std::vector<double>{20, 30, 40, 50, 60, 70, 80});
  CHECK(Sim2Config{}.snr_db == std::vector<double>{-10, 0, 10, 20, 30, 40, 50});
  CHECK(Sim1Config{}.trials == 200);
  CHECK(Sim2Config{}.K == 1000);
}
