// cps5: simulations, tensor decomposition and self test on top of the C interface.

#include <cps5/cps5.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string output_dir = ".";
  int verbose = 0;
};

struct SimArgs {
  std::vector<double> snr;
  int trials = 200;
  std::uint64_t seed = 0;
  std::vector<std::string> methods{"jd", "eals", "eals_jd"};
  int jobs = 1;
  bool allow_partial = false;
  bool no_collinear = false;
  std::size_t samples = 1000;
  int max_iters = 1000;
  double tol = 1e-8;
};

struct DecomposeArgs {
  std::string input;
  std::size_t rank = 0;
  std::string method = "jd";
  std::uint64_t seed = 0;
  std::string prefix;
  int max_iters = 1000;
  double tol = 1e-8;
  bool no_refit = false;
};

// Prints the library's message for a failed call and returns the exit code.
int report_failure(const char* what, cps5_status s) {
  std::cerr << "error: " << what << ": " << cps5_status_name(s) << ": " << cps5_last_error() << '\n';
  return 1;
}

bool write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    std::cerr << "error: cannot write " << path << '\n';
    return false;
  }
  return true;
}

bool ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::cerr << "error: cannot create output directory " << dir << ": " << ec.message() << '\n';
    return false;
  }
  return true;
}

void add_sim_options(CLI::App* cmd, SimArgs& a, bool sim2) {
  cmd->add_option("--snr", a.snr, "snr grid in dB (comma separated)")->delimiter(',');
  cmd->add_option("--trials", a.trials, "trials per snr")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", a.seed, "base seed")->envname("CPS5_SEED");
  cmd->add_option("--methods", a.methods, "methods: jd, eals, eals_jd (comma separated)")->delimiter(',');
  cmd->add_option("--jobs", a.jobs, "parallel trials")->check(CLI::PositiveNumber);
  cmd->add_flag("--allow-partial", a.allow_partial, "exit 0 even when some trials fail");
  cmd->add_option("--max-iters", a.max_iters, "ALS iteration limit")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", a.tol, "ALS relative fit tolerance")->check(CLI::PositiveNumber);
  if (sim2)
    cmd->add_option("--samples", a.samples, "samples per trial")->check(CLI::Range(2, 100000000));
  else
    cmd->add_flag("--no-collinear", a.no_collinear, "independent factor columns instead of the 0.08 chain");
}

int run_sim(int which, const SimArgs& a, const Common& c) {
  std::vector<cps5_method> methods;
  for (const auto& m : a.methods) {
    cps5_method x;
    if (const auto s = cps5_method_parse(m.c_str(), &x); s != CPS5_OK) return report_failure("--methods", s);
    methods.push_back(x);
  }
  cps5_sim_options o;
  cps5_sim_options_init(&o, which);
  if (!a.snr.empty()) {
    o.snr_db = a.snr.data();
    o.snr_count = a.snr.size();
  }
  o.trials = a.trials;
  o.seed = a.seed;
  o.methods = methods.data();
  o.method_count = methods.size();
  o.jobs = a.jobs;
  o.collinear = a.no_collinear ? 0 : 1;
  o.samples = a.samples;
  o.max_iters = a.max_iters;
  o.rel_fit_tol = a.tol;

  if (!ensure_dir(c.output_dir)) return 1;
  cps5_sim_result* r = nullptr;
  if (const auto s = cps5_run_simulation(&o, &r); s != CPS5_OK) return report_failure("simulation", s);
  const std::string stem = which == 1 ? "sim1" : "sim2";
  const fs::path dir(c.output_dir);
  bool ok = write_text(dir / (stem + "_results.csv"), cps5_sim_result_csv(r)) &&
            write_text(dir / (stem + "_summary.json"), cps5_sim_result_summary_json(r)) &&
            write_text(dir / (stem + "_table.txt"), cps5_sim_result_table(r));
  std::cout << cps5_sim_result_table(r);
  const std::size_t failed = cps5_sim_result_failed(r);
  if (failed > 0) {
    std::cerr << (a.allow_partial ? "warning: " : "error: ") << failed << " of " << cps5_sim_result_rows(r)
              << " trial runs failed\n";
    if (c.verbose)
      for (std::size_t i = 0; i < cps5_sim_result_rows(r); ++i)
        if (const std::string d = cps5_sim_result_row_detail(r, i); !d.empty()) std::cerr << "  row " << i << ": " << d << '\n';
    ok = ok && a.allow_partial;
  }
  cps5_sim_result_free(r);
  return ok ? 0 : 1;
}

int save_factor(const cps5_decomposition* d, char which, const fs::path& path) {
  cps5_tensor* t = nullptr;
  if (const auto s = cps5_decomposition_factor(d, which, &t); s != CPS5_OK) return report_failure("factor", s);
  const auto s = cps5_tensor_save(t, path.string().c_str());
  cps5_tensor_free(t);
  return s == CPS5_OK ? 0 : report_failure("write factor", s);
}

int run_decompose(const DecomposeArgs& a, const Common& c) {
  cps5_decompose_options o;
  cps5_decompose_options_init(&o);
  if (const auto s = cps5_method_parse(a.method.c_str(), &o.method); s != CPS5_OK) return report_failure("--method", s);
  o.rank = a.rank;
  o.seed = a.seed;
  o.max_iters = a.max_iters;
  o.rel_fit_tol = a.tol;
  o.refit_d = a.no_refit ? 0 : 1;

  cps5_tensor* t = nullptr;
  if (const auto s = cps5_tensor_load(a.input.c_str(), &t); s != CPS5_OK) return report_failure(a.input.c_str(), s);
  const std::size_t order = cps5_tensor_order(t);
  cps5_decomposition* d = nullptr;
  cps5_status s = CPS5_OK;
  if (order == 5) {
    s = cps5_decompose(t, &o, &d);
  } else if (order == 3) {
    s = cps5_ica_cpa(t, &o, &d);
  } else {
    cps5_tensor_free(t);
    std::cerr << "error: " << a.input << ": expected a 5-way tensor (or 3-way data for ICA-CPA), got order " << order
              << '\n';
    return 1;
  }
  cps5_tensor_free(t);
  if (s != CPS5_OK) return report_failure("decompose", s);

  int rc = ensure_dir(c.output_dir) ? 0 : 1;
  const std::string prefix = a.prefix.empty() ? fs::path(a.input).stem().string() : a.prefix;
  const fs::path dir(c.output_dir);
  for (char w : std::string(order == 3 ? "ABDS" : "ABD"))
    if (rc == 0) rc = save_factor(d, w, dir / (prefix + "_" + w + ".ct1"));
  if (rc == 0 && !write_text(dir / (prefix + "_report.json"), std::string(cps5_decomposition_report_json(d)) + "\n"))
    rc = 1;
  if (rc == 0) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6e", cps5_decomposition_residual(d));
    std::cout << "relative residual " << buf << '\n';
    if (c.verbose) std::cout << cps5_decomposition_report_json(d) << '\n';
  }
  cps5_decomposition_free(d);
  return rc;
}

int run_selftest(const std::optional<std::string>& inject, const Common& c) {
  cps5_selftest_result* r = nullptr;
  if (const auto s = cps5_selftest(inject ? inject->c_str() : nullptr, &r); s != CPS5_OK)
    return report_failure("selftest", s);
  bool all = true;
  for (std::size_t i = 0; i < cps5_selftest_count(r); ++i) {
    const bool ok = cps5_selftest_passed(r, i) != 0;
    all = all && ok;
    std::printf("%-4s %-22s %8.3fs", ok ? "PASS" : "FAIL", cps5_selftest_name(r, i), cps5_selftest_seconds(r, i));
    if (!ok || c.verbose) std::printf("  %s", cps5_selftest_detail(r, i));
    std::printf("\n");
  }
  cps5_selftest_free(r);
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partially symmetric 5th-order CPD and ICA-CPA experiments"};
  app.set_version_flag("--version", std::string(cps5_version()));
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key = value file with one [section] per subcommand");
  app.allow_config_extras(CLI::config_extras_mode::error);

  Common common;
  app.add_option("-o,--output-dir", common.output_dir, "directory for result files");
  app.add_flag("-v,--verbose", common.verbose, "print diagnostics");

  SimArgs sim1, sim2;
  sim2.snr.clear();
  auto* c1 = app.add_subcommand("sim1", "Collinear-factor benchmark of jd, eals and eals_jd");
  add_sim_options(c1, sim1, false);
  auto* c2 = app.add_subcommand("sim2", "ICA-CPA benchmark with random-phase sources in colored noise");
  add_sim_options(c2, sim2, true);

  DecomposeArgs dec;
  auto* cd = app.add_subcommand("decompose", "Decompose a CT1 tensor file");
  cd->add_option("input", dec.input, "CT1 file: 5-way (I,J,I,J,K) tensor or 3-way (I,J,K) data")
      ->required()
      ->check(CLI::ExistingFile);
  cd->add_option("-r,--rank", dec.rank, "rank R")->required()->check(CLI::PositiveNumber);
  cd->add_option("-m,--method", dec.method, "jd, eals or eals_jd");
  cd->add_option("--seed", dec.seed, "seed of the ALS random initialization")->envname("CPS5_SEED");
  cd->add_option("--prefix", dec.prefix, "output file prefix (default: input stem)");
  cd->add_option("--max-iters", dec.max_iters, "ALS iteration limit")->check(CLI::PositiveNumber);
  cd->add_option("--tol", dec.tol, "ALS relative fit tolerance")->check(CLI::PositiveNumber);
  cd->add_flag("--no-refit", dec.no_refit, "keep D from the rank-1 step instead of the least-squares refit");

  std::optional<std::string> inject;
  auto* cs = app.add_subcommand("selftest", "Fast invariant checks");
  cs->add_option("--inject", inject, "perturb the named check (it must then fail)");

  CLI11_PARSE(app, argc, argv);

  if (c1->parsed()) return run_sim(1, sim1, common);
  if (c2->parsed()) return run_sim(2, sim2, common);
  if (cd->parsed()) return run_decompose(dec, common);
  return run_selftest(inject, common);
}
