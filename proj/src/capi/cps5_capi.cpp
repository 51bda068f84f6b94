#include "cps5/cps5.h"

#include <cmath>
#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "ct1.hpp"
#include "experiment.hpp"
#include "ica_cpa.hpp"
#include "json.hpp"
#include "selftest.hpp"

struct cps5_tensor {
  cps5::ComplexTensor t;
};

struct cps5_decomposition {
  cps5::DecomposeResult result;
  std::optional<cps5::ComplexMatrix> sources;
  std::string report;
};

struct cps5_sim_result {
  std::vector<cps5::TrialResult> rows;
  std::string csv, summary, table;
  std::size_t failed = 0;
};

struct cps5_selftest_result {
  std::vector<cps5::SelftestCheck> checks;
};

namespace {

thread_local std::string g_last_error;

cps5_status to_status(cps5::ErrorCode c) {
  switch (c) {
    case cps5::ErrorCode::InvalidArgument:
      return CPS5_ERR_INVALID_ARGUMENT;
    case cps5::ErrorCode::DimensionMismatch:
      return CPS5_ERR_DIMENSION_MISMATCH;
    case cps5::ErrorCode::RankOutOfRange:
      return CPS5_ERR_RANK_OUT_OF_RANGE;
    case cps5::ErrorCode::Io:
      return CPS5_ERR_IO;
    case cps5::ErrorCode::Format:
      return CPS5_ERR_FORMAT;
    case cps5::ErrorCode::Numerical:
      return CPS5_ERR_NUMERICAL;
    case cps5::ErrorCode::Divergence:
      return CPS5_ERR_DIVERGENCE;
  }
  return CPS5_ERR_INTERNAL;
}

// Runs `body`, translating exceptions into status codes and the thread-local message.
template <typename Body>
cps5_status guarded(Body body) {
  try {
    g_last_error.clear();
    body();
    return CPS5_OK;
  } catch (const cps5::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CPS5_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CPS5_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return CPS5_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  cps5::require(p != nullptr, cps5::ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

cps5::Backend to_backend(cps5_method m) {
  switch (m) {
    case CPS5_METHOD_JD:
      return cps5::Backend::Jd;
    case CPS5_METHOD_EALS:
      return cps5::Backend::Eals;
    case CPS5_METHOD_EALS_JD:
      return cps5::Backend::EalsJd;
  }
  cps5::fail(cps5::ErrorCode::InvalidArgument, "unknown method " + std::to_string(static_cast<int>(m)));
}

cps5::DecomposeOptions to_options(const cps5_decompose_options& o) {
  cps5::DecomposeOptions d;
  d.jd.refit_d = o.refit_d != 0;
  d.jd.rnjd_max_sweeps = o.rnjd_max_sweeps;
  d.jd.gap_warning = o.gap_warning;
  d.jd.w_condition_cap = o.w_condition_cap;
  d.als.max_iters = o.max_iters;
  d.als.rel_fit_tol = o.rel_fit_tol;
  d.als.els_enabled = o.els_enabled != 0;
  d.als.seed = o.seed;
  return d;
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

std::string report_json(cps5_method method, const cps5::DecomposeResult& r, const cps5::RealVector* spectrum) {
  nlohmann::json j;
  j["method"] = cps5_method_name(method);
  j["residual"] = finite_or_null(r.residual);
  j["time_s"] = r.time_s;
  if (r.jd_report) {
    const auto& p = *r.jd_report;
    nlohmann::json s;
    s["singular_values"] = std::vector<double>(p.singular_values.data(), p.singular_values.data() + p.singular_values.size());
    nlohmann::json alphas = nlohmann::json::array();
    for (const auto& a : p.alphas) alphas.push_back({a.real(), a.imag()});
    s["alphas"] = alphas;
    s["symmetry_deviation"] = p.symmetry_deviation;
    s["p_gap"] = finite_or_null(p.p_gap);
    s["q_gap"] = finite_or_null(p.q_gap);
    s["w_dropped"] = p.w_dropped;
    s["targets_used"] = p.targets_used;
    s["rnjd_criterion"] = p.rnjd_criterion;
    s["rnjd_sweeps"] = p.rnjd_sweeps;
    s["f_imag_defect"] = p.f_imag_defect;
    s["bd_imag_residue"] = p.bd_imag_residue;
    s["d_refit_imag"] = p.d_refit_imag;
    s["stages"] = {{"svd", p.stages.svd},
                   {"alpha_normalizations", p.stages.alpha_normalizations},
                   {"detection_solves", p.stages.detection_solves},
                   {"rnjd_calls", p.stages.rnjd_calls},
                   {"rank1_recoveries", p.stages.rank1_recoveries}};
    s["warnings"] = p.warnings;
    j["jd"] = s;
  }
  if (r.als_trace) {
    const auto& t = *r.als_trace;
    j["eals"] = {{"iterations", t.iterations}, {"converged", t.converged}, {"wall_time_s", t.wall_time_s},
                 {"residuals", t.residuals},   {"rhos", t.rhos},           {"warnings", t.warnings}};
  }
  if (spectrum) j["cumulant_spectrum"] = std::vector<double>(spectrum->data(), spectrum->data() + spectrum->size());
  return j.dump(2);
}

}  // namespace

extern "C" {

const char* cps5_version(void) { return "1.0.0"; }

const char* cps5_status_name(cps5_status s) {
  switch (s) {
    case CPS5_OK:
      return "ok";
    case CPS5_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case CPS5_ERR_DIMENSION_MISMATCH:
      return "dimension mismatch";
    case CPS5_ERR_RANK_OUT_OF_RANGE:
      return "rank out of range";
    case CPS5_ERR_IO:
      return "i/o error";
    case CPS5_ERR_FORMAT:
      return "format error";
    case CPS5_ERR_NUMERICAL:
      return "numerical error";
    case CPS5_ERR_DIVERGENCE:
      return "divergence";
    case CPS5_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

const char* cps5_last_error(void) { return g_last_error.c_str(); }

cps5_status cps5_method_parse(const char* name, cps5_method* out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    const auto b = cps5::parse_backend(name);
    cps5::require(b.has_value(), cps5::ErrorCode::InvalidArgument,
                  std::string("unknown method '") + name + "' (expected jd, eals or eals_jd)");
    *out = *b == cps5::Backend::Jd ? CPS5_METHOD_JD : *b == cps5::Backend::Eals ? CPS5_METHOD_EALS : CPS5_METHOD_EALS_JD;
  });
}

const char* cps5_method_name(cps5_method m) {
  switch (m) {
    case CPS5_METHOD_JD:
      return "jd";
    case CPS5_METHOD_EALS:
      return "eals";
    case CPS5_METHOD_EALS_JD:
      return "eals_jd";
  }
  return "unknown";
}

cps5_status cps5_tensor_create(const uint64_t* dims, size_t order, const double* data, cps5_tensor** out) {
  return guarded([&] {
    need(dims, "dims");
    need(out, "out");
    *out = nullptr;
    std::vector<cps5::Index> d(dims, dims + order);
    auto h = std::make_unique<cps5_tensor>();
    h->t = cps5::ComplexTensor(d);
    if (data)
      for (std::size_t i = 0; i < h->t.data().size(); ++i) h->t.data()[i] = {data[2 * i], data[2 * i + 1]};
    *out = h.release();
  });
}

cps5_status cps5_tensor_load(const char* path, cps5_tensor** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    auto h = std::make_unique<cps5_tensor>();
    h->t = cps5::read_ct1(path);
    *out = h.release();
  });
}

cps5_status cps5_tensor_save(const cps5_tensor* t, const char* path) {
  return guarded([&] {
    need(t, "tensor");
    need(path, "path");
    cps5::write_ct1(path, t->t);
  });
}

void cps5_tensor_free(cps5_tensor* t) { delete t; }

size_t cps5_tensor_order(const cps5_tensor* t) { return t ? t->t.order() : 0; }

size_t cps5_tensor_size(const cps5_tensor* t) { return t ? static_cast<size_t>(t->t.size()) : 0; }

cps5_status cps5_tensor_dims(const cps5_tensor* t, uint64_t* dims, size_t capacity) {
  return guarded([&] {
    need(t, "tensor");
    need(dims, "dims");
    cps5::require(capacity >= t->t.order(), cps5::ErrorCode::InvalidArgument, "dims buffer too small");
    for (std::size_t i = 0; i < t->t.order(); ++i) dims[i] = static_cast<uint64_t>(t->t.dim(i));
  });
}

cps5_status cps5_tensor_copy_data(const cps5_tensor* t, double* data, size_t capacity) {
  return guarded([&] {
    need(t, "tensor");
    need(data, "data");
    const auto src = t->t.data();
    cps5::require(capacity >= 2 * src.size(), cps5::ErrorCode::InvalidArgument, "data buffer too small");
    for (std::size_t i = 0; i < src.size(); ++i) {
      data[2 * i] = src[i].real();
      data[2 * i + 1] = src[i].imag();
    }
  });
}

cps5_status cps5_tensor_partial_symmetry(const cps5_tensor* t, double* deviation) {
  return guarded([&] {
    need(t, "tensor");
    need(deviation, "deviation");
    *deviation = cps5::check_partial_symmetry(t->t);
  });
}

cps5_status cps5_synthesize(const double* A, const double* B, const double* D, size_t I, size_t J, size_t K, size_t R,
                            cps5_tensor** out) {
  return guarded([&] {
    need(A, "A");
    need(B, "B");
    need(D, "D");
    need(out, "out");
    *out = nullptr;
    cps5::require(I > 0 && J > 0 && K > 0 && R > 0, cps5::ErrorCode::InvalidArgument, "sizes must be positive");
    const auto Ii = static_cast<cps5::Index>(I), Ji = static_cast<cps5::Index>(J), Ki = static_cast<cps5::Index>(K),
               Ri = static_cast<cps5::Index>(R);
    cps5::FactorSet f;
    f.A = Eigen::Map<const cps5::ComplexMatrix>(reinterpret_cast<const cps5::cplx*>(A), Ii, Ri);
    f.B = Eigen::Map<const cps5::ComplexMatrix>(reinterpret_cast<const cps5::cplx*>(B), Ji, Ri);
    f.D = Eigen::Map<const cps5::RealMatrix>(D, Ki, Ri);
    auto h = std::make_unique<cps5_tensor>();
    h->t = cps5::synthesize_cp5(f);
    *out = h.release();
  });
}

void cps5_decompose_options_init(cps5_decompose_options* o) {
  if (!o) return;
  *o = cps5_decompose_options{};
  o->rank = 1;
  o->method = CPS5_METHOD_JD;
  o->refit_d = 1;
  o->rnjd_max_sweeps = 200;
  o->gap_warning = 10.0;
  o->w_condition_cap = 1e10;
  o->max_iters = 1000;
  o->rel_fit_tol = 1e-8;
  o->els_enabled = 1;
  o->seed = 0;
}

cps5_status cps5_decompose(const cps5_tensor* t, const cps5_decompose_options* opts, cps5_decomposition** out) {
  return guarded([&] {
    need(t, "tensor");
    need(opts, "options");
    need(out, "out");
    *out = nullptr;
    auto h = std::make_unique<cps5_decomposition>();
    h->result = cps5::decompose(t->t, static_cast<cps5::Index>(opts->rank), to_backend(opts->method), to_options(*opts));
    h->report = report_json(opts->method, h->result, nullptr);
    *out = h.release();
  });
}

cps5_status cps5_ica_cpa(const cps5_tensor* x3, const cps5_decompose_options* opts, cps5_decomposition** out) {
  return guarded([&] {
    need(x3, "tensor");
    need(opts, "options");
    need(out, "out");
    *out = nullptr;
    cps5::IcaCpaOptions io;
    io.backend = to_options(*opts);
    auto res = cps5::ica_cpa(x3->t, static_cast<cps5::Index>(opts->rank), to_backend(opts->method), io);
    auto h = std::make_unique<cps5_decomposition>();
    h->result = std::move(res.backend);
    h->sources = std::move(res.S);
    h->report = report_json(opts->method, h->result, &res.spectrum);
    *out = h.release();
  });
}

void cps5_decomposition_free(cps5_decomposition* d) { delete d; }

cps5_status cps5_decomposition_factor(const cps5_decomposition* d, char which, cps5_tensor** out) {
  return guarded([&] {
    need(d, "decomposition");
    need(out, "out");
    *out = nullptr;
    auto h = std::make_unique<cps5_tensor>();
    const auto& f = d->result.factors;
    switch (which) {
      case 'A':
        h->t = cps5::matrix_to_tensor(f.A);
        break;
      case 'B':
        h->t = cps5::matrix_to_tensor(f.B);
        break;
      case 'D':
        h->t = cps5::matrix_to_tensor(f.D);
        break;
      case 'S':
        cps5::require(d->sources.has_value(), cps5::ErrorCode::InvalidArgument, "sources exist only for ICA-CPA results");
        h->t = cps5::matrix_to_tensor(*d->sources);
        break;
      default:
        cps5::fail(cps5::ErrorCode::InvalidArgument, std::string("unknown factor '") + which + "'");
    }
    *out = h.release();
  });
}

double cps5_decomposition_residual(const cps5_decomposition* d) { return d ? d->result.residual : NAN; }

double cps5_decomposition_time(const cps5_decomposition* d) { return d ? d->result.time_s : NAN; }

const char* cps5_decomposition_report_json(const cps5_decomposition* d) { return d ? d->report.c_str() : ""; }

void cps5_sim_options_init(cps5_sim_options* o, int which) {
  if (!o) return;
  *o = cps5_sim_options{};
  o->which = which;
  o->trials = 200;
  o->jobs = 1;
  o->collinear = 1;
  o->samples = 1000;
  o->max_iters = 1000;
  o->rel_fit_tol = 1e-8;
}

cps5_status cps5_run_simulation(const cps5_sim_options* o, cps5_sim_result** out) {
  return guarded([&] {
    need(o, "options");
    need(out, "out");
    *out = nullptr;
    cps5::require(o->which == 1 || o->which == 2, cps5::ErrorCode::InvalidArgument, "simulation must be 1 or 2");
    cps5::require(o->trials >= 0, cps5::ErrorCode::InvalidArgument, "trials must be non-negative");
    cps5::require(o->jobs >= 1, cps5::ErrorCode::InvalidArgument, "jobs must be at least 1");
    cps5::require(o->snr_db != nullptr || o->snr_count == 0, cps5::ErrorCode::InvalidArgument, "snr_db is NULL");
    cps5::require(o->methods != nullptr || o->method_count == 0, cps5::ErrorCode::InvalidArgument, "methods is NULL");
    cps5::RunOptions run;
    if (o->methods) {
      run.methods.clear();
      for (std::size_t i = 0; i < o->method_count; ++i) run.methods.push_back(to_backend(o->methods[i]));
    }
    run.jobs = o->jobs;
    run.backend.als.max_iters = o->max_iters;
    run.backend.als.rel_fit_tol = o->rel_fit_tol;
    auto h = std::make_unique<cps5_sim_result>();
    std::string title;
    if (o->which == 1) {
      cps5::Sim1Config cfg;
      if (o->snr_db) cfg.snr_db.assign(o->snr_db, o->snr_db + o->snr_count);
      cfg.trials = o->trials;
      cfg.seed = o->seed;
      cfg.collinear = o->collinear != 0;
      h->rows = cps5::run_sim1(cfg, run);
      title = "sim1 (collinear factors): backend time per snr";
    } else {
      cps5::Sim2Config cfg;
      if (o->snr_db) cfg.snr_db.assign(o->snr_db, o->snr_db + o->snr_count);
      cfg.trials = o->trials;
      cfg.seed = o->seed;
      cfg.K = static_cast<cps5::Index>(o->samples);
      h->rows = cps5::run_sim2(cfg, run);
      title = "sim2 (ICA-CPA): backend time per snr";
    }
    for (const auto& r : h->rows) h->failed += r.status != "ok";
    h->csv = cps5::results_csv(h->rows);
    h->summary = cps5::summary_json(h->rows);
    h->table = cps5::timing_table(h->rows, title);
    *out = h.release();
  });
}

void cps5_sim_result_free(cps5_sim_result* r) { delete r; }

size_t cps5_sim_result_rows(const cps5_sim_result* r) { return r ? r->rows.size() : 0; }

size_t cps5_sim_result_failed(const cps5_sim_result* r) { return r ? r->failed : 0; }

const char* cps5_sim_result_row_detail(const cps5_sim_result* r, size_t row) {
  if (!r || row >= r->rows.size() || r->rows[row].status == "ok") return "";
  return r->rows[row].detail.c_str();
}

const char* cps5_sim_result_csv(const cps5_sim_result* r) { return r ? r->csv.c_str() : ""; }

const char* cps5_sim_result_summary_json(const cps5_sim_result* r) { return r ? r->summary.c_str() : ""; }

const char* cps5_sim_result_table(const cps5_sim_result* r) { return r ? r->table.c_str() : ""; }

cps5_status cps5_selftest(const char* inject, cps5_selftest_result** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    auto h = std::make_unique<cps5_selftest_result>();
    h->checks = cps5::run_selftest(inject ? inject : "");
    *out = h.release();
  });
}

void cps5_selftest_free(cps5_selftest_result* r) { delete r; }

size_t cps5_selftest_count(const cps5_selftest_result* r) { return r ? r->checks.size() : 0; }

const char* cps5_selftest_name(const cps5_selftest_result* r, size_t i) {
  return r && i < r->checks.size() ? r->checks[i].name.c_str() : "";
}

int cps5_selftest_passed(const cps5_selftest_result* r, size_t i) {
  return r && i < r->checks.size() && r->checks[i].passed ? 1 : 0;
}

const char* cps5_selftest_detail(const cps5_selftest_result* r, size_t i) {
  return r && i < r->checks.size() ? r->checks[i].detail.c_str() : "";
}

double cps5_selftest_seconds(const cps5_selftest_result* r, size_t i) {
  return r && i < r->checks.size() ? r->checks[i].seconds : NAN;
}

}  // extern "C"
