#include "cltb/cltb.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <optional>
#include <string>

#include "cltb/bounds.hpp"
#include "cltb/directions.hpp"
#include "cltb/error.hpp"
#include "cltb/experiment.hpp"

struct cltb_directions {
  cltb::DirectionSet ds;
};

struct cltb_experiment {
  cltb::Experiment ex;
};

namespace {

thread_local std::string last_error;

template <class F>
cltb_status guard(F&& body) {
  try {
    body();
    last_error.clear();
    return CLTB_OK;
  } catch (const cltb::Error& e) {
    last_error = e.what();
    return static_cast<cltb_status>(static_cast<int>(e.code()));
  } catch (const std::exception& e) {
    last_error = std::string("internal error: ") + e.what();
    return CLTB_INTERNAL;
  } catch (...) {
    last_error = "internal error";
    return CLTB_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) cltb::fail(cltb::ErrorCode::invalid_input, std::string(what) + " is null");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* cltb_last_error(void) { return last_error.c_str(); }

void cltb_string_free(char* s) { std::free(s); }

cltb_status cltb_directions_hypercube(size_t n, size_t k, int centered, cltb_directions** out) {
  return guard([&] {
    need(out, "out");
    *out = new cltb_directions{cltb::hypercube_directions(n, k, centered != 0)};
  });
}

cltb_status cltb_directions_random(size_t n, size_t k, uint64_t seed, int centered,
                                   cltb_directions** out) {
  return guard([&] {
    need(out, "out");
    *out = new cltb_directions{cltb::random_orthonormal(n, k, seed, centered != 0)};
  });
}

cltb_status cltb_directions_from_rows(const double* rows, size_t k, size_t n, const char* kind,
                                      cltb_directions** out) {
  return guard([&] {
    need(out, "out");
    need(rows, "rows");
    need(kind, "kind");
    cltb::Matrix m(k, n);
    for (size_t i = 0; i < k; ++i)
      for (size_t r = 0; r < n; ++r) m(i, r) = rows[i * n + r];
    *out = new cltb_directions{cltb::DirectionSet(std::move(m), cltb::parse_direction_kind(kind))};
  });
}

void cltb_directions_free(cltb_directions* ds) { delete ds; }

size_t cltb_directions_n(const cltb_directions* ds) { return ds ? ds->ds.n() : 0; }
size_t cltb_directions_k(const cltb_directions* ds) { return ds ? ds->ds.k() : 0; }

cltb_status cltb_directions_norms(const cltb_directions* ds, cltb_norms* out) {
  return guard([&] {
    need(ds, "directions");
    need(out, "out");
    const auto s = cltb::norm_summary(ds->ds);
    *out = {s.sum_l4_sq, s.sum_l3_cubed, s.sum_l4_all_sq};
  });
}

cltb_status cltb_directions_lambda_max(const cltb_directions* ds, double* out) {
  return guard([&] {
    need(ds, "directions");
    need(out, "out");
    *out = cltb::gram(ds->ds).lambda_max;
  });
}

cltb_status cltb_directions_to_text(const cltb_directions* ds, char** out) {
  return guard([&] {
    need(ds, "directions");
    need(out, "out");
    *out = dup(cltb::to_text(ds->ds));
  });
}

cltb_constants cltb_default_constants(void) {
  const cltb::ExchangeableConstants c;
  return {c.a, c.b, c.c};
}

cltb_status cltb_bound_evaluate(const char* theorem, const cltb_directions* ds,
                                const cltb_moments* m, const cltb_seminorms* g,
                                const cltb_constants* constants, cltb_bound* out) {
  return guard([&] {
    need(theorem, "theorem");
    need(ds, "directions");
    need(m, "moments");
    need(g, "seminorms");
    need(out, "out");
    const cltb::Theorem t = cltb::parse_theorem(theorem);
    cltb::MomentSummary ms;
    ms.abs3_max = m->abs3_max;
    ms.fourth_max = m->fourth_max;
    ms.abs3 = m->abs3;
    ms.fourth = m->fourth;
    if (m->has_mixed) {
      ms.mixed_4 = m->mixed_4;
      ms.mixed_var = m->mixed_var;
    }
    cltb::Seminorms sn;
    sn.g1 = g->g1;
    sn.g2 = g->g2;
    sn.grad_sup = g->grad_sup;
    if (g->has_hess_op) sn.hess_op_sup = g->hess_op_sup;
    cltb::ExchangeableConstants c;
    if (constants) c = {constants->a, constants->b, constants->c};
    const cltb::Dims dims{ds->ds.n(), ds->ds.k()};
    const auto norms = cltb::norm_summary(ds->ds);
    cltb::BoundReport r;
    switch (t) {
      case cltb::Theorem::t1: r = cltb::bound_iid(dims, norms, ms, sn); break;
      case cltb::Theorem::t2: r = cltb::bound_indep(dims, norms, ms, sn); break;
      case cltb::Theorem::t3: r = cltb::bound_linind(dims, norms, cltb::gram(ds->ds), ms, sn); break;
      case cltb::Theorem::t4: r = cltb::bound_exch(dims, norms, ms, sn, c); break;
      case cltb::Theorem::t5:
        r = cltb::bound_exch_linind(dims, norms, cltb::gram(ds->ds), ms, sn, c);
        break;
      case cltb::Theorem::abstract:
        cltb::fail(cltb::ErrorCode::unsupported,
                   "the abstract bound needs pair statistics; use an experiment");
    }
    *out = {r.term_fourth, r.term_third, r.term_mixed, r.total, r.lambda, r.hessian_fallback ? 1 : 0};
  });
}

cltb_status cltb_experiment_create(const char* json, const char* base_dir,
                                   const cltb_overrides* overrides, cltb_experiment** out) {
  return guard([&] {
    need(json, "json");
    need(out, "out");
    cltb::Overrides o;
    if (overrides) {
      if (overrides->has_seed) o.seed = overrides->seed;
      if (overrides->has_samples) o.samples = overrides->samples;
      if (overrides->theorem) o.theorem = std::string(overrides->theorem);
      if (overrides->has_threads) o.threads = overrides->threads;
      if (overrides->output) o.output = std::string(overrides->output);
    }
    *out = new cltb_experiment{cltb::Experiment::from_json(json, base_dir ? base_dir : ".", o)};
  });
}

void cltb_experiment_free(cltb_experiment* ex) { delete ex; }

cltb_status cltb_experiment_set_shrink(cltb_experiment* ex, double factor) {
  return guard([&] {
    need(ex, "experiment");
    ex->ex.set_shrink(factor);
  });
}

cltb_status cltb_experiment_set_lambda_scale(cltb_experiment* ex, double scale) {
  return guard([&] {
    need(ex, "experiment");
    ex->ex.set_lambda_scale(scale);
  });
}

const char* cltb_experiment_output(const cltb_experiment* ex) {
  return ex && ex->ex.output() ? ex->ex.output()->c_str() : nullptr;
}

const char* cltb_experiment_digest(const cltb_experiment* ex) {
  return ex ? ex->ex.digest().c_str() : "";
}

cltb_status cltb_experiment_warnings(const cltb_experiment* ex, char** out) {
  return guard([&] {
    need(ex, "experiment");
    need(out, "out");
    std::string all;
    for (const auto& w : ex->ex.warnings()) all += w + "\n";
    *out = dup(all);
  });
}

cltb_status cltb_experiment_bound_csv(const cltb_experiment* ex, char** csv) {
  return guard([&] {
    need(ex, "experiment");
    need(csv, "csv");
    *csv = dup(ex->ex.bound_csv());
  });
}

cltb_status cltb_experiment_verify(const cltb_experiment* ex, char** csv, int* pass) {
  return guard([&] {
    need(ex, "experiment");
    need(csv, "csv");
    need(pass, "pass");
    const auto rows = ex->ex.verify();
    bool ok = true;
    for (const auto& r : rows) ok = ok && r.pass;
    *csv = dup(ex->ex.verify_csv(rows));
    *pass = ok ? 1 : 0;
  });
}

cltb_status cltb_experiment_scan(const cltb_experiment* ex, const char* axis,
                                 const size_t* values, size_t count, char** csv, int* pass) {
  return guard([&] {
    need(ex, "experiment");
    need(axis, "axis");
    need(csv, "csv");
    need(pass, "pass");
    if (count) need(values, "values");
    const auto result =
        ex->ex.scan(cltb::parse_scan_axis(axis), std::vector<std::size_t>(values, values + count));
    *csv = dup(result.csv);
    *pass = result.pass ? 1 : 0;
  });
}

cltb_status cltb_experiment_check(const cltb_experiment* ex, char** report, int* pass) {
  return guard([&] {
    need(ex, "experiment");
    need(report, "report");
    need(pass, "pass");
    const auto r = ex->ex.check();
    *report = dup(r.to_text());
    *pass = r.pass ? 1 : 0;
  });
}

cltb_status cltb_experiment_moments_csv(const cltb_experiment* ex, char** csv) {
  return guard([&] {
    need(ex, "experiment");
    need(csv, "csv");
    *csv = dup(ex->ex.moments_csv());
  });
}

}  // extern "C"
