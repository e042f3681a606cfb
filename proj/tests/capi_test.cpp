// Exercises the shared library purely through its C header.
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>

#include "cltb/cltb.h"

namespace {

int failures = 0;

void expect(bool ok, const char* what) {
  if (!ok) {
    ++failures;
    std::printf("FAIL: %s (%s)\n", what, cltb_last_error());
  }
}

}  // namespace

int main() {
  cltb_directions* ds = nullptr;
  expect(cltb_directions_hypercube(64, 2, 0, &ds) == CLTB_OK, "hypercube");
  expect(cltb_directions_n(ds) == 64 && cltb_directions_k(ds) == 2, "dims");
  cltb_norms norms{};
  expect(cltb_directions_norms(ds, &norms) == CLTB_OK, "norms");
  expect(std::abs(norms.sum_l4_sq - 0.25) < 1e-15, "hypercube k/sqrt(n)");
  double lambda = 0;
  expect(cltb_directions_lambda_max(ds, &lambda) == CLTB_OK && std::abs(lambda - 1) < 1e-12,
         "lambda");

  cltb_moments m{1, 1, 1, 1, 0, 0, 0};
  cltb_seminorms g{1, 1, 1, 1, 1};
  cltb_bound b{};
  expect(cltb_bound_evaluate("T1", ds, &m, &g, nullptr, &b) == CLTB_OK, "T1");
  expect(b.term_fourth == 0 && std::abs(b.total - 4.0 / 3.0 * 4 * 0.25) < 1e-14, "T1 value");
  expect(cltb_bound_evaluate("T4", ds, &m, &g, nullptr, &b) == CLTB_INVALID_MOMENTS,
         "T4 without mixed moments");
  expect(cltb_bound_evaluate("T9", ds, &m, &g, nullptr, &b) == CLTB_CONFIG, "unknown theorem");
  expect(std::strstr(cltb_last_error(), "T9") != nullptr, "error message names the id");

  char* text = nullptr;
  expect(cltb_directions_to_text(ds, &text) == CLTB_OK, "to_text");
  expect(text && std::strncmp(text, "# n=64 k=2", 10) == 0, "text header");
  cltb_string_free(text);
  cltb_directions_free(ds);

  cltb_directions* bad = nullptr;
  expect(cltb_directions_hypercube(12, 2, 0, &bad) == CLTB_UNSUPPORTED_DIMENSION, "n=12");
  expect(bad == nullptr, "no handle on failure");
  const double rows[] = {1, 0, 1, 0};
  expect(cltb_directions_from_rows(rows, 2, 2, "linearly-independent", &bad) ==
             CLTB_LINEAR_DEPENDENCE,
         "dependent rows");
  expect(cltb_directions_from_rows(nullptr, 2, 2, "orthonormal", &bad) == CLTB_INVALID_INPUT,
         "null rows");

  const char* cfg = R"({"model": {"kind": "rademacher"},
    "directions": {"kind": "hypercube", "n": 64, "k": 2},
    "test_function": {"kind": "cosine", "norm": 1.0},
    "theorem": "T2", "samples": 10000, "seed": 2})";
  cltb_experiment* ex = nullptr;
  expect(cltb_experiment_create(cfg, ".", nullptr, &ex) == CLTB_OK, "experiment");
  expect(std::strlen(cltb_experiment_digest(ex)) == 16, "digest");
  expect(cltb_experiment_output(ex) == nullptr, "no output");
  char* csv = nullptr;
  int pass = 0;
  expect(cltb_experiment_verify(ex, &csv, &pass) == CLTB_OK && pass == 1, "verify");
  expect(csv && std::strncmp(csv, "# schema=1\n", 11) == 0, "schema line");
  cltb_string_free(csv);
  const size_t values[] = {16, 64};
  expect(cltb_experiment_scan(ex, "n", values, 2, &csv, &pass) == CLTB_OK && pass, "scan");
  cltb_string_free(csv);
  expect(cltb_experiment_scan(ex, "n", values, 0, &csv, &pass) == CLTB_CONFIG, "empty scan");
  expect(cltb_experiment_check(ex, &csv, &pass) == CLTB_OK && pass, "check");
  cltb_string_free(csv);
  expect(cltb_experiment_set_lambda_scale(ex, 1.01) == CLTB_OK, "tamper");
  expect(cltb_experiment_check(ex, &csv, &pass) == CLTB_OK && !pass, "tampered check");
  cltb_string_free(csv);
  expect(cltb_experiment_moments_csv(ex, &csv) == CLTB_OK, "moments");
  cltb_string_free(csv);
  cltb_experiment_free(ex);

  cltb_overrides o{};
  o.theorem = "T4";
  expect(cltb_experiment_create(cfg, ".", &o, &ex) == CLTB_CONFIG, "inapplicable theorem");
  expect(cltb_experiment_create("{", ".", nullptr, &ex) == CLTB_CONFIG, "bad json");

  if (failures) return 1;
  std::printf("capi: all checks passed\n");
  return 0;
}
