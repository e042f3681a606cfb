#include "cltb/bounds.hpp"

#include <cmath>
#include <limits>

#include "cltb/error.hpp"
#include "cltb/text.hpp"

namespace cltb {

const char* to_string(Theorem t) noexcept {
  switch (t) {
    case Theorem::t1: return "T1";
    case Theorem::t2: return "T2";
    case Theorem::t3: return "T3";
    case Theorem::t4: return "T4";
    case Theorem::t5: return "T5";
    case Theorem::abstract: return "abstract";
  }
  return "unknown";
}

Theorem parse_theorem(std::string_view text) {
  if (text == "T1") return Theorem::t1;
  if (text == "T2") return Theorem::t2;
  if (text == "T3") return Theorem::t3;
  if (text == "T4") return Theorem::t4;
  if (text == "T5") return Theorem::t5;
  if (text == "abstract") return Theorem::abstract;
  fail(ErrorCode::config, "unknown theorem id '" + std::string(text) +
                              "' (expected T1..T5 or abstract)");
}

namespace {

void check_dims(Dims d) {
  require(d.k >= 1, ErrorCode::invalid_input, "bounds need k >= 1");
  require(d.n >= d.k, ErrorCode::invalid_input, "bounds need n >= k");
}

// EX^4 >= (EX^2)^2 = 1 and E|X|^3 >= (EX^2)^{3/2} = 1 for a standardized law.
void check_moments(double fourth, double abs3) {
  constexpr double slack = 1e-12;
  require(std::isfinite(fourth) && fourth >= 1.0 - slack, ErrorCode::invalid_moments,
          "fourth moment " + fmt17(fourth) + " is below 1");
  require(std::isfinite(abs3) && abs3 >= 1.0 - slack, ErrorCode::invalid_moments,
          "third absolute moment " + fmt17(abs3) + " is below 1");
}

double excess_kurtosis_root(double fourth) { return std::sqrt(std::max(0.0, fourth - 1.0)); }

void check_seminorms(const Seminorms& g) {
  require(g.g1 >= 0.0 && g.g2 >= 0.0 && g.grad_sup >= 0.0, ErrorCode::invalid_input,
          "seminorms must be non-negative");
}

BoundReport independent_shape(Theorem theorem, Dims dims, const NormSummary& norms,
                              const MomentSummary& m, const Seminorms& g, double fourth,
                              double abs3) {
  check_dims(dims);
  check_moments(fourth, abs3);
  check_seminorms(g);
  const double k = static_cast<double>(dims.k);
  BoundReport r;
  r.theorem = theorem;
  r.term_fourth = std::sqrt(k) / 2.0 * g.grad_sup * excess_kurtosis_root(fourth) * norms.sum_l4_sq;
  r.term_third = 4.0 / 3.0 * k * k * g.g2 * abs3 * norms.sum_l3_cubed;
  r.total = r.term_fourth + r.term_third;
  r.dims = dims;
  r.norms = norms;
  r.seminorms = g;
  r.moments = m;
  return r;
}

double checked_lambda(const GramData& gram) {
  for (std::size_t i = 0; i < gram.c.rows(); ++i)
    require(std::abs(gram.c(i, i) - 1.0) <= kValidationTol, ErrorCode::invalid_input,
            "direction " + std::to_string(i) + " is not a unit vector");
  require(gram.lambda_max >= 1.0 - kValidationTol, ErrorCode::invalid_input,
          "Gram lambda_max below 1 is impossible for unit rows");
  return gram.lambda_max;
}

double hessian_norm(const Seminorms& g, std::size_t k, bool& fallback) {
  if (g.hess_op_sup) return *g.hess_op_sup;
  fallback = true;
  return static_cast<double>(k) * g.g2;
}

void check_exchangeable(const MomentSummary& m) {
  require(m.mixed_4.has_value() && m.mixed_var.has_value(), ErrorCode::invalid_moments,
          "exchangeable bounds need the mixed moments E X1X2X3X4 and E(X1^2-1)(X2^2-1)");
}

}  // namespace

BoundReport bound_iid(Dims dims, const NormSummary& norms, const MomentSummary& m,
                      const Seminorms& g) {
  return independent_shape(Theorem::t1, dims, norms, m, g, m.fourth, m.abs3);
}

BoundReport bound_indep(Dims dims, const NormSummary& norms, const MomentSummary& m,
                        const Seminorms& g) {
  return independent_shape(Theorem::t2, dims, norms, m, g, m.fourth_max, m.abs3_max);
}

BoundReport bound_linind(Dims dims, const NormSummary& norms, const GramData& gram,
                         const MomentSummary& m, const Seminorms& f) {
  check_dims(dims);
  check_moments(m.fourth_max, m.abs3_max);
  check_seminorms(f);
  const double lambda = checked_lambda(gram);
  const double k = static_cast<double>(dims.k);
  BoundReport r;
  r.theorem = Theorem::t3;
  const double hess = hessian_norm(f, dims.k, r.hessian_fallback);
  r.term_fourth = 0.5 * std::sqrt(lambda * k) * f.grad_sup * excess_kurtosis_root(m.fourth_max) *
                  norms.sum_l4_sq;
  r.term_third = 4.0 / 3.0 * lambda * k * k * hess * m.abs3_max * norms.sum_l3_cubed;
  r.total = r.term_fourth + r.term_third;
  r.lambda = lambda;
  r.dims = dims;
  r.norms = norms;
  r.seminorms = f;
  r.moments = m;
  return r;
}

BoundReport bound_exch(Dims dims, const NormSummary& norms, const MomentSummary& m,
                       const Seminorms& g, const ExchangeableConstants& constants) {
  check_dims(dims);
  check_exchangeable(m);
  check_moments(m.fourth, m.abs3);
  check_seminorms(g);
  const double k = static_cast<double>(dims.k);
  BoundReport r;
  r.theorem = Theorem::t4;
  r.term_mixed = constants.a * k * g.g1 *
                 (std::sqrt(std::abs(*m.mixed_4)) + std::sqrt(std::abs(*m.mixed_var)));
  r.term_fourth = constants.b * g.g1 * std::sqrt(m.fourth) * norms.sum_l4_all_sq;
  r.term_third = constants.c * k * k * g.g2 * m.abs3 * norms.sum_l3_cubed;
  r.total = r.term_fourth + r.term_third + r.term_mixed;
  r.dims = dims;
  r.norms = norms;
  r.seminorms = g;
  r.moments = m;
  r.constants = constants;
  return r;
}

BoundReport bound_exch_linind(Dims dims, const NormSummary& norms, const GramData& gram,
                              const MomentSummary& m, const Seminorms& g,
                              const ExchangeableConstants& constants) {
  check_dims(dims);
  check_exchangeable(m);
  check_moments(m.fourth, m.abs3);
  check_seminorms(g);
  const double lambda = checked_lambda(gram);
  const double k = static_cast<double>(dims.k);
  const double root = std::sqrt(lambda);
  BoundReport r;
  r.theorem = Theorem::t5;
  const double hess = hessian_norm(g, dims.k, r.hessian_fallback);
  r.term_mixed = constants.a * k * root * g.grad_sup *
                 (std::sqrt(std::abs(*m.mixed_4)) + std::sqrt(std::abs(*m.mixed_var)));
  r.term_fourth = constants.b * root * g.grad_sup * std::sqrt(m.fourth) * norms.sum_l4_all_sq;
  r.term_third = constants.c * k * k * lambda * hess * m.abs3 * norms.sum_l3_cubed;
  r.total = r.term_fourth + r.term_third + r.term_mixed;
  r.lambda = lambda;
  r.dims = dims;
  r.norms = norms;
  r.seminorms = g;
  r.moments = m;
  r.constants = constants;
  return r;
}

BoundReport bound_abstract(double lambda_stein, const EijStats& eij, double sum_third,
                           const Seminorms& g, Dims dims) {
  require(lambda_stein > 0.0 && std::isfinite(lambda_stein), ErrorCode::invalid_input,
          "Stein lambda must be positive");
  require(dims.k >= 1, ErrorCode::invalid_input, "bounds need k >= 1");
  require(eij.sum_abs || eij.sqrt_sum_sq, ErrorCode::invalid_input,
          "abstract bound needs at least one E_ij statistic");
  require(sum_third >= 0.0, ErrorCode::invalid_input, "third-moment statistic must be >= 0");
  check_seminorms(g);
  const double k = static_cast<double>(dims.k);
  const double inf = std::numeric_limits<double>::infinity();
  const double branch_abs = eij.sum_abs ? g.g1 / (2.0 * lambda_stein) * *eij.sum_abs : inf;
  const double branch_sq =
      eij.sqrt_sum_sq ? std::sqrt(k) * g.grad_sup / (2.0 * lambda_stein) * *eij.sqrt_sum_sq : inf;
  BoundReport r;
  r.theorem = Theorem::abstract;
  r.min_branch = branch_abs < branch_sq ? "abs" : "sq";
  r.term_fourth = std::min(branch_abs, branch_sq);
  r.term_third = k * k * g.g2 / (6.0 * lambda_stein) * sum_third;
  r.total = r.term_fourth + r.term_third;
  r.lambda = lambda_stein;
  r.dims = dims;
  r.seminorms = g;
  return r;
}

std::string bound_csv_header() {
  return "theorem,n,k,lambda,term_fourth,term_third,term_mixed,total,min_branch";
}

std::string to_csv_row(const BoundReport& r) {
  return std::string(to_string(r.theorem)) + "," + std::to_string(r.dims.n) + "," +
         std::to_string(r.dims.k) + "," + fmt17(r.lambda) + "," + fmt17(r.term_fourth) + "," +
         fmt17(r.term_third) + "," + fmt17(r.term_mixed) + "," + fmt17(r.total) + "," +
         r.min_branch;
}

}  // namespace cltb
