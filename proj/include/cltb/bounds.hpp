#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "cltb/directions.hpp"
#include "cltb/sources.hpp"
#include "cltb/testfuncs.hpp"

namespace cltb {

enum class Theorem { t1, t2, t3, t4, t5, abstract };

const char* to_string(Theorem t) noexcept;
Theorem parse_theorem(std::string_view text);  // throws config

struct Dims {
  std::size_t n = 0;
  std::size_t k = 0;
};

/// Absolute constants of the exchangeable bounds. The defaults come from
/// running the transposition-pair argument with every inequality made
/// explicit (valid for n >= 4):
///   first term  a = 1
///   second term b = 3 + sqrt 14
///   third term  c = 16 / 3
/// See README.md ("Exchangeable constants") for the derivation.
struct ExchangeableConstants {
  double a = 1.0;
  double b = 6.741657386773941;  // 3 + sqrt(14)
  double c = 16.0 / 3.0;
};

struct BoundReport {
  Theorem theorem = Theorem::t1;
  double term_fourth = 0.0;  // sqrt(E X^4 - 1) term, or the b-term for T4/T5
  double term_third = 0.0;   // E|X|^3 term
  double term_mixed = 0.0;   // a-term of T4/T5; zero otherwise
  double total = 0.0;
  double lambda = 1.0;       // Gram lambda_max, or the Stein lambda for `abstract`
  std::string min_branch;    // `abstract` only: "abs" or "sq"
  bool hessian_fallback = false;  // k |g|_2 substituted for the Hessian operator norm

  // Inputs echoed for reporting.
  Dims dims;
  NormSummary norms;
  Seminorms seminorms;
  MomentSummary moments;
  std::optional<ExchangeableConstants> constants;
};

BoundReport bound_iid(Dims dims, const NormSummary& norms, const MomentSummary& m,
                      const Seminorms& g);
BoundReport bound_indep(Dims dims, const NormSummary& norms, const MomentSummary& m,
                        const Seminorms& g);
BoundReport bound_linind(Dims dims, const NormSummary& norms, const GramData& gram,
                         const MomentSummary& m, const Seminorms& f);
BoundReport bound_exch(Dims dims, const NormSummary& norms, const MomentSummary& m,
                       const Seminorms& g, const ExchangeableConstants& constants = {});
BoundReport bound_exch_linind(Dims dims, const NormSummary& norms, const GramData& gram,
                              const MomentSummary& m, const Seminorms& g,
                              const ExchangeableConstants& constants = {});

/// Statistics of the error terms E_ij. Either may be absent (infinite), in
/// which case that branch of the minimum is never taken.
struct EijStats {
  std::optional<double> sum_abs;      // sum_ij E|E_ij|
  std::optional<double> sqrt_sum_sq;  // E (sum_ij E_ij^2)^{1/2}
};

/// The abstract exchangeable-pair bound
///   min{ |g|_1/(2 lambda) sum E|E_ij|, sqrt(k) |||grad g|||/(2 lambda) E(sum E_ij^2)^{1/2} }
///     + k^2 |g|_2/(6 lambda) sum_i E|X_i' - X_i|^3.
BoundReport bound_abstract(double lambda_stein, const EijStats& eij, double sum_third,
                           const Seminorms& g, Dims dims);

/// BoundReport as one CSV row:
/// theorem,n,k,lambda,term_fourth,term_third,term_mixed,total,min_branch
std::string bound_csv_header();
std::string to_csv_row(const BoundReport& r);

}  // namespace cltb
