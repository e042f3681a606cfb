#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cltb/bounds.hpp"
#include "cltb/directions.hpp"
#include "cltb/linalg.hpp"
#include "cltb/sources.hpp"
#include "cltb/stats.hpp"
#include "cltb/testfuncs.hpp"

namespace cltb {

/// resampling: replace one uniformly chosen coordinate by an independent copy.
/// transposition: swap two uniformly chosen distinct coordinates.
enum class PairKind { resampling, transposition };

const char* to_string(PairKind kind) noexcept;

/// 1/n for resampling, 2/(n-1) for transposition.
double stein_lambda(PairKind kind, std::size_t n);

/// Resampling for independent models, transposition for exchangeable ones.
PairKind natural_pair_kind(const Model& model);

/// S^i = <theta_i, x>.
std::vector<double> project(std::span<const double> x, const DirectionSet& ds);
void project_into(std::span<const double> x, const DirectionSet& ds, std::span<double> out);

struct ResampleDraw {
  std::vector<double> s, s_prime;
  std::size_t index = 0;     // I
  double replacement = 0.0;  // X*
};

struct TransposeDraw {
  std::vector<double> s, s_prime;
  std::size_t first = 0, second = 0;  // I != J
};

/// Throws wrong_pair_kind for exchangeable models.
ResampleDraw resample_pair(std::span<const double> x, const DirectionSet& ds, const Model& model,
                           std::uint64_t seed);

/// Needs an exchangeable (or i.i.d.) model and centered directions.
TransposeDraw transpose_pair(std::span<const double> x, const DirectionSet& ds,
                             const Model& model, std::uint64_t seed);

/// E[S' - S | x], computed exactly: by enumeration over I and X* when the
/// replacement law is finitely supported, from the declared mean E X* = 0
/// otherwise, and by enumeration over ordered pairs (I, J) for
/// transposition. Does not require centered directions, so it can expose a
/// failing linearity condition.
std::vector<double> conditional_mean_delta(std::span<const double> x, const DirectionSet& ds,
                                           const Model& model, PairKind kind);

/// E[(S'^i - S^i)(S'^j - S^j) | x] by the same enumeration.
Matrix conditional_second_moment(std::span<const double> x, const DirectionSet& ds,
                                 const Model& model, PairKind kind);

/// max over `trials` sampled states and coordinates of
/// |E[S'^i - S^i | x] + lambda S^i|, with lambda = stein_lambda * lambda_scale.
double conditional_linearity_check(const DirectionSet& ds, const Model& model, PairKind kind,
                                   std::size_t trials, std::uint64_t seed,
                                   double lambda_scale = 1.0);

/// Closed-form E_ij(x), i.e. E[dS^i dS^j | x] - 2 lambda delta_ij.
///   resampling:    (1/n) sum_r theta_i^r theta_j^r (x_r^2 - 1)
///   transposition: 2/(n(n-1)) [ sum_r (x_r^2 - 1) + n sum_r (theta_i^r)^2 (x_r^2 - 1)
///                               - 2 (sum_r (theta_i^r)^2 x_r)(sum_s x_s) + 2 (S^i)^2 ]  (i = j)
///                  2/(n(n-1)) [ n sum_r theta_i^r theta_j^r x_r^2
///                               - 2 (sum_r theta_i^r theta_j^r x_r)(sum_s x_s) + 2 S^i S^j ]  (i != j)
/// For non-orthogonal unit rows the terms carrying c_ij = <theta_i, theta_j>
/// (which vanish for orthonormal sets) are added back, so the identity with
/// the conditional second moment holds for any unit (centered) set.
Matrix eij_closed_form(std::span<const double> x, const DirectionSet& ds, PairKind kind);

struct PairStats {
  PairKind kind = PairKind::resampling;
  double lambda_stein = 0.0;
  Estimate sum_abs_eij;      // sum_ij E|E_ij|
  Estimate sqrt_sum_sq_eij;  // E (sum_ij E_ij^2)^{1/2}
  Estimate sum_third;        // sum_i E|S'^i - S^i|^3
  std::size_t samples = 0;
};

/// Monte Carlo over states x. The conditional third moment is enumerated
/// when cheap (finite replacement support, or n <= 64 for transposition)
/// and otherwise sub-sampled without bias: one X* per index I, or n random
/// ordered pairs.
PairStats pair_stats(const DirectionSet& ds, const Model& model, PairKind kind,
                     std::size_t samples, std::uint64_t seed, unsigned threads = 1);

struct DiscrepancyOptions {
  ExpectationMethod gaussian_method = ExpectationMethod::closed_form;
  GaussianBudget gaussian_budget;
  unsigned threads = 1;
};

struct DiscrepancyEstimate {
  Estimate empirical;            // E g(S_n) estimate
  ExpectationResult gaussian;    // E g(Z~)
  double discrepancy = 0.0;      // |empirical.mean - gaussian.value|
  double ci_halfwidth = 0.0;     // 3 SE + Gaussian-side error
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// Sample i uses stream_rng(seed, i). Samples are accumulated in fixed
/// blocks merged in block order, so the result is bit-identical for any
/// thread count.
DiscrepancyEstimate estimate_discrepancy(const DirectionSet& ds, const Model& model,
                                         const TestFunction& g, const Matrix& covariance,
                                         std::size_t samples, std::uint64_t seed,
                                         const DiscrepancyOptions& options = {});

/// Covariance of the comparison Gaussian: identity for orthonormal kinds,
/// the Gram matrix otherwise.
Matrix comparison_covariance(const DirectionSet& ds);

/// Throws config when the theorem's hypotheses do not match the inputs.
void check_theorem_applicable(Theorem theorem, const DirectionSet& ds, const Model& model);

struct TheoremInputs {
  ExchangeableConstants constants;
  std::size_t pair_samples = 2000;  // `abstract` only
  std::uint64_t pair_seed = 0;
  unsigned threads = 1;
};

/// Bound for the selected theorem. `abstract` is fed Monte Carlo pair
/// statistics inflated to mean + 3 SE.
BoundReport evaluate_theorem(Theorem theorem, const DirectionSet& ds, const Model& model,
                             const TestFunction& g, const TheoremInputs& inputs = {});

struct VerificationReport {
  DiscrepancyEstimate estimate;
  BoundReport bound;
  double bound_total = 0.0;  // bound.total times any shrink factor
  bool pass = false;
  std::string digest;
};

/// pass <=> discrepancy <= bound_total + ci_halfwidth.
bool verification_passes(double discrepancy, double bound_total, double ci_halfwidth);

std::string verification_csv_header();
std::string to_csv_row(const VerificationReport& r);

}  // namespace cltb
