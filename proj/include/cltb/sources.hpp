#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cltb/rng.hpp"
#include "cltb/stats.hpp"

namespace cltb {

/// Distributional constants entering the bounds. The mixed moments are set
/// only for exchangeable models.
struct MomentSummary {
  double abs3_max = 0.0;    // max_j E|X_j|^3
  double fourth_max = 0.0;  // max_j E X_j^4
  double abs3 = 0.0;        // E|X_1|^3
  double fourth = 0.0;      // E X_1^4
  std::optional<double> mixed_4;    // E X1 X2 X3 X4
  std::optional<double> mixed_var;  // E (X1^2 - 1)(X2^2 - 1)
};

/// A standardized (mean 0, variance 1) univariate law.
class ScalarLaw {
 public:
  enum class Kind { rademacher, uniform, two_point, centered_exponential, discrete };

  static ScalarLaw rademacher();
  /// Uniform on [-sqrt 3, sqrt 3].
  static ScalarLaw uniform();
  /// Takes sqrt((1-p)/p) with probability p and -sqrt(p/(1-p)) otherwise.
  static ScalarLaw two_point(double p);
  /// Exp(1) - 1.
  static ScalarLaw centered_exponential();
  /// User-supplied finite law. Mean 0 and variance 1 are checked; the
  /// third and fourth absolute moments must be declared, never estimated.
  static ScalarLaw discrete(std::vector<double> values, std::vector<double> probs,
                            std::optional<double> abs3, std::optional<double> fourth);

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  double parameter() const noexcept { return p_; }

  double draw(Rng& rng) const noexcept;

  /// Support points and probabilities when the law is finitely supported.
  bool finite_support() const noexcept { return !values_.empty(); }
  std::span<const double> support() const noexcept { return values_; }
  std::span<const double> probabilities() const noexcept { return probs_; }

  /// E|X|^3 and E X^4; throw missing_moments for a user law that did not
  /// declare them.
  double abs3() const;
  double fourth() const;
  bool moments_declared() const noexcept { return abs3_ && fourth_; }

  bool operator==(const ScalarLaw& other) const;

 private:
  ScalarLaw(Kind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

  Kind kind_;
  std::string name_;
  double p_ = 0.0;
  std::vector<double> values_;
  std::vector<double> probs_;
  std::vector<double> cumulative_;
  std::optional<double> abs3_;
  std::optional<double> fourth_;
};

struct IIDModel {
  ScalarLaw law;
  std::size_t n = 0;
};

struct IndependentModel {
  std::vector<ScalarLaw> laws;  // one per coordinate
};

/// Uniform random permutation of a fixed standardized population
/// (sum a = 0 and sum a^2 = n).
class ExchangeableModel {
 public:
  explicit ExchangeableModel(std::vector<double> population);

  /// Standardizes `raw` first. When any entry moves by more than 1e-6 a
  /// message is appended to `warnings` (if given).
  static ExchangeableModel standardized(std::vector<double> raw,
                                        std::vector<std::string>* warnings = nullptr);

  std::size_t n() const noexcept { return population_.size(); }
  std::span<const double> population() const noexcept { return population_; }

 private:
  std::vector<double> population_;
};

using Model = std::variant<IIDModel, IndependentModel, ExchangeableModel>;

std::size_t dimension(const Model& model);
bool is_exchangeable(const Model& model);
std::string describe(const Model& model);

/// Law of coordinate r for the independent families; throws wrong_pair_kind
/// for exchangeable models.
const ScalarLaw& coordinate_law(const Model& model, std::size_t r);

void sample_into(const Model& model, Rng& rng, std::span<double> out);
std::vector<double> sample_vector(const Model& model, std::uint64_t seed);

MomentSummary iid_moments(const IIDModel& model);
MomentSummary independent_moments(const IndependentModel& model);
/// Mixed moments of a random permutation via power-sum identities.
MomentSummary exchangeable_moments(const ExchangeableModel& model);
MomentSummary model_moments(const Model& model);

/// Stock populations: `skewed` tiles (-sqrt 3, 1/sqrt 3, 1/sqrt 3, 1/sqrt 3)
/// and needs n divisible by 4; `linear` is the standardized 1..n.
std::vector<double> skewed_population(std::size_t n);
std::vector<double> linear_population(std::size_t n);

/// One decimal per line; blank lines and '#' comments are skipped.
std::vector<double> read_population_file(const std::string& path);

struct LawMomentEstimates {
  Estimate m1, m2, abs3, m4;
};

LawMomentEstimates estimate_law_moments(const ScalarLaw& law, std::size_t samples,
                                        std::uint64_t seed);

struct MixedMomentEstimates {
  Estimate mixed_4, mixed_var;
};

MixedMomentEstimates estimate_mixed_moments(const ExchangeableModel& model,
                                            std::size_t samples, std::uint64_t seed);

}  // namespace cltb
