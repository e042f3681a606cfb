#include "cltb/sources.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cltb/error.hpp"
#include "cltb/text.hpp"

namespace cltb {

namespace {
const double kSqrt3 = std::sqrt(3.0);
const std::array<std::array<double, 8>, 256>& sign_table() {
  static const auto tab = [] {
    std::array<std::array<double, 8>, 256> t{};
    for (int b = 0; b < 256; ++b)
      for (int j = 0; j < 8; ++j) t[b][j] = (b >> j & 1) ? 1.0 : -1.0;
    return t;
  }();
  return tab;
}
}

ScalarLaw ScalarLaw::rademacher() {
  ScalarLaw law(Kind::rademacher, "rademacher");
  law.values_ = {-1.0, 1.0};
  law.probs_ = {0.5, 0.5};
  law.cumulative_ = {0.5, 1.0};
  law.abs3_ = 1.0;
  law.fourth_ = 1.0;
  return law;
}

ScalarLaw ScalarLaw::uniform() {
  ScalarLaw law(Kind::uniform, "uniform");
  law.abs3_ = 3.0 * kSqrt3 / 4.0;
  law.fourth_ = 9.0 / 5.0;
  return law;
}

ScalarLaw ScalarLaw::two_point(double p) {
  require(p > 0.0 && p < 1.0, ErrorCode::invalid_input, "two_point needs 0 < p < 1");
  ScalarLaw law(Kind::two_point, "two_point(" + fmt17(p) + ")");
  law.p_ = p;
  const double q = 1.0 - p;
  const double hi = std::sqrt(q / p), lo = -std::sqrt(p / q);
  law.values_ = {hi, lo};
  law.probs_ = {p, q};
  law.cumulative_ = {p, 1.0};
  law.abs3_ = (q * q + p * p) / std::sqrt(p * q);
  law.fourth_ = (1.0 - 3.0 * p + 3.0 * p * p) / (p * q);
  return law;
}

ScalarLaw ScalarLaw::centered_exponential() {
  ScalarLaw law(Kind::centered_exponential, "exponential");
  // E|E-1|^3 = (6/e - 2) + 6/e; the fourth central moment of Exp(1) is 9.
  law.abs3_ = 12.0 / std::exp(1.0) - 2.0;
  law.fourth_ = 9.0;
  return law;
}

ScalarLaw ScalarLaw::discrete(std::vector<double> values, std::vector<double> probs,
                              std::optional<double> abs3, std::optional<double> fourth) {
  require(!values.empty() && values.size() == probs.size(), ErrorCode::invalid_input,
          "discrete law needs matching, non-empty values and probs");
  double total = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(probs[i] >= 0.0, ErrorCode::invalid_input, "discrete law: negative probability");
    total += probs[i];
    m1 += probs[i] * values[i];
    m2 += probs[i] * values[i] * values[i];
  }
  require(std::abs(total - 1.0) <= 1e-9, ErrorCode::invalid_input,
          "discrete law: probabilities do not sum to 1");
  require(std::abs(m1) <= 1e-9 && std::abs(m2 - 1.0) <= 1e-9, ErrorCode::invalid_input,
          "discrete law must be standardized (mean 0, variance 1)");
  ScalarLaw law(Kind::discrete, "discrete");
  law.cumulative_.resize(probs.size());
  std::partial_sum(probs.begin(), probs.end(), law.cumulative_.begin());
  law.cumulative_.back() = 1.0;
  law.values_ = std::move(values);
  law.probs_ = std::move(probs);
  law.abs3_ = abs3;
  law.fourth_ = fourth;
  return law;
}

double ScalarLaw::draw(Rng& rng) const noexcept {
  switch (kind_) {
    case Kind::rademacher:
      return (rng() >> 63) ? 1.0 : -1.0;
    case Kind::uniform:
      return kSqrt3 * (2.0 * rng.uniform01() - 1.0);
    case Kind::centered_exponential:
      return -std::log1p(-rng.uniform01()) - 1.0;
    case Kind::two_point:
    case Kind::discrete: {
      const double u = rng.uniform01();
      const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      const auto idx = static_cast<std::size_t>(
          std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                   static_cast<std::ptrdiff_t>(values_.size()) - 1));
      return values_[idx];
    }
  }
  return 0.0;
}

double ScalarLaw::abs3() const {
  require(abs3_.has_value(), ErrorCode::missing_moments,
          "law '" + name_ + "' does not declare E|X|^3");
  return *abs3_;
}

double ScalarLaw::fourth() const {
  require(fourth_.has_value(), ErrorCode::missing_moments,
          "law '" + name_ + "' does not declare E X^4");
  return *fourth_;
}

bool ScalarLaw::operator==(const ScalarLaw& other) const {
  return kind_ == other.kind_ && p_ == other.p_ && values_ == other.values_ &&
         probs_ == other.probs_ && abs3_ == other.abs3_ && fourth_ == other.fourth_;
}

namespace {

struct PopulationSums {
  double sum = 0.0, sum_sq = 0.0;
};

PopulationSums population_sums(std::span<const double> a) {
  CompensatedSum s1, s2;
  for (double x : a) {
    s1.add(x);
    s2.add(x * x);
  }
  return {s1.value(), s2.value()};
}

}  // namespace

ExchangeableModel::ExchangeableModel(std::vector<double> population)
    : population_(std::move(population)) {
  require(population_.size() >= 2, ErrorCode::invalid_input,
          "exchangeable population needs at least two values");
  const double n = static_cast<double>(population_.size());
  const auto [sum, sum_sq] = population_sums(population_);
  // Scaled with n: the sums themselves carry O(n eps) rounding.
  const double tol = 1e-12 * std::max(1.0, n);
  require(std::abs(sum) <= tol && std::abs(sum_sq - n) <= tol, ErrorCode::invalid_input,
          "exchangeable population is not standardized (sum " + fmt17(sum) +
              ", sum of squares " + fmt17(sum_sq) + ")");
}

ExchangeableModel ExchangeableModel::standardized(std::vector<double> raw,
                                                  std::vector<std::string>* warnings) {
  require(raw.size() >= 2, ErrorCode::invalid_input,
          "exchangeable population needs at least two values");
  const std::vector<double> original = raw;
  const double n = static_cast<double>(raw.size());
  // Two passes: the second removes the residual rounding of the first.
  for (int pass = 0; pass < 2; ++pass) {
    const double mean = population_sums(raw).sum / n;
    for (double& x : raw) x -= mean;
    const double sd = std::sqrt(population_sums(raw).sum_sq / n);
    require(sd > 0.0, ErrorCode::invalid_input, "exchangeable population is constant");
    for (double& x : raw) x /= sd;
  }
  double moved = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i)
    moved = std::max(moved, std::abs(raw[i] - original[i]));
  if (moved > 1e-6 && warnings)
    warnings->push_back("population standardized on load (max adjustment " + fmt17(moved) +
                        ")");
  return ExchangeableModel(std::move(raw));
}

std::size_t dimension(const Model& model) {
  return std::visit(
      [](const auto& m) -> std::size_t {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, IIDModel>)
          return m.n;
        else if constexpr (std::is_same_v<T, IndependentModel>)
          return m.laws.size();
        else
          return m.n();
      },
      model);
}

bool is_exchangeable(const Model& model) {
  return std::holds_alternative<ExchangeableModel>(model);
}

std::string describe(const Model& model) {
  if (const auto* iid = std::get_if<IIDModel>(&model)) return "iid:" + iid->law.name();
  if (const auto* ind = std::get_if<IndependentModel>(&model)) {
    std::string out = "independent:";
    // Summarize the distinct laws in order of first appearance.
    std::vector<std::string> seen;
    for (const auto& law : ind->laws)
      if (std::find(seen.begin(), seen.end(), law.name()) == seen.end())
        seen.push_back(law.name());
    for (std::size_t i = 0; i < seen.size(); ++i) out += (i ? "+" : "") + seen[i];
    return out;
  }
  return "exchangeable";
}

const ScalarLaw& coordinate_law(const Model& model, std::size_t r) {
  if (const auto* iid = std::get_if<IIDModel>(&model)) return iid->law;
  if (const auto* ind = std::get_if<IndependentModel>(&model)) return ind->laws.at(r);
  fail(ErrorCode::wrong_pair_kind, "exchangeable models have no independent coordinate laws");
}

void sample_into(const Model& model, Rng& rng, std::span<double> out) {
  require(out.size() == dimension(model), ErrorCode::invalid_input,
          "sample buffer length does not match the model dimension");
  if (const auto* iid = std::get_if<IIDModel>(&model)) {
    if (iid->law.kind() == ScalarLaw::Kind::rademacher) {
      // Eight signs per table lookup, 64 per engine call. Bit set -> +1.
      const auto& tab = sign_table();
      std::size_t r = 0;
      while (r < out.size()) {
        std::uint64_t bits = rng();
        for (int j = 0; j < 8 && r < out.size(); ++j, bits >>= 8) {
          const std::size_t len = std::min<std::size_t>(8, out.size() - r);
          std::memcpy(out.data() + r, tab[bits & 255].data(), len * sizeof(double));
          r += len;
        }
      }
      return;
    }
    if (iid->law.kind() == ScalarLaw::Kind::uniform) {
      for (double& x : out) x = kSqrt3 * (2.0 * rng.uniform01() - 1.0);
      return;
    }
    for (double& x : out) x = iid->law.draw(rng);
    return;
  }
  if (const auto* ind = std::get_if<IndependentModel>(&model)) {
    for (std::size_t r = 0; r < out.size(); ++r) out[r] = ind->laws[r].draw(rng);
    return;
  }
  const auto& ex = std::get<ExchangeableModel>(model);
  const auto pop = ex.population();
  std::copy(pop.begin(), pop.end(), out.begin());
  for (std::size_t i = out.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(out[i], out[j]);
  }
}

std::vector<double> sample_vector(const Model& model, std::uint64_t seed) {
  std::vector<double> x(dimension(model));
  Rng rng(seed);
  sample_into(model, rng, x);
  return x;
}

MomentSummary iid_moments(const IIDModel& model) {
  MomentSummary m;
  m.abs3 = m.abs3_max = model.law.abs3();
  m.fourth = m.fourth_max = model.law.fourth();
  return m;
}

MomentSummary independent_moments(const IndependentModel& model) {
  require(!model.laws.empty(), ErrorCode::invalid_input, "independent model has no coordinates");
  MomentSummary m;
  m.abs3 = model.laws.front().abs3();
  m.fourth = model.laws.front().fourth();
  for (const auto& law : model.laws) {
    m.abs3_max = std::max(m.abs3_max, law.abs3());
    m.fourth_max = std::max(m.fourth_max, law.fourth());
  }
  return m;
}

MomentSummary exchangeable_moments(const ExchangeableModel& model) {
  const std::size_t size = model.n();
  require(size >= 4, ErrorCode::invalid_input, "exchangeable moments need n >= 4");
  CompensatedSum s1, s2, s3, s4, b1, b2, a3;
  for (double a : model.population()) {
    const double a2 = a * a;
    s1.add(a);
    s2.add(a2);
    s3.add(a2 * a);
    s4.add(a2 * a2);
    a3.add(a2 * std::abs(a));
    const double b = a2 - 1.0;
    b1.add(b);
    b2.add(b * b);
  }
  const double n = static_cast<double>(size);
  const double p1 = s1.value(), p2 = s2.value(), p3 = s3.value(), p4 = s4.value();
  // Sum over ordered distinct 4-tuples: 4! e_4 in power sums.
  const double distinct4 = p1 * p1 * p1 * p1 - 6.0 * p1 * p1 * p2 + 3.0 * p2 * p2 +
                           8.0 * p1 * p3 - 6.0 * p4;
  const double distinct2 = b1.value() * b1.value() - b2.value();

  MomentSummary m;
  m.fourth = m.fourth_max = p4 / n;
  m.abs3 = m.abs3_max = a3.value() / n;
  m.mixed_4 = distinct4 / (n * (n - 1.0) * (n - 2.0) * (n - 3.0));
  m.mixed_var = distinct2 / (n * (n - 1.0));
  return m;
}

MomentSummary model_moments(const Model& model) {
  if (const auto* iid = std::get_if<IIDModel>(&model)) return iid_moments(*iid);
  if (const auto* ind = std::get_if<IndependentModel>(&model)) return independent_moments(*ind);
  return exchangeable_moments(std::get<ExchangeableModel>(model));
}

std::vector<double> skewed_population(std::size_t n) {
  require(n >= 4 && n % 4 == 0, ErrorCode::invalid_input,
          "skewed population needs n divisible by 4");
  std::vector<double> pop;
  pop.reserve(n);
  for (std::size_t block = 0; block < n / 4; ++block) {
    pop.push_back(-kSqrt3);
    for (int j = 0; j < 3; ++j) pop.push_back(1.0 / kSqrt3);
  }
  return pop;
}

std::vector<double> linear_population(std::size_t n) {
  require(n >= 2, ErrorCode::invalid_input, "linear population needs n >= 2");
  std::vector<double> pop(n);
  std::iota(pop.begin(), pop.end(), 1.0);
  const auto model = ExchangeableModel::standardized(std::move(pop));
  return {model.population().begin(), model.population().end()};
}

std::vector<double> read_population_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open population file '" + path + "'");
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    values.push_back(parse_double(t));
  }
  require(!values.empty(), ErrorCode::invalid_input, "population file '" + path + "' is empty");
  return values;
}

LawMomentEstimates estimate_law_moments(const ScalarLaw& law, std::size_t samples,
                                        std::uint64_t seed) {
  RunningStats m1, m2, a3, m4;
  Rng rng(seed);
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = law.draw(rng);
    const double x2 = x * x;
    m1.add(x);
    m2.add(x2);
    a3.add(x2 * std::abs(x));
    m4.add(x2 * x2);
  }
  return {m1.estimate(), m2.estimate(), a3.estimate(), m4.estimate()};
}

MixedMomentEstimates estimate_mixed_moments(const ExchangeableModel& model,
                                            std::size_t samples, std::uint64_t seed) {
  require(model.n() >= 4, ErrorCode::invalid_input, "mixed moments need n >= 4");
  RunningStats m4, mv;
  Rng rng(seed);
  std::vector<double> work(model.population().begin(), model.population().end());
  const std::size_t n = work.size();
  for (std::size_t s = 0; s < samples; ++s) {
    // The first four entries of a uniform permutation: partial Fisher-Yates.
    for (std::size_t i = 0; i < 4; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(n - i));
      std::swap(work[i], work[j]);
    }
    m4.add(work[0] * work[1] * work[2] * work[3]);
    mv.add((work[0] * work[0] - 1.0) * (work[1] * work[1] - 1.0));
  }
  return {m4.estimate(), mv.estimate()};
}

}  // namespace cltb
