#include "cltb/empirics.hpp"

#include <cmath>

#include "cltb/error.hpp"
#include "cltb/rng.hpp"
#include "cltb/text.hpp"
#include "parallel.hpp"

namespace cltb {

const char* to_string(PairKind kind) noexcept {
  return kind == PairKind::resampling ? "resampling" : "transposition";
}

double stein_lambda(PairKind kind, std::size_t n) {
  require(n >= 2, ErrorCode::invalid_input, "exchangeable pairs need n >= 2");
  const double nd = static_cast<double>(n);
  return kind == PairKind::resampling ? 1.0 / nd : 2.0 / (nd - 1.0);
}

PairKind natural_pair_kind(const Model& model) {
  return is_exchangeable(model) ? PairKind::transposition : PairKind::resampling;
}

void project_into(std::span<const double> x, const DirectionSet& ds, std::span<double> out) {
  require(x.size() == ds.n(), ErrorCode::invalid_input,
          "project: state has length " + std::to_string(x.size()) + ", directions have n=" +
              std::to_string(ds.n()));
  require(out.size() == ds.k(), ErrorCode::invalid_input, "project: output length mismatch");
  for (std::size_t i = 0; i < ds.k(); ++i) out[i] = dot(ds.row(i), x);
}

std::vector<double> project(std::span<const double> x, const DirectionSet& ds) {
  std::vector<double> s(ds.k());
  project_into(x, ds, s);
  return s;
}

namespace {

void require_resampling_model(const Model& model) {
  require(!is_exchangeable(model), ErrorCode::wrong_pair_kind,
          "the resampling pair needs independent coordinates; use transposition for "
          "exchangeable models");
}

void require_transposition_model(const Model& model) {
  const bool ok = is_exchangeable(model) || std::holds_alternative<IIDModel>(model);
  require(ok, ErrorCode::wrong_pair_kind,
          "the transposition pair needs an exchangeable (or i.i.d.) model");
}

void require_state(std::span<const double> x, const DirectionSet& ds) {
  require(x.size() == ds.n(), ErrorCode::invalid_input, "state length does not match n");
}

// E[(X* - v)^m] for the replacement law, m = 1, 2.
double replacement_moment(const ScalarLaw& law, double v, int m) {
  if (law.finite_support()) {
    const auto vals = law.support();
    const auto probs = law.probabilities();
    double acc = 0.0;
    for (std::size_t t = 0; t < vals.size(); ++t) {
      const double d = vals[t] - v;
      acc += probs[t] * (m == 1 ? d : d * d);
    }
    return acc;
  }
  // Declared standardization: E X* = 0, E X*^2 = 1.
  return m == 1 ? -v : v * v + 1.0;
}

}  // namespace

ResampleDraw resample_pair(std::span<const double> x, const DirectionSet& ds, const Model& model,
                           std::uint64_t seed) {
  require_resampling_model(model);
  require_state(x, ds);
  Rng rng(seed);
  ResampleDraw d;
  d.index = static_cast<std::size_t>(rng.below(ds.n()));
  d.replacement = coordinate_law(model, d.index).draw(rng);
  d.s = project(x, ds);
  d.s_prime = d.s;
  const double shift = d.replacement - x[d.index];
  for (std::size_t i = 0; i < ds.k(); ++i) d.s_prime[i] = d.s[i] + ds(i, d.index) * shift;
  return d;
}

TransposeDraw transpose_pair(std::span<const double> x, const DirectionSet& ds,
                             const Model& model, std::uint64_t seed) {
  require_transposition_model(model);
  require_state(x, ds);
  require(ds.centered(), ErrorCode::invalid_input,
          "the transposition pair needs centered directions (sum_r theta_i^r = 0)");
  Rng rng(seed);
  const std::size_t n = ds.n();
  TransposeDraw d;
  d.first = static_cast<std::size_t>(rng.below(n));
  d.second = static_cast<std::size_t>(rng.below(n - 1));
  if (d.second >= d.first) ++d.second;
  d.s = project(x, ds);
  d.s_prime = d.s;
  for (std::size_t i = 0; i < ds.k(); ++i)
    d.s_prime[i] += (ds(i, d.first) - ds(i, d.second)) * (x[d.second] - x[d.first]);
  return d;
}

std::vector<double> conditional_mean_delta(std::span<const double> x, const DirectionSet& ds,
                                           const Model& model, PairKind kind) {
  require_state(x, ds);
  const std::size_t n = ds.n(), k = ds.k();
  const double nd = static_cast<double>(n);
  std::vector<double> mean(k, 0.0);
  if (kind == PairKind::resampling) {
    require_resampling_model(model);
    for (std::size_t r = 0; r < n; ++r) {
      const double shift = replacement_moment(coordinate_law(model, r), x[r], 1);
      for (std::size_t i = 0; i < k; ++i) mean[i] += ds(i, r) * shift;
    }
    for (double& m : mean) m /= nd;
    return mean;
  }
  require_transposition_model(model);
  for (std::size_t i = 0; i < k; ++i) {
    CompensatedSum acc;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t s = 0; s < n; ++s)
        if (r != s) acc.add((ds(i, r) - ds(i, s)) * (x[s] - x[r]));
    mean[i] = acc.value() / (nd * (nd - 1.0));
  }
  return mean;
}

Matrix conditional_second_moment(std::span<const double> x, const DirectionSet& ds,
                                 const Model& model, PairKind kind) {
  require_state(x, ds);
  const std::size_t n = ds.n(), k = ds.k();
  const double nd = static_cast<double>(n);
  Matrix m(k, k);
  if (kind == PairKind::resampling) {
    require_resampling_model(model);
    for (std::size_t r = 0; r < n; ++r) {
      const double sq = replacement_moment(coordinate_law(model, r), x[r], 2);
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) m(i, j) += ds(i, r) * ds(j, r) * sq;
    }
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) m(i, j) /= nd;
    return m;
  }
  require_transposition_model(model);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      CompensatedSum acc;
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t s = 0; s < n; ++s) {
          if (r == s) continue;
          const double dx = x[s] - x[r];
          acc.add((ds(i, r) - ds(i, s)) * (ds(j, r) - ds(j, s)) * dx * dx);
        }
      m(i, j) = acc.value() / (nd * (nd - 1.0));
    }
  return m;
}

double conditional_linearity_check(const DirectionSet& ds, const Model& model, PairKind kind,
                                   std::size_t trials, std::uint64_t seed,
                                   double lambda_scale) {
  require(dimension(model) == ds.n(), ErrorCode::invalid_input,
          "model dimension does not match the directions");
  const double lambda = stein_lambda(kind, ds.n()) * lambda_scale;
  std::vector<double> x(ds.n());
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = stream_rng(seed, t);
    sample_into(model, rng, x);
    const auto s = project(x, ds);
    const auto mean = conditional_mean_delta(x, ds, model, kind);
    for (std::size_t i = 0; i < ds.k(); ++i)
      worst = std::max(worst, std::abs(mean[i] + lambda * s[i]));
  }
  return worst;
}

Matrix eij_closed_form(std::span<const double> x, const DirectionSet& ds, PairKind kind) {
  require_state(x, ds);
  const std::size_t n = ds.n(), k = ds.k();
  const double nd = static_cast<double>(n);
  Matrix e(k, k);
  if (kind == PairKind::resampling) {
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        double acc = 0.0, c = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          const double tt = ds(i, r) * ds(j, r);
          acc += tt * (x[r] * x[r] - 1.0);
          c += tt;
        }
        double v = acc / nd;
        if (i != j) v += 2.0 * c / nd;  // vanishes for orthogonal rows
        e(i, j) = e(j, i) = v;
      }
    return e;
  }
  const auto s = project(x, ds);
  double sum_x = 0.0, sum_x2m1 = 0.0, sum_x2 = 0.0;
  for (double v : x) {
    sum_x += v;
    sum_x2m1 += v * v - 1.0;
    sum_x2 += v * v;
  }
  const double pre = 2.0 / (nd * (nd - 1.0));
  for (std::size_t i = 0; i < k; ++i) {
    double w_x2m1 = 0.0, w_x = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double w = ds(i, r) * ds(i, r);
      w_x2m1 += w * (x[r] * x[r] - 1.0);
      w_x += w * x[r];
    }
    e(i, i) = pre * (sum_x2m1 + nd * w_x2m1 - 2.0 * w_x * sum_x + 2.0 * s[i] * s[i]);
    for (std::size_t j = 0; j < i; ++j) {
      double v_x2 = 0.0, v_x = 0.0, c = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const double v = ds(i, r) * ds(j, r);
        v_x2 += v * x[r] * x[r];
        v_x += v * x[r];
        c += v;
      }
      e(i, j) = e(j, i) =
          pre * (nd * v_x2 - 2.0 * v_x * sum_x + 2.0 * s[i] * s[j] + c * sum_x2);
    }
  }
  return e;
}

namespace {

struct PairBlock {
  RunningStats abs, sq, third;
};

// Conditional sum_i E[|dS^i|^3 | x], enumerated or sub-sampled.
double conditional_third(std::span<const double> x, const DirectionSet& ds, const Model& model,
                         PairKind kind, Rng& rng) {
  const std::size_t n = ds.n(), k = ds.k();
  const double nd = static_cast<double>(n);
  double total = 0.0;
  if (kind == PairKind::resampling) {
    for (std::size_t r = 0; r < n; ++r) {
      const ScalarLaw& law = coordinate_law(model, r);
      double abs3 = 0.0;
      if (law.finite_support()) {
        const auto vals = law.support();
        const auto probs = law.probabilities();
        for (std::size_t t = 0; t < vals.size(); ++t) {
          const double d = std::abs(vals[t] - x[r]);
          abs3 += probs[t] * d * d * d;
        }
      } else {
        const double d = std::abs(law.draw(rng) - x[r]);
        abs3 = d * d * d;
      }
      double w = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double t = std::abs(ds(i, r));
        w += t * t * t;
      }
      total += w * abs3;
    }
    return total / nd;
  }
  auto pair_term = [&](std::size_t r, std::size_t s) {
    const double dx = std::abs(x[s] - x[r]);
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double d = std::abs(ds(i, r) - ds(i, s)) * dx;
      acc += d * d * d;
    }
    return acc;
  };
  if (n <= 64) {
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t s = 0; s < n; ++s)
        if (r != s) total += pair_term(r, s);
    return total / (nd * (nd - 1.0));
  }
  for (std::size_t t = 0; t < n; ++t) {
    const auto r = static_cast<std::size_t>(rng.below(n));
    auto s = static_cast<std::size_t>(rng.below(n - 1));
    if (s >= r) ++s;
    total += pair_term(r, s);
  }
  return total / nd;
}

}  // namespace

PairStats pair_stats(const DirectionSet& ds, const Model& model, PairKind kind,
                     std::size_t samples, std::uint64_t seed, unsigned threads) {
  require(samples >= 100, ErrorCode::invalid_input, "pair_stats needs at least 100 samples");
  require(dimension(model) == ds.n(), ErrorCode::invalid_input,
          "model dimension does not match the directions");
  if (kind == PairKind::resampling)
    require_resampling_model(model);
  else
    require_transposition_model(model);
  const auto blocks = detail::run_blocks<PairBlock>(
      samples, threads, [&](std::size_t begin, std::size_t end) {
        PairBlock acc;
        std::vector<double> x(ds.n());
        for (std::size_t i = begin; i < end; ++i) {
          Rng rng = stream_rng(seed, i);
          sample_into(model, rng, x);
          const Matrix e = eij_closed_form(x, ds, kind);
          double abs = 0.0, sq = 0.0;
          for (double v : e.data()) {
            abs += std::abs(v);
            sq += v * v;
          }
          acc.abs.add(abs);
          acc.sq.add(std::sqrt(sq));
          acc.third.add(conditional_third(x, ds, model, kind, rng));
        }
        return acc;
      });
  PairBlock total;
  for (const auto& b : blocks) {
    total.abs.merge(b.abs);
    total.sq.merge(b.sq);
    total.third.merge(b.third);
  }
  PairStats out;
  out.kind = kind;
  out.lambda_stein = stein_lambda(kind, ds.n());
  out.sum_abs_eij = total.abs.estimate();
  out.sqrt_sum_sq_eij = total.sq.estimate();
  out.sum_third = total.third.estimate();
  out.samples = samples;
  return out;
}

DiscrepancyEstimate estimate_discrepancy(const DirectionSet& ds, const Model& model,
                                         const TestFunction& g, const Matrix& covariance,
                                         std::size_t samples, std::uint64_t seed,
                                         const DiscrepancyOptions& options) {
  require(samples >= 1000, ErrorCode::invalid_input,
          "estimate_discrepancy needs at least 1000 samples");
  require(dimension(model) == ds.n(), ErrorCode::invalid_input,
          "model dimension does not match the directions");
  require(g.k() == ds.k(), ErrorCode::invalid_input,
          "test function dimension does not match the number of directions");
  DiscrepancyEstimate out;
  out.gaussian =
      gaussian_expectation(g, covariance, options.gaussian_method, options.gaussian_budget);
  const auto blocks = detail::run_blocks<RunningStats>(
      samples, options.threads, [&](std::size_t begin, std::size_t end) {
        RunningStats acc;
        std::vector<double> x(ds.n()), s(ds.k());
        for (std::size_t i = begin; i < end; ++i) {
          Rng rng = stream_rng(seed, i);
          sample_into(model, rng, x);
          project_into(x, ds, s);
          acc.add(g(s));
        }
        return acc;
      });
  RunningStats total;
  for (const auto& b : blocks) total.merge(b);
  out.empirical = total.estimate();
  out.discrepancy = std::abs(out.empirical.mean - out.gaussian.value);
  const double gaussian_error = options.gaussian_method == ExpectationMethod::monte_carlo
                                    ? 3.0 * out.gaussian.error
                                    : out.gaussian.error;
  out.ci_halfwidth = 3.0 * out.empirical.se + gaussian_error;
  out.samples = samples;
  out.seed = seed;
  return out;
}

Matrix comparison_covariance(const DirectionSet& ds) {
  if (ds.kind() == DirectionKind::linearly_independent) return gram(ds).c;
  return Matrix::identity(ds.k());
}

namespace {

bool identically_distributed(const Model& model) {
  if (std::holds_alternative<IIDModel>(model)) return true;
  if (const auto* ind = std::get_if<IndependentModel>(&model)) {
    for (const auto& law : ind->laws)
      if (!(law == ind->laws.front())) return false;
    return true;
  }
  return false;
}

}  // namespace

void check_theorem_applicable(Theorem theorem, const DirectionSet& ds, const Model& model) {
  const std::string name = to_string(theorem);
  require(dimension(model) == ds.n(), ErrorCode::config,
          "model dimension " + std::to_string(dimension(model)) +
              " does not match direction dimension n=" + std::to_string(ds.n()));
  const bool orthonormal = ds.kind() != DirectionKind::linearly_independent;
  const bool centered_orthonormal = orthonormal && ds.centered();
  switch (theorem) {
    case Theorem::t1:
      require(identically_distributed(model), ErrorCode::config,
              name + " needs an i.i.d. model");
      require(orthonormal, ErrorCode::config, name + " needs orthonormal directions");
      return;
    case Theorem::t2:
      require(!is_exchangeable(model), ErrorCode::config, name + " needs independent coordinates");
      require(orthonormal, ErrorCode::config, name + " needs orthonormal directions");
      return;
    case Theorem::t3:
      require(!is_exchangeable(model), ErrorCode::config, name + " needs independent coordinates");
      return;
    case Theorem::t4:
      require(is_exchangeable(model), ErrorCode::config, name + " needs an exchangeable model");
      require(centered_orthonormal, ErrorCode::config,
              name + " needs centered orthonormal directions");
      return;
    case Theorem::t5:
      require(is_exchangeable(model), ErrorCode::config, name + " needs an exchangeable model");
      require(ds.centered(), ErrorCode::config, name + " needs centered directions");
      return;
    case Theorem::abstract:
      require(orthonormal, ErrorCode::config, name + " needs orthonormal directions");
      if (is_exchangeable(model))
        require(ds.centered(), ErrorCode::config,
                name + " with the transposition pair needs centered directions");
      return;
  }
}

BoundReport evaluate_theorem(Theorem theorem, const DirectionSet& ds, const Model& model,
                             const TestFunction& g, const TheoremInputs& inputs) {
  check_theorem_applicable(theorem, ds, model);
  require(g.k() == ds.k(), ErrorCode::config,
          "test function dimension does not match the number of directions");
  const Dims dims{ds.n(), ds.k()};
  const auto& semi = g.seminorms();
  switch (theorem) {
    case Theorem::t1: return bound_iid(dims, norm_summary(ds), model_moments(model), semi);
    case Theorem::t2: return bound_indep(dims, norm_summary(ds), model_moments(model), semi);
    case Theorem::t3:
      return bound_linind(dims, norm_summary(ds), gram(ds), model_moments(model), semi);
    case Theorem::t4:
      return bound_exch(dims, norm_summary(ds), model_moments(model), semi, inputs.constants);
    case Theorem::t5:
      return bound_exch_linind(dims, norm_summary(ds), gram(ds), model_moments(model), semi,
                               inputs.constants);
    case Theorem::abstract: {
      const PairStats ps = pair_stats(ds, model, natural_pair_kind(model), inputs.pair_samples,
                                      inputs.pair_seed, inputs.threads);
      auto upper = [](const Estimate& e) { return e.mean + 3.0 * e.se; };
      BoundReport r = bound_abstract(
          ps.lambda_stein, EijStats{upper(ps.sum_abs_eij), upper(ps.sqrt_sum_sq_eij)},
          upper(ps.sum_third), semi, dims);
      if (!is_exchangeable(model) || ds.n() >= 4) r.moments = model_moments(model);
      return r;
    }
  }
  fail(ErrorCode::config, "unhandled theorem");
}

bool verification_passes(double discrepancy, double bound_total, double ci_halfwidth) {
  return discrepancy <= bound_total + ci_halfwidth;
}

std::string verification_csv_header() {
  return "digest,theorem,n,k,samples,estimate,ci,bound,pass";
}

std::string to_csv_row(const VerificationReport& r) {
  return r.digest + "," + to_string(r.bound.theorem) + "," + std::to_string(r.bound.dims.n) +
         "," + std::to_string(r.bound.dims.k) + "," + std::to_string(r.estimate.samples) + "," +
         fmt17(r.estimate.discrepancy) + "," + fmt17(r.estimate.ci_halfwidth) + "," +
         fmt17(r.bound_total) + "," + (r.pass ? "1" : "0");
}

}  // namespace cltb
