#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cltb/empirics.hpp"
#include "cltb/error.hpp"
#include "cltb/rng.hpp"
#include "oracles.hpp"

using namespace cltb;

namespace {

std::vector<double> reproject(const std::vector<double>& x, const DirectionSet& ds) {
  std::vector<double> s(ds.k());
  for (std::size_t i = 0; i < ds.k(); ++i) {
    std::vector<double> row(ds.row(i).begin(), ds.row(i).end());
    s[i] = oracle::naive_dot(row, x);
  }
  return s;
}

struct Moments {
  std::vector<double> mean;
  Matrix second;
};

// Conditional moments of S' - S by brute force: rebuild x' for every
// outcome of the pair and project again.
Moments brute_resampling(const std::vector<double>& x, const DirectionSet& ds,
                         const ScalarLaw& law) {
  const std::size_t n = ds.n(), k = ds.k();
  const auto s = reproject(x, ds);
  Moments m{std::vector<double>(k, 0.0), Matrix(k, k)};
  const auto vals = law.support();
  const auto probs = law.probabilities();
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t t = 0; t < vals.size(); ++t) {
      auto xp = x;
      xp[r] = vals[t];
      const auto sp = reproject(xp, ds);
      const double w = probs[t] / double(n);
      for (std::size_t i = 0; i < k; ++i) {
        m.mean[i] += w * (sp[i] - s[i]);
        for (std::size_t j = 0; j < k; ++j) m.second(i, j) += w * (sp[i] - s[i]) * (sp[j] - s[j]);
      }
    }
  return m;
}

Moments brute_transposition(const std::vector<double>& x, const DirectionSet& ds) {
  const std::size_t n = ds.n(), k = ds.k();
  const auto s = reproject(x, ds);
  Moments m{std::vector<double>(k, 0.0), Matrix(k, k)};
  const double w = 1.0 / double(n * (n - 1));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      auto xp = x;
      std::swap(xp[a], xp[b]);
      const auto sp = reproject(xp, ds);
      for (std::size_t i = 0; i < k; ++i) {
        m.mean[i] += w * (sp[i] - s[i]);
        for (std::size_t j = 0; j < k; ++j) m.second(i, j) += w * (sp[i] - s[i]) * (sp[j] - s[j]);
      }
    }
  return m;
}

Matrix minus_diag(Matrix m, double v) {
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) -= v;
  return m;
}

std::vector<double> random_standardized(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> raw(n);
  for (auto& v : raw) v = std::pow(rng.uniform01(), 2.0) * 5;
  const auto m = ExchangeableModel::standardized(raw);
  return {m.population().begin(), m.population().end()};
}

}  // namespace

TEST_CASE("stein lambda and pair kinds") {
  CHECK(stein_lambda(PairKind::resampling, 8) == 0.125);
  CHECK(stein_lambda(PairKind::transposition, 5) == 0.5);
  CHECK(natural_pair_kind(IIDModel{ScalarLaw::uniform(), 3}) == PairKind::resampling);
  CHECK(natural_pair_kind(ExchangeableModel({-1, -1, 1, 1})) == PairKind::transposition);
}

TEST_CASE("projection") {
  const auto ds = random_orthonormal(6, 2, 3);
  std::vector<double> t1(ds.row(0).begin(), ds.row(0).end());
  const auto s = project(t1, ds);
  CHECK(std::abs(s[0] - 1) < 1e-14);
  CHECK(std::abs(s[1]) < 1e-14);
  CHECK(project(std::vector<double>(6, 0.0), ds) == std::vector<double>{0.0, 0.0});
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> x(6);
    for (auto& v : x) v = rng.uniform01() * 4 - 2;
    const auto a = project(x, ds), b = reproject(x, ds);
    CHECK(std::abs(a[0] - b[0]) < 1e-12);
    CHECK(std::abs(a[1] - b[1]) < 1e-12);
  }
  CHECK_THROWS_AS(project(std::vector<double>(5, 0.0), ds), Error);
}

TEST_CASE("resample pair draws") {
  const auto ds = hypercube_directions(8, 2);
  const Model model = IIDModel{ScalarLaw::rademacher(), 8};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto x = sample_vector(model, seed);
    const auto d = resample_pair(x, ds, model, seed + 1000);
    auto xp = x;
    xp[d.index] = d.replacement;
    const auto expect = reproject(xp, ds);
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(d.s_prime[i] - expect[i]) < 1e-14);
    if (d.replacement == x[d.index]) CHECK(d.s_prime == d.s);
  }
  CHECK(resample_pair(sample_vector(model, 1), ds, model, 9).index ==
        resample_pair(sample_vector(model, 1), ds, model, 9).index);
  const Model ex = ExchangeableModel(skewed_population(8));
  CHECK_THROWS_AS(resample_pair(sample_vector(ex, 1), ds, ex, 1), Error);
}

TEST_CASE("transpose pair draws") {
  const auto ds = random_orthonormal(7, 2, 11, true);
  const Model model = ExchangeableModel(linear_population(7));
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto x = sample_vector(model, seed);
    const auto d = transpose_pair(x, ds, model, seed + 1);
    CHECK(d.first != d.second);
    auto xp = x;
    std::swap(xp[d.first], xp[d.second]);
    const auto expect = reproject(xp, ds);
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(d.s_prime[i] - expect[i]) < 1e-13);
  }
  const auto nc = random_orthonormal(7, 2, 11, false);
  CHECK_THROWS_AS(transpose_pair(sample_vector(model, 1), nc, model, 1), Error);
  std::vector<double> tied{1, 1, 0, 0, 0, 0, 0};
  // Equal entries swap to the same state.
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto d = transpose_pair(tied, ds, model, seed);
    if (tied[d.first] == tied[d.second]) CHECK(d.s_prime == d.s);
  }
}

TEST_CASE("resampling linearity by full enumeration, n=4 Rademacher") {
  const auto ds = hypercube_directions(4, 3);
  const auto law = ScalarLaw::rademacher();
  const Model model = IIDModel{law, 4};
  for (int mask = 0; mask < 16; ++mask) {
    std::vector<double> x(4);
    for (int r = 0; r < 4; ++r) x[r] = (mask >> r) & 1 ? 1.0 : -1.0;
    const auto brute = brute_resampling(x, ds, law);
    const auto s = project(x, ds);
    const auto mean = conditional_mean_delta(x, ds, model, PairKind::resampling);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(brute.mean[i] == -s[i] / 4);
      CHECK(mean[i] == -s[i] / 4);
    }
  }
  CHECK(conditional_linearity_check(ds, model, PairKind::resampling, 100, 3) == 0.0);
}

TEST_CASE("transposition linearity by pair enumeration, n=5") {
  const auto ds = random_orthonormal(5, 2, 21, true);
  const Model model = ExchangeableModel(random_standardized(5, 4));
  for (std::uint64_t t = 0; t < 50; ++t) {
    const auto x = sample_vector(model, t);
    const auto brute = brute_transposition(x, ds);
    const auto s = project(x, ds);
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(brute.mean[i] + 2 * s[i] / 4) < 1e-12);
  }
  CHECK(conditional_linearity_check(ds, model, PairKind::transposition, 200, 9) <= 1e-10);
}

TEST_CASE("linearity fails without centering") {
  // With theta = e_1 the transposition pair drifts by (2/(n(n-1))) sum_r x_r,
  // which only vanishes when the state sums to zero.
  Matrix e1(1, 3);
  e1(0, 0) = 1;
  const DirectionSet ds(e1, DirectionKind::orthonormal);
  const Model model = IIDModel{ScalarLaw::rademacher(), 3};
  const std::vector<double> x{1, 1, -1};
  const auto brute = brute_transposition(x, ds);
  const auto mean = conditional_mean_delta(x, ds, model, PairKind::transposition);
  CHECK(std::abs(brute.mean[0] - mean[0]) < 1e-15);
  CHECK(std::abs(mean[0] + 1.0 * x[0] - (1.0 / 3.0)) < 1e-15);  // lambda = 1, drift sum(x)/3
  CHECK(conditional_linearity_check(ds, model, PairKind::transposition, 20, 1) > 0.3);
  // A permutation of a centered population always sums to zero, so there
  // the drift cancels even for non-centered directions.
  const Model perm = ExchangeableModel::standardized({-1, 0, 1});
  CHECK(conditional_linearity_check(ds, perm, PairKind::transposition, 20, 1) <= 1e-15);
  // A tampered lambda is also detected.
  const auto good = hypercube_directions(8, 2);
  const Model rad = IIDModel{ScalarLaw::rademacher(), 8};
  CHECK(conditional_linearity_check(good, rad, PairKind::resampling, 20, 1, 1.01) > 1e-6);
}

TEST_CASE("linearity for continuous replacement laws") {
  for (std::size_t n : {4u, 100u}) {
    const auto ds = random_orthonormal(n, 3, n);
    const Model model = IIDModel{ScalarLaw::uniform(), n};
    CHECK(conditional_linearity_check(ds, model, PairKind::resampling, 100, 2) <= 1e-10);
  }
  IndependentModel mixed;
  for (int r = 0; r < 10; ++r)
    mixed.laws.push_back(r % 3 ? ScalarLaw::two_point(0.3) : ScalarLaw::centered_exponential());
  CHECK(conditional_linearity_check(random_orthonormal(10, 2, 1), mixed, PairKind::resampling, 100, 2) <=
        1e-10);
}

TEST_CASE("E_ij closed form against brute-force enumeration") {
  std::vector<ScalarLaw> laws{ScalarLaw::rademacher(), ScalarLaw::two_point(0.2),
                              ScalarLaw::discrete({-std::sqrt(1.5), 0, std::sqrt(1.5)},
                                                  {1.0 / 3, 1.0 / 3, 1.0 / 3}, 1, 1.5)};
  for (std::size_t n = 3; n <= 8; ++n)
    for (std::size_t k = 1; k <= 3; ++k)
      for (const auto& law : laws) {
        const Model model = IIDModel{law, n};
        const auto orth = random_orthonormal(n, k, 7 * n + k);
        const auto unit = random_unit(n, k, 7 * n + k);
        for (const DirectionSet* ds : {&orth, &unit})
          for (std::uint64_t t = 0; t < 5; ++t) {
            const auto x = sample_vector(model, t + 100 * n);
            const auto brute = brute_resampling(x, *ds, law);
            const Matrix e = eij_closed_form(x, *ds, PairKind::resampling);
            CHECK(max_abs_diff(e, minus_diag(brute.second, 2.0 / double(n))) < 1e-12);
          }
      }
  for (std::size_t n = 3; n <= 6; ++n)
    for (std::size_t k = 1; k <= std::min<std::size_t>(3, n - 1); ++k) {
      const Model model = ExchangeableModel(random_standardized(n, n + k));
      const auto orth = random_orthonormal(n, k, 3 * n + k, true);
      const auto unit = random_unit(n, k, 3 * n + k, true);
      for (const DirectionSet* ds : {&orth, &unit})
        for (std::uint64_t t = 0; t < 5; ++t) {
          const auto x = sample_vector(model, t);
          const auto brute = brute_transposition(x, *ds);
          const Matrix e = eij_closed_form(x, *ds, PairKind::transposition);
          CHECK(max_abs_diff(e, minus_diag(brute.second, 4.0 / double(n - 1))) < 1e-12);
          const Matrix lib = conditional_second_moment(x, *ds, model, PairKind::transposition);
          CHECK(max_abs_diff(lib, brute.second) < 1e-12);
        }
    }
}

TEST_CASE("E_ij vanishes when every x_r^2 = 1") {
  const auto ds = random_orthonormal(9, 3, 4);
  std::vector<double> x{1, -1, 1, 1, -1, -1, 1, -1, 1};
  const Matrix e = eij_closed_form(x, ds, PairKind::resampling);
  for (double v : e.data()) CHECK(std::abs(v) < 1e-16);
}

TEST_CASE("pair statistics") {
  const Model rad = IIDModel{ScalarLaw::rademacher(), 32};
  const auto ps = pair_stats(hypercube_directions(32, 2), rad, PairKind::resampling, 500, 3);
  CHECK(ps.sum_abs_eij.mean == 0.0);
  CHECK(ps.sqrt_sum_sq_eij.mean == 0.0);
  CHECK(ps.lambda_stein == 1.0 / 32);

  for (std::size_t n : {16u, 64u}) {
    const auto ds = hypercube_directions(n, 1);
    const Model uni = IIDModel{ScalarLaw::uniform(), n};
    const auto s = pair_stats(ds, uni, PairKind::resampling, 20000, 5);
    const auto ns = norm_summary(ds);
    const double nd = double(n);
    CHECK(s.sqrt_sum_sq_eij.mean <=
          ns.sum_l4_sq * std::sqrt(0.8) / nd + 3 * s.sqrt_sum_sq_eij.se);
    CHECK(s.sum_third.mean <= 8 / nd * ScalarLaw::uniform().abs3() * ns.sum_l3_cubed +
                                  3 * s.sum_third.se);
  }
  {
    const std::size_t n = 40;
    const auto ds = random_orthonormal(n, 3, 8);
    IndependentModel m;
    for (std::size_t r = 0; r < n; ++r)
      m.laws.push_back(r % 2 ? ScalarLaw::two_point(0.2) : ScalarLaw::rademacher());
    const auto s = pair_stats(ds, m, PairKind::resampling, 5000, 6);
    const auto ns = norm_summary(ds);
    CHECK(s.sum_third.mean <= 8 / double(n) * 1.7 * ns.sum_l3_cubed + 3 * s.sum_third.se);
    CHECK(s.sqrt_sum_sq_eij.mean <=
          ns.sum_l4_sq * std::sqrt(3.25 - 1) / double(n) + 3 * s.sqrt_sum_sq_eij.se);
  }
  // Sub-sampled third moments (continuous law, large transposition n)
  // agree with enumeration on average.
  const auto ds = random_orthonormal(80, 2, 2, true);
  const Model ex = ExchangeableModel(skewed_population(80));
  const auto sub = pair_stats(ds, ex, PairKind::transposition, 4000, 1);
  CHECK(sub.sum_third.mean > 0);
  CHECK(sub.lambda_stein == 2.0 / 79);
}

TEST_CASE("pair statistics are thread-count invariant") {
  const auto ds = random_orthonormal(30, 2, 5);
  const Model m = IIDModel{ScalarLaw::uniform(), 30};
  const auto a = pair_stats(ds, m, PairKind::resampling, 10000, 4, 1);
  const auto b = pair_stats(ds, m, PairKind::resampling, 10000, 4, 3);
  CHECK(a.sum_abs_eij.mean == b.sum_abs_eij.mean);
  CHECK(a.sum_third.mean == b.sum_third.mean);
  CHECK(a.sqrt_sum_sq_eij.se == b.sqrt_sum_sq_eij.se);
}

TEST_CASE("transposition pair is exchangeable") {
  const std::size_t n = 12, samples = 100000;
  const auto ds = random_orthonormal(n, 2, 77, true);
  const Model model = ExchangeableModel(skewed_population(n));
  // (S, S') and (S', S) must agree in law: every antisymmetric statistic
  // has mean zero.
  std::vector<RunningStats> anti(4);
  std::vector<double> first, second;
  for (std::size_t t = 0; t < samples; ++t) {
    const auto x = sample_vector(model, t);
    const auto d = transpose_pair(x, ds, model, t ^ 0xabcdef);
    const double s = d.s[0], sp = d.s_prime[0], u = d.s[1], up = d.s_prime[1];
    anti[0].add(s * s * sp - sp * sp * s);
    anti[1].add((sp > s) - (s > sp));
    anti[2].add(s * s * s - sp * sp * sp);
    anti[3].add(s * up * up - sp * u * u);
    first.push_back(s);
    second.push_back(sp);
  }
  for (const auto& a : anti) {
    const auto e = a.estimate();
    CHECK(std::abs(e.mean) <= 4 * e.se + 1e-15);
  }
  // Kolmogorov-Smirnov distance between the marginals of S and S'.
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  double ks = 0;
  std::size_t i = 0, j = 0;
  while (i < samples && j < samples) {
    const double v = std::min(first[i], second[j]);
    while (i < samples && first[i] <= v) ++i;
    while (j < samples && second[j] <= v) ++j;
    ks = std::max(ks, std::abs(double(i) - double(j)) / double(samples));
  }
  CHECK(ks < 1.95 * std::sqrt(2.0 / double(samples)));  // 0.1% level
}

TEST_CASE("discrepancy estimation") {
  SUBCASE("large n Rademacher is near Gaussian") {
    const auto ds = hypercube_directions(16384, 1);
    const Model m = IIDModel{ScalarLaw::rademacher(), 16384};
    const auto g = TestFunction::cosine({1.0});
    const auto e = estimate_discrepancy(ds, m, g, Matrix::identity(1), 1000000, 3);
    CHECK(e.discrepancy <= e.ci_halfwidth);
    CHECK(e.samples == 1000000);
  }
  SUBCASE("constant test function") {
    const auto ds = hypercube_directions(16, 2);
    const Model m = IIDModel{ScalarLaw::uniform(), 16};
    const auto g = TestFunction::bump(1.0, 2).affine(0.0, 0.75);
    const auto e = estimate_discrepancy(ds, m, g, Matrix::identity(2), 5000, 3);
    CHECK(e.discrepancy == 0.0);
    CHECK(e.empirical.mean == 0.75);
  }
  SUBCASE("deterministic across worker counts") {
    const auto ds = random_orthonormal(50, 2, 1);
    const Model m = IIDModel{ScalarLaw::uniform(), 50};
    const auto g = TestFunction::cosine({0.6, 0.8});
    DiscrepancyOptions one, four;
    four.threads = 4;
    const auto a = estimate_discrepancy(ds, m, g, Matrix::identity(2), 30000, 8, one);
    const auto b = estimate_discrepancy(ds, m, g, Matrix::identity(2), 30000, 8, four);
    const auto c = estimate_discrepancy(ds, m, g, Matrix::identity(2), 30000, 8, four);
    CHECK(a.empirical.mean == b.empirical.mean);
    CHECK(a.empirical.se == b.empirical.se);
    CHECK(b.empirical.mean == c.empirical.mean);
  }
  SUBCASE("small samples rejected") {
    const auto ds = hypercube_directions(16, 1);
    const Model m = IIDModel{ScalarLaw::uniform(), 16};
    CHECK_THROWS_AS(estimate_discrepancy(ds, m, TestFunction::cosine({1.0}), Matrix::identity(1), 999, 1),
                    Error);
  }
}

TEST_CASE("theorem applicability") {
  const auto orth = hypercube_directions(16, 2);
  const auto cent = hypercube_directions(16, 2, true);
  const auto unit = random_unit(16, 2, 3);
  const Model iid = IIDModel{ScalarLaw::uniform(), 16};
  IndependentModel ind;
  for (int r = 0; r < 16; ++r) ind.laws.push_back(r ? ScalarLaw::uniform() : ScalarLaw::rademacher());
  const Model ex = ExchangeableModel(skewed_population(16));
  auto code = [](Theorem t, const DirectionSet& ds, const Model& m) {
    try {
      check_theorem_applicable(t, ds, m);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode{};
  };
  CHECK(code(Theorem::t1, orth, iid) == ErrorCode{});
  CHECK(code(Theorem::t1, orth, Model(ind)) == ErrorCode::config);
  CHECK(code(Theorem::t2, orth, Model(ind)) == ErrorCode{});
  CHECK(code(Theorem::t2, unit, iid) == ErrorCode::config);
  CHECK(code(Theorem::t3, unit, iid) == ErrorCode{});
  CHECK(code(Theorem::t4, orth, ex) == ErrorCode::config);
  CHECK(code(Theorem::t4, cent, ex) == ErrorCode{});
  CHECK(code(Theorem::t4, cent, iid) == ErrorCode::config);
  CHECK(code(Theorem::t5, random_unit(16, 2, 3, true), ex) == ErrorCode{});
  CHECK(code(Theorem::t2, hypercube_directions(32, 2), iid) == ErrorCode::config);
  CHECK(code(Theorem::abstract, orth, ex) == ErrorCode::config);
  CHECK(code(Theorem::abstract, cent, ex) == ErrorCode{});
}

TEST_CASE("evaluate_theorem and verification") {
  const auto ds = hypercube_directions(64, 2);
  const Model rad = IIDModel{ScalarLaw::rademacher(), 64};
  const auto g = TestFunction::cosine({0.6, 0.8});
  const auto ab = evaluate_theorem(Theorem::abstract, ds, rad, g);
  CHECK(ab.term_fourth == 0.0);
  CHECK(ab.total > 0.0);
  // Rademacher: E|X* - x|^3 = 4 exactly, so the third term is deterministic.
  const double nd = 64;
  const double expect = 4 * 0.64 / (6 / nd) * (4 / nd) * norm_summary(ds).sum_l3_cubed;
  CHECK(std::abs(ab.term_third - expect) < 1e-12);
  CHECK(ab.total <= evaluate_theorem(Theorem::t2, ds, rad, g).total + 1e-12);

  CHECK(verification_passes(0.1, 0.05, 0.06));
  CHECK(!verification_passes(0.1, 0.05, 0.04));

  VerificationReport r;
  r.bound = evaluate_theorem(Theorem::t2, ds, rad, g);
  r.estimate.samples = 1000;
  r.estimate.discrepancy = 0.25;
  r.estimate.ci_halfwidth = 0.5;
  r.bound_total = r.bound.total;
  r.pass = true;
  r.digest = "abc";
  CHECK(verification_csv_header() == "digest,theorem,n,k,samples,estimate,ci,bound,pass");
  CHECK(to_csv_row(r).rfind("abc,T2,64,2,1000,0.25,0.5,", 0) == 0);
  CHECK(to_csv_row(r).back() == '1');
}
