#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cltb/error.hpp"
#include "cltb/rng.hpp"
#include "cltb/testfuncs.hpp"
#include "oracles.hpp"

using namespace cltb;

namespace {

std::vector<double> random_point(Rng& rng, std::size_t k, double spread) {
  std::vector<double> x(k);
  for (auto& v : x) v = (2 * rng.uniform01() - 1) * spread;
  return x;
}

// Random SPD matrix with unit-ish diagonal.
Matrix random_covariance(Rng& rng, std::size_t k) {
  Matrix a(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) a(i, j) = rng.uniform01() - 0.5;
  Matrix c = a * a.transpose();
  for (std::size_t i = 0; i < k; ++i) c(i, i) += 0.5;
  return c;
}

void check_chain(const TestFunction& g) {
  const auto& s = g.seminorms();
  const double k = static_cast<double>(g.k());
  CHECK(s.g1 <= s.grad_sup * (1 + 1e-12));
  CHECK(s.grad_sup <= std::sqrt(k) * s.g1 * (1 + 1e-12));
  REQUIRE(s.hess_op_sup);
  CHECK(s.g2 <= *s.hess_op_sup * (1 + 1e-9));
  CHECK(*s.hess_op_sup <= k * s.g2 * (1 + 1e-9));
}

}  // namespace

TEST_CASE("cosine seminorms") {
  const auto g = TestFunction::cosine({0.5, 0.5});
  CHECK(g.seminorms().g1 == 0.5);
  CHECK(std::abs(g.seminorms().grad_sup - std::sqrt(0.5)) < 1e-15);
  CHECK(g.seminorms().g2 == 0.25);
  CHECK(*g.seminorms().hess_op_sup == 0.5);

  // Grid oracle over [-10, 10]^2.
  const double grid_grad = oracle::grid_max(
      [&](const std::vector<double>& x) {
        const auto d = g.gradient(x);
        return std::sqrt(d[0] * d[0] + d[1] * d[1]);
      },
      2, -10, 10, 401);
  CHECK(grid_grad <= g.seminorms().grad_sup + 1e-9);
  CHECK(grid_grad >= g.seminorms().grad_sup - 1e-3);
  const double grid_g2 = oracle::grid_max(
      [&](const std::vector<double>& x) {
        const auto h = g.hessian(x);
        return std::max({std::abs(h(0, 0)), std::abs(h(0, 1)), std::abs(h(1, 1))});
      },
      2, -10, 10, 401);
  CHECK(grid_g2 <= 0.25 + 1e-12);
  CHECK(grid_g2 >= 0.25 - 1e-4);

  const auto e1 = TestFunction::cosine({1.0});
  CHECK(e1.seminorms().g1 == 1.0);
  CHECK(e1.seminorms().g2 == 1.0);
  CHECK(e1.seminorms().grad_sup == 1.0);
  CHECK(*e1.seminorms().hess_op_sup == 1.0);
}

TEST_CASE("cosine gradient bound holds on random grids") {
  Rng rng(8);
  for (int t = 0; t < 10; ++t) {
    auto a = random_point(rng, 2, 2.0);
    const auto g = TestFunction::cosine(a, rng.uniform01());
    const double m = oracle::grid_max(
        [&](const std::vector<double>& x) {
          const auto d = g.gradient(x);
          return std::sqrt(d[0] * d[0] + d[1] * d[1]);
        },
        2, -5, 5, 201);
    CHECK(m <= g.seminorms().grad_sup + 1e-9);
  }
}

TEST_CASE("finite differences match analytic derivatives") {
  Rng rng(21);
  const double h = 1e-5;
  for (std::size_t k = 1; k <= 3; ++k) {
    std::vector<TestFunction> family{TestFunction::cosine(random_point(rng, k, 1.5), 0.3),
                                     TestFunction::bump(2.0, k)};
    if (k <= 3) family.push_back(TestFunction::product_bump(1.7, k));
    for (const auto& g : family) {
      CAPTURE(g.describe());
      for (int t = 0; t < 100; ++t) {
        auto x = random_point(rng, k, 1.2);
        const auto grad = g.gradient(x);
        const Matrix hess = g.hessian(x);
        for (std::size_t i = 0; i < k; ++i) {
          auto xp = x, xm = x;
          xp[i] += h;
          xm[i] -= h;
          CHECK(std::abs((g(xp) - g(xm)) / (2 * h) - grad[i]) < 1e-6);
          const auto gp = g.gradient(xp), gm = g.gradient(xm);
          for (std::size_t j = 0; j < k; ++j)
            CHECK(std::abs((gp[j] - gm[j]) / (2 * h) - hess(j, i)) < 1e-6);
        }
      }
    }
  }
}

TEST_CASE("bump definition and seminorms") {
  const auto g = TestFunction::bump(1.0, 1);
  CHECK(g(std::vector<double>{0.0}) == 1.0);
  CHECK(g(std::vector<double>{1.0}) == 0.0);
  CHECK(g(std::vector<double>{-3.0}) == 0.0);
  const double t = 1 / std::sqrt(5.0);
  const double expect = 6 * t * (1 - t * t) * (1 - t * t);
  CHECK(std::abs(g.seminorms().g1 - expect) < 1e-9);

  const auto g3 = TestFunction::bump(2.0, 3);
  CHECK(g3(std::vector<double>{2.0, 0.0, 0.0}) == 0.0);
  CHECK(g3(std::vector<double>{1.5, 1.5, 0.0}) == 0.0);
  // Grid oracle for the Hessian entry seminorm.
  const double grid = oracle::grid_max(
      [&](const std::vector<double>& x) {
        const auto hm = g3.hessian(x);
        double m = 0;
        for (double v : hm.data()) m = std::max(m, std::abs(v));
        return m;
      },
      3, -2, 2, 41);
  CHECK(grid <= g3.seminorms().g2 * (1 + 1e-6) + 1e-9);
  CHECK(grid >= g3.seminorms().g2 * 0.97);
}

TEST_CASE("product bump seminorms dominate a finer grid") {
  const auto g = TestFunction::product_bump(1.5, 2);
  const double grid = oracle::grid_max(
      [&](const std::vector<double>& x) {
        const auto d = g.gradient(x);
        return std::sqrt(d[0] * d[0] + d[1] * d[1]);
      },
      2, -1.5, 1.5, 301);
  CHECK(grid <= g.seminorms().grad_sup * (1 + 1e-6));
  CHECK(grid >= g.seminorms().grad_sup * 0.999);
  CHECK_THROWS_AS(TestFunction::product_bump(1.0, 4), Error);
}

TEST_CASE("seminorm dominance chain") {
  Rng rng(4);
  for (std::size_t k = 1; k <= 3; ++k) {
    check_chain(TestFunction::cosine(random_point(rng, k, 2.0)));
    check_chain(TestFunction::bump(1.3, k));
    check_chain(TestFunction::product_bump(0.8, k));
  }
  check_chain(TestFunction::bump(1.0, 6));
  check_chain(TestFunction::cosine(std::vector<double>(6, 0.4)));
}

TEST_CASE("affine scaling") {
  const auto g = TestFunction::cosine({1.0, 2.0}).affine(-3.0, 0.5);
  CHECK(g.seminorms().g1 == 6.0);
  CHECK(*g.seminorms().hess_op_sup == 15.0);
  const std::vector<double> x{0.1, 0.2};
  CHECK(g(x) == doctest::Approx(0.5 - 3.0 * std::cos(0.5)));
  const auto c = TestFunction::bump(1.0, 2).affine(0.0, 2.5);
  CHECK(c(x) == 2.5);
  CHECK(c.seminorms().g1 == 0.0);
}

TEST_CASE("Gauss-Hermite rule integrates moments") {
  const auto rule = gauss_hermite(64);
  double m0 = 0, m2 = 0, m4 = 0, m6 = 0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = rule.nodes[i], w = rule.weights[i];
    m0 += w;
    m2 += w * x * x;
    m4 += w * x * x * x * x;
    m6 += w * std::pow(x, 6);
  }
  CHECK(std::abs(m0 - 1) < 1e-13);
  CHECK(std::abs(m2 - 1) < 1e-13);
  CHECK(std::abs(m4 - 3) < 1e-12);
  CHECK(std::abs(m6 - 15) < 1e-11);
}

TEST_CASE("Gaussian expectation") {
  const auto g = TestFunction::cosine({1.0, 0.0});
  const Matrix id = Matrix::identity(2);
  CHECK(std::abs(gaussian_expectation(g, id, ExpectationMethod::closed_form).value -
                 std::exp(-0.5)) < 1e-15);
  CHECK(std::abs(gaussian_expectation(g, id, ExpectationMethod::quadrature).value -
                 std::exp(-0.5)) < 1e-12);
  const auto s = TestFunction::cosine({1.0, 0.3}, std::numbers::pi / 2);
  CHECK(std::abs(gaussian_expectation(s, id, ExpectationMethod::closed_form).value) < 1e-16);
  CHECK(std::abs(gaussian_expectation(s, id, ExpectationMethod::quadrature).value) < 1e-12);

  Rng rng(99);
  for (int t = 0; t < 20; ++t) {
    const std::size_t k = 1 + t % 3;
    const auto c = random_covariance(rng, k);
    const auto f = TestFunction::cosine(random_point(rng, k, 1.5), rng.uniform01() * 3);
    const double closed = gaussian_expectation(f, c, ExpectationMethod::closed_form).value;
    const auto quad = gaussian_expectation(f, c, ExpectationMethod::quadrature);
    CHECK(std::abs(closed - quad.value) < 1e-10);
    GaussianBudget mc;
    mc.samples = 200000;
    mc.seed = 5 + t;
    const auto m = gaussian_expectation(f, c, ExpectationMethod::monte_carlo, mc);
    CHECK(std::abs(m.value - closed) <= 4 * m.error);
  }
}

TEST_CASE("Gaussian expectation of a bump agrees across methods") {
  const auto g = TestFunction::bump(2.5, 2);
  Matrix c = Matrix::identity(2);
  c(0, 1) = c(1, 0) = 0.3;
  const auto quad = gaussian_expectation(g, c, ExpectationMethod::quadrature);
  GaussianBudget mc;
  mc.samples = 400000;
  const auto m = gaussian_expectation(g, c, ExpectationMethod::monte_carlo, mc);
  CHECK(std::abs(m.value - quad.value) <= 4 * m.error + quad.error);
  CHECK_THROWS_AS(gaussian_expectation(g, c, ExpectationMethod::closed_form), Error);
}

TEST_CASE("covariance validation") {
  const auto g = TestFunction::cosine({1.0, 1.0});
  Matrix bad(2, 2);
  bad(0, 0) = 1;
  bad(1, 1) = 1;
  bad(0, 1) = bad(1, 0) = 2;  // indefinite
  CHECK_THROWS_AS(gaussian_expectation(g, bad, ExpectationMethod::closed_form), Error);
  CHECK_THROWS_AS(gaussian_expectation(g, Matrix::identity(3), ExpectationMethod::closed_form),
                  Error);
  CHECK_THROWS_AS(gaussian_expectation(TestFunction::cosine(std::vector<double>(5, 1.0)),
                                       Matrix::identity(5), ExpectationMethod::quadrature),
                  Error);
}
