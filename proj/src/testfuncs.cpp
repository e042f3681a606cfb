#include "cltb/testfuncs.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "cltb/error.hpp"
#include "cltb/rng.hpp"
#include "cltb/stats.hpp"
#include "cltb/text.hpp"

namespace cltb {

const char* to_string(TestFunctionKind kind) noexcept {
  switch (kind) {
    case TestFunctionKind::cosine: return "cosine";
    case TestFunctionKind::bump: return "bump";
    case TestFunctionKind::product_bump: return "product_bump";
  }
  return "unknown";
}

const char* to_string(ExpectationMethod method) noexcept {
  switch (method) {
    case ExpectationMethod::closed_form: return "closed_form";
    case ExpectationMethod::quadrature: return "quadrature";
    case ExpectationMethod::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

namespace {

// Grid maximization of f on [lo, hi] with two refinement passes around the
// incumbent argmax.
double maximize_1d(const std::function<double(double)>& f, double lo, double hi) {
  constexpr int kCoarse = 2001, kFine = 201;
  double best_x = lo, best = f(lo);
  double step = (hi - lo) / (kCoarse - 1);
  for (int i = 1; i < kCoarse; ++i) {
    const double x = lo + step * i;
    const double v = f(x);
    if (v > best) best = v, best_x = x;
  }
  for (int pass = 0; pass < 2; ++pass) {
    const double a = std::max(lo, best_x - step), b = std::min(hi, best_x + step);
    step = (b - a) / (kFine - 1);
    for (int i = 0; i < kFine; ++i) {
      const double x = a + step * i;
      const double v = f(x);
      if (v > best) best = v, best_x = x;
    }
  }
  return best;
}

// Same scheme on the cube [0, 1]^k.
double maximize_cube(const std::function<double(std::span<const double>)>& f, std::size_t k) {
  constexpr int kCoarse = 61, kFine = 21;
  std::vector<double> t(k), best_t(k, 0.0), lo(k, 0.0), step(k, 1.0 / (kCoarse - 1));
  double best = f(best_t);
  auto sweep = [&](int points) {
    std::vector<int> idx(k, 0);
    const std::vector<double> base = lo;
    while (true) {
      for (std::size_t d = 0; d < k; ++d) t[d] = std::min(1.0, base[d] + step[d] * idx[d]);
      const double v = f(t);
      if (v > best) best = v, best_t = t;
      std::size_t d = 0;
      while (d < k && ++idx[d] == points) idx[d++] = 0;
      if (d == k) break;
    }
  };
  sweep(kCoarse);
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t d = 0; d < k; ++d) {
      const double a = std::max(0.0, best_t[d] - step[d]);
      const double b = std::min(1.0, best_t[d] + step[d]);
      lo[d] = a;
      step[d] = (b - a) / (kFine - 1);
    }
    sweep(kFine);
  }
  return best;
}

double op_norm(const Matrix& h) {
  const auto eig = symmetric_eigen(h);
  return std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
}

double max_abs_entry(const Matrix& h) {
  double m = 0.0;
  for (double v : h.data()) m = std::max(m, std::abs(v));
  return m;
}

// One-dimensional profile phi(t) = (1 - t^2)^3 and derivatives, zero off [-1, 1].
struct Profile {
  double value, d1, d2;
};

Profile bump_profile(double t) {
  if (std::abs(t) >= 1.0) return {0.0, 0.0, 0.0};
  const double s = 1.0 - t * t;
  return {s * s * s, -6.0 * t * s * s, s * (30.0 * t * t - 6.0)};
}

}  // namespace

TestFunction TestFunction::cosine(std::vector<double> a, double phase) {
  require(!a.empty(), ErrorCode::invalid_input, "cosine test function needs k >= 1");
  const bool nonzero = std::any_of(a.begin(), a.end(), [](double v) { return v != 0.0; });
  require(nonzero, ErrorCode::invalid_input, "cosine test function needs a != 0");
  TestFunction g(TestFunctionKind::cosine, a.size());
  double max_abs = 0.0, sq = 0.0;
  for (double v : a) {
    max_abs = std::max(max_abs, std::abs(v));
    sq += v * v;
  }
  g.a_ = std::move(a);
  g.phase_ = phase;
  g.seminorms_ = {max_abs, max_abs * max_abs, std::sqrt(sq), sq};
  return g;
}

TestFunction TestFunction::bump(double radius, std::size_t k) {
  require(radius > 0.0, ErrorCode::invalid_input, "bump radius must be positive");
  require(k >= 1, ErrorCode::invalid_input, "bump needs k >= 1");
  TestFunction g(TestFunctionKind::bump, k);
  g.radius_ = radius;
  const double r = radius, r2 = r * r;
  // Radial profile h(u) = (1 - u)^3 with u = |x|^2 / r^2 = t^2. Along a ray
  // at t = |x| / r:
  //   |grad g| = |h'(u)| 2 t / r, attained by a single partial on an axis,
  //   H = (2 h' / r^2) I + (4 h'' / r^4) x x^T.
  auto h1 = [](double u) { return -3.0 * (1.0 - u) * (1.0 - u); };
  auto h2 = [](double u) { return 6.0 * (1.0 - u); };
  const double grad = maximize_1d([&](double t) { return std::abs(h1(t * t)) * 2.0 * t / r; },
                                  0.0, 1.0);
  // Diagonal entries interpolate linearly in x_i^2 in [0, |x|^2] (for k = 1
  // only the endpoint x_i^2 = |x|^2 exists); off-diagonal entries peak at
  // x_i = x_j = |x| / sqrt 2.
  const double g2 = maximize_1d(
      [&](double t) {
        const double u = t * t;
        const double radial = std::abs(2.0 * h1(u) / r2 + 4.0 * h2(u) * u / r2);
        if (k == 1) return radial;
        const double tangential = std::abs(2.0 * h1(u) / r2);
        const double off = std::abs(2.0 * h2(u) * u / r2);
        return std::max({radial, tangential, off});
      },
      0.0, 1.0);
  const double op = maximize_1d(
      [&](double t) {
        const double u = t * t;
        const double radial = std::abs(2.0 * h1(u) / r2 + 4.0 * h2(u) * u / r2);
        return k == 1 ? radial : std::max(radial, std::abs(2.0 * h1(u) / r2));
      },
      0.0, 1.0);
  g.seminorms_ = {grad, g2, grad, op};
  return g;
}

TestFunction TestFunction::product_bump(double radius, std::size_t k) {
  require(radius > 0.0, ErrorCode::invalid_input, "bump radius must be positive");
  require(k >= 1 && k <= 3, ErrorCode::unsupported,
          "product_bump seminorms are computed on a grid; k must be 1..3");
  TestFunction g(TestFunctionKind::product_bump, k);
  g.radius_ = radius;
  // Every seminorm is invariant under coordinate sign flips, so searching
  // the positive orthant suffices.
  auto at = [&g, radius](std::span<const double> t) {
    std::vector<double> x(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) x[i] = radius * t[i];
    std::vector<double> grad;
    Matrix hess;
    g.base_derivatives(x, &grad, &hess);
    return std::pair{grad, hess};
  };
  const double g1 = maximize_cube(
      [&](std::span<const double> t) {
        const auto [grad, hess] = at(t);
        double m = 0.0;
        for (double v : grad) m = std::max(m, std::abs(v));
        return m;
      },
      k);
  const double grad_sup = maximize_cube(
      [&](std::span<const double> t) {
        const auto [grad, hess] = at(t);
        return std::sqrt(dot(grad, grad));
      },
      k);
  const double g2 =
      maximize_cube([&](std::span<const double> t) { return max_abs_entry(at(t).second); }, k);
  const double op =
      maximize_cube([&](std::span<const double> t) { return op_norm(at(t).second); }, k);
  g.seminorms_ = {g1, g2, grad_sup, op};
  return g;
}

TestFunction TestFunction::affine(double scale, double offset) const {
  TestFunction g = *this;
  g.offset_ = scale * offset_ + offset;
  g.scale_ = scale * scale_;
  const double s = std::abs(scale);
  g.seminorms_.g1 *= s;
  g.seminorms_.g2 *= s;
  g.seminorms_.grad_sup *= s;
  if (g.seminorms_.hess_op_sup) *g.seminorms_.hess_op_sup *= s;
  return g;
}

double TestFunction::base_value(std::span<const double> x) const {
  switch (kind_) {
    case TestFunctionKind::cosine:
      return std::cos(dot(a_, x) + phase_);
    case TestFunctionKind::bump: {
      const double u = dot(x, x) / (radius_ * radius_);
      if (u >= 1.0) return 0.0;
      const double s = 1.0 - u;
      return s * s * s;
    }
    case TestFunctionKind::product_bump: {
      double v = 1.0;
      for (double xi : x) v *= bump_profile(xi / radius_).value;
      return v;
    }
  }
  return 0.0;
}

void TestFunction::base_derivatives(std::span<const double> x, std::vector<double>* grad,
                                    Matrix* hess) const {
  const std::size_t k = x.size();
  if (grad) grad->assign(k, 0.0);
  if (hess) *hess = Matrix(k, k);
  switch (kind_) {
    case TestFunctionKind::cosine: {
      const double arg = dot(a_, x) + phase_;
      const double s = std::sin(arg), c = std::cos(arg);
      for (std::size_t i = 0; i < k; ++i) {
        if (grad) (*grad)[i] = -s * a_[i];
        if (hess)
          for (std::size_t j = 0; j < k; ++j) (*hess)(i, j) = -c * a_[i] * a_[j];
      }
      return;
    }
    case TestFunctionKind::bump: {
      const double r2 = radius_ * radius_;
      const double u = dot(x, x) / r2;
      if (u >= 1.0) return;
      const double d1 = -3.0 * (1.0 - u) * (1.0 - u), d2 = 6.0 * (1.0 - u);
      for (std::size_t i = 0; i < k; ++i) {
        if (grad) (*grad)[i] = d1 * 2.0 * x[i] / r2;
        if (hess)
          for (std::size_t j = 0; j < k; ++j)
            (*hess)(i, j) = (i == j ? 2.0 * d1 / r2 : 0.0) + 4.0 * d2 * x[i] * x[j] / (r2 * r2);
      }
      return;
    }
    case TestFunctionKind::product_bump: {
      std::vector<Profile> p(k);
      for (std::size_t i = 0; i < k; ++i) p[i] = bump_profile(x[i] / radius_);
      auto product_except = [&](std::size_t skip1, std::size_t skip2) {
        double v = 1.0;
        for (std::size_t j = 0; j < k; ++j)
          if (j != skip1 && j != skip2) v *= p[j].value;
        return v;
      };
      const double r = radius_;
      for (std::size_t i = 0; i < k; ++i) {
        if (grad) (*grad)[i] = p[i].d1 / r * product_except(i, i);
        if (hess)
          for (std::size_t j = 0; j < k; ++j)
            (*hess)(i, j) = i == j ? p[i].d2 / (r * r) * product_except(i, i)
                                   : p[i].d1 * p[j].d1 / (r * r) * product_except(i, j);
      }
      return;
    }
  }
}

double TestFunction::operator()(std::span<const double> x) const {
  require(x.size() == k_, ErrorCode::invalid_input, "test function: dimension mismatch");
  if (scale_ == 0.0) return offset_;
  return offset_ + scale_ * base_value(x);
}

std::vector<double> TestFunction::gradient(std::span<const double> x) const {
  require(x.size() == k_, ErrorCode::invalid_input, "test function: dimension mismatch");
  std::vector<double> grad;
  base_derivatives(x, &grad, nullptr);
  for (double& v : grad) v *= scale_;
  return grad;
}

Matrix TestFunction::hessian(std::span<const double> x) const {
  require(x.size() == k_, ErrorCode::invalid_input, "test function: dimension mismatch");
  Matrix hess;
  base_derivatives(x, nullptr, &hess);
  Matrix out(k_, k_);
  for (std::size_t i = 0; i < k_; ++i)
    for (std::size_t j = 0; j < k_; ++j) out(i, j) = scale_ * hess(i, j);
  return out;
}

std::string TestFunction::describe() const {
  std::string out = to_string(kind_);
  if (kind_ == TestFunctionKind::cosine) {
    out += "(a=[";
    for (std::size_t i = 0; i < a_.size(); ++i) out += (i ? " " : "") + fmt17(a_[i]);
    out += "] phase=" + fmt17(phase_) + ")";
  } else {
    out += "(r=" + fmt17(radius_) + " k=" + std::to_string(k_) + ")";
  }
  if (scale_ != 1.0 || offset_ != 0.0)
    out += "*" + fmt17(scale_) + "+" + fmt17(offset_);
  return out;
}

HermiteRule gauss_hermite(std::size_t count) {
  require(count >= 1, ErrorCode::invalid_input, "Gauss-Hermite needs at least one node");
  // Newton iteration on orthonormal Hermite polynomials (weight e^{-x^2}),
  // then rescaled to the standard normal weight.
  const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);
  const std::size_t n = count;
  std::vector<double> x(n), w(n);
  const std::size_t m = (n + 1) / 2;
  double z = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double nd = static_cast<double>(n);
    if (i == 0)
      z = std::sqrt(2.0 * nd + 1.0) - 1.85575 * std::pow(2.0 * nd + 1.0, -0.16667);
    else if (i == 1)
      z -= 1.14 * std::pow(nd, 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * x[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * x[1];
    else
      z = 2.0 * z - x[i - 2];
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double jd = static_cast<double>(j);
        p1 = z * std::sqrt(2.0 / (jd + 1.0)) * p2 - std::sqrt(jd / (jd + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * nd) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    if (n % 2 == 1 && i == m - 1) z = 0.0;
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = w[n - 1 - i] = 2.0 / (pp * pp);
  }
  HermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    rule.nodes[i] = std::numbers::sqrt2 * x[n - 1 - i];
    rule.weights[i] = w[n - 1 - i] / std::sqrt(std::numbers::pi);
  }
  return rule;
}

namespace {

void check_covariance(const Matrix& c, std::size_t k) {
  require(c.rows() == k && c.cols() == k, ErrorCode::invalid_input,
          "covariance shape does not match the test function dimension");
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < i; ++j)
      require(std::abs(c(i, j) - c(j, i)) <= 1e-12, ErrorCode::invalid_input,
              "covariance matrix is not symmetric");
}

double tensor_quadrature(const TestFunction& g, const Matrix& root, std::size_t nodes) {
  const std::size_t k = g.k();
  const HermiteRule rule = gauss_hermite(nodes);
  std::vector<std::size_t> idx(k, 0);
  std::vector<double> x(k);
  CompensatedSum total;
  while (true) {
    double w = 1.0;
    for (std::size_t d = 0; d < k; ++d) w *= rule.weights[idx[d]];
    for (std::size_t i = 0; i < k; ++i) {
      double v = 0.0;
      for (std::size_t d = 0; d < k; ++d) v += root(i, d) * rule.nodes[idx[d]];
      x[i] = v;
    }
    total.add(w * g(x));
    std::size_t d = 0;
    while (d < k && ++idx[d] == nodes) idx[d++] = 0;
    if (d == k) break;
  }
  return total.value();
}

}  // namespace

ExpectationResult gaussian_expectation(const TestFunction& g, const Matrix& covariance,
                                       ExpectationMethod method, const GaussianBudget& budget) {
  const std::size_t k = g.k();
  check_covariance(covariance, k);
  const Matrix root = symmetric_sqrt(covariance);  // rejects non-PSD input
  if (g.scale() == 0.0) return {g.offset(), 0.0};
  switch (method) {
    case ExpectationMethod::closed_form: {
      require(g.kind() == TestFunctionKind::cosine, ErrorCode::unsupported,
              "closed-form Gaussian expectation exists only for cosine test functions");
      const auto a = g.frequencies();
      double quad = 0.0;
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) quad += a[i] * covariance(i, j) * a[j];
      return {g.offset() + g.scale() * std::cos(g.phase()) * std::exp(-0.5 * quad), 0.0};
    }
    case ExpectationMethod::quadrature: {
      require(k <= 4, ErrorCode::unsupported, "tensor quadrature supports k <= 4 only");
      require(budget.nodes >= 2, ErrorCode::invalid_input, "quadrature needs >= 2 nodes");
      const double fine = tensor_quadrature(g, root, budget.nodes);
      const double coarse = tensor_quadrature(g, root, budget.nodes / 2);
      return {fine, std::abs(fine - coarse)};
    }
    case ExpectationMethod::monte_carlo: {
      require(budget.samples >= 2, ErrorCode::invalid_input, "Monte Carlo needs >= 2 samples");
      Rng rng(budget.seed);
      std::normal_distribution<double> normal;
      std::vector<double> z(k), x(k);
      RunningStats stats;
      for (std::size_t s = 0; s < budget.samples; ++s) {
        for (double& v : z) v = normal(rng);
        for (std::size_t i = 0; i < k; ++i) {
          double v = 0.0;
          for (std::size_t d = 0; d < k; ++d) v += root(i, d) * z[d];
          x[i] = v;
        }
        stats.add(g(x));
      }
      const Estimate e = stats.estimate();
      return {e.mean, e.se};
    }
  }
  return {};
}

}  // namespace cltb
