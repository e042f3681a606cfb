#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cltb/linalg.hpp"

namespace cltb {

/// The four sup-seminorms of a C^2 test function g on R^k.
struct Seminorms {
  double g1 = 0.0;           // max_i sup |d g / d x_i|
  double g2 = 0.0;           // max_ij sup |d^2 g / d x_i d x_j|
  double grad_sup = 0.0;     // sup |grad g|
  std::optional<double> hess_op_sup;  // sup ||H_g||_op, when known
};

enum class TestFunctionKind { cosine, bump, product_bump };

const char* to_string(TestFunctionKind kind) noexcept;

/// offset + scale * base(x), where base is one of
///   cosine:        cos(<a, x> + phase)
///   bump:          (1 - |x|^2 / r^2)^3 on the ball of radius r
///   product_bump:  prod_i (1 - x_i^2 / r^2)^3 on the cube [-r, r]^k
/// Seminorms are fixed at construction; evaluation is pure.
class TestFunction {
 public:
  static TestFunction cosine(std::vector<double> a, double phase = 0.0);
  static TestFunction bump(double radius, std::size_t k);
  /// Seminorms are found by grid search over the cube; k <= 3.
  static TestFunction product_bump(double radius, std::size_t k);

  /// Returns offset + scale * (*this).
  TestFunction affine(double scale, double offset) const;

  TestFunctionKind kind() const noexcept { return kind_; }
  std::size_t k() const noexcept { return k_; }
  const Seminorms& seminorms() const noexcept { return seminorms_; }
  std::span<const double> frequencies() const noexcept { return a_; }
  double phase() const noexcept { return phase_; }
  double radius() const noexcept { return radius_; }
  double scale() const noexcept { return scale_; }
  double offset() const noexcept { return offset_; }

  double operator()(std::span<const double> x) const;
  std::vector<double> gradient(std::span<const double> x) const;
  Matrix hessian(std::span<const double> x) const;

  std::string describe() const;

 private:
  TestFunction(TestFunctionKind kind, std::size_t k) : kind_(kind), k_(k) {}

  double base_value(std::span<const double> x) const;
  void base_derivatives(std::span<const double> x, std::vector<double>* grad,
                        Matrix* hess) const;

  TestFunctionKind kind_;
  std::size_t k_;
  std::vector<double> a_;
  double phase_ = 0.0;
  double radius_ = 0.0;
  double scale_ = 1.0;
  double offset_ = 0.0;
  Seminorms seminorms_;
};

enum class ExpectationMethod { closed_form, quadrature, monte_carlo };

const char* to_string(ExpectationMethod method) noexcept;

struct ExpectationResult {
  double value = 0.0;
  double error = 0.0;  // quadrature: |Q(nodes) - Q(nodes/2)|; Monte Carlo: standard error
};

struct GaussianBudget {
  std::size_t nodes = 64;          // Gauss-Hermite nodes per axis
  std::size_t samples = 1000000;   // Monte Carlo draws
  std::uint64_t seed = 0x5eed;
};

/// Probabilists' Gauss-Hermite rule: sum_i w_i f(x_i) ~ E f(Z), Z ~ N(0, 1).
struct HermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

HermiteRule gauss_hermite(std::size_t count);

/// E g(Z) for Z ~ N(0, covariance).
ExpectationResult gaussian_expectation(const TestFunction& g, const Matrix& covariance,
                                       ExpectationMethod method,
                                       const GaussianBudget& budget = {});

}  // namespace cltb
