#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cltb/linalg.hpp"

namespace cltb {

enum class DirectionKind { orthonormal, linearly_independent, centered_orthonormal };

const char* to_string(DirectionKind kind) noexcept;
DirectionKind parse_direction_kind(std::string_view text);

inline constexpr double kValidationTol = 1e-10;
inline constexpr double kRecompositionTol = 1e-8;

/// k unit vectors theta_1..theta_k in R^n stored as the rows of a k x n
/// matrix. The constructor validates the declared kind; an instance is
/// always valid.
class DirectionSet {
 public:
  DirectionSet(Matrix rows, DirectionKind kind);

  std::size_t n() const noexcept { return rows_.cols(); }
  std::size_t k() const noexcept { return rows_.rows(); }
  DirectionKind kind() const noexcept { return kind_; }

  std::span<const double> row(std::size_t i) const { return rows_.row(i); }
  double operator()(std::size_t i, std::size_t r) const { return rows_(i, r); }
  const Matrix& rows() const noexcept { return rows_; }

  /// Whether every row sums to zero within `tol`.
  bool centered(double tol = kValidationTol) const;

  /// Whether the rows are pairwise orthogonal within `tol`.
  bool orthonormal(double tol = kValidationTol) const;

 private:
  Matrix rows_;
  DirectionKind kind_;
};

double lp_norm(std::span<const double> v, double p);

struct NormSummary {
  double sum_l4_sq = 0.0;      // sum_i |theta_i|_4^2
  double sum_l3_cubed = 0.0;   // sum_i |theta_i|_3^3
  double sum_l4_all_sq = 0.0;  // (sum_i |theta_i|_4)^2
};

NormSummary norm_summary(const DirectionSet& ds);

struct GramData {
  Matrix c;
  double lambda_max = 0.0;
  double lambda_min = 0.0;
};

/// Gram matrix c_ij = <theta_i, theta_j> with its extreme eigenvalues.
/// Throws linear_dependence when the smallest eigenvalue is <= 1e-10.
GramData gram(const DirectionSet& ds);
GramData gram(const Matrix& rows);

struct GramSchmidtResult {
  Matrix b;    // k x k lower triangular, theta_i = sum_j b_ij eta_j
  Matrix eta;  // k x n, orthonormal rows
};

/// Modified Gram-Schmidt with one reorthogonalization pass. A pivot below
/// 1e-10 (relative to the row norm) raises linear_dependence.
GramSchmidtResult gram_schmidt(const Matrix& rows);
GramSchmidtResult gram_schmidt(const DirectionSet& ds);

/// Rows of the Sylvester-Hadamard matrix H_n scaled by n^{-1/2}. With
/// `skip_constant` the all-ones row is excluded, giving a centered set.
DirectionSet hypercube_directions(std::size_t n, std::size_t k, bool skip_constant = false);

/// First k rows of a Haar-random orthogonal frame; with `centered` the frame
/// lives in the zero-sum hyperplane.
DirectionSet random_orthonormal(std::size_t n, std::size_t k, std::uint64_t seed,
                                bool centered = false);

/// Independent normalized Gaussian rows (optionally projected onto the
/// zero-sum hyperplane first). Unit length, linearly independent, not
/// orthogonal.
DirectionSet random_unit(std::size_t n, std::size_t k, std::uint64_t seed,
                         bool centered = false);

/// Text block: `# n=<n> k=<k> kind=<kind>` followed by one comma-separated
/// row per vector at 17 significant digits.
std::string to_text(const DirectionSet& ds);
DirectionSet parse_directions(std::string_view text);

}  // namespace cltb
