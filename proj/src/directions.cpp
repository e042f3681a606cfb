#include "cltb/directions.hpp"

#include <bit>
#include <cmath>
#include <random>
#include <sstream>

#include "cltb/error.hpp"
#include "cltb/rng.hpp"
#include "cltb/text.hpp"

namespace cltb {

const char* to_string(DirectionKind kind) noexcept {
  switch (kind) {
    case DirectionKind::orthonormal: return "orthonormal";
    case DirectionKind::linearly_independent: return "linearly-independent";
    case DirectionKind::centered_orthonormal: return "centered-orthonormal";
  }
  return "unknown";
}

DirectionKind parse_direction_kind(std::string_view text) {
  if (text == "orthonormal") return DirectionKind::orthonormal;
  if (text == "linearly-independent") return DirectionKind::linearly_independent;
  if (text == "centered-orthonormal") return DirectionKind::centered_orthonormal;
  fail(ErrorCode::invalid_input, "unknown direction kind '" + std::string(text) + "'");
}

DirectionSet::DirectionSet(Matrix rows, DirectionKind kind)
    : rows_(std::move(rows)), kind_(kind) {
  require(k() >= 1, ErrorCode::invalid_input, "direction set needs k >= 1");
  require(k() <= n(), ErrorCode::invalid_input, "direction set needs k <= n");
  for (std::size_t i = 0; i < k(); ++i) {
    const double norm = std::sqrt(dot(row(i), row(i)));
    require(std::abs(norm - 1.0) <= kValidationTol, ErrorCode::invalid_input,
            "direction " + std::to_string(i) + " is not a unit vector (norm " +
                fmt17(norm) + ")");
  }
  switch (kind_) {
    case DirectionKind::centered_orthonormal:
      require(centered(), ErrorCode::invalid_input, "directions are not centered");
      [[fallthrough]];
    case DirectionKind::orthonormal:
      require(orthonormal(), ErrorCode::invalid_input, "directions are not orthogonal");
      break;
    case DirectionKind::linearly_independent:
      gram(rows_);  // throws on dependence
      break;
  }
}

bool DirectionSet::centered(double tol) const {
  for (std::size_t i = 0; i < k(); ++i) {
    CompensatedSum s;
    for (double v : row(i)) s.add(v);
    if (std::abs(s.value()) > tol) return false;
  }
  return true;
}

bool DirectionSet::orthonormal(double tol) const {
  for (std::size_t i = 0; i < k(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(dot(row(i), row(j))) > tol) return false;
  return true;
}

double lp_norm(std::span<const double> v, double p) {
  require(!v.empty(), ErrorCode::invalid_input, "lp_norm of an empty vector");
  require(p >= 1.0, ErrorCode::invalid_input, "lp_norm needs p >= 1");
  double s = 0.0;
  if (p == 1.0) {
    for (double x : v) s += std::abs(x);
    return s;
  }
  if (p == 2.0) {
    for (double x : v) s += x * x;
    return std::sqrt(s);
  }
  if (p == 3.0) {
    for (double x : v) s += std::abs(x) * x * x;
    return std::cbrt(s);
  }
  if (p == 4.0) {
    for (double x : v) s += (x * x) * (x * x);
    return std::sqrt(std::sqrt(s));
  }
  for (double x : v) s += std::pow(std::abs(x), p);
  return std::pow(s, 1.0 / p);
}

NormSummary norm_summary(const DirectionSet& ds) {
  NormSummary out;
  double sum_l4 = 0.0;
  for (std::size_t i = 0; i < ds.k(); ++i) {
    // Sums of powers directly, to avoid a root followed by a power.
    double s4 = 0.0, s3 = 0.0;
    for (double x : ds.row(i)) {
      const double x2 = x * x;
      s4 += x2 * x2;
      s3 += x2 * std::abs(x);
    }
    out.sum_l4_sq += std::sqrt(s4);
    out.sum_l3_cubed += s3;
    sum_l4 += std::sqrt(std::sqrt(s4));
  }
  out.sum_l4_all_sq = sum_l4 * sum_l4;
  return out;
}

GramData gram(const Matrix& rows) {
  const std::size_t k = rows.rows();
  GramData out;
  out.c = Matrix(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = dot(rows.row(i), rows.row(j));
      out.c(i, j) = v;
      out.c(j, i) = v;
    }
  const SymmetricEigen eig = symmetric_eigen(out.c);
  out.lambda_min = eig.values.front();
  out.lambda_max = eig.values.back();
  require(out.lambda_min > kValidationTol, ErrorCode::linear_dependence,
          "directions are linearly dependent (smallest Gram eigenvalue " +
              fmt17(out.lambda_min) + ")");
  return out;
}

GramData gram(const DirectionSet& ds) { return gram(ds.rows()); }

GramSchmidtResult gram_schmidt(const Matrix& rows) {
  const std::size_t k = rows.rows(), n = rows.cols();
  GramSchmidtResult out{Matrix(k, k), Matrix(k, n)};
  std::vector<double> v(n);
  for (std::size_t i = 0; i < k; ++i) {
    const auto src = rows.row(i);
    v.assign(src.begin(), src.end());
    const double scale = std::sqrt(dot(v, v));
    require(scale > 0.0, ErrorCode::linear_dependence, "zero direction vector");
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < i; ++j) {
        const auto eta_j = out.eta.row(j);
        const double c = dot(v, eta_j);
        out.b(i, j) += c;
        for (std::size_t r = 0; r < n; ++r) v[r] -= c * eta_j[r];
      }
    }
    const double pivot = std::sqrt(dot(v, v));
    require(pivot > kValidationTol * scale, ErrorCode::linear_dependence,
            "Gram-Schmidt pivot " + fmt17(pivot) + " at row " + std::to_string(i));
    out.b(i, i) = pivot;
    auto eta_i = out.eta.row(i);
    for (std::size_t r = 0; r < n; ++r) eta_i[r] = v[r] / pivot;
  }
  return out;
}

GramSchmidtResult gram_schmidt(const DirectionSet& ds) { return gram_schmidt(ds.rows()); }

DirectionSet hypercube_directions(std::size_t n, std::size_t k, bool skip_constant) {
  require(n >= 1 && std::has_single_bit(n), ErrorCode::unsupported_dimension,
          "hypercube directions need n to be a power of two (got " + std::to_string(n) +
              ")");
  const std::size_t offset = skip_constant ? 1 : 0;
  require(k >= 1 && k + offset <= n, ErrorCode::invalid_input,
          "hypercube directions: k out of range");
  const double h = 1.0 / std::sqrt(static_cast<double>(n));
  Matrix rows(k, n);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t r = 0; r < n; ++r)
      rows(i, r) = (std::popcount((i + offset) & r) % 2 == 0) ? h : -h;
  return DirectionSet(std::move(rows), skip_constant ? DirectionKind::centered_orthonormal
                                                     : DirectionKind::orthonormal);
}

namespace {

Matrix gaussian_rows(std::size_t n, std::size_t k, std::uint64_t seed, bool centered) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Matrix rows(k, n);
  for (std::size_t i = 0; i < k; ++i) {
    auto row = rows.row(i);
    for (double& x : row) x = normal(rng);
    if (centered) {
      CompensatedSum s;
      for (double x : row) s.add(x);
      const double mean = s.value() / static_cast<double>(n);
      for (double& x : row) x -= mean;
    }
  }
  return rows;
}

// Removes rounding drift from the hyperplane constraint and the unit norm.
void recenter_and_normalize(Matrix& rows, bool centered) {
  const std::size_t n = rows.cols();
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    auto row = rows.row(i);
    if (centered) {
      CompensatedSum s;
      for (double x : row) s.add(x);
      const double mean = s.value() / static_cast<double>(n);
      for (double& x : row) x -= mean;
    }
    const double norm = std::sqrt(dot(row, row));
    for (double& x : row) x /= norm;
  }
}

}  // namespace

DirectionSet random_orthonormal(std::size_t n, std::size_t k, std::uint64_t seed,
                                bool centered) {
  require(k >= 1 && k <= n, ErrorCode::invalid_input, "random_orthonormal: need 1 <= k <= n");
  require(!centered || k <= n - 1, ErrorCode::invalid_input,
          "random_orthonormal: centered frames need k <= n - 1");
  // A standard Gaussian projected onto the zero-sum hyperplane is a standard
  // Gaussian of that hyperplane, so orthonormalizing such rows yields a Haar
  // frame of the hyperplane.
  Matrix eta = gram_schmidt(gaussian_rows(n, k, seed, centered)).eta;
  recenter_and_normalize(eta, centered);
  return DirectionSet(std::move(eta), centered ? DirectionKind::centered_orthonormal
                                               : DirectionKind::orthonormal);
}

DirectionSet random_unit(std::size_t n, std::size_t k, std::uint64_t seed, bool centered) {
  require(k >= 1 && k <= n, ErrorCode::invalid_input, "random_unit: need 1 <= k <= n");
  require(!centered || k <= n - 1, ErrorCode::invalid_input,
          "random_unit: centered sets need k <= n - 1");
  Matrix rows = gaussian_rows(n, k, seed, centered);
  recenter_and_normalize(rows, centered);
  return DirectionSet(std::move(rows), DirectionKind::linearly_independent);
}

std::string to_text(const DirectionSet& ds) {
  std::string out = "# n=" + std::to_string(ds.n()) + " k=" + std::to_string(ds.k()) +
                    " kind=" + to_string(ds.kind()) + "\n";
  for (std::size_t i = 0; i < ds.k(); ++i) {
    const auto row = ds.row(i);
    for (std::size_t r = 0; r < row.size(); ++r) {
      if (r) out += ',';
      out += fmt17(row[r]);
    }
    out += '\n';
  }
  return out;
}

DirectionSet parse_directions(std::string_view text) {
  std::size_t n = 0, k = 0;
  DirectionKind kind = DirectionKind::orthonormal;
  bool have_header = false;
  std::vector<double> values;
  std::size_t rows_read = 0;
  for (std::string_view line : split(text, '\n')) {
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (have_header) continue;
      for (std::string_view field : split(trim(line.substr(1)), ' ')) {
        field = trim(field);
        if (field.empty()) continue;
        const auto eq = field.find('=');
        require(eq != std::string_view::npos, ErrorCode::invalid_input,
                "malformed direction header field '" + std::string(field) + "'");
        const auto key = field.substr(0, eq), value = field.substr(eq + 1);
        if (key == "n")
          n = static_cast<std::size_t>(parse_double(value));
        else if (key == "k")
          k = static_cast<std::size_t>(parse_double(value));
        else if (key == "kind")
          kind = parse_direction_kind(value);
      }
      have_header = true;
      continue;
    }
    require(have_header, ErrorCode::invalid_input, "direction block is missing its header");
    const auto cells = split(line, ',');
    require(cells.size() == n, ErrorCode::invalid_input,
            "direction row " + std::to_string(rows_read) + " has " +
                std::to_string(cells.size()) + " entries, expected " + std::to_string(n));
    for (auto cell : cells) values.push_back(parse_double(cell));
    ++rows_read;
  }
  require(have_header, ErrorCode::invalid_input, "direction block is missing its header");
  require(rows_read == k, ErrorCode::invalid_input,
          "direction block declares k=" + std::to_string(k) + " but has " +
              std::to_string(rows_read) + " rows");
  return DirectionSet(Matrix(k, n, std::move(values)), kind);
}

}  // namespace cltb
