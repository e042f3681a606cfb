#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cltb/bounds.hpp"
#include "cltb/directions.hpp"
#include "cltb/empirics.hpp"
#include "cltb/sources.hpp"
#include "cltb/testfuncs.hpp"

namespace cltb {

/// First line of every CSV the tool writes.
inline constexpr const char* kSchemaLine = "# schema=1";

/// Command-line overrides, applied on top of the config file before
/// validation and before the digest is taken.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<std::string> theorem;  // comma-separated ids
  std::optional<unsigned> threads;
  std::optional<std::string> output;
};

/// One fully built configuration point.
struct Cell {
  Model model;
  DirectionSet directions;
  TestFunction g;
  std::vector<Theorem> theorems;
};

struct CheckLine {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct CheckReport {
  std::vector<CheckLine> lines;
  bool pass = true;
  std::string to_text() const;
};

struct ScanResult {
  std::vector<VerificationReport> rows;
  std::string csv;
  bool pass = true;
};

enum class ScanAxis { n, k };
ScanAxis parse_scan_axis(std::string_view text);  // throws config

/// A validated experiment. Construction parses the JSON config, applies the
/// overrides, builds model, directions and test function, and checks every
/// requested theorem against them; all failures raise ErrorCode::config (or
/// a more specific code) before any Monte Carlo work starts.
class Experiment {
 public:
  static Experiment from_json(std::string_view text, const std::string& base_dir = ".",
                              const Overrides& overrides = {});

  /// FNV-1a of the canonical config (threads and output excluded).
  const std::string& digest() const noexcept { return digest_; }
  const std::string& canonical() const noexcept { return canonical_; }
  const std::optional<std::string>& output() const noexcept { return output_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  const Cell& cell() const noexcept { return cells_.front(); }
  std::size_t samples() const noexcept { return samples_; }
  std::uint64_t seed() const noexcept { return seed_; }

  /// Multiplies every bound total in verify and scan (negative controls).
  void set_shrink(double factor);
  /// Scales the Stein lambda used by the linearity check (negative control).
  void set_lambda_scale(double scale);

  std::vector<BoundReport> bounds() const;
  std::string bound_csv() const;

  std::vector<VerificationReport> verify() const;
  std::string verify_csv(const std::vector<VerificationReport>& rows) const;

  ScanResult scan(ScanAxis axis, const std::vector<std::size_t>& values) const;

  CheckReport check() const;

  MomentSummary moments() const;
  std::string moments_csv() const;

 private:
  Experiment() = default;

  Cell build_cell(std::size_t n, std::size_t k, std::vector<std::string>* warnings) const;
  VerificationReport verify_one(const Cell& cell, Theorem theorem) const;

  std::string canonical_;
  std::string digest_;
  std::optional<std::string> output_;
  std::vector<std::string> warnings_;
  std::string base_dir_;
  std::string config_;  // canonical dump including every field
  std::vector<Cell> cells_;
  std::size_t samples_ = 100000;
  std::uint64_t seed_ = 1;
  unsigned threads_ = 1;
  std::size_t pair_samples_ = 2000;
  ExchangeableConstants constants_;
  ExpectationMethod gaussian_method_ = ExpectationMethod::closed_form;
  bool gaussian_auto_ = true;
  GaussianBudget gaussian_budget_;
  double shrink_ = 1.0;
  double lambda_scale_ = 1.0;
};

std::string bound_csv(const std::vector<BoundReport>& rows);
std::string moments_csv_header();
std::string to_csv_row(const MomentSummary& m);

/// 64-bit FNV-1a, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view text);

}  // namespace cltb
