#pragma once

#include <cmath>
#include <cstddef>

#include "cltb/linalg.hpp"

namespace cltb {

struct Estimate {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean
};

/// Compensated first and second moment sums. Merging is exact up to the
/// compensation error, so block-wise accumulation gives the same result for
/// any worker count as long as blocks are merged in a fixed order.
class RunningStats {
 public:
  void add(double x) noexcept {
    s1_.add(x);
    s2_.add(x * x);
    ++count_;
  }

  void merge(const RunningStats& other) noexcept {
    s1_.add(other.s1_.value());
    s2_.add(other.s2_.value());
    count_ += other.count_;
  }

  std::size_t count() const noexcept { return count_; }
  double mean() const noexcept {
    return count_ ? s1_.value() / static_cast<double>(count_) : 0.0;
  }

  double variance() const noexcept {
    if (count_ < 2) return 0.0;
    const double nd = static_cast<double>(count_);
    const double m = mean();
    const double v = (s2_.value() - nd * m * m) / (nd - 1.0);
    return v > 0.0 ? v : 0.0;
  }

  Estimate estimate() const noexcept {
    const double nd = static_cast<double>(count_ ? count_ : 1);
    return {mean(), std::sqrt(variance() / nd)};
  }

 private:
  CompensatedSum s1_, s2_;
  std::size_t count_ = 0;
};

}  // namespace cltb
