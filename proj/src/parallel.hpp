#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cltb::detail {

inline constexpr std::size_t kBlockSize = 4096;

/// Runs `work(begin, end)` over fixed-size blocks of [0, total) on up to
/// `threads` workers and returns the per-block results in block order. Block
/// boundaries do not depend on the worker count.
template <class Result, class Work>
std::vector<Result> run_blocks(std::size_t total, unsigned threads, Work work) {
  const std::size_t blocks = (total + kBlockSize - 1) / kBlockSize;
  std::vector<Result> results(blocks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    try {
      for (std::size_t b = next++; b < blocks; b = next++) {
        const std::size_t begin = b * kBlockSize;
        results[b] = work(begin, std::min(total, begin + kBlockSize));
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next = blocks;
    }
  };
  const unsigned count =
      static_cast<unsigned>(std::clamp<std::size_t>(threads ? threads : 1, 1, std::max<std::size_t>(blocks, 1)));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(count);
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace cltb::detail
