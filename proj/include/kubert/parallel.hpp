#pragma once

// Deterministic block-parallel driving for the sweeps.
//
// The index range [0, total) is cut into fixed-size blocks. Blocks are
// processed in waves of `jobs` consecutive blocks, one block per thread.
// After each wave the per-block results are merged in block order and the
// driver stops at the first wave that produced one. Because blocks are
// scanned in ascending order inside each worker and waves are consecutive
// prefixes, the merged result is the global first hit in index order, for
// any worker count including 1.

#include <cstdint>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

namespace kubert {

template <class Result>
std::optional<Result> run_blocks_first(std::uint64_t total, std::uint64_t block_size, unsigned jobs,
                                       const std::function<std::optional<Result>(std::uint64_t lo, std::uint64_t hi)>& fn) {
  if (jobs == 0) jobs = 1;
  if (block_size == 0) block_size = 1;
  const std::uint64_t nblocks = total == 0 ? 0 : (total + block_size - 1) / block_size;

  for (std::uint64_t wave = 0; wave * jobs < nblocks; ++wave) {
    const std::uint64_t first = wave * jobs;
    const std::uint64_t count = std::min<std::uint64_t>(jobs, nblocks - first);
    std::vector<std::optional<Result>> results(count);
    if (count == 1 || jobs == 1) {
      for (std::uint64_t k = 0; k < count; ++k) {
        std::uint64_t lo = (first + k) * block_size;
        std::uint64_t hi = std::min(total, lo + block_size);
        results[k] = fn(lo, hi);
      }
    } else {
      std::vector<std::thread> threads;
      threads.reserve(count);
      for (std::uint64_t k = 0; k < count; ++k) {
        threads.emplace_back([&, k] {
          std::uint64_t lo = (first + k) * block_size;
          std::uint64_t hi = std::min(total, lo + block_size);
          results[k] = fn(lo, hi);
        });
      }
      for (auto& t : threads) t.join();
    }
    for (auto& r : results)
      if (r) return r;
  }
  return std::nullopt;
}

// Exact associative reduction over fixed blocks, merged in block order.
template <class Acc>
Acc map_reduce_blocks(std::uint64_t total, std::uint64_t block_size, unsigned jobs, Acc init,
                      const std::function<Acc(std::uint64_t lo, std::uint64_t hi)>& block_fn,
                      const std::function<Acc(Acc, Acc)>& merge) {
  if (jobs == 0) jobs = 1;
  if (block_size == 0) block_size = 1;
  const std::uint64_t nblocks = total == 0 ? 0 : (total + block_size - 1) / block_size;
  Acc acc = std::move(init);
  for (std::uint64_t wave = 0; wave * jobs < nblocks; ++wave) {
    const std::uint64_t first = wave * jobs;
    const std::uint64_t count = std::min<std::uint64_t>(jobs, nblocks - first);
    std::vector<Acc> results(count);
    if (count == 1 || jobs == 1) {
      for (std::uint64_t k = 0; k < count; ++k) {
        std::uint64_t lo = (first + k) * block_size;
        std::uint64_t hi = std::min(total, lo + block_size);
        results[k] = block_fn(lo, hi);
      }
    } else {
      std::vector<std::thread> threads;
      threads.reserve(count);
      for (std::uint64_t k = 0; k < count; ++k) {
        threads.emplace_back([&, k] {
          std::uint64_t lo = (first + k) * block_size;
          std::uint64_t hi = std::min(total, lo + block_size);
          results[k] = block_fn(lo, hi);
        });
      }
      for (auto& t : threads) t.join();
    }
    for (auto& r : results) acc = merge(std::move(acc), std::move(r));
  }
  return acc;
}

}  // namespace kubert
