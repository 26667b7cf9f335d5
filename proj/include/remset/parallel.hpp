#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace remset {

inline unsigned default_threads() {
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Splits [first, last] into blocks of `block` values, computes up to
/// `threads` blocks concurrently and hands results to `emit` strictly in
/// ascending block order.
///
///   compute(lo, hi) -> Result      (must be safe to run concurrently)
///   emit(lo, hi, Result&&)         (always called from the calling thread)
template <class Compute, class Emit>
void for_each_block_ordered(std::uint64_t first, std::uint64_t last,
                            std::uint64_t block, unsigned threads,
                            Compute&& compute, Emit&& emit) {
  if (first > last) return;
  block = std::max<std::uint64_t>(block, 1);
  threads = std::max(threads, 1u);
  using Result = decltype(compute(first, last));

  std::uint64_t lo = first;
  while (lo <= last) {
    std::vector<std::uint64_t> starts;
    for (unsigned i = 0; i < threads && lo <= last; ++i) {
      starts.push_back(lo);
      if (last - lo < block) {
        lo = last + 1;
        break;
      }
      lo += block;
    }
    auto hi_of = [&](std::uint64_t s) { return std::min(last, s + block - 1); };

    std::vector<Result> results(starts.size());
    if (starts.size() == 1) {
      results[0] = compute(starts[0], hi_of(starts[0]));
    } else {
      std::vector<std::exception_ptr> errors(starts.size());
      {
        std::vector<std::jthread> pool;
        pool.reserve(starts.size());
        for (std::size_t i = 0; i < starts.size(); ++i)
          pool.emplace_back([&, i] {
            try {
              results[i] = compute(starts[i], hi_of(starts[i]));
            } catch (...) {
              errors[i] = std::current_exception();
            }
          });
      }
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    }
    for (std::size_t i = 0; i < starts.size(); ++i)
      emit(starts[i], hi_of(starts[i]), std::move(results[i]));
  }
}

}  // namespace remset
