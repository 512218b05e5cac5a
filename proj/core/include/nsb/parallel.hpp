#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nsb {

// Worker count for parallel loops; 0 means hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

// Calls fn(chunk, begin, end) over [0, n) split into contiguous chunks. Chunk
// boundaries depend only on n and the chunk count, never on scheduling, so a
// caller that reduces per-chunk results in chunk order gets identical numbers
// for any thread count.
template <class Fn>
void parallel_chunks(std::size_t n, std::size_t chunks, Fn&& fn) {
  if (n == 0) return;
  chunks = std::max<std::size_t>(1, std::min(chunks, n));
  const std::size_t workers = std::min<std::size_t>(thread_count(), chunks);
  auto bounds = [&](std::size_t c) {
    return std::pair<std::size_t, std::size_t>{n * c / chunks, n * (c + 1) / chunks};
  };
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      auto [b, e] = bounds(c);
      fn(c, b, e);
    }
    return;
  }
  std::exception_ptr failure;
  std::mutex m;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t c = w; c < chunks; c += workers) {
        auto [b, e] = bounds(c);
        try {
          fn(c, b, e);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// Fixed chunk count used by reductions so results do not depend on threads.
inline constexpr std::size_t kReduceChunks = 64;

template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn) {
  std::vector<T> out(n);
  parallel_chunks(n, kReduceChunks, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = fn(i);
  });
  return out;
}

template <class Fn>
double parallel_sum(std::size_t n, Fn&& fn) {
  std::vector<double> part(kReduceChunks, 0.0);
  parallel_chunks(n, kReduceChunks, [&](std::size_t c, std::size_t b, std::size_t e) {
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += fn(i);
    part[c] = s;
  });
  double total = 0.0;
  for (double p : part) total += p;
  return total;
}

}  // namespace nsb
