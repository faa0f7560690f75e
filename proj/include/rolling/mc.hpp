#ifndef ROLLING_MC_HPP
#define ROLLING_MC_HPP

#include <cstddef>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace rolling {

// Deterministic reduction: recursive pairwise summation in index order.
// The result depends only on the contents of v, never on thread count.
double pairwise_sum(const std::vector<double>& v);

struct MeanStderr {
  double mean = 0.0;
  double stderr_of_mean = 0.0;
  std::size_t n = 0;
};

// Sample mean and standard error (unbiased variance / sqrt(n)).
MeanStderr mean_stderr(const std::vector<double>& v);

// Worker count resolution: explicit request > 0 wins, otherwise the
// ROLLING_LAB_THREADS environment variable, otherwise hardware concurrency.
// Never returns 0. Worker count affects speed only; all reductions are
// performed in path-index order after the parallel region.
unsigned resolve_thread_count(int requested);

// Runs body(i) for i in [0, n) on `threads` workers over contiguous index
// blocks. Exceptions from workers are captured and the first one is
// rethrown on the calling thread after all workers join.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  if (n == 0) return;
  if (threads <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    pool.emplace_back([&, w, begin, end]() {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace rolling

#endif
