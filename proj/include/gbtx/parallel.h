#ifndef GBTX_PARALLEL_H_
#define GBTX_PARALLEL_H_

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gbtx {

// Computes fn(state, i) for i in [0, n) on `jobs` threads, each thread owning
// the state returned by make_state(). Results are stored by index, so output
// order never depends on scheduling. If any call throws, the exception of
// the lowest failing index is rethrown.
template <typename Result, typename MakeState, typename Fn>
std::vector<Result> ParallelMap(std::size_t n, int jobs, MakeState make_state, Fn fn) {
  std::vector<Result> results(n);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_index = n;
  std::exception_ptr error;

  auto worker = [&] {
    auto state = make_state();
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      try {
        results[i] = fn(state, i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };

  const std::size_t threads =
      jobs <= 1 || n <= 1 ? 1 : std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace gbtx

#endif  // GBTX_PARALLEL_H_
