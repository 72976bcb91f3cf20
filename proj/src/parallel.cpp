#include "avlab/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace avlab {

namespace {
std::atomic<std::size_t> g_workers{1};
}

std::size_t default_workers() { return g_workers.load(); }

void set_default_workers(std::size_t workers) { g_workers.store(workers == 0 ? 1 : workers); }

void parallel_chunks(std::size_t num_chunks, std::size_t workers,
                     const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || num_chunks <= 1) {
    for (std::size_t i = 0; i < num_chunks; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= num_chunks) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  const std::size_t n = std::min(workers, num_chunks);
  pool.reserve(n);
  for (std::size_t t = 0; t < n; ++t) pool.emplace_back(body);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace avlab
