#include "lqrlab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace lqrlab {

namespace {

std::atomic<int> g_num_threads{0};  // 0 = not set yet, use hardware default

int default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Guards against nested parallelism: inner loops run serially.
thread_local bool t_inside_parallel_region = false;

}  // namespace

void set_num_threads(int n) {
  if (n < 1) throw std::invalid_argument("set_num_threads: n must be >= 1");
  g_num_threads.store(n, std::memory_order_relaxed);
}

int num_threads() {
  const int n = g_num_threads.load(std::memory_order_relaxed);
  return n == 0 ? default_threads() : n;
}

namespace detail {

void parallel_for_impl(std::int64_t count,
                       const std::function<void(std::int64_t)>& body) {
  if (count <= 0) return;
  const int workers =
      t_inside_parallel_region
          ? 1
          : static_cast<int>(std::min<std::int64_t>(num_threads(), count));
  if (workers <= 1) {
    const bool was_inside = t_inside_parallel_region;
    t_inside_parallel_region = true;
    try {
      for (std::int64_t i = 0; i < count; ++i) body(i);
    } catch (...) {
      t_inside_parallel_region = was_inside;
      throw;
    }
    t_inside_parallel_region = was_inside;
    return;
  }

  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::atomic<std::int64_t> next{0};

  auto work = [&]() {
    t_inside_parallel_region = true;
    for (;;) {
      const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers) - 1);
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

}  // namespace lqrlab
