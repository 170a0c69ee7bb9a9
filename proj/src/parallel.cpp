#include "wcsplit/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace wcsplit {
namespace {

std::atomic<std::size_t> g_override{0};

std::size_t env_cap() {
  const char* raw = std::getenv("WCSPLIT_THREADS");
  if (raw == nullptr) return 0;
  std::size_t value = 0;
  const auto* end = raw + std::strlen(raw);
  auto [ptr, ec] = std::from_chars(raw, end, value);
  if (ec != std::errc{} || ptr != end) return 0;
  return value;
}

}  // namespace

std::size_t worker_count() {
  if (std::size_t forced = g_override.load(); forced > 0) return forced;
  std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (std::size_t cap = env_cap(); cap > 0) hw = std::min(hw, cap);
  return hw;
}

void set_worker_count(std::size_t workers) { g_override.store(workers); }

void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& body) {
  if (end <= begin) return;
  const std::size_t count = end - begin;
  const std::size_t workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = begin; i < end; ++i) body(i);
    return;
  }

  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const std::size_t block = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = begin + w * block;
    const std::size_t hi = std::min(end, lo + block);
    if (lo >= hi) break;
    threads.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace wcsplit
