#include "gcedmd/parallel.hpp"

#include <atomic>
#include <thread>
#include <vector>

namespace gcedmd {

namespace {
int g_threads = 1;
}

void set_num_threads(int n) { g_threads = n < 1 ? 1 : n; }

int num_threads() { return g_threads; }

void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers = std::min(g_threads, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace gcedmd
