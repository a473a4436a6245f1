#include "parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace smpi::detail {

int worker_count() {
  int n = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("SMPI_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap > 0) n = std::min(n, cap);
    } catch (const std::exception&) {
      // unparsable value: ignore the cap
    }
  }
  return n;
}

void parallel_for_rows(int rows, const std::function<void(int)>& body) {
  const int workers = std::min(worker_count(), rows);
  if (workers <= 1) {
    for (int r = 0; r < rows; ++r) body(r);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const int begin = rows * w / workers;
    const int end = rows * (w + 1) / workers;
    threads.emplace_back([&, w, begin, end] {
      try {
        for (int r = begin; r < end; ++r) body(r);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace smpi::detail
