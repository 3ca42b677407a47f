#include "conecalc/parallel.hpp"

#include <atomic>

namespace conecalc {

namespace {
std::atomic<int> g_threads{1};
}

int thread_count() { return g_threads.load(); }

void set_thread_count(int n) { g_threads.store(n < 1 ? 1 : n); }

}  // namespace conecalc
