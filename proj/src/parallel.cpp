#include "pcflow/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace pcflow {

namespace {
std::atomic<int> g_override{0};

int from_environment() {
  const char* env = std::getenv("PCFLOW_THREADS");
  if (env == nullptr) return 1;
  try {
    const int n = std::stoi(env);
    return n > 0 ? n : 1;
  } catch (...) {
    return 1;
  }
}
}  // namespace

int thread_count() {
  if (const int n = g_override.load(); n > 0) return n;
  static const int env = from_environment();
  return env;
}

void set_thread_count(int n) { g_override.store(n > 0 ? n : 0); }

}  // namespace pcflow
