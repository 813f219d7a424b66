#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace umbel {

enum class ErrorCode { Validation, Budget, NoSolution, NoFeasible };

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(const std::string& what) { throw Error(ErrorCode::Validation, what); }
inline void require(bool ok, const std::string& what) {
  if (!ok) fail(what);
}

using Point = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kRelTol = 1e-9;
inline constexpr double kAbsTol = 1e-12;

bool approx_equal(double a, double b, double rel = kRelTol, double abs = kAbsTol);
// a <= b up to the default tolerance
bool approx_le(double a, double b, double rel = kRelTol, double abs = kAbsTol);

// splitmix64 mixing of (seed, stream); used to give every chunk of work its own generator
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

void set_thread_count(unsigned n);  // 0 means hardware concurrency
unsigned thread_count();

// Calls fn(i) for i in [0, n) on the worker pool. fn must only write to slot i.
// True on pool workers; nested parallel_for calls then run inline.
inline bool& inside_pool() {
  thread_local bool flag = false;
  return flag;
}

template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  unsigned workers = inside_pool() ? 1 : thread_count();
  if (n == 0) return;
  if (workers <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  if (workers > n) workers = static_cast<unsigned>(n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  auto body = [&]() {
    inside_pool() = true;
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        if (!failed.exchange(true)) err = std::current_exception();
        return;
      }
    }
  };
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace umbel
