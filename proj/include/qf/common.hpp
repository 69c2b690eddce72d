#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace qf {

using Real = double;

enum class ErrorKind { Validation, Io, Numerical };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, std::string code, const std::string& msg)
      : std::runtime_error(code + ": " + msg), kind_(kind), code_(std::move(code)) {}
  ErrorKind kind() const { return kind_; }
  const std::string& code() const { return code_; }

private:
  ErrorKind kind_;
  std::string code_;
};

[[noreturn]] inline void throw_validation(const std::string& code, const std::string& msg) {
  throw Error(ErrorKind::Validation, code, msg);
}
[[noreturn]] inline void throw_io(const std::string& code, const std::string& msg) {
  throw Error(ErrorKind::Io, code, msg);
}
[[noreturn]] inline void throw_numerical(const std::string& code, const std::string& msg) {
  throw Error(ErrorKind::Numerical, code, msg);
}

// QF_THREADS caps worker count; unset or 0 falls back to hardware_concurrency.
inline int thread_budget() {
  if (const char* env = std::getenv("QF_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Static partition of [0, n); f(begin, end) runs on each slice.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& f) {
  int nt = thread_budget();
  if (nt <= 1 || n < 2) {
    f(0, n);
    return;
  }
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(nt), n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t b = w * chunk, e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&f, b, e] { f(b, e); });
  }
  for (auto& t : pool) t.join();
}

// 17 significant digits: lossless double round-trip.
inline std::string fmt17(Real x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace qf
