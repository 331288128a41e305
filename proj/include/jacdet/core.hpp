#pragma once

// Shared small types, error taxonomy, and runtime helpers used across the
// library. Everything is header-only.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace jacdet {

// ---------------------------------------------------------------------------
// Error taxonomy
//
// config_error       invalid parameters / malformed configuration (CLI exit 2)
// geometry_error     support or ball escapes the admissible region
// precondition_error operation preconditions violated (critical set, eps=0, ...)
// convergence_error  an iterative method failed to meet its tolerance
// precision_error    a quadrature failed to self-verify at the requested level
// ---------------------------------------------------------------------------

struct config_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct geometry_error : std::domain_error {
  using std::domain_error::domain_error;
};

struct precondition_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct convergence_error : std::runtime_error {
  double last_residual = 0.0;
  convergence_error(const std::string& what, double residual)
      : std::runtime_error(what), last_residual(residual) {}
};

struct precision_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Plane geometry scalars
// ---------------------------------------------------------------------------

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double xx, double yy) : x(xx), y(yy) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::hypot(x, y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

/// Symmetric 2x2 matrix (Hessians).
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  Vec2 apply(const Vec2& v) const {
    return {xx * v.x + xy * v.y, xy * v.x + yy * v.y};
  }
  double trace() const { return xx + yy; }
  double det() const { return xx * yy - xy * xy; }
  /// Frobenius norm squared, |A|^2 = sum of squared entries.
  double frob2() const { return xx * xx + 2.0 * xy * xy + yy * yy; }
};

// ---------------------------------------------------------------------------
// FNV-1a 64-bit hash; stable across platforms, used for report file names.
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string fnv1a64_hex(const std::string& s) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a64(s);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parallel loop helper. JACDET_THREADS caps the worker count; results must be
// written to disjoint preallocated slots so the output is order-independent.
// ---------------------------------------------------------------------------

inline int max_threads() {
  if (const char* env = std::getenv("JACDET_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

template <class Fn>
void parallel_for(std::size_t n, Fn&& body) {
  const int workers = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(max_threads()), n));
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  std::exception_ptr first_error;
  std::mutex err_mutex;
  std::size_t chunk = (n + static_cast<std::size_t>(workers) - 1) / static_cast<std::size_t>(workers);
  for (int w = 0; w < workers; ++w) {
    std::size_t lo = static_cast<std::size_t>(w) * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body, &first_error, &err_mutex] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline bool finite(double v) { return std::isfinite(v); }

}  // namespace jacdet
