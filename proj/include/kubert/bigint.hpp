#pragma once

// Arbitrary-precision integer plumbing shared by the whole library.
//
// Everything here is exact: cpp_int for integers, cpp_rational for the few
// places that accumulate fractional slack. No floating point anywhere.

#include <boost/multiprecision/cpp_int.hpp>

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace kubert {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad inputs and violated type invariants.
struct domain_error : error {
  using error::error;
};

// product_set sums that are not pairwise distinct (invalid sheaf datum).
struct collision_error : domain_error {
  using domain_error::domain_error;
};

// A sweep or enumeration that would exceed the configured budget. Always
// reported, never silently truncated.
struct budget_error : error {
  std::uint64_t required = 0;
  std::uint64_t allowed = 0;
  budget_error(const std::string& what, std::uint64_t req, std::uint64_t allow)
      : error(what), required(req), allowed(allow) {}
};

inline Int pow2m1(unsigned k) { return (Int(1) << k) - 1; }

inline Int ipow(const Int& base, unsigned e) {
  Int r = 1, b = base;
  for (; e; e >>= 1) {
    if (e & 1) r *= b;
    if (e > 1) b *= b;
  }
  return r;
}

// Sum of base-p digits of n >= 0. For p = 2 this walks the limb array with a
// per-word popcount fold; the inner loops elsewhere feed it ~336-bit numbers.
inline std::uint64_t digit_sum(std::uint64_t p, const Int& n) {
  if (p < 2) throw domain_error("digit_sum: base must be >= 2");
  if (n < 0) throw domain_error("digit_sum: negative input");
  if (n == 0) return 0;

  if (p == 2) {
    const auto& b = n.backend();
    std::uint64_t s = 0;
    for (unsigned i = 0; i < b.size(); ++i) s += std::popcount(static_cast<std::uint64_t>(b.limbs()[i]));
    return s;
  }

  // Generic base: peel word-sized chunks p^e, then digit-sum the remainder.
  unsigned e = 0;
  std::uint64_t chunk = 1;
  while (chunk <= (UINT64_MAX - 1) / p / p) {
    chunk *= p;
    ++e;
  }
  Int q = n, r;
  const Int chunk_i = chunk;
  std::uint64_t s = 0;
  while (q != 0) {
    boost::multiprecision::divide_qr(q, chunk_i, q, r);
    std::uint64_t w = static_cast<std::uint64_t>(r);
    while (w) {
      s += w % p;
      w /= p;
    }
  }
  return s;
}

// Smallest k >= 1 with p^k == 1 (mod m). Rejects gcd(p, m) > 1. The iteration
// cap guards callers that hand in a denominator with astronomically large
// order; every denominator this library produces has order <= a few hundred.
inline unsigned mult_order(const Int& p, const Int& m, unsigned cap = 1u << 16) {
  if (m < 1) throw domain_error("mult_order: modulus must be positive");
  if (m == 1) return 1;
  if (gcd(p, m) != 1) throw domain_error("mult_order: gcd(p, m) > 1");
  Int cur = p % m;
  for (unsigned k = 1; k <= cap; ++k) {
    if (cur == 1) return k;
    cur = (cur * p) % m;
  }
  throw budget_error("mult_order: order exceeds iteration cap", cap, cap);
}

// Largest power of two dividing a (a >= 1).
inline std::uint64_t two_part(std::uint64_t a) {
  if (a == 0) throw domain_error("two_part: input must be positive");
  return a & (~a + 1);
}

// gcd(2^a+1, 2^b+1) = 1 iff the 2-parts of a and b differ.
inline bool coprime_2pow(std::uint64_t a, std::uint64_t b) { return two_part(a) != two_part(b); }

inline std::uint64_t to_u64(const Int& n, const char* what) {
  if (n < 0 || n > UINT64_MAX) throw domain_error(std::string(what) + ": value out of machine range");
  return static_cast<std::uint64_t>(n);
}

}  // namespace kubert
