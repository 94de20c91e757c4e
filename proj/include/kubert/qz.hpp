#pragma once

// Exact arithmetic on Q/Z with denominators coprime to the characteristic,
// and the Kubert V-function via base-p digit sums:
//
//   V(a/(p^k-1) + z) = digit_sum_p(a) / (k(p-1)).
//
// Elements are stored reduced with 0 <= num < den; the p^k-1 re-expansion
// happens only inside v_eval, so denominators stay small under addition.

#include <kubert/bigint.hpp>

#include <compare>
#include <map>
#include <mutex>
#include <numeric>
#include <shared_mutex>
#include <utility>

namespace kubert {

class QZ {
 public:
  QZ() : num_(0), den_(1) {}

  // Class of a/m in Q/Z, canonical reduced form. The characteristic is only
  // needed to reject denominators divisible by p after reduction.
  static QZ make(Int a, Int m, std::uint64_t p) {
    QZ x = make_unchecked(std::move(a), std::move(m));
    if (x.den_ % p == 0) throw domain_error("QZ: denominator divisible by the characteristic");
    return x;
  }

  // Reduction without the characteristic check; group operations below are
  // closed over p'-denominators so they use this form.
  static QZ make_unchecked(Int a, Int m) {
    if (m < 1) throw domain_error("QZ: denominator must be positive");
    Int g = gcd(a, m);
    if (g > 1) {
      a /= g;
      m /= g;
    }
    a %= m;
    if (a < 0) a += m;
    QZ x;
    x.num_ = std::move(a);
    x.den_ = std::move(m);
    return x;
  }

  const Int& num() const { return num_; }
  const Int& den() const { return den_; }
  bool is_zero() const { return num_ == 0; }

  friend QZ qz_add(const QZ& x, const QZ& y) {
    Int den = lcm(x.den_, y.den_);
    Int num = x.num_ * (den / x.den_) + y.num_ * (den / y.den_);
    return make_unchecked(std::move(num), std::move(den));
  }

  friend QZ qz_neg(const QZ& x) {
    if (x.is_zero()) return x;
    QZ r;
    r.num_ = x.den_ - x.num_;
    r.den_ = x.den_;
    return r;
  }

  friend QZ qz_scale(const Int& n, const QZ& x) { return make_unchecked(n * x.num_, x.den_); }

  friend QZ qz_sub(const QZ& x, const QZ& y) { return qz_add(x, qz_neg(y)); }

  bool operator==(const QZ& o) const { return num_ == o.num_ && den_ == o.den_; }

  // Canonical order: by (den, num). CharSets sort with this so reports and
  // serializations are deterministic.
  std::strong_ordering operator<=>(const QZ& o) const {
    if (auto c = den_.compare(o.den_); c != 0) return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
    if (auto c = num_.compare(o.num_); c != 0) return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

 private:
  Int num_, den_;  // gcd(num, den) = 1, 0 <= num < den
};

inline QZ qz_make(Int a, Int m, std::uint64_t p) { return QZ::make(std::move(a), std::move(m), p); }

// Exact value of the V-function: a reduced nonnegative rational in [0, 1)
// whose denominator divides k(p-1), k the order of p mod the input's
// denominator. Small enough for machine words throughout.
struct VValue {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  VValue() = default;
  VValue(std::uint64_t n, std::uint64_t d) : num(n), den(d) {
    if (d == 0) throw domain_error("VValue: zero denominator");
    std::uint64_t g = std::gcd(num, den);
    num /= g;
    den /= g;
    if (num >= den && !(num == 0 && den == 1)) throw domain_error("VValue: value outside [0,1)");
  }

  bool operator==(const VValue& o) const { return num == o.num && den == o.den; }
  auto operator<=>(const VValue& o) const {
    using u128 = unsigned __int128;
    return u128(num) * o.den <=> u128(o.num) * den;
  }

  Rat to_rat() const { return Rat(num, den); }
  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
};

// V via the canonical route: reduce, find k = ord_p(den), re-expand the
// numerator over p^k - 1 and take the digit sum.
inline VValue v_eval(std::uint64_t p, const QZ& x) {
  if (x.den() % p == 0) throw domain_error("v_eval: denominator divisible by the characteristic");
  if (x.is_zero()) return VValue(0, 1);
  unsigned k = mult_order(p, x.den());
  Int a = x.num() * ((ipow(p, k) - 1) / x.den());
  std::uint64_t ds = digit_sum(p, a);
  return VValue(ds, std::uint64_t(k) * (p - 1));
}

// Independent evaluation path: accumulate the base-p digits of num/den over
// one period by long division instead of re-expanding the numerator. Used to
// cross-check v_eval; the two must agree exactly everywhere.
inline VValue v_eval_period(std::uint64_t p, const QZ& x) {
  if (x.den() % p == 0) throw domain_error("v_eval_period: denominator divisible by the characteristic");
  if (x.is_zero()) return VValue(0, 1);
  unsigned k = mult_order(p, x.den());
  Int r = x.num();
  std::uint64_t ds = 0;
  for (unsigned i = 0; i < k; ++i) {
    r *= p;
    ds += to_u64(r / x.den(), "v_eval_period digit");
    r %= x.den();
  }
  return VValue(ds, std::uint64_t(k) * (p - 1));
}

// uint64 fast path for the long-division route: digit-sum numerator of
// V(num/den) scaled to denominator k, for odd den < 2^63. The sweeps feed it
// millions of points, so no allocation and no bignum here.
inline std::uint64_t v_bits_u64(std::uint64_t num, std::uint64_t den, unsigned k) {
  std::uint64_t r = num % den, ones = 0;
  for (unsigned i = 0; i < k; ++i) {
    r <<= 1;
    if (r >= den) {
      r -= den;
      ++ones;
    }
  }
  return ones;  // V = ones / k  (p = 2)
}

// Opt-in memo for v_eval keyed by (num, den). Semantically invisible: inserts
// are idempotent and reads never tear (shared_mutex). Sweeps use their own
// tables; this serves the lemma verifiers, which revisit small denominators.
class VCache {
 public:
  explicit VCache(std::uint64_t p) : p_(p) {}

  VValue operator()(const QZ& x) {
    {
      std::shared_lock lk(mu_);
      if (auto it = map_.find(key(x)); it != map_.end()) return it->second;
    }
    VValue v = v_eval(p_, x);
    std::unique_lock lk(mu_);
    map_.emplace(key(x), v);
    return v;
  }

 private:
  static std::pair<Int, Int> key(const QZ& x) { return {x.num(), x.den()}; }
  std::uint64_t p_;
  std::map<std::pair<Int, Int>, VValue> map_;
  std::shared_mutex mu_;
};

}  // namespace kubert
