#pragma once

// The finiteness decision machinery, exact layer.
//
// For a sheaf with upstairs exponents a_i and downstairs exponents b_j, the
// test asks whether
//
//   sum_i V(N a_i + x) + sum_j V(-N b_j - x)  >=  (D + M - 1)/2
//
// for every admissible (N, x). This header has the exact evaluators: the
// naive per-character sums, the collapsed inclusion-exclusion form
// V(2; a_1..a_t; x) that the Hasse-Davenport relation yields for full product
// character sets, the downstairs closed forms, the original Katz form of the
// inequality, and the explicit witness constructions.

#include <kubert/hypspec.hpp>
#include <kubert/parallel.hpp>

#include <map>
#include <optional>

namespace kubert {

struct VTestPoint {
  Int N = 1;
  QZ x;
};

// a_1 > ... > a_t with 2^{a_i}+1 pairwise coprime, certified by the 2-parts
// criterion. V_{up}(N, x) of the corresponding product sheaf collapses to
// V(2; a_1..a_t; x), independently of N.
struct CollapsedProfile {
  std::vector<unsigned> a;

  static CollapsedProfile of(std::vector<unsigned> a) {
    if (a.empty()) throw domain_error("CollapsedProfile: empty");
    std::sort(a.rbegin(), a.rend());
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0) throw domain_error("CollapsedProfile: parts must be positive");
      for (std::size_t k = i + 1; k < a.size(); ++k)
        if (!coprime_2pow(a[i], a[k]))
          throw domain_error("CollapsedProfile: 2^a+1 not pairwise coprime (equal 2-parts)");
    }
    CollapsedProfile p;
    p.a = std::move(a);
    return p;
  }

  unsigned t() const { return static_cast<unsigned>(a.size()); }

  Int part_modulus(unsigned i) const { return pow2m1(a[i]) + 2; }  // 2^{a_i}+1

  Int lattice_modulus() const {
    Int m = 1;
    for (unsigned ai : a) m *= pow2m1(ai) + 2;
    return m;
  }

  CharSetExpr upstairs_expr() const {
    std::vector<CharSetExpr> fs;
    for (unsigned ai : a) fs.push_back(CharSetExpr::full_minus_one(pow2m1(ai) + 2));
    return fs.size() == 1 ? fs[0] : CharSetExpr::product(std::move(fs));
  }
};

// Exact accumulator for sums of V-values: buckets by denominator so millions
// of terms cost integer adds, the Rat conversion happens once.
class VSum {
 public:
  void add(const VValue& v) { buckets_[v.den] += v.num; }
  void merge(const VSum& o) {
    for (auto& [d, n] : o.buckets_) buckets_[d] += n;
  }
  Rat total() const {
    Rat r = 0;
    for (auto& [d, n] : buckets_) r += Rat(n, d);
    return r;
  }

 private:
  std::map<std::uint64_t, Int> buckets_;
};

namespace detail {

inline std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

// Per-call scratch for repeated canonical v_eval over a fixed common
// denominator: remembers orders and 2^k-1 cofactors per reduced denominator.
// V-values themselves are recomputed for every argument.
class VEvalScratch {
 public:
  VValue eval(std::uint64_t num, std::uint64_t den) {
    if (num == 0) return VValue(0, 1);
    std::uint64_t g = std::gcd(num, den);
    num /= g;
    den /= g;
    auto it = per_den_.find(den);
    if (it == per_den_.end()) {
      unsigned k = mult_order(2, Int(den));
      it = per_den_.emplace(den, Entry{k, (pow2m1(k)) / den}).first;
    }
    Int a = it->second.cofactor * num;
    return VValue(digit_sum(2, a), it->second.k);
  }

 private:
  struct Entry {
    unsigned k;
    Int cofactor;  // (2^k - 1)/den
  };
  std::map<std::uint64_t, Entry> per_den_;
};

// Odometer over the all-nonzero product tuples (i_1..i_t), i_j in [1, A_j-1],
// ranked lexicographically. rank 0 -> (1,1,..,1).
struct ProductOdometer {
  std::vector<std::uint64_t> radix;  // A_j - 1 choices per digit

  std::uint64_t size() const {
    std::uint64_t n = 1;
    for (auto r : radix) n *= r;
    return n;
  }
  // digits[j] in [0, radix[j]); i_j = digits[j] + 1
  void decode(std::uint64_t rank, std::vector<std::uint64_t>& digits) const {
    digits.resize(radix.size());
    for (std::size_t j = radix.size(); j-- > 0;) {
      digits[j] = rank % radix[j];
      rank /= radix[j];
    }
  }
  bool advance(std::vector<std::uint64_t>& digits) const {
    for (std::size_t j = radix.size(); j-- > 0;) {
      if (++digits[j] < radix[j]) return true;
      digits[j] = 0;
    }
    return false;
  }
};

}  // namespace detail

inline Rat vtest_threshold(const HypSpec& spec) { return Rat(spec.D + spec.M - 1, 2); }

// Sum over the upstairs characters of V(N a_i + x), exact. The product-form
// upstairs is enumerated lazily over a uint64 common denominator when it
// fits; every character still goes through canonical v_eval individually.
inline Rat up_char_sum(const HypSpec& spec, const VTestPoint& pt, unsigned jobs = 1) {
  const QZ shift = qz_add(qz_scale(pt.N, spec.twist), pt.x);  // N x0 + x
  auto profile = spec.upstairs.product_profile();
  const std::uint64_t kSmall = 1u << 16;

  if (!profile || spec.upstairs.size() <= kSmall) {
    CharSet up = spec.upstairs.materialize(kSmall);
    VSum s;
    for (const QZ& a : up.elems()) s.add(v_eval(spec.p, qz_add(qz_scale(pt.N, a), shift)));
    return s.total();
  }

  // Lazy product enumeration. Common denominator of every argument:
  Int C_int = lcm(CollapsedProfile::of(*profile).lattice_modulus(), shift.den());
  if (C_int > (Int(1) << 62))
    throw budget_error("up_char_sum: common denominator exceeds machine range",
                       UINT64_MAX, 1ull << 62);
  const std::uint64_t C = to_u64(C_int, "up_char_sum denominator");
  CollapsedProfile prof = CollapsedProfile::of(*profile);
  const unsigned t = prof.t();

  // contribution of digit j at value i_j: (N i_j mod A_j) * (C/A_j) mod C
  std::vector<std::vector<std::uint64_t>> contrib(t);
  detail::ProductOdometer odo;
  for (unsigned j = 0; j < t; ++j) {
    std::uint64_t Aj = to_u64(prof.part_modulus(j), "part modulus");
    Int nr = pt.N % Aj;
    if (nr < 0) nr += Aj;
    std::uint64_t Nj = to_u64(nr, "N residue");
    std::uint64_t cof = C / Aj;
    contrib[j].resize(Aj);
    for (std::uint64_t i = 0; i < Aj; ++i) contrib[j][i] = detail::mulmod_u64(Nj * i % Aj, cof, C);
    odo.radix.push_back(Aj - 1);
  }
  const std::uint64_t base = to_u64(shift.num() * (C / shift.den()), "shift residue");

  auto block = [&](std::uint64_t lo, std::uint64_t hi) {
    detail::VEvalScratch scratch;
    VSum s;
    std::vector<std::uint64_t> digits;
    odo.decode(lo, digits);
    for (std::uint64_t r = lo; r < hi; ++r) {
      std::uint64_t num = base;
      for (unsigned j = 0; j < t; ++j) {
        num += contrib[j][digits[j] + 1];
        if (num >= C) num -= C;
      }
      s.add(scratch.eval(num, C));
      if (r + 1 < hi) odo.advance(digits);
    }
    return s;
  };
  return map_reduce_blocks<VSum>(
             odo.size(), 1u << 16, jobs, VSum{}, block,
             [](VSum a, VSum b) {
               a.merge(b);
               return a;
             })
      .total();
}

// Upstairs part of the test: sum_i V(N a_i + x) - D/2.
inline Rat v_up_naive(const HypSpec& spec, const VTestPoint& pt, unsigned jobs = 1) {
  return up_char_sum(spec, pt, jobs) - Rat(spec.D, 2);
}

// V(2; a_1..a_t; x): signed inclusion-exclusion of V over subset products of
// the 2^{a_i}+1. Equals v_up_naive of the corresponding product sheaf at
// every (N, x); that identity is property-tested, never assumed silently.
inline Rat v_collapsed(const CollapsedProfile& profile, const QZ& x, std::uint64_t p = 2) {
  const unsigned t = profile.t();
  Rat acc = 0;
  for (std::uint32_t mask = 0; mask < (1u << t); ++mask) {
    Int ms = 1;
    for (unsigned i = 0; i < t; ++i)
      if (mask & (1u << i)) ms *= profile.part_modulus(i);
    VValue v = v_eval(p, qz_scale(ms, x));
    int sign = ((t - std::popcount(mask)) % 2 == 0) ? 1 : -1;
    acc += sign * v.to_rat();
  }
  return acc;
}

// Downstairs shapes with N-independent closed forms.
enum class DownShape { Empty, SingleChar, FullMinusOne, Full, General };

inline DownShape down_shape(const CharSetExpr& e, QZ* single_char = nullptr, Int* modulus = nullptr) {
  switch (e.kind) {
    case CharSetExpr::Kind::Chars:
      if (e.chars.empty()) return DownShape::Empty;
      if (e.chars.size() == 1) {
        if (single_char) *single_char = e.chars[0];
        return DownShape::SingleChar;
      }
      return DownShape::General;
    case CharSetExpr::Kind::Full:
      if (e.modulus == 1) {
        if (single_char) *single_char = QZ();
        return DownShape::SingleChar;
      }
      if (modulus) *modulus = e.modulus;
      return DownShape::Full;
    case CharSetExpr::Kind::FullMinusOne:
      if (e.modulus == 1) return DownShape::Empty;
      if (modulus) *modulus = e.modulus;
      return DownShape::FullMinusOne;
    case CharSetExpr::Kind::Product: return DownShape::General;
  }
  return DownShape::General;
}

// Downstairs part, naive: sum_j V(-N b_j - x) - M/2.
inline Rat v_down_naive(const HypSpec& spec, const VTestPoint& pt) {
  CharSet down = spec.downstairs.materialize();
  const QZ shift = qz_add(qz_scale(pt.N, spec.twist), pt.x);
  VSum s;
  for (const QZ& b : down.elems()) s.add(v_eval(spec.p, qz_neg(qz_add(qz_scale(pt.N, b), shift))));
  return s.total() - Rat(spec.M, 2);
}

// Downstairs part via the closed form when the shape is recognized:
//   empty           -> 0
//   {1}             -> V(-x') - 1/2
//   Char(A)\{1}     -> V(-A x') - V(-x')
//   Char(A)         -> V(-A x') + (A-1)/2 - M/2
// with x' = x + N x0 absorbing the twist. Falls back to the naive sum.
inline Rat v_down(const HypSpec& spec, const VTestPoint& pt) {
  const QZ u = qz_add(qz_scale(pt.N, spec.twist), pt.x);
  QZ c;
  Int A;
  switch (down_shape(spec.downstairs, &c, &A)) {
    case DownShape::Empty: return Rat(0);
    case DownShape::SingleChar:
      return v_eval(spec.p, qz_neg(qz_add(qz_scale(pt.N, c), u))).to_rat() - Rat(1, 2);
    case DownShape::FullMinusOne:
      return v_eval(spec.p, qz_neg(qz_scale(A, u))).to_rat() - v_eval(spec.p, qz_neg(u)).to_rat();
    case DownShape::Full:
      return v_eval(spec.p, qz_neg(qz_scale(A, u))).to_rat() + Rat(A - 1, 2) - Rat(spec.M, 2);
    case DownShape::General: return v_down_naive(spec, pt);
  }
  return v_down_naive(spec, pt);
}

// Left-hand side of the simplified test, per-character canonical evaluation
// throughout (no cache, no collapse). This is also the witness
// re-verification path.
inline Rat vtest_lhs(const HypSpec& spec, const VTestPoint& pt, unsigned jobs = 1) {
  Rat up = up_char_sum(spec, pt, jobs);
  Rat down = v_down_naive(spec, pt) + Rat(spec.M, 2);
  return up + down;
}

inline bool vtest_holds(const HypSpec& spec, const VTestPoint& pt) {
  return vtest_lhs(spec, pt) >= vtest_threshold(spec);
}

// (1/D) sum_{i,j} V(N a_i - N b_j): the term the simplified test replaces by
// M/2. For every accepted spec and admissible N the two agree.
inline Rat katz_term(const HypSpec& spec, const Int& N) {
  CharSet down = spec.downstairs.materialize();
  Rat sum = 0;
  for (const QZ& b : down.elems()) {
    // sum_i V(N a_i - N b): the twisted arguments N(a_i+x0) - N(b+x0) lose
    // the twist, so this is an upstairs character sum at x = -N(b + x0).
    VTestPoint pt;
    pt.N = N;
    pt.x = qz_neg(qz_scale(N, qz_add(b, spec.twist)));
    sum += up_char_sum(spec, pt);
  }
  return sum / Rat(spec.D);
}

// Katz's original inequality, normalized to share the (D+M-1)/2 threshold:
// lhs - (1/D) sum V(Na_i - Nb_j) + M/2. With M = 0 this is vtest_lhs.
inline Rat katz_original_lhs(const HypSpec& spec, const VTestPoint& pt) {
  return vtest_lhs(spec, pt) - katz_term(spec, pt.N) + Rat(spec.M, 2);
}

inline bool katz_original_holds(const HypSpec& spec, const VTestPoint& pt) {
  return katz_original_lhs(spec, pt) >= vtest_threshold(spec);
}

// ---- explicit witnesses -------------------------------------------------

// For coprime a1, a2 (distinct 2-parts), the explicit pair (i1, i2) with
// (2^{a_j}+1) never dividing i_j and V(i1/(2^{a1}+1) + i2/(2^{a2}+1)) = 1/4.
// With both part-products integral at that point, V(2; a1,a2; x) = -3/4,
// which rules the value -1/2 out.
struct InductionWitness {
  Int i1, i2;
  QZ x;
  VValue v;
};

inline InductionWitness induction_witness(unsigned a1, unsigned a2) {
  if (a1 == 0 || a2 == 0) throw domain_error("induction_witness: parts must be positive");
  if (!coprime_2pow(a1, a2))
    throw domain_error("induction_witness: 2^a1+1 and 2^a2+1 are not coprime (equal 2-parts)");

  const bool swapped = two_part(a1) < two_part(a2);
  const unsigned ah = swapped ? a2 : a1, al = swapped ? a1 : a2;
  const std::uint64_t b1 = two_part(ah), b2 = two_part(al);

  Int Ah = pow2m1(ah) + 2, Al = pow2m1(al) + 2;
  Int prod = 1;
  for (std::uint64_t e = b1 / 2; e >= b2; e /= 2) prod *= pow2m1(static_cast<unsigned>(e));
  Int ih = (Ah / (pow2m1(static_cast<unsigned>(b1)) + 2)) * prod;
  Int il = Al / (pow2m1(static_cast<unsigned>(b2)) + 2);
  if (ih % Ah == 0 || il % Al == 0) throw error("induction_witness: internal divisibility violation");

  InductionWitness w;
  w.i1 = swapped ? il : ih;
  w.i2 = swapped ? ih : il;
  w.x = qz_add(QZ::make_unchecked(ih, Ah), QZ::make_unchecked(il, Al));
  w.v = v_eval(2, w.x);
  if (!(w.v == VValue(1, 4))) throw error("induction_witness: V(x) != 1/4");
  return w;
}

// B = prod(2^e - 1) + prod(2^e + 1) over e = b1, b1/2, ..., 2 b2; then
// (2^{b2}-1) B must have exactly b1/2 ones in base 2 and stay below
// 2^{2 b1}-1. b1 > b2, both powers of two.
inline bool digit_pattern_check(unsigned b1, unsigned b2) {
  auto pow2 = [](unsigned v) { return v != 0 && (v & (v - 1)) == 0; };
  if (!(b1 > b2) || !pow2(b1) || !pow2(b2)) throw domain_error("digit_pattern_check: need powers of two b1 > b2");
  Int minus = 1, plus = 1;
  for (unsigned e = b1; e >= 2 * b2; e /= 2) {
    minus *= pow2m1(e);
    plus *= pow2m1(e) + 2;
  }
  Int B = minus + plus;
  Int w = pow2m1(b2) * B;
  return digit_sum(2, w) == b1 / 2 && w < pow2m1(2 * b1);
}

}  // namespace kubert
