#pragma once

// Named verification suites over the V-function and the test machinery.
// Each suite sweeps a bounded exact domain and reports pass/fail with the
// first counterexample. All comparisons are exact rational arithmetic; the
// only irrational bound (the wild-dimension ratio) is decided by squaring.

#include <kubert/catalog.hpp>

#include <functional>

namespace kubert {

struct SuiteResult {
  std::string name;
  std::uint64_t checks = 0;
  bool pass = true;
  std::string first_counterexample;

  void fail(const std::string& cx) {
    if (pass) {
      pass = false;
      first_counterexample = cx;
    }
  }
};

namespace detail {

// Deterministic pseudorandom stream; fixed seed, no configurable randomness.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
};

inline Int random_bits(SplitMix64& rng, unsigned bits) {
  Int n = 0;
  for (unsigned got = 0; got < bits; got += 64) {
    n <<= 64;
    n |= rng.next();
  }
  return n & pow2m1(bits);
}

inline std::string qz_str(const QZ& x) {
  std::ostringstream os;
  os << x.num() << "/" << x.den();
  return os.str();
}

}  // namespace detail

// r >= (2-sqrt(2))/4, exactly.
inline bool ge_wild_bound_main(const Rat& r) {
  Rat s = 2 - 4 * r;
  return s <= 0 || s * s <= 2;
}

// r >= 7(2-sqrt(2))/16, exactly.
inline bool ge_wild_bound_even(const Rat& r) {
  Rat s = 14 - 16 * r;
  return s <= 0 || s * s <= 98;
}

// r > ((2-sqrt(2))/2)(1 - 1/W0), exactly.
inline bool gt_wild_bound_general(const Rat& r, const Int& W0) {
  Rat q = 1 - Rat(1, W0);
  Rat s = 2 * q - 2 * r;
  if (s < 0) return true;
  if (s == 0) return q > 0 || r > 0;
  return s * s < 2 * q * q;
}

inline SuiteResult suite_v_properties() {
  SuiteResult res{"v-properties"};
  const std::uint64_t M = 4095;  // 2^12 - 1
  std::vector<std::uint8_t> ones(M);

  for (std::uint64_t j = 0; j < M; ++j) {
    QZ x = QZ::make_unchecked(Int(j), Int(M));
    VValue v = v_eval(2, x);
    VValue vp = v_eval_period(2, x);
    ++res.checks;
    if (!(v == vp)) res.fail("dual-path mismatch at " + detail::qz_str(x));
    if (!(v == VValue(std::popcount(j), 12))) res.fail("digit formula mismatch at " + detail::qz_str(x));
    if ((v.num == 0) != (j == 0)) res.fail("property (1) fails at " + detail::qz_str(x));
    if (!(v == v_eval(2, qz_scale(2, x)))) res.fail("property (4) fails at " + detail::qz_str(x));
    ones[j] = static_cast<std::uint8_t>(std::popcount(j));
  }
  for (std::uint64_t j = 1; j < M; ++j) {
    ++res.checks;
    if (ones[j] + ones[M - j] != 12) res.fail("property (2) fails at j=" + std::to_string(j));
  }
  // subadditivity, all pairs, integer-scaled by 12
  for (std::uint64_t i = 0; i < M && res.pass; ++i)
    for (std::uint64_t j = i; j < M; ++j) {
      std::uint64_t s = i + j;
      if (s >= M) s -= M;
      if (ones[i] + ones[j] < ones[s]) {
        res.fail("property (5) fails at i=" + std::to_string(i) + " j=" + std::to_string(j));
        break;
      }
    }
  res.checks += M * (M + 1) / 2;

  // 1000 pseudorandom points with denominators 2^k-1, 64 <= k <= 512; the
  // subadditivity partner shares the denominator so the sum stays in range.
  detail::SplitMix64 rng(0x5eed5eed5eed5eedull);
  for (unsigned t = 0; t < 1000; ++t) {
    unsigned k = 64 + static_cast<unsigned>(rng.next() % 449);
    Int den = pow2m1(k);
    QZ x = QZ::make(detail::random_bits(rng, k) % den, den, 2);
    QZ y = QZ::make(detail::random_bits(rng, k) % den, den, 2);
    VValue v = v_eval(2, x);
    ++res.checks;
    if (!(v == v_eval_period(2, x))) res.fail("dual-path mismatch at random point " + std::to_string(t));
    if ((v.num == 0) != x.is_zero()) res.fail("property (1) fails at random point " + std::to_string(t));
    if (!x.is_zero() && !(v.to_rat() + v_eval(2, qz_neg(x)).to_rat() == 1))
      res.fail("property (2) fails at random point " + std::to_string(t));
    if (!(v == v_eval(2, qz_scale(2, x)))) res.fail("property (4) fails at random point " + std::to_string(t));
    if (v.to_rat() + v_eval(2, y).to_rat() < v_eval(2, qz_add(x, y)).to_rat())
      res.fail("property (5) fails at random pair " + std::to_string(t));
  }
  return res;
}

inline SuiteResult suite_hasse_davenport() {
  SuiteResult res{"hasse-davenport"};
  const std::uint64_t M = 255;  // 2^8 - 1
  for (unsigned r = 1; r <= 31; r += 2) {
    for (std::uint64_t j = 0; j < M; ++j) {
      QZ x = QZ::make_unchecked(Int(j), Int(M));
      Rat lhs = 0;
      for (unsigned i = 1; i <= r; ++i) lhs += v_eval(2, qz_add(x, QZ::make_unchecked(i, r))).to_rat();
      Rat rhs = v_eval(2, qz_scale(r, x)).to_rat() + Rat(r - 1, 2);
      ++res.checks;
      if (lhs != rhs) {
        res.fail("r=" + std::to_string(r) + " x=" + detail::qz_str(x));
        return res;
      }
    }
  }
  return res;
}

inline SuiteResult suite_one_piece() {
  SuiteResult res{"one-piece"};
  for (unsigned r = 1; r <= 4; ++r) {
    CollapsedProfile prof = CollapsedProfile::of({r});
    const Int A = pow2m1(r) + 2;
    const Int D = pow2m1(2 * r) * 15;
    for (Int j = 0; j < D; ++j) {
      QZ x = QZ::make_unchecked(j, D);
      Rat val = v_collapsed(prof, x);
      ++res.checks;
      if (!(val >= Rat(-1, 2) && val < Rat(1, 2))) {
        res.fail("range fails r=" + std::to_string(r) + " x=" + detail::qz_str(x));
        return res;
      }
      bool extreme = val == Rat(-1, 2);
      bool lattice = !x.is_zero() && A % x.den() == 0;
      if (extreme != lattice) {
        res.fail("-1/2 characterization fails r=" + std::to_string(r) + " x=" + detail::qz_str(x));
        return res;
      }
    }
  }
  return res;
}

inline SuiteResult suite_v_lem() {
  SuiteResult res{"v-lem"};
  for (unsigned r = 1; r <= 4; ++r) {
    const Int A = pow2m1(r) + 2;
    const Int D = pow2m1(2 * r) * 15;
    for (Int j = 0; j < D; ++j) {
      QZ x = QZ::make_unchecked(j, D);
      Rat va = v_eval(2, qz_scale(A, x)).to_rat();
      Rat vx = v_eval(2, x).to_rat();
      ++res.checks;
      if (!(va <= 2 * vx && 2 * vx <= va + 1)) {
        res.fail("(a) fails r=" + std::to_string(r) + " x=" + detail::qz_str(x));
        return res;
      }
      if (va == 0 && !(vx == 0 || vx == Rat(1, 2))) {
        res.fail("(b) fails r=" + std::to_string(r) + " x=" + detail::qz_str(x));
        return res;
      }
    }
  }
  return res;
}

inline SuiteResult suite_two_pieces() {
  SuiteResult res{"two-pieces"};
  const std::pair<unsigned, unsigned> pairs[] = {{1, 2}, {2, 3}, {1, 4}, {3, 4}};
  for (auto [r1, r2] : pairs) {
    CollapsedProfile prof = CollapsedProfile::of({r1, r2});
    const Int A12 = (pow2m1(r1) + 2) * (pow2m1(r2) + 2);
    const Int D = A12 * 15;
    for (Int j = 0; j < D; ++j) {
      QZ x = QZ::make_unchecked(j, D);
      Rat val = v_collapsed(prof, x);
      ++res.checks;
      if (!(val >= Rat(-3, 4) && val < Rat(3, 4))) {
        res.fail("range fails (" + std::to_string(r1) + "," + std::to_string(r2) + ") x=" + detail::qz_str(x));
        return res;
      }
      bool extreme = val == Rat(-3, 4);
      bool cond = A12 % x.den() == 0 && v_eval(2, x) == VValue(1, 4);
      if (extreme != cond) {
        res.fail("-3/4 characterization fails (" + std::to_string(r1) + "," + std::to_string(r2) +
                 ") x=" + detail::qz_str(x));
        return res;
      }
    }
  }
  // pinned extreme: V(2; 2,1; 8/15) = -3/4 exactly
  ++res.checks;
  if (v_collapsed(CollapsedProfile::of({2, 1}), QZ::make_unchecked(8, 15)) != Rat(-3, 4))
    res.fail("pinned extreme at x=8/15 is not -3/4");
  return res;
}

inline SuiteResult suite_induction_witness() {
  SuiteResult res{"induction-witness"};
  for (unsigned a1 = 2; a1 <= 8; ++a1) {
    for (unsigned a2 = 1; a2 < a1; ++a2) {
      if (!coprime_2pow(a1, a2)) continue;
      InductionWitness w = induction_witness(a1, a2);
      ++res.checks;
      if (!(w.v == VValue(1, 4))) {
        res.fail("V(x) != 1/4 at (" + std::to_string(a1) + "," + std::to_string(a2) + ")");
        return res;
      }
      if (w.i1 % (pow2m1(a1) + 2) == 0 || w.i2 % (pow2m1(a2) + 2) == 0) {
        res.fail("divisibility guarantee fails at (" + std::to_string(a1) + "," + std::to_string(a2) + ")");
        return res;
      }
      Rat two_piece = v_collapsed(CollapsedProfile::of({a1, a2}), w.x);
      if (two_piece == Rat(-1, 2) || two_piece != Rat(-3, 4)) {
        res.fail("V(2;a1,a2;x) != -3/4 at (" + std::to_string(a1) + "," + std::to_string(a2) + ")");
        return res;
      }
    }
  }
  const std::pair<unsigned, unsigned> digit_cases[] = {{2, 1}, {4, 1}, {4, 2}, {8, 2}, {8, 4}};
  for (auto [b1, b2] : digit_cases) {
    ++res.checks;
    if (!digit_pattern_check(b1, b2))
      res.fail("digit pattern fails at (" + std::to_string(b1) + "," + std::to_string(b2) + ")");
  }
  return res;
}

inline SuiteResult suite_collapse_identity() {
  SuiteResult res{"collapse-identity"};
  const std::vector<std::vector<unsigned>> profiles = {{1}, {2}, {3}, {2, 1}, {3, 2}};
  const std::uint64_t M = 4095;
  for (const auto& pa : profiles) {
    CollapsedProfile prof = CollapsedProfile::of(pa);
    HypSpec spec = hyp_spec(2, prof.upstairs_expr(), CharSetExpr::of_chars({}));
    for (std::uint64_t j = 0; j < M; ++j) {
      VTestPoint pt;
      pt.N = 1;
      pt.x = QZ::make_unchecked(Int(j), Int(M));
      ++res.checks;
      if (v_collapsed(prof, pt.x) != v_up_naive(spec, pt)) {
        res.fail("collapse mismatch, profile size " + std::to_string(pa.size()) + ", x=" + detail::qz_str(pt.x));
        return res;
      }
    }
  }
  return res;
}

inline SuiteResult suite_katz_equivalence() {
  SuiteResult res{"katz-equivalence"};
  std::vector<CandidateSheaf> specs = {make_kloosterman(1), make_kloosterman(2), make_kloosterman(3),
                                       make_two_char(2, 1), make_two_char(3, 2)};
  for (const auto& c : specs) {
    const Int L = c.spec.denominator_lcm();
    const unsigned d = mult_order(2, L);
    const std::uint64_t M = (1ull << d) - 1;
    const std::uint64_t Lu = to_u64(L, "L");
    bool accept_simplified = true, accept_original = true;
    const Rat thr = vtest_threshold(c.spec);
    for (std::uint64_t u = 1; u <= Lu; ++u) {
      if (std::gcd(u, Lu) != 1) continue;
      Rat kt = katz_term(c.spec, Int(u));
      for (std::uint64_t j = 0; j < M; ++j) {
        VTestPoint pt;
        pt.N = Int(u);
        pt.x = QZ::make_unchecked(Int(j), Int(M));
        Rat lhs = vtest_lhs(c.spec, pt);
        accept_simplified &= lhs >= thr;
        accept_original &= lhs - kt + Rat(c.spec.M, 2) >= thr;
        ++res.checks;
      }
      if (kt != Rat(c.spec.M, 2)) {
        res.fail(c.name + ": (1/D) sum V(Na_i - Nb_j) != M/2 at N=" + std::to_string(u));
        return res;
      }
    }
    if (accept_simplified != accept_original) {
      res.fail(c.name + ": the two inequality forms disagree on acceptance");
      return res;
    }
    if (!accept_simplified) {
      res.fail(c.name + ": expected the sweep to accept");
      return res;
    }
  }
  return res;
}

inline SuiteResult suite_wild_bound() {
  SuiteResult res{"wild-bound"};
  for (const auto& c : enumerate_candidates(6)) {
    if (c.expected != RowVerdict::ListedExtraspecial) continue;
    Rat r(c.spec.W(), c.spec.D);
    ++res.checks;
    if (!ge_wild_bound_main(r)) {
      res.fail(c.name + ": W/D < (2-sqrt2)/4");
      return res;
    }
    if (c.spec.W() % 2 == 0 && !ge_wild_bound_even(r)) {
      res.fail(c.name + ": even W but W/D < 7(2-sqrt2)/16");
      return res;
    }
    Int W0 = c.spec.W();
    while (W0 % 2 == 0) W0 /= 2;
    if (!gt_wild_bound_general(r, W0)) {
      res.fail(c.name + ": W/D <= ((2-sqrt2)/2)(1-1/W0)");
      return res;
    }
  }
  return res;
}

inline const std::map<std::string, std::function<SuiteResult()>>& verify_suites() {
  static const std::map<std::string, std::function<SuiteResult()>> suites = {
      {"v-properties", suite_v_properties},
      {"hasse-davenport", suite_hasse_davenport},
      {"one-piece", suite_one_piece},
      {"v-lem", suite_v_lem},
      {"two-pieces", suite_two_pieces},
      {"induction-witness", suite_induction_witness},
      {"collapse-identity", suite_collapse_identity},
      {"katz-equivalence", suite_katz_equivalence},
      {"wild-bound", suite_wild_bound},
  };
  return suites;
}

inline SuiteResult verify_lemmas(const std::string& name) {
  auto it = verify_suites().find(name);
  if (it == verify_suites().end()) throw domain_error("verify: unknown suite '" + name + "'");
  return it->second();
}

}  // namespace kubert
