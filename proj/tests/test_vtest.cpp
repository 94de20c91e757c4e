#include <catch2/catch_amalgamated.hpp>

#include <kubert/catalog.hpp>

#include "oracles.hpp"

using namespace kubert;

namespace {
QZ q(std::int64_t n, std::int64_t d) { return qz_make(n, d, 2); }
VTestPoint pt(std::int64_t N, QZ x) {
  VTestPoint p;
  p.N = N;
  p.x = std::move(x);
  return p;
}
}  // namespace

TEST_CASE("upstairs part: naive sums") {
  HypSpec k1 = hyp_spec(2, CharSetExpr::full_minus_one(3), CharSetExpr::of_chars({}));
  CHECK(v_up_naive(k1, pt(1, QZ())) == 0);  // V(1/3)+V(2/3) - 1

  HypSpec k2 = hyp_spec(2, CharSetExpr::full_minus_one(5), CharSetExpr::of_chars({}));
  CHECK(v_up_naive(k2, pt(1, q(1, 5))) == Rat(-1, 2));

  HypSpec prod = hyp_spec(2, CharSetExpr::product({CharSetExpr::full_minus_one(5), CharSetExpr::full_minus_one(3)}),
                          CharSetExpr::of_chars({QZ()}));
  CHECK(v_up_naive(prod, pt(1, QZ())) == 0);  // eight V-values at the 8/15 family

  // oracle recomputation of the second example
  Rat s = 0;
  for (int i = 1; i <= 4; ++i) s += oracle::v(2, qz_add(q(i, 5), q(1, 5)));
  CHECK(s - 2 == Rat(-1, 2));
}

TEST_CASE("collapsed evaluator") {
  CHECK(v_collapsed(CollapsedProfile::of({2}), q(1, 5)) == Rat(-1, 2));
  CHECK(v_collapsed(CollapsedProfile::of({2, 1}), q(8, 15)) == Rat(-3, 4));
  CHECK(v_collapsed(CollapsedProfile::of({2, 1}), QZ()) == 0);
  CHECK(v_collapsed(CollapsedProfile::of({8, 7, 6, 4}), QZ()) == 0);
  CHECK_THROWS_AS(CollapsedProfile::of({3, 1}), domain_error);  // equal 2-parts
}

TEST_CASE("downstairs part: closed forms agree with the naive sums") {
  // Kloosterman: identically zero
  HypSpec k2 = hyp_spec(2, CharSetExpr::full_minus_one(5), CharSetExpr::of_chars({}));
  for (int j : {0, 1, 7, 11}) {
    CHECK(v_down(k2, pt(1, q(j, 15))) == 0);
    CHECK(v_down_naive(k2, pt(1, q(j, 15))) == 0);
  }

  // downstairs {1}
  HypSpec triv = hyp_spec(2, CharSetExpr::product({CharSetExpr::full_minus_one(5), CharSetExpr::full_minus_one(3)}),
                          CharSetExpr::of_chars({QZ()}));
  CHECK(v_down(triv, pt(1, q(1, 3))) == 0);  // V(-1/3) - 1/2
  for (std::uint64_t j = 0; j < 15; ++j) {
    VTestPoint p = pt(1, QZ::make_unchecked(j, 15));
    CHECK(v_down(triv, p) == v_down_naive(triv, p));
  }

  // downstairs Char(3)\{1}: V(-(2^1+1)x) - V(-x)
  HypSpec two = hyp_spec(2, CharSetExpr::full_minus_one(5), CharSetExpr::full_minus_one(3));
  CHECK(v_down(two, pt(1, q(1, 5))) == oracle::v(2, q(7, 15)) + oracle::v(2, q(2, 15)) - 1);
  for (std::uint64_t j = 0; j < 45; ++j) {
    for (Int N : {Int(1), Int(2), Int(7)}) {
      VTestPoint p = pt(0, QZ::make_unchecked(j, 45));
      p.N = N;
      CHECK(v_down(two, p) == v_down_naive(two, p));
    }
  }

  // full downstairs Char(3) (the S5 shape)
  HypSpec s5 = hyp_spec(2, CharSetExpr::full_minus_one(5), CharSetExpr::full(3));
  for (std::uint64_t j = 0; j < 15; ++j) {
    VTestPoint p = pt(1, QZ::make_unchecked(j, 15));
    CHECK(v_down(s5, p) == v_down_naive(s5, p));
  }
}

TEST_CASE("vtest_lhs and the threshold") {
  HypSpec k1 = hyp_spec(2, CharSetExpr::full_minus_one(3), CharSetExpr::of_chars({}));
  CHECK(vtest_lhs(k1, pt(1, q(1, 3))) == Rat(1, 2));
  CHECK(vtest_threshold(k1) == Rat(1, 2));
  CHECK(vtest_holds(k1, pt(1, q(1, 3))));  // equality is a pass

  // pairing: lhs(N,x) + lhs(-N,-x) = D+M when every argument is nonintegral
  HypSpec two = hyp_spec(2, CharSetExpr::full_minus_one(5), CharSetExpr::full_minus_one(3));
  for (std::uint64_t j : {1ull, 2ull, 4ull, 8ull, 11ull}) {
    QZ x = QZ::make_unchecked(j, 45);
    Rat sum = vtest_lhs(two, pt(1, x)) + vtest_lhs(two, pt(-1, qz_neg(x)));
    CHECK(sum == Rat(two.D + two.M));
  }

  // Galois invariance: (N, x) and (2N, 2x) have the same left-hand side
  for (std::uint64_t j = 0; j < 45; ++j) {
    QZ x = QZ::make_unchecked(j, 45);
    CHECK(vtest_lhs(two, pt(1, x)) == vtest_lhs(two, pt(2, qz_scale(2, x))));
    CHECK(vtest_lhs(two, pt(7, x)) == vtest_lhs(two, pt(14, qz_scale(2, x))));
  }
}

TEST_CASE("Katz's original inequality form") {
  // M = 0: the correction vanishes identically
  HypSpec k2 = hyp_spec(2, CharSetExpr::full_minus_one(5), CharSetExpr::of_chars({}));
  for (int j : {0, 1, 2, 7}) {
    VTestPoint p = pt(1, q(j, 15));
    CHECK(katz_original_lhs(k2, p) == vtest_lhs(k2, p));
  }

  // accepted spec: (1/D) sum V(Na_i - Nb_j) = M/2 for every valid N
  HypSpec two = hyp_spec(2, CharSetExpr::full_minus_one(5), CharSetExpr::full_minus_one(3));
  for (std::uint64_t u : {1ull, 2ull, 4ull, 7ull, 8ull, 11ull, 13ull, 14ull})
    CHECK(katz_term(two, Int(u)) == Rat(1));
}

TEST_CASE("induction witness construction") {
  InductionWitness w21 = induction_witness(2, 1);
  CHECK(w21.i1 == 1);
  CHECK(w21.i2 == 1);
  CHECK(w21.x == q(8, 15));
  CHECK(w21.v == VValue(1, 4));

  InductionWitness w41 = induction_witness(4, 1);
  CHECK(w41.i1 == 3);
  CHECK(w41.i2 == 1);
  CHECK(w41.x == qz_add(q(3, 17), q(1, 3)));
  CHECK(w41.v == VValue(1, 4));
  CHECK(oracle::v(2, w41.x) == Rat(1, 4));

  // swapped arguments attach the i's to their own parts
  InductionWitness w12 = induction_witness(1, 2);
  CHECK(w12.i1 == 1);
  CHECK(w12.i2 == 1);
  CHECK(w12.x == q(8, 15));

  CHECK_THROWS_AS(induction_witness(3, 1), domain_error);  // gcd(9,3) = 3
  CHECK_THROWS_AS(induction_witness(6, 2), domain_error);
}

TEST_CASE("digit pattern of (2^{b2}-1)B") {
  for (auto [b1, b2] : std::vector<std::pair<unsigned, unsigned>>{{2, 1}, {4, 1}, {4, 2}, {8, 2}, {8, 4}, {8, 1}}) {
    CHECK(digit_pattern_check(b1, b2));
    // the paper-described expansion of B matches the product construction
    Int minus = 1, plus = 1;
    for (unsigned e = b1; e >= 2 * b2; e /= 2) {
      minus *= pow2m1(e);
      plus *= pow2m1(e) + 2;
    }
    CHECK(minus + plus == oracle::b_pattern_by_subsets(b1, b2));
  }
  CHECK_THROWS_AS(digit_pattern_check(3, 1), domain_error);
  CHECK_THROWS_AS(digit_pattern_check(2, 2), domain_error);
}

TEST_CASE("run_vtest: passes at desk scale") {
  VTestOptions opts;
  opts.m_max = 2;
  Verdict v = run_vtest(hyp_spec(2, CharSetExpr::full_minus_one(5), CharSetExpr::of_chars({})), opts);
  CHECK_FALSE(v.failed());
  CHECK(v.bound == 2);

  Verdict v2 = run_vtest(hyp_spec(2, CharSetExpr::full_minus_one(5), CharSetExpr::full_minus_one(3)), opts);
  CHECK_FALSE(v2.failed());
}

TEST_CASE("run_vtest: conclusive failure with a re-verified witness") {
  HypSpec bad = hyp_spec(2, CharSetExpr::of_chars({QZ(), q(1, 15)}), CharSetExpr::of_chars({}));
  VTestOptions opts;
  Verdict v = run_vtest(bad, opts);
  REQUIRE(v.failed());
  REQUIRE(v.witness.has_value());
  CHECK(v.witness->N == 1);
  CHECK(v.witness->x.is_zero());
  CHECK(v.witness_lhs == Rat(1, 4));  // V(0) + V(1/15)
  CHECK(v.witness_lhs < v.threshold);
  // fresh evaluation re-violates
  CHECK(vtest_lhs(bad, *v.witness) < vtest_threshold(bad));
}

TEST_CASE("run_vtest: naive mode gives the same verdicts") {
  VTestOptions fast, naive;
  naive.force_naive = true;
  HypSpec k2 = hyp_spec(2, CharSetExpr::full_minus_one(5), CharSetExpr::of_chars({}));
  CHECK(run_vtest(k2, fast).failed() == run_vtest(k2, naive).failed());

  HypSpec bad = hyp_spec(2, CharSetExpr::of_chars({QZ(), q(1, 15)}), CharSetExpr::of_chars({}));
  Verdict a = run_vtest(bad, fast), b = run_vtest(bad, naive);
  REQUIRE(a.failed());
  REQUIRE(b.failed());
  CHECK(a.witness->N == b.witness->N);
  CHECK(a.witness->x == b.witness->x);
  CHECK(a.witness_lhs == b.witness_lhs);
}

TEST_CASE("run_vtest: budget errors are loud") {
  VTestOptions tiny;
  tiny.budget = 3;
  CHECK_THROWS_AS(run_vtest(hyp_spec(2, CharSetExpr::full_minus_one(5), CharSetExpr::of_chars({})), tiny),
                  budget_error);
}

TEST_CASE("run_vtest: verdicts are schedule-independent") {
  HypSpec bad = hyp_spec(2, CharSetExpr::of_chars({QZ(), q(1, 15)}), CharSetExpr::of_chars({}));
  std::optional<Verdict> ref;
  for (unsigned jobs : {1u, 2u, 8u}) {
    VTestOptions o;
    o.jobs = jobs;
    Verdict v = run_vtest(bad, o);
    if (!ref) {
      ref = v;
      continue;
    }
    CHECK(v.failed() == ref->failed());
    CHECK(v.witness->N == ref->witness->N);
    CHECK(v.witness->x == ref->witness->x);
    CHECK(v.points_checked == ref->points_checked);
  }
}

TEST_CASE("witness_search: clean lattice on a finite family") {
  WitnessSearchResult r = witness_search(hyp_spec(2, CharSetExpr::full_minus_one(5), CharSetExpr::of_chars({})));
  CHECK_FALSE(r.found);
  CHECK(r.lattice_size == 5);
  CHECK_THROWS_AS(witness_search(hyp_spec(2, CharSetExpr::of_chars({QZ(), q(1, 15)}), CharSetExpr::of_chars({}))),
                  domain_error);
}

TEST_CASE("collapse identity on a bounded sweep") {
  // the acceptance suite runs the full bound; this pins a fast regression
  for (const auto& pa : std::vector<std::vector<unsigned>>{{2}, {2, 1}}) {
    CollapsedProfile prof = CollapsedProfile::of(pa);
    HypSpec spec = hyp_spec(2, prof.upstairs_expr(), CharSetExpr::of_chars({}));
    for (std::uint64_t j = 0; j < 315; ++j) {
      QZ x = QZ::make_unchecked(j, 315);  // 315 = 5*9*7, coprime to 2
      CHECK(v_collapsed(prof, x) == v_up_naive(spec, pt(1, x)));
    }
  }
}
