#include <catch2/catch_amalgamated.hpp>

#include <kubert/qz.hpp>

#include "oracles.hpp"

#include <thread>

using namespace kubert;

TEST_CASE("qz_make canonicalizes into [0,1) with p'-denominator") {
  QZ x = qz_make(8, 15, 2);
  CHECK(x.num() == 8);
  CHECK(x.den() == 15);

  QZ y = qz_make(20, 15, 2);  // 20/15 = 4/3 == 1/3 mod Z
  CHECK(y.num() == 1);
  CHECK(y.den() == 3);

  CHECK_THROWS_AS(qz_make(3, 6, 2), domain_error);  // reduces to 1/2
  CHECK_THROWS_AS(qz_make(1, 0, 2), domain_error);

  QZ neg = qz_make(-1, 3, 2);
  CHECK(neg.num() == 2);
  CHECK(neg.den() == 3);
}

TEST_CASE("group operations in Q/Z") {
  CHECK(qz_scale(15, qz_make(8, 15, 2)).is_zero());
  CHECK(qz_add(qz_make(1, 5, 2), qz_make(1, 3, 2)) == qz_make(8, 15, 2));
  CHECK(qz_neg(qz_make(1, 3, 2)) == qz_make(2, 3, 2));
  CHECK(qz_neg(QZ()).is_zero());
  // scaling by the characteristic is the digit-shift map, still in the group
  CHECK(qz_scale(2, qz_make(2, 3, 2)) == qz_make(1, 3, 2));
}

TEST_CASE("mult_order") {
  CHECK(mult_order(2, Int(15)) == 4);
  CHECK(mult_order(2, Int(1)) == 1);
  CHECK(mult_order(2, Int(257)) == 16);  // oracle: direct powering
  CHECK(mult_order(2, Int(257)) == oracle::order(2, 257));
  CHECK_THROWS_AS(mult_order(2, Int(6)), domain_error);
  for (Int m = 3; m < 200; m += 2) CHECK(mult_order(2, m) == oracle::order(2, m));
}

TEST_CASE("digit_sum: small, generic base, and the wide path") {
  CHECK(digit_sum(2, Int(8)) == 1);
  CHECK(digit_sum(2, Int(15)) == 4);
  CHECK(digit_sum(2, Int(0)) == 0);
  CHECK(digit_sum(2, pow2m1(336)) == 336);  // all-ones word, limb fold
  CHECK(digit_sum(3, Int(17)) == 5);        // 122 in base 3
  CHECK(digit_sum(3, Int(17)) == oracle::digit_sum(3, 17));

  // cross-check both kernels against the division oracle on wide values
  Int big = (pow2m1(336) * 0x9e3779b97f4a7c15ull) ^ (Int(1) << 200);
  CHECK(digit_sum(2, big) == oracle::digit_sum(2, big));
  CHECK(digit_sum(5, big) == oracle::digit_sum(5, big));
  CHECK(digit_sum(7, big % pow2m1(120)) == oracle::digit_sum(7, big % pow2m1(120)));
}

TEST_CASE("v_eval matches the stated examples and the oracle") {
  CHECK(v_eval(2, QZ()) == VValue(0, 1));
  CHECK(v_eval(2, qz_make(1, 3, 2)) == VValue(1, 2));
  CHECK(v_eval(2, qz_make(1, 7, 2)) == VValue(1, 3));
  CHECK(v_eval(2, qz_make(8, 15, 2)) == VValue(1, 4));
  CHECK(oracle::v(2, qz_make(1, 7, 2)) == Rat(1, 3));
  CHECK(oracle::v(2, qz_make(8, 15, 2)) == Rat(1, 4));
  CHECK_THROWS_AS(v_eval(2, QZ::make_unchecked(1, 2)), domain_error);
}

TEST_CASE("v_eval agrees with the long-division path and the oracle on a sweep") {
  for (std::uint64_t j = 0; j < 255; ++j) {
    QZ x = QZ::make_unchecked(j, 255);
    VValue v = v_eval(2, x);
    CHECK(v == v_eval_period(2, x));
    CHECK(v.to_rat() == oracle::v(2, x));
    // VValue denominator divides k(p-1)
    unsigned k = mult_order(2, x.den());
    CHECK(k % v.den == 0);
  }
  // generic p sanity: characteristic 3 on denominators dividing 3^5-1
  for (std::uint64_t j = 1; j < 242; j += 7) {
    QZ x = QZ::make_unchecked(j, 242);
    CHECK(v_eval(3, x) == v_eval_period(3, x));
    CHECK(v_eval(3, x).to_rat() == oracle::v(3, x));
  }
}

TEST_CASE("v_bits_u64 is the same function on machine-word denominators") {
  for (std::uint64_t j = 0; j < 255; ++j) {
    VValue v = v_eval(2, QZ::make_unchecked(j, 255));
    CHECK(Rat(v_bits_u64(j, 255, 8), 8) == v.to_rat());
  }
  // the defining formula: V(j/(2^K-1)) = popcount(j)/K for 0 <= j < 2^K-1
  for (std::uint64_t j : {0ull, 1ull, 4094ull, 919ull, 2048ull})
    CHECK(Rat(std::popcount(j), 12) == v_eval(2, QZ::make_unchecked(j, 4095)).to_rat());
}

TEST_CASE("VCache is semantically invisible, including under threads") {
  VCache cache(2);
  for (std::uint64_t j = 0; j < 100; ++j) {
    QZ x = QZ::make_unchecked(j, 4095);
    CHECK(cache(x) == v_eval(2, x));
  }
  std::vector<std::thread> ts;
  std::atomic<bool> ok{true};
  for (int w = 0; w < 4; ++w)
    ts.emplace_back([&] {
      for (std::uint64_t j = 0; j < 4095; j += 3) {
        QZ x = QZ::make_unchecked(j, 4095);
        if (!(cache(x) == v_eval(2, x))) ok = false;
      }
    });
  for (auto& t : ts) t.join();
  CHECK(ok);
}
