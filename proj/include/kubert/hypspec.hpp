#pragma once

// Hypergeometric sheaf datum: characteristic, upstairs and downstairs
// character sets, optional Kummer twist. Validity means: D > M >= 0, all
// characters pairwise distinct, upstairs disjoint from downstairs.
//
// Small sets are validated by materializing. Full-product upstairs sets are
// validated symbolically: pairwise distinctness follows from the coprimality
// of the 2^a_i+1 (2-parts criterion), membership tests go through CRT
// components, so a rank-2^25 datum never gets expanded here.

#include <kubert/charset.hpp>

namespace kubert {

struct HypSpec {
  std::uint64_t p = 2;
  CharSetExpr upstairs;
  CharSetExpr downstairs;
  QZ twist;  // applied to both character sets

  Int D = 0, M = 0;

  Int W() const { return D - M; }

  // Effective character exponents: expression value + twist.
  // Materialized forms; callers must respect the size cap themselves.
  CharSet upstairs_set(std::uint64_t cap = 1u << 16) const {
    CharSet s = upstairs.materialize(cap);
    return twist.is_zero() ? s : kummer_twist(s, twist);
  }
  CharSet downstairs_set(std::uint64_t cap = 1u << 16) const {
    CharSet s = downstairs.materialize(cap);
    return twist.is_zero() ? s : kummer_twist(s, twist);
  }

  // lcm of all character denominators, twist included.
  Int denominator_lcm() const {
    Int l = lcm(upstairs.denominator_lcm(), downstairs.denominator_lcm());
    return lcm(l, twist.den());
  }
};

namespace detail {

// Is c (untwisted) an element of the product set described by profile a?
// c = sum_j i_j/(2^a_j+1) with every i_j nonzero, iff c's denominator divides
// prod (2^a_j+1) and every CRT component of c is nonzero.
inline bool product_profile_contains(const std::vector<unsigned>& a, const QZ& c) {
  Int prod = 1;
  for (unsigned ai : a) prod *= pow2m1(ai) + 2;  // 2^ai + 1
  if (prod % c.den() != 0) return false;
  Int num = c.num() * (prod / c.den());
  for (unsigned ai : a) {
    Int Ai = pow2m1(ai) + 2;
    if (num % Ai == 0) return false;
  }
  return true;
}

}  // namespace detail

// Validated construction. Records D, M, W.
inline HypSpec hyp_spec(std::uint64_t p, CharSetExpr upstairs, CharSetExpr downstairs, QZ twist = QZ(),
                        std::uint64_t materialize_cap = 1u << 16) {
  HypSpec s;
  s.p = p;
  s.upstairs = std::move(upstairs);
  s.downstairs = std::move(downstairs);
  s.twist = std::move(twist);
  s.D = s.upstairs.size();
  s.M = s.downstairs.size();
  if (s.D <= s.M) throw domain_error("hyp_spec: need D > M");
  if (gcd(s.twist.den(), Int(p)) != 1) throw domain_error("hyp_spec: twist denominator divisible by p");

  // Downstairs is always small in this catalog; materialize and check.
  CharSet down = s.downstairs.materialize(materialize_cap);
  if (Int(down.size()) != s.M) throw domain_error("hyp_spec: downstairs characters not distinct");
  for (const QZ& b : down.elems())
    if (gcd(b.den(), Int(p)) != 1) throw domain_error("hyp_spec: character denominator divisible by p");

  auto profile = s.upstairs.product_profile();
  if (s.upstairs.size() <= materialize_cap) {
    CharSet up = s.upstairs.materialize(materialize_cap);  // throws collision_error on duplicate sums
    for (const QZ& x : up.elems())
      if (gcd(x.den(), Int(p)) != 1) throw domain_error("hyp_spec: character denominator divisible by p");
    for (const QZ& b : down.elems())
      if (up.contains(b)) throw domain_error("hyp_spec: upstairs and downstairs characters overlap");
  } else if (profile) {
    // Distinctness holds because the 2^a_i+1 are pairwise coprime (the
    // profile extractor certified that); disjointness element by element.
    for (const QZ& b : down.elems())
      if (detail::product_profile_contains(*profile, b))
        throw domain_error("hyp_spec: upstairs and downstairs characters overlap");
  } else {
    throw budget_error("hyp_spec: upstairs set too large to validate and not a recognized product form",
                       to_u64(s.upstairs.size(), "upstairs size"), materialize_cap);
  }
  return s;
}

inline json hyp_spec_to_json(const HypSpec& s) {
  json j;
  j["p"] = s.p;
  j["upstairs"] = charset_expr_to_json(s.upstairs);
  j["downstairs"] = charset_expr_to_json(s.downstairs);
  j["twist"] = qz_to_json(s.twist);
  return j;
}

inline HypSpec hyp_spec_from_json(const json& j) {
  if (!j.is_object()) throw domain_error("sheaf spec must be a JSON object");
  std::uint64_t p = j.value("p", 2);
  if (p < 2) throw domain_error("sheaf spec: bad characteristic");
  CharSetExpr up = charset_expr_from_json(j.at("upstairs"), p);
  CharSetExpr down = j.contains("downstairs") ? charset_expr_from_json(j.at("downstairs"), p)
                                              : CharSetExpr::of_chars({});
  QZ twist = j.contains("twist") ? qz_from_json(j.at("twist"), p) : QZ();
  return hyp_spec(p, std::move(up), std::move(down), std::move(twist));
}

// Canonical serialization with both sets materialized, sorted and reduced.
inline json hyp_spec_to_canonical_json(const HypSpec& s, std::uint64_t cap = 1u << 16) {
  json j;
  j["p"] = s.p;
  j["upstairs"] = charset_to_json(s.upstairs_set(cap));
  j["downstairs"] = charset_to_json(s.downstairs_set(cap));
  j["twist"] = qz_to_json(s.twist);
  return j;
}

}  // namespace kubert
