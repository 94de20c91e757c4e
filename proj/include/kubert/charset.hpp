#pragma once

// Multiplicative-character data for hypergeometric sheaves. Characters are
// represented purely by their exponents in Q/Z; a CharSet is a duplicate-free
// collection canonically sorted by (den, num).
//
// Large character sets (full products of Char(2^a+1)\{1} factors) are kept in
// expression form and only materialized under an explicit size cap; the
// V-test engine works on the expression directly.

#include <kubert/qz.hpp>

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace kubert {

using json = nlohmann::ordered_json;

class CharSet {
 public:
  CharSet() = default;

  // Sorts and rejects duplicates.
  static CharSet of(std::vector<QZ> elems) {
    std::sort(elems.begin(), elems.end());
    for (std::size_t i = 1; i < elems.size(); ++i)
      if (elems[i] == elems[i - 1]) throw domain_error("CharSet: duplicate character");
    CharSet s;
    s.elems_ = std::move(elems);
    return s;
  }

  const std::vector<QZ>& elems() const { return elems_; }
  std::size_t size() const { return elems_.size(); }
  bool contains(const QZ& x) const { return std::binary_search(elems_.begin(), elems_.end(), x); }

  bool operator==(const CharSet& o) const { return elems_ == o.elems_; }

 private:
  std::vector<QZ> elems_;
};

// {i/N : 0 <= i < N}. Rejects N sharing a factor with the characteristic.
inline CharSet char_full(const Int& N, std::uint64_t p = 2) {
  if (N < 1) throw domain_error("char_full: N must be positive");
  if (gcd(N, Int(p)) != 1) throw domain_error("char_full: N divisible by the characteristic");
  std::vector<QZ> v;
  v.reserve(to_u64(N, "char_full size"));
  for (Int i = 0; i < N; ++i) v.push_back(QZ::make_unchecked(i, N));
  return CharSet::of(std::move(v));
}

// Char(N) \ {1}: the N-1 nontrivial characters of order dividing N.
inline CharSet char_full_minus_triv(const Int& N, std::uint64_t p = 2) {
  if (N < 1) throw domain_error("char_full_minus_triv: N must be positive");
  if (gcd(N, Int(p)) != 1) throw domain_error("char_full_minus_triv: N divisible by the characteristic");
  std::vector<QZ> v;
  for (Int i = 1; i < N; ++i) v.push_back(QZ::make_unchecked(i, N));
  return CharSet::of(std::move(v));
}

// All pairwise sums {alpha + beta}. Distinctness of the sums is part of the
// sheaf datum being valid; a collision is reported, not deduplicated.
inline CharSet product_set(const CharSet& A, const CharSet& B) {
  std::vector<QZ> v;
  v.reserve(A.size() * B.size());
  for (const QZ& a : A.elems())
    for (const QZ& b : B.elems()) v.push_back(qz_add(a, b));
  std::sort(v.begin(), v.end());
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] == v[i - 1]) throw collision_error("product_set: pairwise sums are not distinct");
  return CharSet::of(std::move(v));
}

// Tensoring with a Kummer sheaf: shift every exponent by x0.
inline CharSet kummer_twist(const CharSet& S, const QZ& x0) {
  std::vector<QZ> v;
  v.reserve(S.size());
  for (const QZ& a : S.elems()) v.push_back(qz_add(a, x0));
  return CharSet::of(std::move(v));
}

// Symbolic character-set expression, mirroring the JSON spec format:
//   {"chars":[[num,den],...]} | {"char_full":N} | {"char_minus_one":N}
//   | {"product":[expr,...]}
struct CharSetExpr {
  enum class Kind { Chars, Full, FullMinusOne, Product };

  Kind kind = Kind::Chars;
  std::vector<QZ> chars;              // Kind::Chars
  Int modulus = 0;                    // Full / FullMinusOne
  std::vector<CharSetExpr> factors;   // Product

  static CharSetExpr of_chars(std::vector<QZ> v) {
    CharSetExpr e;
    e.kind = Kind::Chars;
    e.chars = std::move(v);
    return e;
  }
  static CharSetExpr full(Int N) {
    CharSetExpr e;
    e.kind = Kind::Full;
    e.modulus = std::move(N);
    return e;
  }
  static CharSetExpr full_minus_one(Int N) {
    CharSetExpr e;
    e.kind = Kind::FullMinusOne;
    e.modulus = std::move(N);
    return e;
  }
  static CharSetExpr product(std::vector<CharSetExpr> fs) {
    CharSetExpr e;
    e.kind = Kind::Product;
    e.factors = std::move(fs);
    return e;
  }

  Int size() const {
    switch (kind) {
      case Kind::Chars: return Int(chars.size());
      case Kind::Full: return modulus;
      case Kind::FullMinusOne: return modulus - 1;
      case Kind::Product: {
        Int n = 1;
        for (const auto& f : factors) n *= f.size();
        return n;
      }
    }
    throw domain_error("CharSetExpr: bad kind");
  }

  // lcm of the denominators of every character the expression denotes.
  Int denominator_lcm() const {
    switch (kind) {
      case Kind::Chars: {
        Int l = 1;
        for (const QZ& c : chars) l = lcm(l, c.den());
        return l;
      }
      case Kind::Full:
      case Kind::FullMinusOne: return modulus == 1 ? Int(1) : modulus;
      case Kind::Product: {
        Int l = 1;
        for (const auto& f : factors) l = lcm(l, f.denominator_lcm());
        return l;
      }
    }
    throw domain_error("CharSetExpr: bad kind");
  }

  // When the expression is a product of Char(2^a_i+1)\{1} factors (a single
  // factor counts), return the exponents a_1 > ... > a_t. This is the shape
  // the collapsed V(2; a_1..a_t; x) evaluator applies to.
  std::optional<std::vector<unsigned>> product_profile() const {
    std::vector<const CharSetExpr*> leaves;
    if (kind == Kind::FullMinusOne) {
      leaves.push_back(this);
    } else if (kind == Kind::Product) {
      for (const auto& f : factors) {
        if (f.kind != Kind::FullMinusOne) return std::nullopt;
        leaves.push_back(&f);
      }
    } else {
      return std::nullopt;
    }
    if (leaves.empty()) return std::nullopt;
    std::vector<unsigned> a;
    for (const auto* l : leaves) {
      Int m = l->modulus - 1;  // need modulus = 2^a + 1
      if (m < 2) return std::nullopt;
      unsigned bits = 0;
      Int t = m;
      while ((t & 1) == 0) {
        t >>= 1;
        ++bits;
      }
      if (t != 1 || bits == 0) return std::nullopt;
      a.push_back(bits);
    }
    std::sort(a.rbegin(), a.rend());
    for (std::size_t i = 1; i < a.size(); ++i)
      if (!coprime_2pow(a[i - 1], a[i])) return std::nullopt;  // 2^a+1 not pairwise coprime
    return a;
  }

  CharSet materialize(std::uint64_t max_size = 1u << 16) const {
    if (size() > max_size)
      throw budget_error("CharSetExpr: set too large to materialize", to_u64(size(), "charset size"), max_size);
    switch (kind) {
      case Kind::Chars: return CharSet::of(chars);
      case Kind::Full: return char_full(modulus);
      case Kind::FullMinusOne: return char_full_minus_triv(modulus);
      case Kind::Product: {
        if (factors.empty()) throw domain_error("CharSetExpr: empty product");
        CharSet acc = factors[0].materialize(max_size);
        for (std::size_t i = 1; i < factors.size(); ++i) acc = product_set(acc, factors[i].materialize(max_size));
        return acc;
      }
    }
    throw domain_error("CharSetExpr: bad kind");
  }
};

// ---- JSON ----

inline json qz_to_json(const QZ& x) {
  return json::array({to_u64(x.num(), "QZ num"), to_u64(x.den(), "QZ den")});
}

inline QZ qz_from_json(const json& j, std::uint64_t p) {
  if (!j.is_array() || j.size() != 2) throw domain_error("rational must be a [num,den] pair");
  return qz_make(Int(j[0].get<std::int64_t>()), Int(j[1].get<std::int64_t>()), p);
}

inline json charset_expr_to_json(const CharSetExpr& e) {
  switch (e.kind) {
    case CharSetExpr::Kind::Chars: {
      json arr = json::array();
      for (const QZ& c : e.chars) arr.push_back(qz_to_json(c));
      return json{{"chars", arr}};
    }
    case CharSetExpr::Kind::Full: return json{{"char_full", to_u64(e.modulus, "char_full N")}};
    case CharSetExpr::Kind::FullMinusOne: return json{{"char_minus_one", to_u64(e.modulus, "char_minus_one N")}};
    case CharSetExpr::Kind::Product: {
      json arr = json::array();
      for (const auto& f : e.factors) arr.push_back(charset_expr_to_json(f));
      return json{{"product", arr}};
    }
  }
  throw domain_error("CharSetExpr: bad kind");
}

inline CharSetExpr charset_expr_from_json(const json& j, std::uint64_t p) {
  if (!j.is_object()) throw domain_error("character set must be a JSON object");
  if (j.contains("chars")) {
    std::vector<QZ> v;
    for (const auto& c : j.at("chars")) v.push_back(qz_from_json(c, p));
    return CharSetExpr::of_chars(std::move(v));
  }
  if (j.contains("char_full")) return CharSetExpr::full(Int(j.at("char_full").get<std::int64_t>()));
  if (j.contains("char_minus_one")) return CharSetExpr::full_minus_one(Int(j.at("char_minus_one").get<std::int64_t>()));
  if (j.contains("product")) {
    std::vector<CharSetExpr> fs;
    for (const auto& f : j.at("product")) fs.push_back(charset_expr_from_json(f, p));
    return CharSetExpr::product(std::move(fs));
  }
  throw domain_error("character set: expected one of chars/char_full/char_minus_one/product");
}

// Canonical materialized serialization (sorted, reduced): the bit-exact form
// used by golden-file tests.
inline json charset_to_json(const CharSet& s) {
  json arr = json::array();
  for (const QZ& c : s.elems()) arr.push_back(qz_to_json(c));
  return json{{"chars", arr}};
}

}  // namespace kubert
