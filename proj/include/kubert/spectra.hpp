#pragma once

// Spectra of odd-order torus elements in extraspecial normalizers of
// characteristic 2, and their ssp/m2sp classification.
//
// A TorusSpec describes g by parts (a_i, eps_i, r_i) inside a maximal torus
// C_{2^{a_1}-eps_1} x ... x C_{2^{a_t}-eps_t}, together with an odd-order
// scalar twist xi. The eigenvalue multiset on the 2^n-dimensional module is
//
//   { xi * prod_i zeta_i^{r_i} },   zeta_i in mu_{2^{a_i}+1} \ {1}  (eps = -)
//                                   zeta_1 in mu_{2^{a_1}-1} u {1}  (eps = +)
//
// handled entirely through exponents modulo an explicit common modulus; no
// floating point, no algebraic numbers.

#include <kubert/charset.hpp>

#include <map>

namespace kubert {

struct TorusPart {
  unsigned a = 1;
  int eps = -1;  // +1 or -1; at most one + part, normalized to the front
  Int r = 0;     // 0 <= r < 2^a - eps

  Int modulus() const { return eps < 0 ? pow2m1(a) + 2 : pow2m1(a); }
};

struct TorusSpec {
  std::vector<TorusPart> parts;
  Int twist_exp = 0;
  Int twist_order = 1;  // odd

  unsigned n() const {
    unsigned s = 0;
    for (const auto& p : parts) s += p.a;
    return s;
  }
};

// Validates ranges and the epsilon rule, puts the (unique) + part first and
// sorts the - parts descending by a; ties keep input order.
inline TorusSpec normalize_torus_spec(TorusSpec ts) {
  if (ts.parts.empty()) throw domain_error("TorusSpec: needs at least one part");
  if (ts.twist_order < 1 || ts.twist_order % 2 == 0) throw domain_error("TorusSpec: twist order must be odd positive");
  ts.twist_exp %= ts.twist_order;
  if (ts.twist_exp < 0) ts.twist_exp += ts.twist_order;

  int plus_count = 0;
  for (const auto& p : ts.parts) {
    if (p.a == 0) throw domain_error("TorusSpec: parts must be positive");
    if (p.eps != 1 && p.eps != -1) throw domain_error("TorusSpec: eps must be +1 or -1");
    if (p.eps == 1) ++plus_count;
    Int mod = p.modulus();
    if (p.r < 0 || (mod == 1 ? p.r != 0 : p.r >= mod)) throw domain_error("TorusSpec: r out of range");
  }
  if (plus_count > 1) throw domain_error("TorusSpec: at most one + part");

  std::stable_partition(ts.parts.begin(), ts.parts.end(), [](const TorusPart& p) { return p.eps == 1; });
  auto minus_begin = ts.parts.begin() + plus_count;
  // Descending a; among parts of equal a the r = 0 one goes last, since only
  // the final slot of case (b) tolerates a non-coprime r. Other ties are
  // order-insensitive for the case conditions.
  std::stable_sort(minus_begin, ts.parts.end(), [](const TorusPart& x, const TorusPart& y) {
    if (x.a != y.a) return x.a > y.a;
    return (x.r != 0) && (y.r == 0);
  });
  return ts;
}

struct SpectrumMultiset {
  Int modulus = 1;
  std::map<Int, std::uint64_t> counts;  // residue -> multiplicity

  std::uint64_t total() const {
    std::uint64_t s = 0;
    for (auto& [r, c] : counts) s += c;
    return s;
  }
};

inline SpectrumMultiset spectrum(const TorusSpec& input, unsigned n_cap = 24) {
  TorusSpec ts = normalize_torus_spec(input);
  const unsigned n = ts.n();
  if (n > n_cap) throw budget_error("spectrum: 2^n enumeration over cap", n, n_cap);

  Int M = ts.twist_order;
  for (const auto& p : ts.parts) M = lcm(M, p.modulus());

  SpectrumMultiset sm;
  sm.modulus = M;

  // Per part: list of exponent contributions r*k*(M/mod) mod M over the
  // admissible k (the + part sees k = 0 twice: 1 lies in mu u {1} doubly).
  std::vector<std::vector<Int>> choices;
  for (const auto& p : ts.parts) {
    Int mod = p.modulus();
    Int step = (p.r * (M / mod)) % M;
    std::vector<Int> c;
    if (p.eps < 0) {
      for (Int k = 1; k < mod; ++k) c.push_back((k * step) % M);
    } else {
      c.push_back(0);
      for (Int k = 0; k < mod; ++k) c.push_back((k * step) % M);
    }
    if (Int(c.size()) != (Int(1) << p.a)) throw error("spectrum: internal choice-count mismatch");
    choices.push_back(std::move(c));
  }

  Int base = (ts.twist_exp * (M / ts.twist_order)) % M;
  std::vector<std::size_t> idx(choices.size(), 0);
  while (true) {
    Int r = base;
    for (std::size_t j = 0; j < choices.size(); ++j) {
      r += choices[j][idx[j]];
      if (r >= M) r -= M;
    }
    ++sm.counts[r];
    std::size_t j = choices.size();
    while (j-- > 0) {
      if (++idx[j] < choices[j].size()) break;
      idx[j] = 0;
      if (j == 0) {
        if (sm.total() != (1ull << n)) throw error("spectrum: total mass != 2^n");
        return sm;
      }
    }
  }
}

inline std::uint64_t max_multiplicity(const SpectrumMultiset& sm) {
  std::uint64_t m = 0;
  for (auto& [r, c] : sm.counts) m = std::max(m, c);
  return m;
}

inline bool is_m2sp(const SpectrumMultiset& sm) { return max_multiplicity(sm) <= 2; }
inline bool is_ssp(const SpectrumMultiset& sm) { return max_multiplicity(sm) <= 1; }

enum class TorusCase { a, b, c, d, none };

inline const char* torus_case_name(TorusCase c) {
  switch (c) {
    case TorusCase::a: return "a";
    case TorusCase::b: return "b";
    case TorusCase::c: return "c";
    case TorusCase::d: return "d";
    case TorusCase::none: return "none";
  }
  return "none";
}

// The arithmetic side conditions of the four torus-element cases. The twist
// plays no role here.
inline TorusCase classify_case(const TorusSpec& input) {
  TorusSpec ts = normalize_torus_spec(input);
  const auto& ps = ts.parts;
  const std::size_t t = ps.size();
  const bool has_plus = ps[0].eps == 1;

  auto coprime_r = [](const TorusPart& p) { return gcd(p.r, p.modulus()) == 1; };
  auto pairwise_coprime_minus = [&](std::size_t count) {
    for (std::size_t i = 0; i < count; ++i)
      for (std::size_t k = i + 1; k < count; ++k)
        if (!coprime_2pow(ps[i].a, ps[k].a)) return false;
    return true;
  };

  if (!has_plus) {
    if (pairwise_coprime_minus(t)) {
      bool all_r = true;
      for (const auto& p : ps) all_r &= coprime_r(p);
      if (all_r) return TorusCase::a;
    }
    if (t >= 2 && ps[t - 1].a == 1) {
      bool head_coprime = pairwise_coprime_minus(t - 1);
      bool head_r = true;
      for (std::size_t i = 0; i + 1 < t; ++i) head_r &= coprime_r(ps[i]);
      if (head_coprime && head_r) {
        if (ps[t - 1].r == 0) return TorusCase::b;
        unsigned odd_heads = 0;
        for (std::size_t i = 0; i + 1 < t; ++i) odd_heads += ps[i].a % 2;
        if (coprime_r(ps[t - 1]) && odd_heads == 1 && ts.n() % 2 == 0) return TorusCase::c;
      }
    }
    return TorusCase::none;
  }

  // + part first: 2^{a_1}-1 and the 2^{a_i}+1 pairwise coprime, all r
  // coprime to their component orders.
  std::vector<Int> mods;
  mods.push_back(pow2m1(ps[0].a));
  for (std::size_t i = 1; i < t; ++i) mods.push_back(pow2m1(ps[i].a) + 2);
  for (std::size_t i = 0; i < mods.size(); ++i)
    for (std::size_t k = i + 1; k < mods.size(); ++k)
      if (gcd(mods[i], mods[k]) != 1) return TorusCase::none;
  for (const auto& p : ps)
    if (gcd(p.r, p.modulus()) != 1) return TorusCase::none;
  return TorusCase::d;
}

// Order of the image in the quotient: lcm of the component orders
// (2^{a_i}-eps_i)/gcd(r_i, .). For cases (a)-(c) this reproduces the stated
// product formulas; case (d) has no closed form and is computed directly.
inline Int ord_bar(const TorusSpec& input) {
  TorusSpec ts = normalize_torus_spec(input);
  if (classify_case(ts) == TorusCase::none) throw domain_error("ord_bar: spec is not classified (cases a-d)");
  Int o = 1;
  for (const auto& p : ts.parts) {
    Int mod = p.modulus();
    o = lcm(o, mod / gcd(p.r, mod));
  }
  return o;
}

// ---- JSON ----

inline json torus_spec_to_json(const TorusSpec& ts) {
  json parts = json::array();
  for (const auto& p : ts.parts)
    parts.push_back(json{{"a", p.a}, {"eps", p.eps}, {"r", to_u64(p.r, "torus r")}});
  json j;
  j["parts"] = parts;
  j["twist"] = json::array({to_u64(ts.twist_exp, "twist exp"), to_u64(ts.twist_order, "twist order")});
  return j;
}

inline TorusSpec torus_spec_from_json(const json& j) {
  TorusSpec ts;
  if (!j.is_object() || !j.contains("parts")) throw domain_error("torus spec: expected {parts:[...]}");
  for (const auto& pj : j.at("parts")) {
    TorusPart p;
    p.a = pj.at("a").get<unsigned>();
    p.eps = pj.value("eps", -1);
    p.r = Int(pj.value("r", 0));
    ts.parts.push_back(p);
  }
  if (j.contains("twist")) {
    const auto& t = j.at("twist");
    if (!t.is_array() || t.size() != 2) throw domain_error("torus spec: twist must be [exp, order]");
    ts.twist_exp = Int(t[0].get<std::int64_t>());
    ts.twist_order = Int(t[1].get<std::int64_t>());
  }
  return normalize_torus_spec(ts);
}

inline json spectrum_to_json(const SpectrumMultiset& sm) {
  json counts = json::array();
  for (auto& [r, c] : sm.counts) counts.push_back(json::array({to_u64(r, "residue"), c}));
  json j;
  j["modulus"] = to_u64(sm.modulus, "modulus");
  j["counts"] = counts;
  return j;
}

// Exhaustive desk-scale enumeration: every normalized TorusSpec with
// sum a_i = n and trivial twist (the twist shifts the whole spectrum, so it
// changes neither multiplicities nor the classification).
inline std::vector<TorusSpec> enumerate_torus_specs(unsigned n) {
  std::vector<TorusSpec> out;

  // descending partitions of m
  std::vector<std::vector<unsigned>> parts_list;
  std::vector<unsigned> cur;
  auto rec = [&](auto&& self, unsigned rem, unsigned maxpart) -> void {
    if (rem == 0) {
      parts_list.push_back(cur);
      return;
    }
    for (unsigned v = std::min(rem, maxpart); v >= 1; --v) {
      cur.push_back(v);
      self(self, rem - v, v);
      cur.pop_back();
    }
  };

  auto expand_r = [&out](TorusSpec base) {
    // odometer over r ranges
    std::vector<Int> mods;
    for (const auto& p : base.parts) mods.push_back(p.modulus());
    std::vector<Int> r(mods.size(), 0);
    while (true) {
      for (std::size_t i = 0; i < r.size(); ++i) base.parts[i].r = r[i];
      out.push_back(base);
      std::size_t j = r.size();
      bool done = true;
      while (j-- > 0) {
        if (++r[j] < std::max(mods[j], Int(1))) {
          done = false;
          break;
        }
        r[j] = 0;
        if (j == 0) break;
      }
      if (done) return;
    }
  };

  // all-minus specs
  rec(rec, n, n);
  for (const auto& pl : parts_list) {
    TorusSpec ts;
    for (unsigned a : pl) ts.parts.push_back(TorusPart{a, -1, 0});
    expand_r(ts);
  }

  // one + part (first), minus tail
  for (unsigned aplus = 1; aplus <= n; ++aplus) {
    parts_list.clear();
    if (aplus == n) {
      parts_list.push_back({});
    } else {
      rec(rec, n - aplus, n - aplus);
    }
    for (const auto& pl : parts_list) {
      TorusSpec ts;
      ts.parts.push_back(TorusPart{aplus, +1, 0});
      for (unsigned a : pl) ts.parts.push_back(TorusPart{a, -1, 0});
      expand_r(ts);
    }
  }
  return out;
}

}  // namespace kubert
