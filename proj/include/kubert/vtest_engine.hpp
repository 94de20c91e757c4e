#pragma once

// The V-test sweep engine.
//
// run_vtest semi-decides finiteness: Fail (an exact violation, re-verified
// through the naive per-character path) is conclusive, Pass only says the
// inequality held on the swept domain.
//
// Sweep plan, in the documented total order that also defines which witness
// gets reported:
//
//   phase A  (full-product upstairs with an N-invariant downstairs shape):
//     the lattice x = sum_j i_j/(2^{a_j}+1), tuples (i_1..i_t) in
//     lexicographic order, the all-nonzero block first, then the rest.
//     The test value at such points does not depend on N, so N = 1.
//   phase B  (general ladder), for m = 1..m_max with K = d*m,
//     d = ord_2(lcm of character denominators):
//     x = j/(2^K-1) for ascending j that are minimal under the rotation
//     j -> 2j mod 2^K-1 (Galois pruning; V(x) = V(2x) makes orbits
//     equivalent), and for each such j the N-classes in ascending order.
//     N enters only through the image character sets, so units N mod L with
//     equal images are swept once.
//
// Everything evaluated is exact: phase A works at a fixed scale 2K' where
// K' = ord_2(lattice modulus), phase B compares integer-scaled digit counts,
// and V(j/(2^K-1)) = popcount(j)/K is the defining formula of V, not an
// approximation.

#include <kubert/vtest.hpp>

#include <cstdlib>

namespace kubert {

inline std::uint64_t default_budget_from_env() {
  if (const char* s = std::getenv("MONODROMY_BUDGET")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(s, &end, 10);
    if (end && *end == '\0' && v > 0) return v;
    throw domain_error("MONODROMY_BUDGET: not a positive integer");
  }
  return 1ull << 27;
}

struct VTestOptions {
  unsigned m_max = 1;
  std::uint64_t budget = default_budget_from_env();  // evaluated test points
  unsigned jobs = 1;
  bool force_naive = false;  // canonical per-character evaluation everywhere
  std::uint64_t table_cap = 1ull << 22;        // phase-A table entries per subset
  std::uint64_t materialize_cap = 1ull << 22;  // phase-B residue materialization
};

struct Verdict {
  enum class Outcome { PassUpToBound, FailWithWitness };
  Outcome outcome = Outcome::PassUpToBound;
  unsigned bound = 0;  // largest m explored (0 = failed before/inside phase A)
  std::uint64_t points_checked = 0;
  std::optional<VTestPoint> witness;
  Rat witness_lhs;  // re-verified through the naive path
  Rat threshold;

  bool failed() const { return outcome == Outcome::FailWithWitness; }
};

namespace detail {

inline bool is_min_rotation(std::uint64_t j, unsigned K, std::uint64_t M) {
  std::uint64_t r = j;
  for (unsigned s = 1; s < K; ++s) {
    r = ((r << 1) | (r >> (K - 1))) & M;
    if (r < j) return false;
  }
  return true;
}

inline std::uint64_t euler_phi_u64(std::uint64_t n) {
  std::uint64_t res = n;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      res -= res / p;
      while (n % p == 0) n /= p;
    }
  }
  if (n > 1) res -= res / n;
  return res;
}

// Number of binary necklaces of length K, minus the all-ones word: exactly
// the rotation-minimal j in [0, 2^K-1).
inline std::uint64_t canonical_point_count(unsigned K) {
  unsigned __int128 sum = 0;
  for (unsigned d = 1; d <= K; ++d) {
    if (K % d != 0) continue;
    sum += static_cast<unsigned __int128>(euler_phi_u64(d)) << (K / d);
  }
  return static_cast<std::uint64_t>(sum / K) - 1;
}

// ---- phase A ------------------------------------------------------------

struct LatticeContext {
  std::vector<std::uint64_t> A;  // 2^{a_j}+1, j = 0..t-1
  std::uint64_t C = 1;           // prod A_j
  unsigned K = 1;                // ord_2(C'), C' = lcm(C, downstairs modulus)
  std::uint32_t SV = 2;          // scale 2K
  DownShape shape = DownShape::Empty;
  std::uint64_t A_down = 1;

  struct Sub {
    std::uint64_t mT = 1;  // prod of A_j outside the multiplier subset S
    unsigned kT = 1;       // ord_2(mT)
    std::uint64_t MS_mod = 1;
    int sign = 1;
    std::vector<std::uint16_t> table;            // V * SV by component residue, if tabled
    std::vector<std::vector<std::uint64_t>> contrib;  // [j][i_j] additive residue mod mT
  };
  std::vector<Sub> subs;  // every subset S except the full one; subs[0] is S = {}

  std::uint64_t scaled_v_of_c_point(std::uint64_t num) const {
    // V(num/C) * SV via one period of the binary expansion.
    if (num == 0) return 0;
    return v_bits_u64(num, C, K) * (SV / K);
  }
};

inline LatticeContext make_lattice_context(const CollapsedProfile& prof, DownShape shape, std::uint64_t A_down,
                                           const VTestOptions& opts) {
  LatticeContext ctx;
  const unsigned t = prof.t();
  Int C_int = prof.lattice_modulus();
  Int Cp = shape == DownShape::FullMinusOne || shape == DownShape::Full ? lcm(C_int, Int(A_down)) : C_int;
  if (C_int > (Int(1) << 62))
    throw budget_error("run_vtest: lattice modulus exceeds machine range", UINT64_MAX, 1ull << 62);
  ctx.C = to_u64(C_int, "lattice modulus");
  ctx.K = mult_order(2, Cp);
  ctx.SV = 2u * ctx.K;
  ctx.shape = shape;
  ctx.A_down = A_down;
  for (unsigned j = 0; j < t; ++j) ctx.A.push_back(to_u64(prof.part_modulus(j), "part modulus"));

  for (std::uint32_t mask = 0; mask + 1 < (1u << t); ++mask) {  // exclude the full subset
    LatticeContext::Sub sub;
    std::uint64_t mT = 1;
    for (unsigned j = 0; j < t; ++j)
      if (!(mask & (1u << j))) mT *= ctx.A[j];
    sub.mT = mT;
    sub.kT = mult_order(2, Int(mT));
    std::uint64_t ms = 1;
    for (unsigned j = 0; j < t; ++j)
      if (mask & (1u << j)) ms = mulmod_u64(ms, ctx.A[j] % mT, mT);
    sub.MS_mod = ms;
    sub.sign = ((t - std::popcount(mask)) % 2 == 0) ? 1 : -1;
    sub.contrib.resize(t);
    for (unsigned j = 0; j < t; ++j) {
      sub.contrib[j].assign(ctx.A[j], 0);
      if (!(mask & (1u << j))) {
        std::uint64_t step = mT / ctx.A[j];
        for (std::uint64_t i = 0; i < ctx.A[j]; ++i) sub.contrib[j][i] = mulmod_u64(i, step, mT);
      }
    }
    if (mT <= opts.table_cap) {
      sub.table.resize(mT);
      const std::uint32_t scale = ctx.SV / sub.kT;
      auto fill = [&sub, mT, scale](std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t z = lo; z < hi; ++z) {
          std::uint64_t w = mulmod_u64(sub.MS_mod, z, mT);
          sub.table[z] = static_cast<std::uint16_t>(w == 0 ? 0 : v_bits_u64(w, mT, sub.kT) * scale);
        }
      };
      const unsigned jobs = std::max(1u, opts.jobs);
      if (jobs == 1 || mT < (1u << 16)) {
        fill(0, mT);
      } else {
        std::vector<std::thread> threads;
        for (unsigned w = 0; w < jobs; ++w)
          threads.emplace_back(fill, mT * w / jobs, mT * (w + 1) / jobs);
        for (auto& th : threads) th.join();
      }
    }
    ctx.subs.push_back(std::move(sub));
  }
  return ctx;
}

// digits = the full tuple (i_0..i_{t-1}), i_j in [0, A_j). Returns slack*SV
// and writes the lattice numerator of the point.
inline std::int64_t lattice_slack_sv(const LatticeContext& ctx, const std::vector<std::uint64_t>& digits,
                                     std::uint64_t& y_num_out) {
  const unsigned t = static_cast<unsigned>(ctx.A.size());
  std::int64_t collapsed = 0;
  std::uint64_t y_num = 0;
  for (const auto& sub : ctx.subs) {
    std::uint64_t z = 0;
    for (unsigned j = 0; j < t; ++j) {
      z += sub.contrib[j][digits[j]];
      if (z >= sub.mT) z -= sub.mT;
    }
    std::uint64_t v;
    if (!sub.table.empty()) {
      v = sub.table[z];
    } else {
      std::uint64_t w = mulmod_u64(sub.MS_mod, z, sub.mT);
      v = w == 0 ? 0 : v_bits_u64(w, sub.mT, sub.kT) * (ctx.SV / sub.kT);
    }
    collapsed += sub.sign * static_cast<std::int64_t>(v);
    if (sub.mT == ctx.C) y_num = z;  // the S = {} subset carries y itself
  }
  y_num_out = y_num;

  const std::int64_t K = ctx.K;
  auto v_neg_of = [&](std::uint64_t num) -> std::int64_t {
    if (num == 0) return 0;
    return static_cast<std::int64_t>(ctx.SV) - static_cast<std::int64_t>(ctx.scaled_v_of_c_point(num));
  };

  switch (ctx.shape) {
    case DownShape::Empty:
      return collapsed + K;  // + SV/2
    case DownShape::SingleChar:  // {1} only in phase A
      return collapsed + v_neg_of(y_num);
    case DownShape::FullMinusOne: {
      std::uint64_t ay = mulmod_u64(ctx.A_down % ctx.C, y_num, ctx.C);
      return collapsed + v_neg_of(ay) - v_neg_of(y_num) + K;
    }
    case DownShape::Full: {
      std::uint64_t ay = mulmod_u64(ctx.A_down % ctx.C, y_num, ctx.C);
      return collapsed + v_neg_of(ay);
    }
    case DownShape::General: break;
  }
  throw error("lattice_slack_sv: unsupported downstairs shape");
}

struct LatticeHit {
  std::uint64_t rank;
  std::vector<std::uint64_t> tuple;
  std::uint64_t y_num;
};

// Sweep the lattice in the documented order; first violation or nullopt.
inline std::optional<LatticeHit> lattice_search(const LatticeContext& ctx, unsigned jobs) {
  const unsigned t = static_cast<unsigned>(ctx.A.size());

  ProductOdometer nonzero;
  for (unsigned j = 0; j < t; ++j) nonzero.radix.push_back(ctx.A[j] - 1);
  const std::uint64_t R1 = nonzero.size();

  auto scan_nonzero = [&](std::uint64_t lo, std::uint64_t hi) -> std::optional<LatticeHit> {
    std::vector<std::uint64_t> digits, tuple(t);
    nonzero.decode(lo, digits);
    for (std::uint64_t r = lo; r < hi; ++r) {
      for (unsigned j = 0; j < t; ++j) tuple[j] = digits[j] + 1;
      std::uint64_t y_num = 0;
      if (lattice_slack_sv(ctx, tuple, y_num) < 0) return LatticeHit{r, tuple, y_num};
      if (r + 1 < hi) nonzero.advance(digits);
    }
    return std::nullopt;
  };
  if (auto hit = run_blocks_first<LatticeHit>(R1, 1u << 15, jobs, scan_nonzero)) return hit;

  ProductOdometer full;
  for (unsigned j = 0; j < t; ++j) full.radix.push_back(ctx.A[j]);
  auto scan_rest = [&](std::uint64_t lo, std::uint64_t hi) -> std::optional<LatticeHit> {
    std::vector<std::uint64_t> digits;
    full.decode(lo, digits);
    for (std::uint64_t r = lo; r < hi; ++r) {
      bool all_nonzero = true;
      for (unsigned j = 0; j < t; ++j) all_nonzero &= digits[j] != 0;
      if (!all_nonzero) {
        std::uint64_t y_num = 0;
        if (lattice_slack_sv(ctx, digits, y_num) < 0) return LatticeHit{R1 + r, digits, y_num};
      }
      if (r + 1 < hi) full.advance(digits);
    }
    return std::nullopt;
  };
  return run_blocks_first<LatticeHit>(full.size(), 1u << 15, jobs, scan_rest);
}

// ---- phase B ------------------------------------------------------------

// One representative N per distinct image (N*upstairs, N*downstairs); the
// test value at (N, x) only depends on those images.
inline std::vector<Int> n_class_representatives(const HypSpec& spec, std::uint64_t class_cap = 1u << 18) {
  Int L = spec.denominator_lcm();
  if (L == 1) return {Int(1)};

  auto profile = spec.upstairs.product_profile();
  DownShape shape = down_shape(spec.downstairs);
  QZ single;
  down_shape(spec.downstairs, &single);
  const bool down_invariant = shape == DownShape::Empty || shape == DownShape::FullMinusOne ||
                              shape == DownShape::Full ||
                              (shape == DownShape::SingleChar && single.is_zero());

  if (profile && down_invariant && spec.twist.is_zero()) return {Int(1)};

  // Keys depend on N only modulo km.
  Int km;
  if (profile && down_invariant) {
    km = spec.twist.den();
  } else {
    km = L;
  }
  std::uint64_t km64 = 0;
  if (km > Int(class_cap))
    throw budget_error("run_vtest: too many N classes to enumerate", UINT64_MAX, class_cap);
  km64 = to_u64(km, "N class modulus");

  // Residue footprint of the (twisted) character data modulo km: two N with
  // the same images of every character give identical sweeps.
  std::vector<QZ> chars;
  if (profile && down_invariant) {
    chars = {spec.twist};
  } else {
    CharSet up = spec.upstairs_set(class_cap);
    CharSet down = spec.downstairs_set(class_cap);
    for (const QZ& c : up.elems()) chars.push_back(c);
    for (const QZ& c : down.elems()) chars.push_back(QZ::make_unchecked(-c.num(), c.den()));
  }

  std::vector<Int> reps;
  std::map<std::vector<std::pair<Int, Int>>, bool> seen;
  for (std::uint64_t u = 1; u < std::max<std::uint64_t>(km64, 2); ++u) {
    if (std::gcd(u, km64) != 1) continue;
    std::vector<std::pair<Int, Int>> key;
    if (profile && down_invariant) {
      QZ s = qz_scale(Int(u), spec.twist);
      key.emplace_back(s.num(), s.den());
    } else {
      std::vector<QZ> img;
      img.reserve(chars.size());
      for (const QZ& c : chars) img.push_back(qz_scale(Int(u), c));
      std::sort(img.begin(), img.end());
      for (const QZ& c : img) key.emplace_back(c.num(), c.den());
    }
    if (seen.emplace(std::move(key), true).second) {
      // Lift u to a unit modulo L: N == u (mod km), N == 1 (mod rest) where
      // rest is L with every prime of km stripped. Unit-ness mod higher
      // powers of km's primes is automatic from gcd(u, km) = 1.
      Int N = u;
      if (km != L && km > 1) {
        Int rest = L;
        for (Int g = gcd(rest, km); g > 1; g = gcd(rest, km)) rest /= g;
        if (rest > 1) {
          Int inv;  // (km)^{-1} mod rest
          {
            Int r0 = km % rest, r1 = rest, s0 = 1, s1 = 0;
            while (r1 != 0) {
              Int q = r0 / r1;
              r0 -= q * r1;
              std::swap(r0, r1);
              s0 -= q * s1;
              std::swap(s0, s1);
            }
            inv = ((s0 % rest) + rest) % rest;
          }
          Int delta = (((1 - Int(u)) % rest) + rest) % rest;
          N = Int(u) + km * ((delta * inv) % rest);
        }
      }
      reps.push_back(N);
    }
  }
  if (reps.empty()) reps.push_back(Int(1));
  return reps;
}

struct LadderHit {
  std::uint64_t j;
  std::size_t class_idx;
};

}  // namespace detail

// Full-lattice witness search over x = sum_j i_j/(2^{a_j}+1) for a
// full-product spec. Stops at the first violation in the documented order.
struct WitnessSearchResult {
  bool found = false;
  std::vector<std::uint64_t> tuple;
  VTestPoint point;  // N = 1
  Rat lhs;           // re-verified naive left-hand side
  Rat threshold;
  std::uint64_t lattice_size = 0;
};

inline WitnessSearchResult witness_search(const HypSpec& spec, const VTestOptions& opts = {}) {
  auto profile_a = spec.upstairs.product_profile();
  if (!profile_a) throw domain_error("witness_search: upstairs is not a full product of Char(2^a+1)\\{1} factors");
  CollapsedProfile prof = CollapsedProfile::of(*profile_a);

  QZ single;
  Int A_down_i = 1;
  DownShape shape = down_shape(spec.downstairs, &single, &A_down_i);
  if (shape == DownShape::SingleChar && !single.is_zero())
    throw domain_error("witness_search: downstairs must be empty, {1}, Char(A) or Char(A)\\{1}");
  if (shape == DownShape::General)
    throw domain_error("witness_search: downstairs shape not recognized");

  detail::LatticeContext ctx =
      detail::make_lattice_context(prof, shape, shape == DownShape::Empty || shape == DownShape::SingleChar
                                                    ? 1
                                                    : to_u64(A_down_i, "downstairs modulus"),
                                   opts);
  if (ctx.C > opts.budget)
    throw budget_error("witness_search: lattice exceeds budget", ctx.C, opts.budget);

  WitnessSearchResult res;
  res.threshold = vtest_threshold(spec);
  res.lattice_size = ctx.C;
  auto hit = detail::lattice_search(ctx, opts.jobs);
  if (!hit) return res;

  res.found = true;
  res.tuple = hit->tuple;
  QZ y = QZ::make_unchecked(Int(hit->y_num), Int(ctx.C));
  res.point.N = 1;
  res.point.x = qz_sub(y, spec.twist);
  res.lhs = vtest_lhs(spec, res.point, opts.jobs);
  if (res.lhs >= res.threshold)
    throw error("witness_search: naive re-verification did not confirm the violation");
  return res;
}

inline Verdict run_vtest(const HypSpec& spec, const VTestOptions& opts = {}) {
  if (spec.p != 2) throw domain_error("run_vtest: only characteristic 2 sweeps are validated");
  Verdict verdict;
  verdict.threshold = vtest_threshold(spec);
  std::uint64_t used = 0;

  // ---- phase A
  auto profile_a = spec.upstairs.product_profile();
  QZ single;
  Int A_down_i = 1;
  DownShape shape = down_shape(spec.downstairs, &single, &A_down_i);
  const bool phase_a_ok = profile_a && !opts.force_naive &&
                          (shape == DownShape::Empty || shape == DownShape::FullMinusOne ||
                           shape == DownShape::Full ||
                           (shape == DownShape::SingleChar && single.is_zero()));
  if (phase_a_ok) {
    CollapsedProfile prof = CollapsedProfile::of(*profile_a);
    if (prof.lattice_modulus() > Int(opts.budget - used))
      throw budget_error("run_vtest: phase A lattice exceeds budget",
                         prof.lattice_modulus() > Int(UINT64_MAX) ? UINT64_MAX
                                                                  : to_u64(prof.lattice_modulus(), "lattice"),
                         opts.budget);
    detail::LatticeContext ctx = detail::make_lattice_context(
        prof, shape,
        shape == DownShape::Empty || shape == DownShape::SingleChar ? 1 : to_u64(A_down_i, "downstairs modulus"),
        opts);
    auto hit = detail::lattice_search(ctx, opts.jobs);
    used += ctx.C;
    if (hit) {
      verdict.outcome = Verdict::Outcome::FailWithWitness;
      verdict.bound = 0;
      verdict.points_checked = ctx.C;
      QZ y = QZ::make_unchecked(Int(hit->y_num), Int(ctx.C));
      VTestPoint pt;
      pt.N = 1;
      pt.x = qz_sub(y, spec.twist);
      verdict.witness = pt;
      verdict.witness_lhs = vtest_lhs(spec, pt, opts.jobs);
      if (verdict.witness_lhs >= verdict.threshold)
        throw error("run_vtest: naive re-verification did not confirm the phase A violation");
      return verdict;
    }
  }

  // ---- phase B
  const Int L = spec.denominator_lcm();
  const unsigned d = mult_order(2, L);
  std::vector<Int> reps = detail::n_class_representatives(spec);

  // Residues of the (twisted) characters per class get rebuilt per level.
  CharSet up, down;
  {
    if (spec.upstairs.size() > Int(opts.materialize_cap))
      throw budget_error("run_vtest: upstairs too large for the ladder sweep",
                         spec.upstairs.size() > Int(UINT64_MAX) ? UINT64_MAX
                                                                : to_u64(spec.upstairs.size(), "D"),
                         opts.materialize_cap);
    up = spec.upstairs_set(opts.materialize_cap);
    down = spec.downstairs_set(opts.materialize_cap);
  }
  const std::uint64_t DM = up.size() + down.size();

  for (unsigned m = 1; m <= opts.m_max; ++m) {
    const unsigned K = d * m;
    if (K > 62)
      throw budget_error("run_vtest: ladder level needs a 2^" + std::to_string(K) +
                             "-1 point sweep, beyond the machine/budget range",
                         UINT64_MAX, opts.budget);
    const std::uint64_t M = (1ull << K) - 1;
    const std::uint64_t canon = detail::canonical_point_count(K);
    if (canon > (opts.budget - used) / std::max<std::size_t>(reps.size(), 1))
      throw budget_error("run_vtest: ladder level m=" + std::to_string(m) + " exceeds budget",
                         canon, opts.budget);
    const std::uint64_t level_cost = canon * reps.size();

    // Residues over M per class: c_i for V(N a_i + x), e_j for V(-N b_j - x).
    std::vector<std::vector<std::uint64_t>> cres(reps.size()), eres(reps.size());
    for (std::size_t ci = 0; ci < reps.size(); ++ci) {
      cres[ci].reserve(up.size());
      eres[ci].reserve(down.size());
      for (const QZ& a : up.elems()) {
        QZ na = qz_scale(reps[ci], a);
        cres[ci].push_back(to_u64(na.num() * (M / na.den()), "residue"));
      }
      for (const QZ& b : down.elems()) {
        QZ nb = qz_neg(qz_scale(reps[ci], b));
        eres[ci].push_back(to_u64(nb.num() * (M / nb.den()), "residue"));
      }
    }
    const std::uint64_t need = K * (DM - 1);  // compare 2*sum(ones) >= K(D+M-1)

    auto scan = [&](std::uint64_t lo, std::uint64_t hi) -> std::optional<detail::LadderHit> {
      for (std::uint64_t j = lo; j < hi; ++j) {
        if (!detail::is_min_rotation(j, K, M)) continue;
        for (std::size_t ci = 0; ci < reps.size(); ++ci) {
          std::uint64_t ones = 0;
          if (!opts.force_naive) {
            for (std::uint64_t c : cres[ci]) {
              std::uint64_t s = c + j;
              if (s >= M) s -= M;
              ones += std::popcount(s);
            }
            for (std::uint64_t e : eres[ci]) {
              std::uint64_t s = e + (M - j);
              if (s >= M) s -= M;
              ones += std::popcount(s);
            }
            if (2 * ones < need) return detail::LadderHit{j, ci};
          } else {
            VTestPoint pt;
            pt.N = reps[ci];
            pt.x = QZ::make_unchecked(Int(j), Int(M));
            if (vtest_lhs(spec, pt) < verdict.threshold) return detail::LadderHit{j, ci};
          }
        }
      }
      return std::nullopt;
    };
    auto hit = run_blocks_first<detail::LadderHit>(M, 1u << 16, opts.jobs, scan);
    used += level_cost;
    if (hit) {
      verdict.outcome = Verdict::Outcome::FailWithWitness;
      verdict.bound = m;
      verdict.points_checked = used;
      VTestPoint pt;
      pt.N = reps[hit->class_idx];
      pt.x = QZ::make_unchecked(Int(hit->j), Int(M));
      verdict.witness = pt;
      verdict.witness_lhs = vtest_lhs(spec, pt, opts.jobs);
      if (verdict.witness_lhs >= verdict.threshold)
        throw error("run_vtest: naive re-verification did not confirm the ladder violation");
      return verdict;
    }
  }

  verdict.outcome = Verdict::Outcome::PassUpToBound;
  verdict.bound = opts.m_max;
  verdict.points_checked = used;
  return verdict;
}

}  // namespace kubert
