#pragma once

// Desk-scale classification driver: generates the candidate sheaves whose
// local monodromy data admits finite extraspecial-normalizer monodromy,
// runs the V-test on each, and reconciles against the expected list.
//
// The families, indexed by n = sum of upstairs profile exponents:
//   kloosterman(a):        Hyp(Char(2^a+1)\{1}; empty)
//   two_char(a,b):         Hyp(Char(2^a+1)\{1}; Char(2^b+1)\{1}), a > b,
//                          distinct 2-parts
//   product_over_triv(a,b):Hyp((Char(2^a+1)\{1})x(Char(2^b+1)\{1}); {1}),
//                          distinct 2-parts; listed only when a+b >= 5
// plus the named small sheaves that pass the test but have almost
// quasisimple monodromy (S3, S5, 2A8 -- group names are pinned facts, the
// test alone cannot identify groups), and the pinned (8,7,6,4) negative
// profile whose test must fail with a witness.

#include <kubert/spectra.hpp>
#include <kubert/vtest_engine.hpp>

#include <chrono>
#include <sstream>

namespace kubert {

enum class Family { Kloosterman, TwoChar, ProductOverTriv, ExcludedNamed, RegressionProfile };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::Kloosterman: return "kloosterman";
    case Family::TwoChar: return "two_char";
    case Family::ProductOverTriv: return "product_over_triv";
    case Family::ExcludedNamed: return "excluded_named";
    case Family::RegressionProfile: return "regression_profile";
  }
  return "?";
}

struct SideConditions {
  bool distinct_2parts = true;
  bool a_gt_b = true;
  bool sum_ge_4 = true;  // finiteness threshold reported separately
  bool sum_ge_5 = true;  // list-membership threshold for family (c)
};

enum class RowVerdict { ListedExtraspecial, FiniteButExcluded, VTestFailed, PassUpToBoundUnlisted, BudgetExceeded };

inline const char* row_verdict_name(RowVerdict v) {
  switch (v) {
    case RowVerdict::ListedExtraspecial: return "listed_extraspecial";
    case RowVerdict::FiniteButExcluded: return "finite_but_excluded";
    case RowVerdict::VTestFailed: return "vtest_failed";
    case RowVerdict::PassUpToBoundUnlisted: return "pass_up_to_bound_unlisted";
    case RowVerdict::BudgetExceeded: return "budget_exceeded";
  }
  return "?";
}

struct CandidateSheaf {
  Family family = Family::Kloosterman;
  std::string name;
  std::vector<unsigned> params;
  HypSpec spec;
  SideConditions side;
  RowVerdict expected = RowVerdict::ListedExtraspecial;
  std::string expected_detail;  // case label a/b/c, or the group name
};

inline CandidateSheaf make_kloosterman(unsigned a) {
  CandidateSheaf c;
  c.family = Family::Kloosterman;
  c.params = {a};
  c.name = "kloosterman(" + std::to_string(a) + ")";
  c.spec = hyp_spec(2, CharSetExpr::full_minus_one(pow2m1(a) + 2), CharSetExpr::of_chars({}));
  c.expected = RowVerdict::ListedExtraspecial;
  c.expected_detail = "a";
  return c;
}

inline CandidateSheaf make_two_char(unsigned a, unsigned b) {
  CandidateSheaf c;
  c.family = Family::TwoChar;
  c.params = {a, b};
  c.name = "two_char(" + std::to_string(a) + "," + std::to_string(b) + ")";
  c.spec = hyp_spec(2, CharSetExpr::full_minus_one(pow2m1(a) + 2), CharSetExpr::full_minus_one(pow2m1(b) + 2));
  c.side.distinct_2parts = coprime_2pow(a, b);
  c.side.a_gt_b = a > b;
  c.expected = RowVerdict::ListedExtraspecial;
  c.expected_detail = "b";
  return c;
}

inline CandidateSheaf make_product_over_triv(unsigned a, unsigned b) {
  CandidateSheaf c;
  c.family = Family::ProductOverTriv;
  c.params = {a, b};
  c.name = "product_over_triv(" + std::to_string(a) + "," + std::to_string(b) + ")";
  c.spec = hyp_spec(2,
                    CharSetExpr::product({CharSetExpr::full_minus_one(pow2m1(a) + 2),
                                          CharSetExpr::full_minus_one(pow2m1(b) + 2)}),
                    CharSetExpr::of_chars({QZ()}));
  c.side.distinct_2parts = coprime_2pow(a, b);
  c.side.a_gt_b = a > b;
  c.side.sum_ge_4 = a + b >= 4;
  c.side.sum_ge_5 = a + b >= 5;
  if (c.side.sum_ge_5) {
    c.expected = RowVerdict::ListedExtraspecial;
    c.expected_detail = "c";
  } else {
    // a+b = 4 with distinct 2-parts does not exist; a+b = 3 is the known
    // 2A8 sheaf: finite monodromy, not an extraspecial normalizer.
    c.expected = RowVerdict::FiniteButExcluded;
    c.expected_detail = "2A8";
  }
  return c;
}

inline CandidateSheaf make_excluded_s3() {
  CandidateSheaf c;
  c.family = Family::ExcludedNamed;
  c.params = {};
  c.name = "S3";
  c.spec = hyp_spec(2, CharSetExpr::full_minus_one(3), CharSetExpr::of_chars({QZ()}));
  c.expected = RowVerdict::FiniteButExcluded;
  c.expected_detail = "S3";
  return c;
}

inline CandidateSheaf make_excluded_s5() {
  CandidateSheaf c;
  c.family = Family::ExcludedNamed;
  c.params = {};
  c.name = "S5";
  c.spec = hyp_spec(2, CharSetExpr::full_minus_one(5), CharSetExpr::full(3));
  c.expected = RowVerdict::FiniteButExcluded;
  c.expected_detail = "S5";
  return c;
}

inline CandidateSheaf make_regression_profile() {
  CandidateSheaf c;
  c.family = Family::RegressionProfile;
  c.params = {8, 7, 6, 4};
  c.name = "product_profile(8,7,6,4)";
  c.spec = hyp_spec(2,
                    CharSetExpr::product({CharSetExpr::full_minus_one(257), CharSetExpr::full_minus_one(129),
                                          CharSetExpr::full_minus_one(65), CharSetExpr::full_minus_one(17)}),
                    CharSetExpr::of_chars({QZ()}));
  c.expected = RowVerdict::VTestFailed;
  c.expected_detail = "";
  return c;
}

// Deduplicated, canonically ordered candidate list for all parameter tuples
// with n <= n_max, plus the named excluded sheaves and (from n_max >= 5) the
// pinned negative profile.
inline std::vector<CandidateSheaf> enumerate_candidates(unsigned n_max) {
  if (n_max < 1) throw domain_error("enumerate_candidates: n_max must be >= 1");
  std::vector<CandidateSheaf> out;
  for (unsigned n = 1; n <= n_max; ++n) {
    out.push_back(make_kloosterman(n));
    if (n == 1) out.push_back(make_excluded_s3());
    if (n == 2) out.push_back(make_excluded_s5());
    for (unsigned b = 1; b < n; ++b)
      if (coprime_2pow(n, b)) out.push_back(make_two_char(n, b));
    for (unsigned b = 1; 2 * b < n; ++b) {
      unsigned a = n - b;
      if (coprime_2pow(a, b)) out.push_back(make_product_over_triv(a, b));
    }
  }
  if (n_max >= 5) out.push_back(make_regression_profile());
  return out;
}

struct VerdictRow {
  CandidateSheaf candidate;
  RowVerdict verdict = RowVerdict::PassUpToBoundUnlisted;
  std::string detail;
  unsigned bound = 0;
  std::uint64_t points = 0;
  std::optional<VTestPoint> witness;
  Rat witness_lhs;
  Rat threshold;
  bool match = false;
  double wall_seconds = 0;  // diagnostics only; never serialized
};

inline VerdictRow classify_sheaf(const CandidateSheaf& c, const VTestOptions& opts) {
  VerdictRow row;
  row.candidate = c;
  row.threshold = vtest_threshold(c.spec);
  auto t0 = std::chrono::steady_clock::now();
  try {
    Verdict v = run_vtest(c.spec, opts);
    row.bound = v.bound;
    row.points = v.points_checked;
    if (v.failed()) {
      row.verdict = RowVerdict::VTestFailed;
      row.witness = v.witness;
      row.witness_lhs = v.witness_lhs;
    } else {
      switch (c.family) {
        case Family::Kloosterman:
        case Family::TwoChar:
          row.verdict = RowVerdict::ListedExtraspecial;
          row.detail = c.family == Family::Kloosterman ? "a" : "b";
          break;
        case Family::ProductOverTriv:
          if (c.side.sum_ge_5 && c.side.distinct_2parts) {
            row.verdict = RowVerdict::ListedExtraspecial;
            row.detail = "c";
          } else if (c.params[0] + c.params[1] == 3) {
            row.verdict = RowVerdict::FiniteButExcluded;
            row.detail = "2A8";
          } else {
            row.verdict = RowVerdict::PassUpToBoundUnlisted;
          }
          break;
        case Family::ExcludedNamed:
          row.verdict = RowVerdict::FiniteButExcluded;
          row.detail = c.expected_detail;
          break;
        case Family::RegressionProfile:
          row.verdict = RowVerdict::PassUpToBoundUnlisted;
          break;
      }
    }
  } catch (const budget_error& e) {
    row.verdict = RowVerdict::BudgetExceeded;
    row.detail = e.what();
    row.points = e.required;
  }
  row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  row.match = row.verdict == c.expected &&
              (row.verdict != RowVerdict::FiniteButExcluded || row.detail == c.expected_detail);
  return row;
}

struct ClassificationReport {
  unsigned n_max = 0;
  unsigned m_max = 0;
  std::uint64_t budget = 0;
  std::vector<VerdictRow> rows;

  std::uint64_t count(RowVerdict v) const {
    std::uint64_t k = 0;
    for (const auto& r : rows) k += r.verdict == v;
    return k;
  }
  std::uint64_t mismatches() const {
    std::uint64_t k = 0;
    for (const auto& r : rows) k += !r.match;
    return k;
  }
};

inline ClassificationReport classify(unsigned n_max, const VTestOptions& opts) {
  ClassificationReport rep;
  rep.n_max = n_max;
  rep.m_max = opts.m_max;
  rep.budget = opts.budget;
  for (const auto& c : enumerate_candidates(n_max)) rep.rows.push_back(classify_sheaf(c, opts));
  return rep;
}

inline json rat_to_json(const Rat& r) {
  const Int n = numerator(r), d = denominator(r);
  const Int lo = std::numeric_limits<std::int64_t>::min(), hi = std::numeric_limits<std::int64_t>::max();
  if (n < lo || n > hi || d > hi) throw domain_error("rat_to_json: value out of machine range");
  return json::array({static_cast<std::int64_t>(n), static_cast<std::int64_t>(d)});
}

inline json report_row_to_json(const VerdictRow& row) {
  json j;
  j["family"] = family_name(row.candidate.family);
  j["name"] = row.candidate.name;
  j["params"] = row.candidate.params;
  j["D"] = to_u64(row.candidate.spec.D, "D");
  j["M"] = to_u64(row.candidate.spec.M, "M");
  j["side_conditions"] = json{{"distinct_2parts", row.candidate.side.distinct_2parts},
                              {"a_gt_b", row.candidate.side.a_gt_b},
                              {"sum_ge_4", row.candidate.side.sum_ge_4},
                              {"sum_ge_5", row.candidate.side.sum_ge_5}};
  j["spec"] = hyp_spec_to_json(row.candidate.spec);
  j["verdict"] = row_verdict_name(row.verdict);
  j["detail"] = row.detail;
  j["bound"] = row.bound;
  j["points"] = row.points;
  if (row.witness) {
    j["witness"] = json{{"N", to_u64(row.witness->N, "witness N")},
                        {"x", qz_to_json(row.witness->x)},
                        {"lhs", rat_to_json(row.witness_lhs)},
                        {"threshold", rat_to_json(row.threshold)}};
  }
  j["expected"] = row_verdict_name(row.candidate.expected);
  j["match"] = row.match;
  return j;
}

inline json report_to_json(const ClassificationReport& rep) {
  json j;
  j["schema"] = "kubert-classification/1";
  j["n_max"] = rep.n_max;
  j["m_max"] = rep.m_max;
  j["budget"] = rep.budget;
  json rows = json::array();
  for (const auto& r : rep.rows) rows.push_back(report_row_to_json(r));
  j["rows"] = rows;
  j["summary"] = json{{"rows", rep.rows.size()},
                      {"listed_extraspecial", rep.count(RowVerdict::ListedExtraspecial)},
                      {"finite_but_excluded", rep.count(RowVerdict::FiniteButExcluded)},
                      {"vtest_failed", rep.count(RowVerdict::VTestFailed)},
                      {"pass_up_to_bound_unlisted", rep.count(RowVerdict::PassUpToBoundUnlisted)},
                      {"budget_exceeded", rep.count(RowVerdict::BudgetExceeded)},
                      {"mismatches", rep.mismatches()}};
  return j;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += "\"";
  return out;
}

inline std::string rat_str(const Rat& r) {
  std::ostringstream os;
  os << numerator(r) << "/" << denominator(r);
  return os.str();
}

inline std::string report_to_csv(const ClassificationReport& rep) {
  std::ostringstream os;
  os << "family,name,params,D,M,distinct_2parts,a_gt_b,sum_ge_4,sum_ge_5,"
        "verdict,detail,bound,points,witness_N,witness_x,witness_lhs,threshold,expected,match\n";
  for (const auto& r : rep.rows) {
    std::ostringstream params;
    for (std::size_t i = 0; i < r.candidate.params.size(); ++i)
      params << (i ? " " : "") << r.candidate.params[i];
    os << family_name(r.candidate.family) << ',' << csv_escape(r.candidate.name) << ','
       << csv_escape(params.str()) << ',' << r.candidate.spec.D << ',' << r.candidate.spec.M << ','
       << r.candidate.side.distinct_2parts << ',' << r.candidate.side.a_gt_b << ','
       << r.candidate.side.sum_ge_4 << ',' << r.candidate.side.sum_ge_5 << ','
       << row_verdict_name(r.verdict) << ',' << csv_escape(r.detail) << ',' << r.bound << ','
       << r.points << ',';
    if (r.witness) {
      os << r.witness->N << ',' << r.witness->x.num() << '/' << r.witness->x.den() << ','
         << rat_str(r.witness_lhs) << ',' << rat_str(r.threshold);
    } else {
      os << ",,,";
    }
    os << ',' << row_verdict_name(r.candidate.expected) << ',' << r.match << '\n';
  }
  return os.str();
}

}  // namespace kubert
