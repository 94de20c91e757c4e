#include <catch2/catch_amalgamated.hpp>

#include <kubert/catalog.hpp>

#include <set>

using namespace kubert;

namespace {
std::set<std::string> names(const std::vector<CandidateSheaf>& cs) {
  std::set<std::string> out;
  for (const auto& c : cs) out.insert(c.name);
  return out;
}
}  // namespace

TEST_CASE("enumerate_candidates at small n_max") {
  auto c1 = names(enumerate_candidates(1));
  CHECK(c1 == std::set<std::string>{"kloosterman(1)", "S3"});

  auto c2 = names(enumerate_candidates(2));
  CHECK(c2.count("kloosterman(2)"));
  CHECK(c2.count("two_char(2,1)"));
  CHECK(c2.count("S5"));
  CHECK_FALSE(c2.count("product_over_triv(2,1)"));

  auto c3 = names(enumerate_candidates(3));
  CHECK(c3.count("kloosterman(3)"));
  CHECK(c3.count("two_char(3,2)"));
  CHECK_FALSE(c3.count("two_char(3,1)"));  // equal 2-parts, never generated
  CHECK(c3.count("product_over_triv(2,1)"));
  CHECK_FALSE(c3.count("product_profile(8,7,6,4)"));

  CHECK(names(enumerate_candidates(5)).count("product_profile(8,7,6,4)"));
}

TEST_CASE("candidate side conditions and expectations") {
  for (const auto& c : enumerate_candidates(6)) {
    if (c.family == Family::TwoChar || c.family == Family::ProductOverTriv) CHECK(c.side.distinct_2parts);
    if (c.family == Family::ProductOverTriv) {
      unsigned s = c.params[0] + c.params[1];
      CHECK(s != 4);  // distinct 2-parts never sum to 4
      if (s >= 5) CHECK(c.expected == RowVerdict::ListedExtraspecial);
      if (s == 3) {
        CHECK(c.expected == RowVerdict::FiniteButExcluded);
        CHECK(c.expected_detail == "2A8");
      }
    }
  }
}

TEST_CASE("every generated spec re-validates from its serialized form") {
  for (const auto& c : enumerate_candidates(5)) {
    HypSpec back = hyp_spec_from_json(hyp_spec_to_json(c.spec));
    CHECK(back.D == c.spec.D);
    CHECK(back.M == c.spec.M);
  }
}

TEST_CASE("classify at n_max = 3 reproduces the expected list") {
  VTestOptions opts;
  opts.m_max = 1;
  ClassificationReport rep = classify(3, opts);
  CHECK(rep.mismatches() == 0);
  CHECK(rep.count(RowVerdict::ListedExtraspecial) == 5);  // klo 1-3, two_char(2,1),(3,2)
  CHECK(rep.count(RowVerdict::FiniteButExcluded) == 3);   // S3, S5, 2A8
  for (const auto& r : rep.rows) {
    if (r.candidate.name == "S3" || r.candidate.name == "S5" || r.candidate.name == "product_over_triv(2,1)") {
      CHECK(r.verdict == RowVerdict::FiniteButExcluded);
      CHECK(r.bound == 1);  // V-test passed, exclusion is by name
    }
  }
}

TEST_CASE("budget exhaustion is an explicit verdict") {
  VTestOptions opts;
  opts.m_max = 1;
  opts.budget = 2;
  ClassificationReport rep = classify(1, opts);
  CHECK(rep.count(RowVerdict::BudgetExceeded) == rep.rows.size());
  for (const auto& r : rep.rows) CHECK_FALSE(r.match);
}

TEST_CASE("report serialization is deterministic across worker counts") {
  std::string ref_json, ref_csv;
  for (unsigned jobs : {1u, 2u}) {
    VTestOptions opts;
    opts.m_max = 1;
    opts.jobs = jobs;
    ClassificationReport rep = classify(3, opts);
    std::string js = report_to_json(rep).dump(2);
    std::string cs = report_to_csv(rep);
    if (ref_json.empty()) {
      ref_json = js;
      ref_csv = cs;
    } else {
      CHECK(js == ref_json);
      CHECK(cs == ref_csv);
    }
  }
  CHECK(ref_csv.substr(0, ref_csv.find('\n')) ==
        "family,name,params,D,M,distinct_2parts,a_gt_b,sum_ge_4,sum_ge_5,"
        "verdict,detail,bound,points,witness_N,witness_x,witness_lhs,threshold,expected,match");
  CHECK(json::parse(ref_json)["schema"] == "kubert-classification/1");
}

TEST_CASE("report JSON carries reproducible verdict rows") {
  VTestOptions opts;
  opts.m_max = 1;
  ClassificationReport rep = classify(2, opts);
  json j = report_to_json(rep);
  for (const auto& row : j["rows"]) {
    HypSpec spec = hyp_spec_from_json(row["spec"]);
    Verdict v = run_vtest(spec, opts);
    CHECK((row["verdict"] == "vtest_failed") == v.failed());
  }
}
