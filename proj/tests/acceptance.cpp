// Acceptance suite: one line per criterion, exact checks throughout.
// Exit code 0 only if every criterion passes.

#include <kubert/verify.hpp>

#include <chrono>
#include <thread>
#include <iostream>

using namespace kubert;

namespace {

int failures = 0;

struct Criterion {
  int id;
  std::string description;
  double limit_seconds;

  void run(const std::function<bool(std::string&)>& body) const {
    std::string detail;
    auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = body(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (ok && limit_seconds > 0 && dt > limit_seconds) {
      ok = false;
      detail = "runtime " + std::to_string(dt) + "s over the " + std::to_string(limit_seconds) + "s target";
    }
    if (!ok) ++failures;
    std::printf("%s  [%2d] %s (%.2fs)%s%s\n", ok ? "PASS" : "FAIL", id, description.c_str(), dt,
                detail.empty() ? "" : " :: ", detail.c_str());
    std::fflush(stdout);
  }
};

bool suite_ok(const SuiteResult& r, std::string& detail) {
  if (!r.pass) detail = r.first_counterexample;
  return r.pass;
}

}  // namespace

int main() {
  Criterion{1, "V-function properties (1),(2),(4),(5): exhaustive den | 2^12-1 plus 1000 wide points", 10}.run(
      [](std::string& d) { return suite_ok(suite_v_properties(), d); });

  Criterion{2, "Hasse-Davenport relation, odd r <= 31, den | 2^8-1", 10}.run(
      [](std::string& d) { return suite_ok(suite_hasse_davenport(), d); });

  Criterion{3, "collapse identity: V(2;a;x) == naive upstairs sum, t <= 2, a_i <= 3, den | 2^12-1", 0}.run(
      [](std::string& d) { return suite_ok(suite_collapse_identity(), d); });

  Criterion{4, "one-piece range [-1/2,1/2) and the -1/2 characterization, r <= 4", 0}.run(
      [](std::string& d) { return suite_ok(suite_one_piece(), d); });

  Criterion{5, "two-piece range [-3/4,3/4), the -3/4 characterization, extreme at x = 8/15", 0}.run(
      [](std::string& d) { return suite_ok(suite_two_pieces(), d); });

  Criterion{6, "induction witnesses V(x(i1,i2)) = 1/4 for coprime pairs <= 8; digit patterns", 5}.run(
      [](std::string& d) { return suite_ok(suite_induction_witness(), d); });

  Criterion{7, "simplified and original Katz inequalities accept identically; (1/D) sum = M/2", 0}.run(
      [](std::string& d) { return suite_ok(suite_katz_equivalence(), d); });

  Criterion{8, "classification reproduction at desk scale, m_max = 1", 300}.run([](std::string& d) {
    VTestOptions opts;
    opts.m_max = 1;
    opts.jobs = 2;

    // (a) Kloosterman a in {1,2,3,4}
    for (unsigned a : {1u, 2u, 3u, 4u}) {
      VerdictRow row = classify_sheaf(make_kloosterman(a), opts);
      if (row.verdict != RowVerdict::ListedExtraspecial) {
        d = "kloosterman(" + std::to_string(a) + ") not listed";
        return false;
      }
    }
    // (b) the named pairs pass; (3,1) is never generated
    for (auto [a, b] : std::vector<std::pair<unsigned, unsigned>>{{2, 1}, {4, 1}, {4, 2}, {3, 2}}) {
      VerdictRow row = classify_sheaf(make_two_char(a, b), opts);
      if (row.verdict != RowVerdict::ListedExtraspecial) {
        d = "two_char(" + std::to_string(a) + "," + std::to_string(b) + ") not listed";
        return false;
      }
    }
    for (const auto& c : enumerate_candidates(8))
      if (c.name == "two_char(3,1)") {
        d = "two_char(3,1) was generated";
        return false;
      }
    // (c) listed product families with a+b >= 5
    for (auto [a, b] : std::vector<std::pair<unsigned, unsigned>>{{4, 1}, {4, 2}}) {
      VerdictRow row = classify_sheaf(make_product_over_triv(a, b), opts);
      if (row.verdict != RowVerdict::ListedExtraspecial || row.detail != "c") {
        d = "product_over_triv(" + std::to_string(a) + "," + std::to_string(b) + ") not listed as (c)";
        return false;
      }
    }
    // excluded sheaves pass the V-test but carry their group names
    for (CandidateSheaf c : {make_excluded_s3(), make_excluded_s5(), make_product_over_triv(2, 1)}) {
      VerdictRow row = classify_sheaf(c, opts);
      if (row.verdict != RowVerdict::FiniteButExcluded || row.bound != 1) {
        d = c.name + " not flagged finite-but-excluded";
        return false;
      }
    }
    // the full generated catalog at n_max = 4 matches expectations
    ClassificationReport rep = classify(4, opts);
    if (rep.mismatches() != 0) {
      d = "catalog mismatches at n_max=4";
      return false;
    }
    return true;
  });

  Criterion{9, "negative witness for the (8,7,6,4) profile over {1}, frozen regression point", 600}.run(
      [](std::string& d) {
        CandidateSheaf reg = make_regression_profile();
        VTestOptions opts;
        opts.jobs = 1;
        auto t0 = std::chrono::steady_clock::now();
        WitnessSearchResult r = witness_search(reg.spec, opts);
        double single = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!r.found) {
          d = "no witness found on the lattice";
          return false;
        }
        // frozen regression constants
        const std::vector<std::uint64_t> tuple = {1, 1, 1, 2};
        const QZ x = QZ::make_unchecked(5300021, 36634065);
        if (r.tuple != tuple || !(r.point.x == x)) {
          d = "witness moved away from the frozen point";
          return false;
        }
        if (!(r.lhs == Rat(Int("5637144421"), 336)) || !(r.threshold == Rat(16777216))) {
          d = "re-verified left-hand side changed";
          return false;
        }
        // V(2;8,7,6,4;x) + V(-x) < 0, exactly -155/336 at the frozen point
        Rat slack = v_collapsed(CollapsedProfile::of({8, 7, 6, 4}), x) + v_eval(2, qz_neg(x)).to_rat();
        if (!(slack == Rat(-155, 336) && slack < 0)) {
          d = "collapsed slack at the witness is not -155/336";
          return false;
        }
        // the catalog flags the candidate as failed
        VTestOptions copts;
        copts.jobs = 2;
        if (classify_sheaf(reg, copts).verdict != RowVerdict::VTestFailed) {
          d = "catalog row is not vtest_failed";
          return false;
        }
        // parallel run reproduces the same witness; wall time reported
        const unsigned hw = std::max(2u, std::thread::hardware_concurrency());
        VTestOptions popts;
        popts.jobs = hw;
        t0 = std::chrono::steady_clock::now();
        WitnessSearchResult rp = witness_search(reg.spec, popts);
        double par = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (rp.tuple != tuple) {
          d = "parallel witness differs";
          return false;
        }
        std::fprintf(stderr, "  [ 9] witness search wall time: %.2fs single-threaded, %.2fs with %u workers\n",
                     single, par, hw);
        return true;
      });

  Criterion{10, "torus spectra: classified => multiplicity <= 2 for n in {4,5,6}; violators exceed 2", 60}.run(
      [](std::string& d) {
        for (unsigned n = 4; n <= 6; ++n) {
          for (const auto& spec : enumerate_torus_specs(n)) {
            if (classify_case(spec) != TorusCase::none && !is_m2sp(spectrum(spec))) {
              d = "classified spec with multiplicity > 2 at n=" + std::to_string(n);
              return false;
            }
          }
        }
        TorusSpec v1;  // equal parts: gcd(2^2+1, 2^2+1) = 5
        v1.parts = {TorusPart{2, -1, 1}, TorusPart{2, -1, 1}};
        TorusSpec v2;  // r_1 = 3 shares a factor with 2^3+1
        v2.parts = {TorusPart{3, -1, 3}, TorusPart{1, -1, 1}};
        if (max_multiplicity(spectrum(v1)) <= 2 || max_multiplicity(spectrum(v2)) <= 2) {
          d = "violating spec did not exceed multiplicity 2";
          return false;
        }
        return true;
      });

  Criterion{11, "coprime_2pow agrees with direct gcd for 1 <= a,b <= 64", 0}.run([](std::string& d) {
    for (unsigned a = 1; a <= 64; ++a)
      for (unsigned b = 1; b <= 64; ++b)
        if (coprime_2pow(a, b) != (gcd(pow2m1(a) + 2, pow2m1(b) + 2) == 1)) {
          d = "disagreement at (" + std::to_string(a) + "," + std::to_string(b) + ")";
          return false;
        }
    return true;
  });

  Criterion{12, "classification reports are byte-identical across 1, 2 and 8 workers", 0}.run([](std::string& d) {
    std::string ref;
    for (unsigned jobs : {1u, 2u, 8u}) {
      VTestOptions opts;
      opts.m_max = 1;
      opts.jobs = jobs;
      ClassificationReport rep = classify(4, opts);
      std::string bytes = report_to_json(rep).dump(2) + "\n" + report_to_csv(rep);
      if (ref.empty()) {
        ref = bytes;
      } else if (bytes != ref) {
        d = "output differs at jobs=" + std::to_string(jobs);
        return false;
      }
    }
    return true;
  });

  if (failures == 0) {
    std::printf("acceptance: all 12 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) FAILED\n", failures);
  return 1;
}
