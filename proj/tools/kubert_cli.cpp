// Command-line surface for the exact V-function toolkit.
//
// Exit codes, uniform across subcommands:
//   0  pass / listed / clean report
//   1  violation or witness found, or a report that mismatches the expected
//      classification, or a failed verification suite
//   2  usage errors, malformed input, invalid sheaf data, budget exhaustion
//
// --jobs parallelizes the sweeps but never changes output bytes.

#include <kubert/catalog.hpp>
#include <kubert/verify.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>

namespace {

using namespace kubert;

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw domain_error("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw domain_error("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

json verdict_to_json(const Verdict& v) {
  json j;
  j["outcome"] = v.failed() ? "fail_with_witness" : "pass_up_to_bound";
  j["bound"] = v.bound;
  j["points"] = v.points_checked;
  j["threshold"] = rat_to_json(v.threshold);
  if (v.witness) {
    j["witness"] = json{{"N", to_u64(v.witness->N, "witness N")},
                        {"x", qz_to_json(v.witness->x)},
                        {"lhs", rat_to_json(v.witness_lhs)}};
  }
  return j;
}

int cmd_v_eval(std::uint64_t p, std::int64_t num, std::int64_t den) {
  VValue v = v_eval(p, qz_make(num, den, p));
  std::cout << v.str() << "\n";
  return 0;
}

int cmd_vtest(const std::string& path, VTestOptions opts) {
  HypSpec spec = hyp_spec_from_json(load_json_file(path));
  Verdict v = run_vtest(spec, opts);
  std::cout << verdict_to_json(v).dump(2) << "\n";
  return v.failed() ? 1 : 0;
}

int cmd_witness_search(const std::string& path, VTestOptions opts) {
  HypSpec spec = hyp_spec_from_json(load_json_file(path));
  WitnessSearchResult r = witness_search(spec, opts);
  json j;
  j["found"] = r.found;
  j["lattice_size"] = r.lattice_size;
  j["threshold"] = rat_to_json(r.threshold);
  if (r.found) {
    j["tuple"] = r.tuple;
    j["witness"] = json{{"N", to_u64(r.point.N, "witness N")},
                        {"x", qz_to_json(r.point.x)},
                        {"lhs", rat_to_json(r.lhs)}};
  }
  std::cout << j.dump(2) << "\n";
  return r.found ? 1 : 0;
}

int cmd_classify(unsigned n_max, const std::string& format, VTestOptions opts) {
  ClassificationReport rep = classify(n_max, opts);
  if (format == "csv") {
    std::cout << report_to_csv(rep);
  } else {
    std::cout << report_to_json(rep).dump(2) << "\n";
  }
  double total = 0;
  for (const auto& r : rep.rows) {
    std::cerr << r.candidate.name << ": " << row_verdict_name(r.verdict) << " in " << r.wall_seconds << "s\n";
    total += r.wall_seconds;
  }
  std::cerr << "classified " << rep.rows.size() << " candidates in " << total
            << "s, mismatches=" << rep.mismatches() << "\n";
  if (rep.count(RowVerdict::BudgetExceeded) > 0) return 2;
  return rep.mismatches() == 0 ? 0 : 1;
}

int cmd_verify(const std::string& suite) {
  std::vector<std::string> names;
  if (suite == "all") {
    for (auto& [n, fn] : verify_suites()) names.push_back(n);
  } else {
    if (!verify_suites().count(suite)) throw domain_error("verify: unknown suite '" + suite + "'");
    names.push_back(suite);
  }
  bool all_pass = true;
  for (const auto& n : names) {
    auto t0 = std::chrono::steady_clock::now();
    SuiteResult r = verify_lemmas(n);
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << " (" << r.checks << " checks, " << dt << "s)";
    if (!r.pass) std::cout << "  first counterexample: " << r.first_counterexample;
    std::cout << "\n";
    all_pass &= r.pass;
  }
  return all_pass ? 0 : 1;
}

int cmd_spectrum(const std::string& path) {
  TorusSpec ts = torus_spec_from_json(load_json_file(path));
  SpectrumMultiset sm = spectrum(ts);
  TorusCase tc = classify_case(ts);
  json j;
  j["spec"] = torus_spec_to_json(ts);
  j["n"] = ts.n();
  j["spectrum"] = spectrum_to_json(sm);
  j["max_multiplicity"] = max_multiplicity(sm);
  j["is_m2sp"] = is_m2sp(sm);
  j["is_ssp"] = is_ssp(sm);
  j["case"] = torus_case_name(tc);
  if (tc != TorusCase::none) j["ord_bar"] = to_u64(ord_bar(ts), "ord_bar");
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact Kubert V-function arithmetic, finiteness V-tests and the"
               " extraspecial-normalizer classification at desk scale"};
  app.require_subcommand(1);

  VTestOptions opts;

  // v-eval
  std::int64_t ve_p = 2, ve_num = 0, ve_den = 1;
  auto* veval = app.add_subcommand("v-eval", "evaluate V(num/den) in characteristic p");
  veval->add_option("p", ve_p, "characteristic (prime)")->required();
  veval->add_option("num", ve_num, "numerator")->required();
  veval->add_option("den", ve_den, "denominator (coprime to p)")->required();

  // vtest
  std::string vt_path;
  auto* vtest = app.add_subcommand("vtest", "run the finiteness V-test on a sheaf spec");
  vtest->add_option("spec", vt_path, "sheaf spec JSON file")->required();
  vtest->add_option("--m-max", opts.m_max, "ladder depth (x denominators up to 2^(d*m)-1)");
  vtest->add_option("--budget", opts.budget, "max evaluated test points");
  vtest->add_option("--jobs", opts.jobs, "worker threads (output-invariant)");
  vtest->add_flag("--naive", opts.force_naive, "per-character canonical evaluation everywhere");

  // witness-search
  std::string ws_path;
  auto* wsearch = app.add_subcommand("witness-search", "search the product lattice for a V-test violation");
  wsearch->add_option("spec", ws_path, "sheaf spec JSON file")->required();
  wsearch->add_option("--budget", opts.budget, "max evaluated test points");
  wsearch->add_option("--jobs", opts.jobs, "worker threads (output-invariant)");

  // classify
  unsigned n_max = 4;
  std::string format = "json";
  auto* cls = app.add_subcommand("classify", "reproduce the desk-scale classification");
  cls->add_option("--n-max", n_max, "generate candidates with n = sum a_i up to this");
  cls->add_option("--m-max", opts.m_max, "ladder depth per candidate");
  cls->add_option("--budget", opts.budget, "max evaluated test points per candidate");
  cls->add_option("--jobs", opts.jobs, "worker threads (output-invariant)");
  cls->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  // verify
  std::string suite;
  auto* ver = app.add_subcommand("verify", "run a named verification suite (or 'all')");
  ver->add_option("suite", suite, "suite name")->required();

  // spectrum
  std::string sp_path;
  auto* spc = app.add_subcommand("spectrum", "spectrum and classification of a torus element");
  spc->add_option("torus", sp_path, "torus spec JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (veval->parsed()) return cmd_v_eval(static_cast<std::uint64_t>(ve_p), ve_num, ve_den);
    if (vtest->parsed()) return cmd_vtest(vt_path, opts);
    if (wsearch->parsed()) return cmd_witness_search(ws_path, opts);
    if (cls->parsed()) return cmd_classify(n_max, format, opts);
    if (ver->parsed()) return cmd_verify(suite);
    if (spc->parsed()) return cmd_spectrum(sp_path);
  } catch (const budget_error& e) {
    std::cerr << "budget error: " << e.what() << " (required " << e.required << ", allowed " << e.allowed << ")\n";
    return 2;
  } catch (const domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
