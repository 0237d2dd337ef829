// latstat: lattice counting statistics on tessellated domains.
//
// Subcommands: constants, verify, clt, count, sample.  Exit codes: 0 success,
// 1 verification/experiment failure, 2 usage error.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "latstat/counting.hpp"
#include "latstat/experiment.hpp"
#include "latstat/lattice.hpp"
#include "latstat/sampling.hpp"
#include "latstat/special.hpp"
#include "latstat/verify.hpp"

using nlohmann::json;
using namespace latstat;

namespace {

LatticeKind parse_kind(const std::string& s) { return lattice_kind_from_string(s); }

// key=value configuration file: one pair per line, '#' comments, blank lines
// ignored.  Values listed on the command line take precedence.
std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::vector<double> split_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::vector<long long> split_longs(const std::string& s) {
  std::vector<long long> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoll(item));
  return out;
}

std::optional<CongruenceData> make_cong(const std::vector<long long>& v, long long N,
                                        int l) {
  if (N <= 1 && v.empty()) return std::nullopt;
  Eigen::VectorXi vi = Eigen::VectorXi::Zero(l);
  if (!v.empty()) {
    if (static_cast<int>(v.size()) != l)
      throw CLI::ValidationError("--v must have length l = m + n");
    for (int i = 0; i < l; ++i) vi[i] = static_cast<int>(v[i]);
  } else {
    vi[0] = 1;
  }
  return CongruenceData{vi, N};
}

int cmd_constants(int l, long long N, bool as_json) {
  if (l < 3) {
    std::cerr << "constants: l >= 3 required, zeta(l-1) diverges at l = " << l << "\n";
    return 2;
  }
  try {
    const auto v = VarianceConstants::compute(l, N >= 1 ? N : 1);
    json out;
    out["l"] = l;
    out["zeta_l_minus_1"] = v.zeta_l_minus_1;
    out["zeta_l"] = v.zeta_l;
    out["sigma_u_sq"] = v.sigma_u_sq;
    if (N >= 1) {
      out["N"] = N;
      out["zeta_N_l"] = v.zeta_N_l;
      out["sigma_c_sq"] = v.sigma_c_sq;
      out["sigma_c_sq_second_moment"] = v.sigma_c_sq_second_moment;
    }
    if (as_json) {
      std::cout << out.dump(2) << "\n";
    } else {
      std::printf("%-26s %.12g\n", "zeta(l-1)", out["zeta_l_minus_1"].get<double>());
      std::printf("%-26s %.12g\n", "zeta(l)", out["zeta_l"].get<double>());
      std::printf("%-26s %.12g\n", "sigma_u^2", out["sigma_u_sq"].get<double>());
      if (N >= 1) {
        std::printf("%-26s %.12g\n", "zeta_N(l)", out["zeta_N_l"].get<double>());
        std::printf("%-26s %.12g\n", "sigma_c^2", out["sigma_c_sq"].get<double>());
        std::printf("%-26s %.12g\n", "sigma_c^2 (moment series)",
                    out["sigma_c_sq_second_moment"].get<double>());
      }
    }
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "constants: " << e.what() << "\n";
    return 2;
  }
}

int cmd_verify(const std::string& suite, std::int64_t points, std::int64_t mc_samples,
               int trials, std::int64_t samples, std::uint64_t seed, std::uint64_t prime,
               int workers, bool tamper) {
  const VerifyTolerances tol =
      tamper ? VerifyTolerances::tampered() : VerifyTolerances{};
  std::vector<SuiteReport> reports;
  try {
    if (suite == "geometry" || suite == "all")
      reports.push_back(verify_geometry(tol, points, mc_samples, seed));
    if (suite == "partitions" || suite == "all")
      reports.push_back(verify_partitions(tol));
    if (suite == "cumulants" || suite == "all")
      reports.push_back(verify_cumulants(tol, trials, seed));
    if (suite == "sampler" || suite == "all")
      reports.push_back(verify_sampler(tol, samples, seed, prime, workers));
  } catch (const std::invalid_argument& e) {
    std::cerr << "verify: " << e.what() << "\n";
    return 2;
  }
  if (reports.empty()) {
    std::cerr << "verify: unknown suite '" << suite
              << "' (use geometry|partitions|cumulants|sampler|all)\n";
    return 2;
  }
  json out = json::array();
  bool pass = true;
  for (const auto& r : reports) {
    out.push_back(suite_report_to_json(r));
    pass = pass && r.pass;
  }
  std::cout << out.dump(2) << "\n";
  return pass ? 0 : 1;
}

int cmd_sample(const std::string& kind_str, int l, std::int64_t count,
               std::uint64_t seed, std::uint64_t prime,
               const std::vector<long long>& v, long long N, bool rotate,
               const std::string& out_path) {
  try {
    SamplerConfig cfg;
    cfg.l = l;
    cfg.kind = parse_kind(kind_str);
    cfg.master_seed = seed;
    cfg.hecke_prime = prime;
    cfg.rotate = rotate;
    if (cfg.kind == LatticeKind::Congruence) cfg.cong = make_cong(v, N, l);
    cfg.validate();
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
      file.open(out_path);
      if (!file) throw std::runtime_error("cannot open " + out_path);
      os = &file;
    }
    for (std::int64_t i = 0; i < count; ++i)
      (*os) << lattice_to_json(sample_lattice(cfg, i)).dump() << "\n";
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "sample: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "sample: " << e.what() << "\n";
    return 1;
  }
}

int cmd_count(const std::string& lattice_path, int m, int n, std::vector<double> c,
              std::vector<double> u, int M, bool oracle, bool audit) {
  Lattice lat;
  DomainParams params(1, 1, {1.0}, {1.0});
  try {
    std::ifstream in(lattice_path);
    if (!in) {
      std::cerr << "count: cannot open " << lattice_path << "\n";
      return 2;
    }
    json j = json::parse(in);
    lat = lattice_from_json(j);
    params = DomainParams(m, n, std::move(c), std::move(u));
    if (params.l() != lat.l()) {
      std::cerr << "count: lattice dimension " << lat.l() << " != m + n\n";
      return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "count: " << e.what() << "\n";
    return 2;
  }
  try {
    CountOptions opts;
    if (audit) opts.jitter = 1e-9;
    const auto t0 = std::chrono::steady_clock::now();
    const auto result = count_tessellated_audited(lat, params, M, opts);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    json out;
    out["count"] = result.count;
    out["M"] = M;
    out["volume"] = M * volume_omega_T(params, 2.0);
    out["milliseconds"] = ms;
    if (audit) {
      out["boundary_sensitive"] = result.boundary_sensitive;
      out["count_loose"] = result.count_loose;
      out["count_tight"] = result.count_tight;
    }
    if (oracle) {
      const long long direct =
          count_direct(lat, params, std::exp2(M), ShellConvention::HalfOpen);
      out["count_direct"] = direct;
      out["oracle_equal"] = direct == result.count;
    }
    std::cout << out.dump(2) << "\n";
    return 0;
  } catch (const enumeration_cap_error& e) {
    std::cerr << "count: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "count: " << e.what() << "\n";
    return 2;
  }
}

int cmd_clt(ExperimentConfig cfg, const std::vector<long long>& v, long long N,
            const std::string& kind_str, const std::vector<double>& c,
            const std::vector<double>& u, int m, int n, const std::string& out_path,
            const std::string& summary_path, const std::string& csv_path) {
  try {
    cfg.kind = parse_kind(kind_str);
    cfg.params = DomainParams(m, n, c, u);
    if (cfg.kind == LatticeKind::Congruence)
      cfg.cong = make_cong(v, N <= 1 ? 2 : N, cfg.params.l());
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "clt: " << e.what() << "\n";
    return 2;
  }

  const ExperimentResult res = clt_experiment(cfg);

  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "clt: cannot open " << out_path << "\n";
      return 2;
    }
    for (const auto& rec : res.records) out << sample_record_to_json(rec).dump() << "\n";
    if (res.truncated) out << json{{"truncated", true}}.dump() << "\n";
  }
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    if (!csv) {
      std::cerr << "clt: cannot open " << csv_path << "\n";
      return 2;
    }
    csv << "index,normalized_discrepancy\n";
    for (const auto& rec : res.records) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%lld,%.17g\n",
                    static_cast<long long>(rec.index), rec.normalized_discrepancy);
      csv << buf;
    }
  }

  const json summary = experiment_summary_to_json(cfg, res);
  if (!summary_path.empty()) {
    std::ofstream s(summary_path);
    if (!s) {
      std::cerr << "clt: cannot open " << summary_path << "\n";
      return 2;
    }
    s << summary.dump(2) << "\n";
  }
  std::cout << summary.dump(2) << "\n";

  if (res.truncated) {
    std::cerr << "clt: run aborted: " << res.error << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lattice counting statistics on tessellated domains"};
  app.require_subcommand(1);

  // constants
  auto* constants = app.add_subcommand("constants", "print the variance constants");
  int cl = 5;
  long long cN = -1;
  bool cjson = false;
  constants->add_option("--l", cl, "dimension m + n");
  constants->add_option("--N", cN, "congruence modulus");
  constants->add_flag("--json", cjson, "emit JSON");

  // verify
  auto* verify = app.add_subcommand("verify", "run the deterministic identity suites");
  std::string vsuite = "all";
  std::int64_t vpoints = 100000, vmc = 200000, vsamples = 10000;
  int vtrials = 1000, vworkers = 1;
  std::uint64_t vseed = 20250810, vprime = 2147483647ULL;
  bool vtamper = false;
  verify->add_option("--suite", vsuite, "geometry|partitions|cumulants|sampler|all");
  verify->add_option("--points", vpoints, "tessellation fuzz points per parameter set");
  verify->add_option("--mc-samples", vmc, "Monte Carlo samples per volume check");
  verify->add_option("--trials", vtrials, "cumulant fuzz trials");
  verify->add_option("--samples", vsamples, "sampler gate sample count");
  verify->add_option("--seed", vseed, "master seed");
  verify->add_option("--prime", vprime, "Hecke prime");
  verify->add_option("--workers", vworkers, "worker threads")
      ->envname("LATSTAT_WORKERS");
  verify->add_flag("--tamper", vtamper,
                   "zero every tolerance; the run must then fail (harness self-test)");

  // clt
  auto* clt = app.add_subcommand("clt", "run a counting CLT experiment");
  std::string config_path;
  clt->add_option("--config", config_path,
                  "key=value configuration file; flags override");
  ExperimentConfig ecfg;
  std::string ckind = "affine";
  int cm = 4, cn = 1;
  std::vector<double> cc = {0.6, 0.6, 0.6, 0.6};
  std::vector<double> cu = {0.25, 0.25, 0.25, 0.25};
  std::vector<long long> cv;
  long long ccN = -1;
  std::string cout_path, csummary_path, ccsv_path;
  bool no_rotate = false;
  clt->add_option("--kind", ckind, "unimodular|affine|congruence");
  clt->add_option("--m", cm, "number of x coordinates");
  clt->add_option("--n", cn, "number of y coordinates");
  clt->add_option("--c", cc, "c_1..c_m")->delimiter(',');
  clt->add_option("--u", cu, "u_1..u_m (must sum to n)")->delimiter(',');
  clt->add_option("--M", ecfg.M, "number of dyadic shells (T = 2^M)");
  clt->add_option("--samples", ecfg.n_samples, "number of lattice samples");
  clt->add_option("--seed", ecfg.master_seed, "master seed");
  clt->add_option("--workers", ecfg.workers, "worker threads")
      ->envname("LATSTAT_WORKERS");
  clt->add_option("--prime", ecfg.hecke_prime, "Hecke prime");
  clt->add_option("--r-max", ecfg.r_max, "highest cumulant order (<= 8)");
  clt->add_option("--v", cv, "congruence vector")->delimiter(',');
  clt->add_option("--N", ccN, "congruence modulus");
  clt->add_flag("--allow-small-l", ecfg.allow_small_l, "permit m + n < 5");
  clt->add_flag("--allow-low-resolution", ecfg.allow_low_resolution,
                "permit M beyond the tracked-precision envelope");
  clt->add_flag("--no-rotate", no_rotate, "emit the raw Hecke basis (no rotation)");
  clt->add_option("--out", cout_path, "JSONL sample records path");
  clt->add_option("--summary", csummary_path, "summary JSON path (also on stdout)");
  clt->add_option("--csv", ccsv_path, "CSV (index, normalized_discrepancy) path");

  // count
  auto* count = app.add_subcommand("count", "tessellated count for a lattice record");
  std::string lattice_path;
  int km = 1, kn = 4, kM = 1;
  std::vector<double> kc = {1.5};
  std::vector<double> ku = {4.0};
  bool koracle = false, kaudit = false;
  count->add_option("--lattice", lattice_path, "lattice JSON file")->required();
  count->add_option("--m", km, "number of x coordinates");
  count->add_option("--n", kn, "number of y coordinates");
  count->add_option("--c", kc, "c_1..c_m")->delimiter(',');
  count->add_option("--u", ku, "u_1..u_m")->delimiter(',');
  count->add_option("--M", kM, "number of dyadic shells");
  count->add_flag("--oracle", koracle, "also run the direct-enumeration oracle");
  count->add_flag("--audit", kaudit, "jitter-audit the domain inequalities");

  // sample
  auto* sample = app.add_subcommand("sample", "emit random lattices as JSONL");
  std::string skind = "unimodular", sout;
  int sl = 5;
  std::int64_t scount = 1;
  std::uint64_t sseed = 0, sprime = 2147483647ULL;
  std::vector<long long> sv;
  long long sN = -1;
  bool sno_rotate = false;
  sample->add_option("--kind", skind, "unimodular|affine|congruence");
  sample->add_option("--l", sl, "dimension");
  sample->add_option("--count", scount, "number of lattices");
  sample->add_option("--seed", sseed, "master seed");
  sample->add_option("--prime", sprime, "Hecke prime");
  sample->add_option("--v", sv, "congruence vector")->delimiter(',');
  sample->add_option("--N", sN, "congruence modulus");
  sample->add_flag("--no-rotate", sno_rotate, "emit the raw Hecke basis");
  sample->add_option("--out", sout, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (constants->parsed()) return cmd_constants(cl, cN, cjson);
    if (verify->parsed())
      return cmd_verify(vsuite, vpoints, vmc, vtrials, vsamples, vseed, vprime,
                        vworkers, vtamper);
    if (clt->parsed()) {
      if (!config_path.empty()) {
        auto kv = parse_config_file(config_path);
        auto take = [&](const std::string& key, const std::string& flag, auto&& apply) {
          const auto it = kv.find(key);
          if (it == kv.end()) return;
          if (clt->count(flag) == 0) apply(it->second);
          kv.erase(it);
        };
        take("kind", "--kind", [&](const std::string& s) { ckind = s; });
        take("m", "--m", [&](const std::string& s) { cm = std::stoi(s); });
        take("n", "--n", [&](const std::string& s) { cn = std::stoi(s); });
        take("c", "--c", [&](const std::string& s) { cc = split_doubles(s); });
        take("u", "--u", [&](const std::string& s) { cu = split_doubles(s); });
        take("M", "--M", [&](const std::string& s) { ecfg.M = std::stoi(s); });
        take("samples", "--samples",
             [&](const std::string& s) { ecfg.n_samples = std::stoll(s); });
        take("seed", "--seed",
             [&](const std::string& s) { ecfg.master_seed = std::stoull(s); });
        take("workers", "--workers",
             [&](const std::string& s) { ecfg.workers = std::stoi(s); });
        take("prime", "--prime",
             [&](const std::string& s) { ecfg.hecke_prime = std::stoull(s); });
        take("r_max", "--r-max", [&](const std::string& s) { ecfg.r_max = std::stoi(s); });
        take("v", "--v", [&](const std::string& s) { cv = split_longs(s); });
        take("N", "--N", [&](const std::string& s) { ccN = std::stoll(s); });
        take("out", "--out", [&](const std::string& s) { cout_path = s; });
        take("summary", "--summary", [&](const std::string& s) { csummary_path = s; });
        take("csv", "--csv", [&](const std::string& s) { ccsv_path = s; });
        if (!kv.empty())
          throw std::invalid_argument("config file: unknown key '" + kv.begin()->first +
                                      "'");
      }
      ecfg.rotate = !no_rotate;
      return cmd_clt(ecfg, cv, ccN, ckind, cc, cu, cm, cn, cout_path, csummary_path,
                     ccsv_path);
    }
    if (count->parsed())
      return cmd_count(lattice_path, km, kn, kc, ku, kM, koracle, kaudit);
    if (sample->parsed())
      return cmd_sample(skind, sl, scount, sseed, sprime, sv, sN, !sno_rotate, sout);
  } catch (const std::invalid_argument& e) {
    std::cerr << "latstat: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "latstat: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
