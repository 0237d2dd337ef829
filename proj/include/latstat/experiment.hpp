#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "latstat/counting.hpp"
#include "latstat/sampling.hpp"
#include "latstat/statistics.hpp"

namespace latstat {

// Everything that defines a Monte Carlo CLT run.
struct ExperimentConfig {
  LatticeKind kind = LatticeKind::Affine;
  DomainParams params{4, 1, {1.0, 1.0, 1.0, 1.0}, {0.25, 0.25, 0.25, 0.25}};
  int M = 64;
  std::int64_t n_samples = 2000;
  std::uint64_t master_seed = 1;
  int workers = 1;
  std::uint64_t hecke_prime = 2147483647ULL;
  std::optional<CongruenceData> cong;
  int r_max = 4;
  bool allow_small_l = false;
  bool allow_low_resolution = false;
  bool rotate = true;
  std::int64_t max_points = 100'000'000;
  int bootstrap_resamples = 200;

  void validate() const {
    params.validate();
    if (params.l() < 5 && !allow_small_l)
      throw std::invalid_argument(
          "ExperimentConfig: m + n >= 5 required (override with allow_small_l)");
    if (M < 1) throw std::invalid_argument("ExperimentConfig: M >= 1 required");
    if (n_samples < 1) throw std::invalid_argument("ExperimentConfig: n_samples >= 1 required");
    if (workers < 1) throw std::invalid_argument("ExperimentConfig: workers >= 1 required");
    if (r_max < 2 || r_max > 8)
      throw std::invalid_argument("ExperimentConfig: 2 <= r_max <= 8 required");
    if (kind == LatticeKind::Congruence && !cong)
      throw std::invalid_argument("ExperimentConfig: congruence kind needs (v, N)");
    if (resolution_headroom() < 1e3 && !allow_low_resolution)
      throw std::invalid_argument(
          "ExperimentConfig: M too deep for these exponents; counting would outrun "
          "the tracked precision (override with allow_low_resolution)");
    SamplerConfig s = sampler_config();
    s.validate();
  }

  SamplerConfig sampler_config() const {
    SamplerConfig s;
    s.l = params.l();
    s.hecke_prime = hecke_prime;
    s.master_seed = master_seed;
    s.kind = kind;
    s.cong = cong;
    s.rotate = rotate;
    return s;
  }

  // The shell map is hyperbolic: representation error in the tracked basis
  // grows by ~2^{1 + max u_i} per shell against a quad-precision state
  // (113-bit significand).  The deepest shell still has to resolve an
  // x-window of relative width ~ c_min 2^{-max u}.  Returns window / drift;
  // experiments should keep this well above 1.
  double resolution_headroom() const {
    double umax = 0.0, cmin = std::numeric_limits<double>::infinity();
    for (double ui : params.u) umax = std::max(umax, ui);
    for (double ci : params.c) cmin = std::min(cmin, ci);
    const double window = std::min(1.0, cmin) * std::exp2(-umax);
    const double drift_bits = (umax + 1.0) * (M - 1) - 113.0;
    return window * std::exp2(-drift_bits);
  }

  double predicted_variance() const {
    switch (kind) {
      case LatticeKind::Affine: return 1.0;
      case LatticeKind::Unimodular: return sigma_u_sq(params.l());
      case LatticeKind::Congruence: return sigma_c_sq(params.l(), cong ? cong->N : 1);
    }
    return 1.0;
  }

  // Variance implied by the second-moment series; equals predicted_variance
  // for the affine and unimodular spaces.
  double second_moment_variance() const {
    switch (kind) {
      case LatticeKind::Affine: return 1.0;
      case LatticeKind::Unimodular: return sigma_u_sq(params.l());
      case LatticeKind::Congruence:
        return sigma_c_sq_second_moment(params.l(), cong ? cong->N : 1);
    }
    return 1.0;
  }
};

struct SampleRecord {
  std::int64_t index = 0;
  std::uint64_t stream = 0;  // substream key used for this sample
  long long count = 0;
  double volume = 0.0;  // M * vol(Omega_2)
  double normalized_discrepancy = 0.0;
};

struct ExperimentResult {
  std::vector<SampleRecord> records;  // completed records, index order
  CumulantReport report;
  double ks_distance = 0.0;
  double ks_pvalue = 1.0;
  double predicted_variance = 0.0;
  double second_moment_variance = 0.0;
  double wall_seconds = 0.0;
  bool truncated = false;
  std::string error;
};

// Runs the configured experiment: per index, draw a lattice, count the domain
// points through the shell decomposition, record the normalized discrepancy.
// Worker count affects scheduling only; record i depends only on
// (master_seed, i), so output is bit-identical across worker counts.
inline ExperimentResult clt_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  const double vol2 = volume_omega_T(cfg.params, 2.0);
  const double volume = static_cast<double>(cfg.M) * vol2;
  const SamplerConfig scfg = cfg.sampler_config();

  std::vector<SampleRecord> records(static_cast<std::size_t>(cfg.n_samples));
  std::vector<char> done(static_cast<std::size_t>(cfg.n_samples), 0);
  std::atomic<bool> abort{false};
  std::string error;
  std::mutex error_mutex;

  std::atomic<std::int64_t> next{0};
  auto work = [&]() {
    CountOptions copts;
    copts.max_points = cfg.max_points;
    while (!abort.load(std::memory_order_relaxed)) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= cfg.n_samples) return;
      try {
        const Lattice lat = sample_lattice(scfg, i);
        const long long count = count_tessellated(lat, cfg.params, cfg.M, copts);
        SampleRecord rec;
        rec.index = i;
        rec.stream = CounterRng(cfg.master_seed, static_cast<std::uint64_t>(i)).key();
        rec.count = count;
        rec.volume = volume;
        rec.normalized_discrepancy =
            (static_cast<double>(count) - volume) / std::sqrt(volume);
        records[static_cast<std::size_t>(i)] = rec;
        done[static_cast<std::size_t>(i)] = 1;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        error = e.what();
        abort.store(true);
      }
    }
  };

  if (cfg.workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < cfg.workers; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  ExperimentResult res;
  res.truncated = abort.load();
  res.error = error;
  for (std::int64_t i = 0; i < cfg.n_samples; ++i) {
    if (done[static_cast<std::size_t>(i)])
      res.records.push_back(records[static_cast<std::size_t>(i)]);
  }

  res.predicted_variance = cfg.predicted_variance();
  res.second_moment_variance = cfg.second_moment_variance();
  if (res.records.size() >= 2) {
    std::vector<double> series;
    series.reserve(res.records.size());
    for (const auto& r : res.records) series.push_back(r.normalized_discrepancy);
    res.report = cumulant_report(series, cfg.r_max, cfg.master_seed ^ 0x6b756d75ULL,
                                 cfg.bootstrap_resamples);
    SampleSeries ss{series, "normalized_discrepancy"};
    res.ks_distance = ks_distance(ss, res.predicted_variance);
    res.ks_pvalue = ks_pvalue(res.ks_distance, static_cast<std::int64_t>(series.size()));
  }

  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

// --- JSON serialization --------------------------------------------------

inline nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["kind"] = to_string(cfg.kind);
  j["m"] = cfg.params.m;
  j["n"] = cfg.params.n;
  j["c"] = cfg.params.c;
  j["u"] = cfg.params.u;
  j["M"] = cfg.M;
  j["n_samples"] = cfg.n_samples;
  j["master_seed"] = cfg.master_seed;
  j["workers"] = cfg.workers;
  j["hecke_prime"] = cfg.hecke_prime;
  j["r_max"] = cfg.r_max;
  j["allow_small_l"] = cfg.allow_small_l;
  j["rotate"] = cfg.rotate;
  if (cfg.cong) {
    j["v"] = std::vector<long long>(cfg.cong->v.data(),
                                    cfg.cong->v.data() + cfg.cong->v.size());
    j["N"] = cfg.cong->N;
  }
  return j;
}

inline nlohmann::json sample_record_to_json(const SampleRecord& rec) {
  nlohmann::json j;
  j["index"] = rec.index;
  j["stream"] = rec.stream;
  j["count"] = rec.count;
  j["volume"] = rec.volume;
  j["normalized_discrepancy"] = rec.normalized_discrepancy;
  return j;
}

inline nlohmann::json experiment_summary_to_json(const ExperimentConfig& cfg,
                                                 const ExperimentResult& res) {
  nlohmann::json j;
  j["config"] = experiment_config_to_json(cfg);
  j["n_completed"] = res.records.size();
  j["empirical_mean"] = res.report.mean;
  j["empirical_variance"] = res.report.variance;
  j["predicted_variance"] = res.predicted_variance;
  j["second_moment_variance"] = res.second_moment_variance;
  j["ks_distance"] = res.ks_distance;
  j["ks_pvalue"] = res.ks_pvalue;
  nlohmann::json cums = nlohmann::json::array();
  for (const auto& c : res.report.cumulants) {
    cums.push_back({{"order", c.order},
                    {"estimate", c.estimate},
                    {"std_error", c.std_error}});
  }
  j["cumulants"] = cums;
  j["wall_seconds"] = res.wall_seconds;
  j["truncated"] = res.truncated;
  if (!res.error.empty()) j["error"] = res.error;
  return j;
}

}  // namespace latstat
