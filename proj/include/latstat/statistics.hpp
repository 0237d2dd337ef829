#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "latstat/partitions.hpp"
#include "latstat/rng.hpp"
#include "latstat/special.hpp"

namespace latstat {

struct SampleSeries {
  std::vector<double> values;
  std::string label;
};

namespace detail {

// Empirical means of blockwise products for every subset of {1..r}, indexed
// by bitmask.  m[0] = 1 (the empty product integrates to one).
inline std::vector<double> subset_means(const std::vector<const std::vector<double>*>& series) {
  const int r = static_cast<int>(series.size());
  const std::size_t n = series[0]->size();
  std::vector<double> sums(std::size_t{1} << r, 0.0);
  std::vector<double> prod(std::size_t{1} << r);
  for (std::size_t t = 0; t < n; ++t) {
    prod[0] = 1.0;
    for (std::size_t mask = 1; mask < prod.size(); ++mask) {
      const int low = std::countr_zero(mask);
      prod[mask] = prod[mask & (mask - 1)] * (*series[static_cast<std::size_t>(low)])[t];
    }
    for (std::size_t mask = 1; mask < prod.size(); ++mask) sums[mask] += prod[mask];
  }
  for (std::size_t mask = 1; mask < sums.size(); ++mask)
    sums[mask] /= static_cast<double>(n);
  sums[0] = 1.0;
  return sums;
}

inline std::size_t block_mask(const std::vector<int>& block) {
  std::size_t m = 0;
  for (int e : block) m |= std::size_t{1} << (e - 1);
  return m;
}

inline double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace detail

// Joint cumulant of order r: the signed partition sum with every block
// integral replaced by the empirical mean of the blockwise product.
inline double joint_cumulant(const std::vector<SampleSeries>& series_list) {
  const int r = static_cast<int>(series_list.size());
  if (r < 2 || r > 8) throw std::invalid_argument("joint_cumulant: 2 <= r <= 8 required");
  std::vector<const std::vector<double>*> ptrs;
  for (const auto& s : series_list) {
    if (s.values.empty()) throw std::invalid_argument("joint_cumulant: empty series");
    if (s.values.size() != series_list[0].values.size())
      throw std::invalid_argument("joint_cumulant: series length mismatch");
    ptrs.push_back(&s.values);
  }
  const auto means = detail::subset_means(ptrs);
  double total = 0.0;
  for (const auto& P : enumerate_partitions(r)) {
    double term = 1.0;
    for (const auto& block : P.blocks) term *= means[detail::block_mask(block)];
    const int blocks = static_cast<int>(P.blocks.size());
    const double sign = blocks % 2 == 1 ? 1.0 : -1.0;
    total += sign * detail::factorial(blocks - 1) * term;
  }
  return total;
}

// Conditional joint cumulant with respect to a partition Q: each block
// integral is factored along Q.  Vanishes identically (as an algebraic
// identity in the empirical moments) whenever |Q| >= 2.
inline double conditional_cumulant(const std::vector<SampleSeries>& series_list,
                                   const SetPartition& Q) {
  const int r = static_cast<int>(series_list.size());
  if (r < 2 || r > 8) throw std::invalid_argument("conditional_cumulant: 2 <= r <= 8 required");
  Q.validate(r);
  std::vector<const std::vector<double>*> ptrs;
  for (const auto& s : series_list) {
    if (s.values.empty() || s.values.size() != series_list[0].values.size())
      throw std::invalid_argument("conditional_cumulant: bad series");
    ptrs.push_back(&s.values);
  }
  const auto means = detail::subset_means(ptrs);
  std::vector<std::size_t> qmasks;
  for (const auto& block : Q.blocks) qmasks.push_back(detail::block_mask(block));

  double total = 0.0;
  for (const auto& P : enumerate_partitions(r)) {
    double term = 1.0;
    for (const auto& block : P.blocks) {
      const std::size_t imask = detail::block_mask(block);
      for (std::size_t qm : qmasks) term *= means[imask & qm];
    }
    const int blocks = static_cast<int>(P.blocks.size());
    const double sign = blocks % 2 == 1 ? 1.0 : -1.0;
    total += sign * detail::factorial(blocks - 1) * term;
  }
  return total;
}

// Cumulant of a single series at order r, through the raw power moments
// (identical series collapse every blockwise mean to a raw moment).
inline double cumulant_from_moments(const std::vector<double>& raw_moments, int r) {
  if (r < 1 || r > static_cast<int>(raw_moments.size()))
    throw std::invalid_argument("cumulant_from_moments: order out of range");
  double total = 0.0;
  for (const auto& P : enumerate_partitions(r)) {
    double term = 1.0;
    for (const auto& block : P.blocks) term *= raw_moments[block.size() - 1];
    const int blocks = static_cast<int>(P.blocks.size());
    total += (blocks % 2 == 1 ? 1.0 : -1.0) * detail::factorial(blocks - 1) * term;
  }
  return total;
}

inline std::vector<double> raw_moments(const std::vector<double>& values, int up_to) {
  std::vector<double> m(static_cast<std::size_t>(up_to), 0.0);
  for (double v : values) {
    double p = 1.0;
    for (int k = 0; k < up_to; ++k) {
      p *= v;
      m[static_cast<std::size_t>(k)] += p;
    }
  }
  for (auto& x : m) x /= static_cast<double>(values.size());
  return m;
}

inline double series_cumulant(const std::vector<double>& values, int r) {
  return cumulant_from_moments(raw_moments(values, r), r);
}

// Bootstrap standard error of the order-r cumulant (seeded resampling).
inline double bootstrap_cumulant_se(const std::vector<double>& values, int r,
                                    int resamples = 200, std::uint64_t seed = 0) {
  const std::size_t n = values.size();
  if (n < 2) throw std::invalid_argument("bootstrap_cumulant_se: need >= 2 samples");
  std::vector<double> est(static_cast<std::size_t>(resamples));
  std::vector<double> resampled(n);
  for (int b = 0; b < resamples; ++b) {
    CounterRng rng(seed, 0x626f6f74ULL + static_cast<std::uint64_t>(b));
    for (std::size_t i = 0; i < n; ++i)
      resampled[i] = values[rng.below(n)];
    est[static_cast<std::size_t>(b)] = series_cumulant(resampled, r);
  }
  double mean = 0.0;
  for (double e : est) mean += e;
  mean /= static_cast<double>(resamples);
  double var = 0.0;
  for (double e : est) var += (e - mean) * (e - mean);
  var /= static_cast<double>(resamples - 1);
  return std::sqrt(var);
}

// Sup distance between the empirical CDF of the series and N(0, variance).
inline double ks_distance(const SampleSeries& series, double variance) {
  if (series.values.empty()) throw std::invalid_argument("ks_distance: empty series");
  std::vector<double> sorted = series.values;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double F = normal_cdf(sorted[i], variance);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max(d, std::max(F - lo, hi - F));
  }
  return d;
}

// Asymptotic Kolmogorov p-value with Stephens' small-sample correction.
inline double ks_pvalue(double distance, std::int64_t n_samples) {
  if (n_samples < 1) throw std::invalid_argument("ks_pvalue: n >= 1 required");
  const double sn = std::sqrt(static_cast<double>(n_samples));
  const double lambda = distance * (sn + 0.12 + 0.11 / sn);
  if (lambda < 1e-8) return 1.0;
  double p = 0.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = 2.0 * (j % 2 == 1 ? 1.0 : -1.0) *
                        std::exp(-2.0 * lambda * lambda * j * j);
    p += term;
    if (std::abs(term) < 1e-16) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

struct CumulantEntry {
  int order = 0;
  double estimate = 0.0;
  double std_error = 0.0;
};

struct CumulantReport {
  double mean = 0.0;
  double variance = 0.0;
  std::vector<CumulantEntry> cumulants;  // orders 3..r_max
};

inline CumulantReport cumulant_report(const std::vector<double>& values, int r_max,
                                      std::uint64_t seed, int resamples = 200) {
  if (r_max < 2 || r_max > 8) throw std::invalid_argument("cumulant_report: 2 <= r_max <= 8");
  if (values.size() < 2) throw std::invalid_argument("cumulant_report: need >= 2 samples");
  CumulantReport rep;
  const auto m = raw_moments(values, std::max(2, r_max));
  rep.mean = m[0];
  rep.variance = m[1] - m[0] * m[0];
  for (int r = 3; r <= r_max; ++r) {
    CumulantEntry e;
    e.order = r;
    e.estimate = cumulant_from_moments(m, r);
    e.std_error = bootstrap_cumulant_se(values, r, resamples, seed);
    rep.cumulants.push_back(e);
  }
  return rep;
}

}  // namespace latstat
