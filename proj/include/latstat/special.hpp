#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace latstat {

// Surface area of the unit sphere S^{n-1} in R^n.
inline double omega_n(int n) {
  if (n < 1) throw std::invalid_argument("omega_n: n >= 1 required");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

namespace detail {

// Euler-Maclaurin tail: sum_{t = a, a+1, a+2, ...} t^{-x} for real a > 0.
// The last kept correction has order a^{-x-3}; the first dropped term is
// O(x^5 a^{-x-5}), which callers use as the truncation bound.
inline double power_tail_from(double a, double x) {
  const double ax = std::pow(a, -x);
  return std::pow(a, 1.0 - x) / (x - 1.0) + 0.5 * ax + x / 12.0 * ax / a -
         x * (x + 1.0) * (x + 2.0) / 720.0 * ax / (a * a * a);
}

inline double power_tail_error(double a, double x) {
  return x * (x + 1.0) * (x + 2.0) * (x + 3.0) * (x + 4.0) / 30240.0 *
         std::pow(a, -x - 5.0);
}

// Hurwitz-style sum: sum_{j >= 0} (j + q)^{-x}, q > 0, x > 1.
// Direct summation extended until the tail bound is below 1e-13 relative
// (cap 1e7 terms, never reached for the exponents used here).
inline double hurwitz_sum(double q, double x) {
  if (!(x > 1.0001)) throw std::invalid_argument("hurwitz_sum: x > 1.0001 required");
  if (!(q > 0.0)) throw std::invalid_argument("hurwitz_sum: q > 0 required");
  double sum = 0.0, comp = 0.0;  // Kahan-compensated accumulation
  std::int64_t j = 0;
  std::int64_t block = 64;
  const std::int64_t cap = 10'000'000;
  while (true) {
    for (; j < block; ++j) {
      const double term = std::pow(j + q, -x) - comp;
      const double next = sum + term;
      comp = (next - sum) - term;
      sum = next;
    }
    const double tail = power_tail_from(q + static_cast<double>(j), x);
    const double err = power_tail_error(q + static_cast<double>(j), x);
    if (err < 1e-13 * (std::abs(sum + tail) + 1.0) || block >= cap) {
      return sum + tail;
    }
    block = std::min(block * 2, cap);
  }
}

}  // namespace detail

// sum_{j >= 0} (e0 + j*step)^{-x}
inline double progression_sum(double e0, double step, double x) {
  return std::pow(step, -x) * detail::hurwitz_sum(e0 / step, x);
}

// sum_{j >= 0} j * (e0 + j*step)^{-x}
inline double progression_sum_weighted(double e0, double step, double x) {
  return (progression_sum(e0, step, x - 1.0) - e0 * progression_sum(e0, step, x)) /
         step;
}

// Riemann zeta for x > 1, via direct summation with a rigorous tail bound.
inline double zeta(double x) {
  if (!(x > 1.0001)) throw std::invalid_argument("zeta: x > 1.0001 required");
  return detail::hurwitz_sum(1.0, x);
}

// Residues s in [0, N) with gcd(s, N) = 1.
inline std::vector<long long> coprime_residues(long long N) {
  if (N < 1) throw std::invalid_argument("coprime_residues: N >= 1 required");
  std::vector<long long> out;
  for (long long s = 0; s < N; ++s)
    if (std::gcd(s, N) == 1) out.push_back(s);
  if (N == 1) out = {0};
  return out;
}

// zeta_N(x) = sum over s >= 1 with gcd(s, N) = 1 of s^{-x}.
// Summed class by class; the Euler-product route is kept separate as a
// cross-check (euler_product_zeta_N).
inline double zeta_N(double x, long long N) {
  if (!(x > 1.0001)) throw std::invalid_argument("zeta_N: x > 1.0001 required");
  if (N < 1) throw std::invalid_argument("zeta_N: N >= 1 required");
  if (N == 1) return zeta(x);
  double sum = 0.0;
  for (long long s : coprime_residues(N))
    sum += progression_sum(static_cast<double>(s == 0 ? N : s),
                           static_cast<double>(N), x);
  return sum;
}

// zeta(x) * prod_{p | N} (1 - p^{-x}); N factored by trial division.
inline double euler_product_zeta_N(double x, long long N) {
  double v = zeta(x);
  long long rem = N;
  for (long long p = 2; p * p <= rem; ++p) {
    if (rem % p == 0) {
      v *= 1.0 - std::pow(static_cast<double>(p), -x);
      while (rem % p == 0) rem /= p;
    }
  }
  if (rem > 1) v *= 1.0 - std::pow(static_cast<double>(rem), -x);
  return v;
}

// Variance constant for the unimodular counting CLT.
inline double sigma_u_sq(int l) {
  if (l < 3) throw std::invalid_argument("sigma_u_sq: l >= 3 required (zeta(l-1) diverges)");
  return 2.0 * (2.0 * zeta(l - 1.0) / zeta(static_cast<double>(l)) - 1.0);
}

// Variance constant for the congruence counting CLT, in the closed form
//   (2/zeta_N(l)) * (1 + (2/zeta_N(l)) * sum_{s in C_N} sum_{s2>=1} (s2-1)/(N s2 + s)^l).
inline double sigma_c_sq(int l, long long N) {
  if (l < 3) throw std::invalid_argument("sigma_c_sq: l >= 3 required");
  if (N < 1) throw std::invalid_argument("sigma_c_sq: N >= 1 required");
  const double zN = zeta_N(static_cast<double>(l), N);
  double inner = 0.0;
  for (long long s : coprime_residues(N))
    inner += progression_sum_weighted(static_cast<double>(N + s),
                                      static_cast<double>(N), l);
  return 2.0 / zN * (1.0 + 2.0 / zN * inner);
}

// Pair sum over a, b >= 1 in the same residue class mod N (class coprime to N)
// of max(a, b)^{-l}.  This is the series behind the congruence second moment.
inline double rogers_pair_sum_same(int l, long long N) {
  if (l < 3) throw std::invalid_argument("rogers_pair_sum_same: l >= 3 required");
  double off = 0.0;
  for (long long s : coprime_residues(N)) {
    const double e0 = static_cast<double>(s == 0 ? N : s);
    off += progression_sum_weighted(e0, static_cast<double>(N), l);
  }
  return zeta_N(static_cast<double>(l), N) + 2.0 * off;
}

// Pair sum over a, b >= 1 with a in a coprime class and b = -a mod N,
// of max(a, b)^{-l}.  Coincides with the same-class sum for N <= 2.
inline double rogers_pair_sum_negated(int l, long long N) {
  if (N <= 2) return rogers_pair_sum_same(l, N);
  const double dN = static_cast<double>(N);
  double total = 0.0;
  for (long long s : coprime_residues(N)) {
    const double a0 = static_cast<double>(s);       // class of a
    const double b0 = static_cast<double>(N - s);   // class of b = -a
    if (2 * s < N) {
      total += progression_sum_weighted(a0, dN, l);
      total += progression_sum_weighted(b0, dN, l) + progression_sum(b0, dN, l);
    } else {
      total += progression_sum_weighted(a0, dN, l) + progression_sum(a0, dN, l);
      total += progression_sum_weighted(b0, dN, l);
    }
  }
  return total;
}

// Variance constant implied by the congruence second-moment series,
//   (2/zeta_N(l)) * rogers_pair_sum_same(l, N).
// Coincides with sigma_u_sq at N = 1; differs from the closed form of
// sigma_c_sq for N >= 2, so both are reported.
inline double sigma_c_sq_second_moment(int l, long long N) {
  if (l < 3) throw std::invalid_argument("sigma_c_sq_second_moment: l >= 3 required");
  return 2.0 / zeta_N(static_cast<double>(l), N) * rogers_pair_sum_same(l, N);
}

// The constants of the counting CLTs for one dimension (and optional
// modulus), computed once; every series is summed to a 1e-12 tail bound.
struct VarianceConstants {
  int l = 0;
  long long N = 1;
  double zeta_l_minus_1 = 0.0;
  double zeta_l = 0.0;
  double zeta_N_l = 0.0;
  double sigma_u_sq = 0.0;
  double sigma_c_sq = 0.0;
  double sigma_c_sq_second_moment = 0.0;

  static VarianceConstants compute(int l, long long N = 1) {
    VarianceConstants v;
    v.l = l;
    v.N = N;
    v.zeta_l_minus_1 = zeta(l - 1.0);
    v.zeta_l = zeta(static_cast<double>(l));
    v.zeta_N_l = zeta_N(static_cast<double>(l), N);
    v.sigma_u_sq = latstat::sigma_u_sq(l);
    v.sigma_c_sq = latstat::sigma_c_sq(l, N);
    v.sigma_c_sq_second_moment = latstat::sigma_c_sq_second_moment(l, N);
    return v;
  }
};

// N(0, variance) distribution function at xi.
inline double normal_cdf(double xi, double variance) {
  if (!(variance > 0.0)) throw std::invalid_argument("normal_cdf: variance > 0 required");
  return 0.5 * std::erfc(-xi / std::sqrt(2.0 * variance));
}

// Deterministic Miller-Rabin, valid for all 64-bit inputs.
inline bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL,
                          23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  auto mulmod = [](std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(
        static_cast<unsigned __int128>(a) * b % m);
  };
  auto powmod = [&](std::uint64_t a, std::uint64_t e, std::uint64_t m) {
    std::uint64_t r = 1;
    a %= m;
    while (e > 0) {
      if (e & 1) r = mulmod(r, a, m);
      a = mulmod(a, a, m);
      e >>= 1;
    }
    return r;
  };
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL,
                          23ULL, 29ULL, 31ULL, 37ULL}) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

}  // namespace latstat
