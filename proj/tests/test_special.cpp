#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <numeric>

#include "latstat/special.hpp"

using namespace latstat;

namespace {

// Oracle for omega_n: the spherical-coordinate surface integral,
// omega_n = 2*pi * prod_{k=1}^{n-2} int_0^pi sin^k(t) dt, evaluated by
// composite Simpson so it is independent of the gamma-function route.
double sin_power_integral(int k, int panels = 4000) {
  const double h = std::numbers::pi / panels;
  double sum = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double a = i * h, bmid = (i + 0.5) * h, b = (i + 1) * h;
    sum += h / 6.0 *
           (std::pow(std::sin(a), k) + 4.0 * std::pow(std::sin(bmid), k) +
            std::pow(std::sin(b), k));
  }
  return sum;
}

double omega_integral_oracle(int n) {
  if (n == 1) return 2.0;
  double v = 2.0 * std::numbers::pi;
  for (int k = 1; k <= n - 2; ++k) v *= sin_power_integral(k);
  return v;
}

// Brute-force zeta with a rigorous interval tail: the truncated sum plus
// integral bounds sandwiching the remainder.
struct Interval {
  double lo, hi;
};

Interval zeta_bracket(double x, long terms) {
  double s = 0.0, comp = 0.0;
  for (long j = 1; j <= terms; ++j) {
    const double term = std::pow(static_cast<double>(j), -x) - comp;
    const double next = s + term;
    comp = (next - s) - term;
    s = next;
  }
  const double t = static_cast<double>(terms);
  const double upper = std::pow(t, 1.0 - x) / (x - 1.0);        // int_terms^inf
  const double lower = std::pow(t + 1.0, 1.0 - x) / (x - 1.0);  // int_{terms+1}^inf
  return {s + lower, s + upper};
}

}  // namespace

TEST_CASE("omega_n closed form matches the spherical integral", "[special]") {
  REQUIRE(omega_n(2) == Catch::Approx(2.0 * std::numbers::pi).epsilon(1e-12));
  REQUIRE(omega_n(3) == Catch::Approx(4.0 * std::numbers::pi).epsilon(1e-12));
  REQUIRE(omega_n(4) == Catch::Approx(2.0 * std::numbers::pi * std::numbers::pi)
                            .epsilon(1e-12));
  for (int n = 1; n <= 7; ++n)
    REQUIRE(omega_n(n) == Catch::Approx(omega_integral_oracle(n)).epsilon(1e-9));
  REQUIRE_THROWS_AS(omega_n(0), std::invalid_argument);
}

TEST_CASE("zeta against closed forms and brute-force brackets", "[special]") {
  REQUIRE(zeta(2.0) ==
          Catch::Approx(std::numbers::pi * std::numbers::pi / 6.0).margin(1e-12));
  REQUIRE(zeta(4.0) == Catch::Approx(std::pow(std::numbers::pi, 4) / 90.0).margin(1e-12));
  for (double x : {1.5, 2.0, 3.0, 4.0, 5.0, 7.0, 12.0}) {
    const auto br = zeta_bracket(x, 1'000'000);
    REQUIRE(zeta(x) >= br.lo - 1e-12);
    REQUIRE(zeta(x) <= br.hi + 1e-12);
  }
  REQUIRE(zeta(5.0) == Catch::Approx(1.0369277551).margin(1e-9));
  REQUIRE_THROWS_AS(zeta(1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(zeta(0.5), std::invalid_argument);
}

TEST_CASE("zeta_N: direct class sum vs Euler product", "[special]") {
  for (long long N : {1LL, 2LL, 3LL, 6LL, 10LL}) {
    for (double x : {4.0, 5.0, 6.0}) {
      REQUIRE(zeta_N(x, N) == Catch::Approx(euler_product_zeta_N(x, N)).margin(1e-10));
    }
  }
  REQUIRE(zeta_N(4.0, 1) == Catch::Approx(zeta(4.0)).margin(1e-13));
  REQUIRE(zeta_N(4.0, 2) == Catch::Approx(zeta(4.0) * (1.0 - std::pow(2.0, -4.0)))
                                .margin(1e-12));
  // direct coprime brute force
  for (long long N : {2LL, 6LL}) {
    double s = 0.0;
    for (long long j = 1; j <= 200000; ++j)
      if (std::gcd(j, N) == 1) s += std::pow(static_cast<double>(j), -5.0);
    REQUIRE(zeta_N(5.0, N) == Catch::Approx(s).margin(1e-9));
  }
}

TEST_CASE("sigma_u_sq values and monotonicity", "[special]") {
  REQUIRE(sigma_u_sq(5) == Catch::Approx(2.1751152993).margin(1e-7));
  REQUIRE(sigma_u_sq(5) ==
          Catch::Approx(2.0 * (2.0 * zeta(4.0) / zeta(5.0) - 1.0)).margin(1e-13));
  // decreasing in l for l >= 5, limit 2
  double prev = sigma_u_sq(5);
  for (int l = 6; l <= 24; ++l) {
    const double cur = sigma_u_sq(l);
    REQUIRE(cur < prev);
    prev = cur;
  }
  REQUIRE(sigma_u_sq(40) == Catch::Approx(2.0).margin(1e-9));
  REQUIRE_THROWS_AS(sigma_u_sq(2), std::invalid_argument);
}

TEST_CASE("sigma_c_sq against the truncation oracle", "[special]") {
  // N = 1: inner sum collapses to zeta(l-1) - zeta(l)
  const double z4 = zeta(4.0), z5 = zeta(5.0);
  REQUIRE(sigma_c_sq(5, 1) ==
          Catch::Approx(2.0 / z5 * (1.0 + 2.0 * (z4 - z5) / z5)).margin(1e-12));
  REQUIRE(sigma_c_sq(5, 1) == Catch::Approx(2.0976536586).margin(1e-7));

  // brute-force double sum, s2 <= 1e6
  for (long long N : {1LL, 2LL, 3LL}) {
    double inner = 0.0;
    for (long long s = 0; s < std::max(N, 1LL); ++s) {
      if (std::gcd(s, N) != 1) continue;
      for (long long s2 = 1; s2 <= 1'000'000; ++s2)
        inner += static_cast<double>(s2 - 1) *
                 std::pow(static_cast<double>(N * s2 + s), -5.0);
    }
    const double zN = zeta_N(5.0, N);
    const double oracle = 2.0 / zN * (1.0 + 2.0 / zN * inner);
    REQUIRE(sigma_c_sq(5, N) == Catch::Approx(oracle).margin(1e-9));
  }

  // partial sums increase monotonically toward the limit
  double prev = 0.0;
  for (long long cut : {10LL, 100LL, 1000LL}) {
    double inner = 0.0;
    for (long long s2 = 1; s2 <= cut; ++s2)
      inner += static_cast<double>(s2 - 1) * std::pow(2.0 * s2 + 1.0, -5.0);
    REQUIRE(inner >= prev);
    prev = inner;
  }
}

TEST_CASE("congruence pair sums against brute force", "[special]") {
  // sum over a, b >= 1 in the same coprime class mod N of max(a,b)^-5
  for (long long N : {1LL, 2LL, 3LL, 5LL}) {
    double brute = 0.0;
    for (long long a = 1; a <= 3000; ++a) {
      if (std::gcd(a, N) != 1) continue;
      for (long long b = 1; b <= 3000; ++b)
        if ((b - a) % N == 0)
          brute += std::pow(static_cast<double>(std::max(a, b)), -5.0);
    }
    REQUIRE(rogers_pair_sum_same(5, N) == Catch::Approx(brute).margin(1e-9));
  }
  // negated classes
  for (long long N : {3LL, 5LL}) {
    double brute = 0.0;
    for (long long a = 1; a <= 3000; ++a) {
      if (std::gcd(a, N) != 1) continue;
      for (long long b = 1; b <= 3000; ++b)
        if ((b + a) % N == 0)
          brute += std::pow(static_cast<double>(std::max(a, b)), -5.0);
    }
    REQUIRE(rogers_pair_sum_negated(5, N) == Catch::Approx(brute).margin(1e-9));
  }
  REQUIRE(rogers_pair_sum_negated(5, 2) ==
          Catch::Approx(rogers_pair_sum_same(5, 2)).margin(1e-13));
  // N = 2 closed form: the same-class sum telescopes to zeta_2(4)
  REQUIRE(rogers_pair_sum_same(5, 2) == Catch::Approx(zeta_N(4.0, 2)).margin(1e-11));
  // N = 1 closed form: 2 zeta(4) - zeta(5)
  REQUIRE(rogers_pair_sum_same(5, 1) ==
          Catch::Approx(2.0 * zeta(4.0) - zeta(5.0)).margin(1e-11));
}

TEST_CASE("second-moment variance constant coincides with sigma_u_sq at N=1",
          "[special]") {
  REQUIRE(sigma_c_sq_second_moment(5, 1) == Catch::Approx(sigma_u_sq(5)).margin(1e-11));
  REQUIRE(sigma_c_sq_second_moment(5, 2) ==
          Catch::Approx(2.0 * zeta_N(4.0, 2) / zeta_N(5.0, 2)).margin(1e-11));
  // the closed form sits below the series form for N >= 2
  REQUIRE(sigma_c_sq(5, 2) < sigma_c_sq_second_moment(5, 2));
}

TEST_CASE("normal_cdf basics", "[special]") {
  REQUIRE(normal_cdf(0.0, 1.0) == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(normal_cdf(1.96, 1.0) == Catch::Approx(0.9750021049).margin(1e-6));
  // numeric integration oracle for Phi(1.96)
  double acc = 0.5;
  const int steps = 20000;
  const double h = 1.96 / steps;
  for (int i = 0; i < steps; ++i) {
    const double a = i * h, m = (i + 0.5) * h, b = (i + 1) * h;
    auto pdf = [](double t) {
      return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
    };
    acc += h / 6.0 * (pdf(a) + 4.0 * pdf(m) + pdf(b));
  }
  REQUIRE(normal_cdf(1.96, 1.0) == Catch::Approx(acc).margin(1e-10));
  for (double xi : {0.3, 1.1, 2.7}) {
    REQUIRE(normal_cdf(-xi, 2.5) + normal_cdf(xi, 2.5) == Catch::Approx(1.0).margin(1e-14));
  }
  REQUIRE(normal_cdf(2.0, 4.0) == Catch::Approx(normal_cdf(1.0, 1.0)).margin(1e-14));
  REQUIRE_THROWS_AS(normal_cdf(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("primality helper", "[special]") {
  REQUIRE(is_prime_u64(2147483647ULL));
  REQUIRE(is_prime_u64(1000003ULL));
  REQUIRE_FALSE(is_prime_u64(2147483649ULL));
  REQUIRE_FALSE(is_prime_u64(1));
}
