#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "latstat/rng.hpp"
#include "latstat/special.hpp"

namespace latstat {

// Boundary convention for the y-annulus of Omega_T.
//  - Closed:     1 <= |y| <= T (the literal domain definition).
//  - HalfOpen:    1 <= |y| <  T, so dyadic shells [2^k, 2^{k+1}) tile
//    Omega_{2^M} disjointly.  All tessellation logic uses HalfOpen.
enum class ShellConvention { Closed, HalfOpen };

// Parameters (m, n, c_1..c_m, u_1..u_m) of the domain family
//   Omega_T = { (x, y) in R^m x R^n : 1 <= |y| <= T, |x_i| |y|^{u_i} < c_i }.
// sum(u_i) = n is required so the shell map has determinant one.
struct DomainParams {
  int m = 0;
  int n = 0;
  std::vector<double> c;
  std::vector<double> u;

  DomainParams(int m_, int n_, std::vector<double> c_, std::vector<double> u_)
      : m(m_), n(n_), c(std::move(c_)), u(std::move(u_)) {
    validate();
  }

  int l() const { return m + n; }

  double c_product() const {
    double p = 1.0;
    for (double ci : c) p *= ci;
    return p;
  }

  void validate() const {
    if (m < 1 || n < 1) throw std::invalid_argument("DomainParams: m, n >= 1 required");
    if (static_cast<int>(c.size()) != m || static_cast<int>(u.size()) != m)
      throw std::invalid_argument("DomainParams: need m entries in c and u");
    double usum = 0.0;
    for (int i = 0; i < m; ++i) {
      if (!(c[i] > 0.0)) throw std::invalid_argument("DomainParams: c_i > 0 required");
      if (!(u[i] > 0.0)) throw std::invalid_argument("DomainParams: u_i > 0 required");
      usum += u[i];
    }
    if (std::abs(usum - n) > 1e-12)
      throw std::invalid_argument("DomainParams: sum(u_i) must equal n within 1e-12");
  }
};

struct Point {
  Eigen::VectorXd x;
  Eigen::VectorXd y;

  Eigen::VectorXd flat() const {
    Eigen::VectorXd v(x.size() + y.size());
    v << x, y;
    return v;
  }
  static Point split(const DomainParams& params, const Eigen::VectorXd& v) {
    if (v.size() != params.l()) throw std::invalid_argument("Point: dimension mismatch");
    return Point{v.head(params.m), v.tail(params.n)};
  }
};

// vol(Omega_T) = 2^m c_1...c_m omega_n log T.
inline double volume_omega_T(const DomainParams& params, double T) {
  if (!(T > 1.0)) throw std::invalid_argument("volume_omega_T: T > 1 required");
  return std::ldexp(params.c_product(), params.m) * omega_n(params.n) * std::log(T);
}

namespace detail {

// x-constraints |x_i| |y|^{u_i} < c_i, with an optional symmetric slack on the
// thresholds (used by the jitter audit; slack = 0 is the production path).
inline bool x_constraints(const DomainParams& params, const Eigen::VectorXd& v,
                          double ny, double slack = 0.0) {
  for (int i = 0; i < params.m; ++i) {
    if (!(std::abs(v[i]) * std::pow(ny, params.u[i]) < params.c[i] * (1.0 + slack)))
      return false;
  }
  return true;
}

inline double y_norm(const DomainParams& params, const Eigen::VectorXd& v) {
  return v.tail(params.n).norm();
}

}  // namespace detail

inline bool contains(const DomainParams& params, const Eigen::VectorXd& v, double T,
                     ShellConvention conv) {
  if (v.size() != params.l()) throw std::invalid_argument("contains: dimension mismatch");
  const double ny = detail::y_norm(params, v);
  if (ny < 1.0) return false;
  if (conv == ShellConvention::Closed ? ny > T : ny >= T) return false;
  return detail::x_constraints(params, v, ny);
}

inline bool contains(const DomainParams& params, const Point& p, double T,
                     ShellConvention conv) {
  return contains(params, p.flat(), T, conv);
}

// Shell map diag(2^{u_1}, ..., 2^{u_m}, 1/2, ..., 1/2); determinant one.
inline Eigen::MatrixXd c0(const DomainParams& params) {
  Eigen::VectorXd d(params.l());
  for (int i = 0; i < params.m; ++i) d[i] = std::exp2(params.u[i]);
  d.tail(params.n).setConstant(0.5);
  return d.asDiagonal();
}

// Index k in [0, M) of the half-open dyadic shell [2^k, 2^{k+1}) holding |y|,
// provided the x-constraints hold; nullopt outside Omega_{2^M}.
// std::ilogb gives the binary exponent exactly, so shell membership agrees
// bit-for-bit with the HalfOpen contains() predicate.
inline std::optional<int> shell_index(const DomainParams& params,
                                      const Eigen::VectorXd& v, int M) {
  if (v.size() != params.l()) throw std::invalid_argument("shell_index: dimension mismatch");
  const double ny = detail::y_norm(params, v);
  if (!(ny >= 1.0)) return std::nullopt;
  const int k = std::ilogb(ny);
  if (k >= M) return std::nullopt;
  if (!detail::x_constraints(params, v, ny)) return std::nullopt;
  return k;
}

inline std::optional<int> shell_index(const DomainParams& params, const Point& p, int M) {
  return shell_index(params, p.flat(), M);
}

// Integral of chi_Omega(s1 x) chi_{Omega_2}(s2 x):
//   2^m log(2) max(s1, s2)^{-(m+n)} c_1...c_m omega_n.
inline double pair_intersection_volume(const DomainParams& params, long long s1,
                                       long long s2) {
  if (s1 < 1 || s2 < 1)
    throw std::invalid_argument("pair_intersection_volume: s1, s2 >= 1 required");
  const double mx = static_cast<double>(std::max(s1, s2));
  return std::ldexp(params.c_product(), params.m) * std::numbers::ln2 *
         std::pow(mx, -static_cast<double>(params.l())) * omega_n(params.n);
}

// Monte Carlo region selector for mc_volume.
struct McRegion {
  enum class Kind { OmegaT, PairIntersection };
  Kind kind;
  double T = 0.0;
  long long s1 = 1, s2 = 1;

  static McRegion omega_T(double T) { return {Kind::OmegaT, T, 1, 1}; }
  static McRegion pair_intersection(long long s1, long long s2) {
    return {Kind::PairIntersection, 0.0, s1, s2};
  }
};

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::int64_t hits = 0;
  std::int64_t n_samples = 0;
};

// Hit-or-miss volume estimate over the enclosing box
//   prod_i [-c_i, c_i] x [-Y, Y]^n,  Y = T or 2/min(s1, s2).
// Sample i draws from the substream (seed, i), so the estimate does not
// depend on evaluation order.
inline McEstimate mc_volume(const DomainParams& params, const McRegion& region,
                            std::int64_t n_samples, std::uint64_t seed) {
  if (n_samples < 1000) throw std::invalid_argument("mc_volume: n_samples >= 1000 required");
  double Y;
  if (region.kind == McRegion::Kind::OmegaT) {
    if (!(region.T > 1.0)) throw std::invalid_argument("mc_volume: degenerate box (T <= 1)");
    Y = region.T;
  } else {
    if (region.s1 < 1 || region.s2 < 1)
      throw std::invalid_argument("mc_volume: s1, s2 >= 1 required");
    Y = 2.0 / static_cast<double>(std::min(region.s1, region.s2));
  }

  double box_volume = std::pow(2.0 * Y, params.n);
  for (double ci : params.c) box_volume *= 2.0 * ci;

  const int l = params.l();
  Eigen::VectorXd v(l);
  std::int64_t hits = 0;
  for (std::int64_t i = 0; i < n_samples; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    for (int j = 0; j < params.m; ++j) v[j] = rng.uniform(-params.c[j], params.c[j]);
    for (int j = 0; j < params.n; ++j) v[params.m + j] = rng.uniform(-Y, Y);
    bool hit;
    if (region.kind == McRegion::Kind::OmegaT) {
      hit = contains(params, v, region.T, ShellConvention::Closed);
    } else {
      const double ny = detail::y_norm(params, v);
      const double n2 = static_cast<double>(region.s2) * ny;
      hit = n2 >= 1.0 && n2 <= 2.0 &&
            detail::x_constraints(params, static_cast<double>(region.s2) * v, n2) &&
            detail::x_constraints(params, static_cast<double>(region.s1) * v,
                                  static_cast<double>(region.s1) * ny);
    }
    hits += hit;
  }

  const double p = static_cast<double>(hits) / static_cast<double>(n_samples);
  McEstimate out;
  out.estimate = box_volume * p;
  out.std_error = box_volume * std::sqrt(p * (1.0 - p) / static_cast<double>(n_samples));
  out.hits = hits;
  out.n_samples = n_samples;
  return out;
}

struct DyadicReduction {
  int M = 0;        // unique integer with T/2 < 2^M <= T
  double a_T = 0.0; // (vol(Omega_{2^M}) / vol(Omega_T))^{1/2} = (M log2 / log T)^{1/2}
  double z_bound = 0.0; // vol(Omega_T \ Omega_{2^M}) / vol(Omega_T)^{1/2}
};

inline DyadicReduction dyadic_reduction(const DomainParams& params, double T) {
  if (!(T > 2.0)) throw std::invalid_argument("dyadic_reduction: T > 2 required");
  DyadicReduction out;
  out.M = std::ilogb(T);
  const double logT = std::log(T);
  out.a_T = std::min(1.0, std::sqrt(out.M * std::numbers::ln2 / logT));
  const double prefactor = std::ldexp(params.c_product(), params.m) * omega_n(params.n);
  out.z_bound = prefactor * (logT - out.M * std::numbers::ln2) /
                std::sqrt(prefactor * logT);
  return out;
}

}  // namespace latstat
