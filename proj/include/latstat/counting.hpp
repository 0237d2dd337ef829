#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>

#include "latstat/enumeration.hpp"
#include "latstat/geometry.hpp"
#include "latstat/lattice.hpp"
#include "latstat/shell_flow.hpp"

namespace latstat {

struct CountOptions {
  std::int64_t max_points = 100'000'000;
  // When set, every count is recomputed with all domain inequalities relaxed
  // and tightened by this relative amount; a discrepancy marks the result as
  // boundary-sensitive.
  std::optional<double> jitter;
};

// Points of the lattice within `radius` of the origin, sorted by integer
// coordinates in the stored basis.
inline std::vector<Eigen::VectorXd> enumerate_in_ball(const Lattice& lat, double radius,
                                                      const EnumerationOptions& opts = {}) {
  return enumerate_in_ball(lat.basis, lat.shift, radius, opts);
}

// Siegel transform: sum of f over the nonzero points of the lattice.  The
// origin is skipped only when it is (numerically) a lattice point.
inline double siegel_transform(const TestFunction& f, const Lattice& lat,
                               const CountOptions& opts = {}) {
  EnumerationOptions eopts;
  eopts.max_points = opts.max_points;
  double sum = 0.0;
  for_each_point_in_ball(lat.basis, lat.shift, f.support_radius(),
                         Eigen::VectorXd::Zero(lat.l()), eopts,
                         [&](const Eigen::VectorXd& p) {
                           if (p.squaredNorm() <= 1e-24) return;
                           sum += f(p);
                         });
  return sum;
}

namespace detail {

// Points of basis*Z + shift in the base cell {1 <= |y| < 2, x-constraints},
// counted with an optional symmetric slack on the inequalities.
inline long long count_base_cell(const Eigen::MatrixXd& basis, const Eigen::VectorXd& shift,
                                 const DomainParams& params, double slack,
                                 const EnumerationOptions& eopts) {
  double r2 = 4.0;
  for (double ci : params.c) r2 += ci * ci;
  const double radius = std::sqrt(r2) * (1.0 + 1e-9);
  long long count = 0;
  for_each_point_in_ball(basis, shift, radius, Eigen::VectorXd::Zero(params.l()), eopts,
                         [&](const Eigen::VectorXd& p) {
    const double ny = y_norm(params, p);
    if (!(ny >= 1.0 * (1.0 - slack)) || !(ny < 2.0 * (1.0 + slack))) return;
    if (!x_constraints(params, p, ny, slack)) return;
    ++count;
  });
  return count;
}

}  // namespace detail

struct CountResult {
  long long count = 0;
  bool boundary_sensitive = false;
  long long count_loose = 0;   // only meaningful when a jitter audit ran
  long long count_tight = 0;
};

// |Lambda ∩ Omega_{2^M}| via the shell decomposition: shell k counts the
// points of c0^k Lambda in the base cell.  The basis is re-reduced after each
// application of the shell map, so the enumeration never sees the full
// 2^{k(1+max u)} skew.  The recurrent basis/shift state runs in quad
// precision: the shell map amplifies state error by ~2^{1+max u} per shell,
// which would corrupt doubles near shell 40; the per-shell double rounding
// handed to the enumerator does not feed back and stays harmless.
inline CountResult count_tessellated_audited(const Lattice& lat, const DomainParams& params,
                                             int M, const CountOptions& opts = {}) {
  if (M < 1) throw std::invalid_argument("count_tessellated: M >= 1 required");
  if (lat.l() != params.l())
    throw std::invalid_argument("count_tessellated: lattice/domain dimension mismatch");

  EnumerationOptions eopts;
  eopts.max_points = opts.max_points;
  eopts.reduce = false;  // reduction handled by the flow, once per shell

  ShellFlow<__float128> flow(params, lat.basis, lat.shift);
  CountResult out;
  for (int k = 0; k < M; ++k) {
    const auto frame = flow.reduce_and_frame();
    out.count += detail::count_base_cell(frame.basis, frame.shift, params, 0.0, eopts);
    if (opts.jitter) {
      out.count_loose +=
          detail::count_base_cell(frame.basis, frame.shift, params, *opts.jitter, eopts);
      out.count_tight +=
          detail::count_base_cell(frame.basis, frame.shift, params, -*opts.jitter, eopts);
    }
    flow.advance();
  }
  if (opts.jitter)
    out.boundary_sensitive = out.count_loose != out.count || out.count_tight != out.count;
  return out;
}

inline long long count_tessellated(const Lattice& lat, const DomainParams& params, int M,
                                   const CountOptions& opts = {}) {
  return count_tessellated_audited(lat, params, M, opts).count;
}

// Single-enumeration oracle: every lattice point in the ball of radius
// sqrt(sum c_i^2 + T^2), filtered through the membership predicate.
inline long long count_direct(const Lattice& lat, const DomainParams& params, double T,
                              ShellConvention conv = ShellConvention::HalfOpen,
                              const CountOptions& opts = {}) {
  if (!(T > 1.0)) throw std::invalid_argument("count_direct: T > 1 required");
  if (lat.l() != params.l())
    throw std::invalid_argument("count_direct: lattice/domain dimension mismatch");
  double r2 = T * T;
  for (double ci : params.c) r2 += ci * ci;
  EnumerationOptions eopts;
  eopts.max_points = opts.max_points;
  long long count = 0;
  for_each_point_in_ball(lat.basis, lat.shift, std::sqrt(r2) * (1.0 + 1e-9),
                         Eigen::VectorXd::Zero(params.l()), eopts,
                         [&](const Eigen::VectorXd& p) {
                           if (contains(params, p, T, conv)) ++count;
                         });
  return count;
}

// Normalized discrepancy (count - M vol(Omega_2)) / (M vol(Omega_2))^{1/2}.
inline double discrepancy(const Lattice& lat, const DomainParams& params, int M,
                          const CountOptions& opts = {}) {
  const double vol = static_cast<double>(M) * volume_omega_T(params, 2.0);
  const double count = static_cast<double>(count_tessellated(lat, params, M, opts));
  return (count - vol) / std::sqrt(vol);
}

}  // namespace latstat
