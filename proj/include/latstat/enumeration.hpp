#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "latstat/reduction.hpp"

namespace latstat {

class enumeration_cap_error : public std::runtime_error {
 public:
  explicit enumeration_cap_error(const std::string& what)
      : std::runtime_error(what) {}
};

struct EnumerationOptions {
  std::int64_t max_points = 100'000'000;  // cap on both tree nodes and output size
  double lll_delta = 0.99;
  bool reduce = true;  // callers holding an already-reduced basis may skip LLL
};

namespace detail {

// Branch-and-bound over the coefficient tree of an upper-triangular system:
// visits every integer z with ||R z - t|| <= radius (plus slack) and hands the
// coefficient vector to `leaf`.
inline void triangular_enumerate(const Eigen::MatrixXd& R, const Eigen::VectorXd& t,
                                 double radius, std::int64_t cap,
                                 const std::function<void(const Eigen::VectorXi&)>& leaf) {
  const int n = static_cast<int>(R.cols());
  const double budget = radius * radius * (1.0 + 1e-9) + 1e-12;

  Eigen::VectorXi z = Eigen::VectorXi::Zero(n);
  std::int64_t nodes = 0;

  std::function<void(int, double)> descend = [&](int level, double used) {
    if (++nodes > cap)
      throw enumeration_cap_error("enumeration node cap exceeded");
    double resid = t[level];
    for (int j = level + 1; j < n; ++j) resid -= R(level, j) * z[j];
    const double rii = R(level, level);
    const double room = budget - used;
    if (!(room >= 0.0) || rii == 0.0) return;
    const double center = resid / rii;
    const double half = std::sqrt(room) / std::abs(rii) + 1e-9;
    const long lo = static_cast<long>(std::ceil(center - half));
    const long hi = static_cast<long>(std::floor(center + half));
    for (long v = lo; v <= hi; ++v) {
      const double d = rii * static_cast<double>(v) - resid;
      const double cost = used + d * d;
      if (cost > budget) continue;
      z[level] = static_cast<int>(v);
      if (level == 0) {
        leaf(z);
      } else {
        descend(level - 1, cost);
      }
    }
    z[level] = 0;
  };
  descend(n - 1, 0.0);
}

// Reduced basis, sign-fixed QR, centered target: the shared setup of both
// enumeration entry points.
struct PreparedBall {
  Eigen::MatrixXd basis;      // reduced
  Eigen::MatrixXd transform;  // input * transform = reduced
  Eigen::MatrixXd R;
  Eigen::VectorXd t;   // residual target after the Babai shift
  Eigen::VectorXd z0;  // Babai integer offset (doubles)
};

inline PreparedBall prepare_ball(const Eigen::MatrixXd& basis, const Eigen::VectorXd& shift,
                                 double radius, const Eigen::VectorXd& center,
                                 const EnumerationOptions& opts) {
  const int n = static_cast<int>(basis.cols());
  if (basis.rows() != n) throw std::invalid_argument("enumerate_in_ball: square basis required");
  if (!(radius > 0.0)) throw std::invalid_argument("enumerate_in_ball: radius > 0 required");

  PreparedBall prep;
  if (opts.reduce) {
    LllResult red = lll_reduce(basis, opts.lll_delta);
    prep.basis = std::move(red.basis);
    prep.transform = std::move(red.transform);
  } else {
    prep.basis = basis;
    prep.transform = Eigen::MatrixXd::Identity(n, n);
  }

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(prep.basis);
  prep.R = qr.matrixQR().triangularView<Eigen::Upper>();
  Eigen::MatrixXd Q = qr.householderQ();
  for (int i = 0; i < n; ++i) {
    if (prep.R(i, i) < 0.0) {
      prep.R.row(i) = -prep.R.row(i);
      Q.col(i) = -Q.col(i);
    }
  }

  // A priori Fincke-Pohst size estimate; rejects absurd requests before
  // walking the tree.
  double predicted = 1.0;
  for (int i = 0; i < n; ++i) {
    if (prep.R(i, i) <= 0.0)
      throw std::invalid_argument("enumerate_in_ball: singular basis");
    predicted *= 2.0 * radius / prep.R(i, i) + 1.0;
    if (predicted > 64.0 * static_cast<double>(opts.max_points))
      throw enumeration_cap_error("enumeration predicted size exceeds cap");
  }

  // Babai rounding keeps the integer coefficients near zero for far shifts.
  prep.t = Q.transpose() * (center - shift);
  prep.z0 = prep.R.template triangularView<Eigen::Upper>().solve(prep.t).array().round();
  prep.t -= prep.R * prep.z0;
  return prep;
}

}  // namespace detail

// All lattice points basis*z + shift within Euclidean distance `radius` of
// `center`, each exactly once.  Output is sorted lexicographically by the
// integer coordinates in the *input* basis, so it is deterministic and
// independent of the internal reduction.
inline std::vector<Eigen::VectorXd> enumerate_in_ball(
    const Eigen::MatrixXd& basis, const Eigen::VectorXd& shift, double radius,
    const Eigen::VectorXd& center, const EnumerationOptions& opts = {}) {
  const auto prep = detail::prepare_ball(basis, shift, radius, center, opts);

  struct Found {
    Eigen::VectorXd point;
    Eigen::VectorXd coords;  // integer coordinates in the input basis
  };
  std::vector<Found> found;
  const double r2 = radius * radius;
  detail::triangular_enumerate(prep.R, prep.t, radius, opts.max_points,
                               [&](const Eigen::VectorXi& z) {
    Eigen::VectorXd zfull = prep.z0 + z.cast<double>();
    Eigen::VectorXd p = prep.basis * zfull + shift;
    if ((p - center).squaredNorm() <= r2) {
      found.push_back({std::move(p), prep.transform * zfull});
    }
  });

  std::sort(found.begin(), found.end(), [](const Found& a, const Found& b) {
    for (int i = 0; i < a.coords.size(); ++i) {
      if (a.coords[i] != b.coords[i]) return a.coords[i] < b.coords[i];
    }
    return false;
  });

  std::vector<Eigen::VectorXd> out;
  out.reserve(found.size());
  for (auto& f : found) out.push_back(std::move(f.point));
  return out;
}

inline std::vector<Eigen::VectorXd> enumerate_in_ball(
    const Eigen::MatrixXd& basis, const Eigen::VectorXd& shift, double radius,
    const EnumerationOptions& opts = {}) {
  return enumerate_in_ball(basis, shift, radius,
                           Eigen::VectorXd::Zero(basis.rows()), opts);
}

// Callback form used by the counting loops: no collection, no ordering.
inline void for_each_point_in_ball(
    const Eigen::MatrixXd& basis, const Eigen::VectorXd& shift, double radius,
    const Eigen::VectorXd& center, const EnumerationOptions& opts,
    const std::function<void(const Eigen::VectorXd&)>& visit) {
  const auto prep = detail::prepare_ball(basis, shift, radius, center, opts);
  const double r2 = radius * radius;
  detail::triangular_enumerate(prep.R, prep.t, radius, opts.max_points,
                               [&](const Eigen::VectorXi& z) {
    Eigen::VectorXd p = prep.basis * (prep.z0 + z.cast<double>()) + shift;
    if ((p - center).squaredNorm() <= r2) visit(p);
  });
}

}  // namespace latstat
