#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <quadmath.h>
#include <vector>

#include "latstat/geometry.hpp"

namespace latstat {

namespace detail {

template <typename T>
struct FlowOps;

template <>
struct FlowOps<double> {
  static double sqrt(double x) { return std::sqrt(x); }
  static double round(double x) { return std::round(x); }
  static double abs(double x) { return std::abs(x); }
  static double exp2(double x) { return std::exp2(x); }
  static double to_double(double x) { return x; }
};

template <>
struct FlowOps<long double> {
  static long double sqrt(long double x) { return sqrtl(x); }
  static long double round(long double x) { return roundl(x); }
  static long double abs(long double x) { return fabsl(x); }
  static long double exp2(long double x) { return exp2l(x); }
  static double to_double(long double x) { return static_cast<double>(x); }
};

template <>
struct FlowOps<__float128> {
  static __float128 sqrt(__float128 x) { return sqrtq(x); }
  static __float128 round(__float128 x) { return roundq(x); }
  static __float128 abs(__float128 x) { return fabsq(x); }
  static __float128 exp2(__float128 x) { return exp2q(x); }
  static double to_double(__float128 x) { return static_cast<double>(x); }
};

}  // namespace detail

// Tracks the basis and shift of c0^k Lambda across shells.  The shell map is
// hyperbolic, so representation error in the recurrent state grows by about
// 2^(1 + max u_i) per shell; the recurrence therefore runs in an extended
// scalar type (quad by default) while the per-shell enumeration consumes a
// double-rounded frame, whose rounding does not feed back.
template <typename Scalar>
class ShellFlow {
 public:
  ShellFlow(const DomainParams& params, const Eigen::MatrixXd& basis,
            const Eigen::VectorXd& shift)
      : l_(params.l()),
        B_(static_cast<std::size_t>(l_ * l_)),
        s_(static_cast<std::size_t>(l_)),
        scale_(static_cast<std::size_t>(l_)) {
    using Ops = detail::FlowOps<Scalar>;
    for (int c = 0; c < l_; ++c)
      for (int r = 0; r < l_; ++r) at(r, c) = static_cast<Scalar>(basis(r, c));
    for (int r = 0; r < l_; ++r) s_[static_cast<std::size_t>(r)] = static_cast<Scalar>(shift[r]);
    for (int i = 0; i < params.m; ++i)
      scale_[static_cast<std::size_t>(i)] = Ops::exp2(static_cast<Scalar>(params.u[i]));
    for (int i = params.m; i < l_; ++i)
      scale_[static_cast<std::size_t>(i)] = Scalar(0.5);
    has_shift_ = shift.squaredNorm() > 0.0;
  }

  struct Frame {
    Eigen::MatrixXd basis;
    Eigen::VectorXd shift;
  };

  // LLL-reduce the current basis, translate the shift near the origin by the
  // nearest-plane rule, and emit a double-precision copy for enumeration.
  Frame reduce_and_frame() {
    using Ops = detail::FlowOps<Scalar>;
    reduce();
    if (has_shift_) recenter_shift();
    Frame f;
    f.basis.resize(l_, l_);
    f.shift.resize(l_);
    for (int c = 0; c < l_; ++c)
      for (int r = 0; r < l_; ++r) f.basis(r, c) = Ops::to_double(at(r, c));
    for (int r = 0; r < l_; ++r) f.shift[r] = Ops::to_double(s_[static_cast<std::size_t>(r)]);
    return f;
  }

  // Apply the shell map (row scaling).
  void advance() {
    for (int r = 0; r < l_; ++r) {
      const Scalar f = scale_[static_cast<std::size_t>(r)];
      for (int c = 0; c < l_; ++c) at(r, c) *= f;
      s_[static_cast<std::size_t>(r)] *= f;
    }
  }

 private:
  Scalar& at(int r, int c) { return B_[static_cast<std::size_t>(c * l_ + r)]; }
  const Scalar& at(int r, int c) const { return B_[static_cast<std::size_t>(c * l_ + r)]; }

  void gso(std::vector<Scalar>& bstar, std::vector<Scalar>& mu,
           std::vector<Scalar>& norm2) const {
    const int n = l_;
    for (int i = 0; i < n; ++i) {
      for (int r = 0; r < n; ++r) bstar[static_cast<std::size_t>(i * n + r)] = at(r, i);
      for (int j = 0; j < i; ++j) {
        Scalar dot = 0, nj = norm2[static_cast<std::size_t>(j)];
        for (int r = 0; r < n; ++r)
          dot += at(r, i) * bstar[static_cast<std::size_t>(j * n + r)];
        const Scalar m = nj > Scalar(0) ? dot / nj : Scalar(0);
        mu[static_cast<std::size_t>(i * n + j)] = m;
        for (int r = 0; r < n; ++r)
          bstar[static_cast<std::size_t>(i * n + r)] -=
              m * bstar[static_cast<std::size_t>(j * n + r)];
      }
      Scalar nn = 0;
      for (int r = 0; r < n; ++r) {
        const Scalar v = bstar[static_cast<std::size_t>(i * n + r)];
        nn += v * v;
      }
      norm2[static_cast<std::size_t>(i)] = nn;
    }
  }

  void reduce(Scalar delta = Scalar(0.99)) {
    using Ops = detail::FlowOps<Scalar>;
    const int n = l_;
    std::vector<Scalar> bstar(static_cast<std::size_t>(n * n));
    std::vector<Scalar> mu(static_cast<std::size_t>(n * n), Scalar(0));
    std::vector<Scalar> norm2(static_cast<std::size_t>(n));
    gso(bstar, mu, norm2);
    int k = 1;
    long iterations = 0;
    while (k < n && ++iterations < 20000) {
      for (int j = k - 1; j >= 0; --j) {
        const Scalar q = Ops::round(mu[static_cast<std::size_t>(k * n + j)]);
        if (q != Scalar(0)) {
          for (int r = 0; r < n; ++r) at(r, k) -= q * at(r, j);
          for (int t = 0; t < j; ++t)
            mu[static_cast<std::size_t>(k * n + t)] -=
                q * mu[static_cast<std::size_t>(j * n + t)];
          mu[static_cast<std::size_t>(k * n + j)] -= q;
        }
      }
      const Scalar mukk = mu[static_cast<std::size_t>(k * n + k - 1)];
      if (norm2[static_cast<std::size_t>(k)] >=
          (delta - mukk * mukk) * norm2[static_cast<std::size_t>(k - 1)]) {
        ++k;
      } else {
        for (int r = 0; r < n; ++r) std::swap(at(r, k), at(r, k - 1));
        gso(bstar, mu, norm2);
        k = std::max(k - 1, 1);
      }
    }
  }

  // Babai nearest-plane: subtract the lattice vector closest to the shift.
  void recenter_shift() {
    using Ops = detail::FlowOps<Scalar>;
    const int n = l_;
    std::vector<Scalar> bstar(static_cast<std::size_t>(n * n));
    std::vector<Scalar> mu(static_cast<std::size_t>(n * n), Scalar(0));
    std::vector<Scalar> norm2(static_cast<std::size_t>(n));
    gso(bstar, mu, norm2);
    for (int i = n - 1; i >= 0; --i) {
      Scalar dot = 0;
      for (int r = 0; r < n; ++r)
        dot += s_[static_cast<std::size_t>(r)] * bstar[static_cast<std::size_t>(i * n + r)];
      const Scalar ni = norm2[static_cast<std::size_t>(i)];
      if (!(ni > Scalar(0))) continue;
      const Scalar z = Ops::round(dot / ni);
      if (z != Scalar(0)) {
        for (int r = 0; r < n; ++r) s_[static_cast<std::size_t>(r)] -= z * at(r, i);
      }
    }
  }

  int l_;
  std::vector<Scalar> B_;
  std::vector<Scalar> s_;
  std::vector<Scalar> scale_;
  bool has_shift_ = false;
};

}  // namespace latstat
