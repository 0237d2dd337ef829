#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "latstat/geometry.hpp"

namespace latstat {

enum class LatticeKind { Unimodular, Affine, Congruence };

inline std::string to_string(LatticeKind k) {
  switch (k) {
    case LatticeKind::Unimodular: return "unimodular";
    case LatticeKind::Affine: return "affine";
    case LatticeKind::Congruence: return "congruence";
  }
  return "unimodular";
}

inline LatticeKind lattice_kind_from_string(const std::string& s) {
  if (s == "unimodular") return LatticeKind::Unimodular;
  if (s == "affine") return LatticeKind::Affine;
  if (s == "congruence") return LatticeKind::Congruence;
  throw std::invalid_argument("unknown lattice kind: " + s);
}

struct CongruenceData {
  Eigen::VectorXi v;
  long long N = 1;
};

// Point set { basis * z + shift : z integral }.  The basis columns generate;
// |det(basis) - 1| < 1e-8 is enforced at construction and never renormalized.
struct Lattice {
  LatticeKind kind = LatticeKind::Unimodular;
  Eigen::MatrixXd basis;
  Eigen::VectorXd shift;
  std::optional<CongruenceData> cong;

  int l() const { return static_cast<int>(basis.cols()); }
};

namespace detail {

inline void check_basis(const Eigen::MatrixXd& basis) {
  if (basis.rows() != basis.cols() || basis.rows() < 2)
    throw std::invalid_argument("Lattice: square basis with l >= 2 required");
  const double det = basis.determinant();
  if (std::abs(det - 1.0) > 1e-8)
    throw std::invalid_argument("Lattice: |det - 1| beyond tolerance, got det = " +
                                std::to_string(det));
}

inline void check_congruence_data(const Eigen::VectorXi& v, long long N, int l) {
  if (N < 1) throw std::invalid_argument("Lattice: N >= 1 required");
  if (v.size() != l) throw std::invalid_argument("Lattice: v must have length l");
  long long g = N;
  for (int i = 0; i < v.size(); ++i) g = std::gcd(g, static_cast<long long>(v[i]));
  if (g != 1) throw std::invalid_argument("Lattice: gcd(v, N) = 1 required");
}

}  // namespace detail

inline Lattice construct_unimodular(const Eigen::MatrixXd& basis) {
  detail::check_basis(basis);
  Lattice lat;
  lat.kind = LatticeKind::Unimodular;
  lat.basis = basis;
  lat.shift = Eigen::VectorXd::Zero(basis.rows());
  return lat;
}

// Affine lattice basis*Z^l + basis*w; `w` is the torus coordinate of the shift.
inline Lattice construct_affine(const Eigen::MatrixXd& basis, const Eigen::VectorXd& w) {
  detail::check_basis(basis);
  if (w.size() != basis.cols()) throw std::invalid_argument("Lattice: shift length mismatch");
  Lattice lat;
  lat.kind = LatticeKind::Affine;
  lat.basis = basis;
  lat.shift = basis * w;
  return lat;
}

// Congruence lattice basis*(Z^l + v/N) with gcd(v, N) = 1.
inline Lattice construct_congruence(const Eigen::MatrixXd& basis, const Eigen::VectorXi& v,
                                    long long N) {
  detail::check_basis(basis);
  detail::check_congruence_data(v, N, static_cast<int>(basis.cols()));
  Lattice lat;
  lat.kind = LatticeKind::Congruence;
  lat.basis = basis;
  lat.shift = basis * (v.cast<double>() / static_cast<double>(N));
  lat.cong = CongruenceData{v, N};
  return lat;
}

// Bounded-support test functions fed to the Siegel transform.
struct TestFunction {
  enum class Kind { Ball, Box, BaseCell };

  Kind kind = Kind::Ball;
  double radius = 1.0;                     // Ball
  Eigen::VectorXd half_widths;             // Box
  std::optional<DomainParams> cell;        // BaseCell
  ShellConvention cell_convention = ShellConvention::HalfOpen;

  static TestFunction ball(double r) {
    if (!(r > 0.0)) throw std::invalid_argument("TestFunction: radius > 0 required");
    TestFunction f;
    f.kind = Kind::Ball;
    f.radius = r;
    return f;
  }

  static TestFunction box(const Eigen::VectorXd& h) {
    for (int i = 0; i < h.size(); ++i)
      if (!(h[i] > 0.0)) throw std::invalid_argument("TestFunction: half widths > 0 required");
    TestFunction f;
    f.kind = Kind::Box;
    f.half_widths = h;
    return f;
  }

  static TestFunction base_cell(const DomainParams& params,
                                ShellConvention conv = ShellConvention::HalfOpen) {
    TestFunction f;
    f.kind = Kind::BaseCell;
    f.cell = params;
    f.cell_convention = conv;
    return f;
  }

  double support_radius() const {
    switch (kind) {
      case Kind::Ball: return radius;
      case Kind::Box: return half_widths.norm();
      case Kind::BaseCell: {
        double s = 4.0;  // |y| < 2
        for (double ci : cell->c) s += ci * ci;
        return std::sqrt(s);
      }
    }
    return 0.0;
  }

  double operator()(const Eigen::VectorXd& p) const {
    switch (kind) {
      case Kind::Ball:
        return p.norm() <= radius ? 1.0 : 0.0;
      case Kind::Box: {
        for (int i = 0; i < p.size(); ++i)
          if (std::abs(p[i]) > half_widths[i]) return 0.0;
        return 1.0;
      }
      case Kind::BaseCell:
        return contains(*cell, p, 2.0, cell_convention) ? 1.0 : 0.0;
    }
    return 0.0;
  }

  // Integral over R^l (these are indicators, so it also equals ∫ f^2).
  double integral(int l) const {
    switch (kind) {
      case Kind::Ball:
        return std::pow(std::numbers::pi, 0.5 * l) /
               std::tgamma(0.5 * l + 1.0) * std::pow(radius, l);
      case Kind::Box: {
        double v = 1.0;
        for (int i = 0; i < half_widths.size(); ++i) v *= 2.0 * half_widths[i];
        return v;
      }
      case Kind::BaseCell:
        return volume_omega_T(*cell, 2.0);
    }
    return 0.0;
  }

  // True when f(s x) has support max(s1,s2)^{-1} * support for positive
  // dilation, i.e. the region is star-shaped around the origin.
  bool star_shaped() const { return kind != Kind::BaseCell; }
};

// --- JSON record format: {kind, basis (row-major), shift, v, N} ---

inline nlohmann::json lattice_to_json(const Lattice& lat) {
  nlohmann::json j;
  j["kind"] = to_string(lat.kind);
  const int l = lat.l();
  std::vector<std::vector<double>> rows(l, std::vector<double>(l));
  for (int r = 0; r < l; ++r)
    for (int c = 0; c < l; ++c) rows[r][c] = lat.basis(r, c);
  j["basis"] = rows;
  j["shift"] = std::vector<double>(lat.shift.data(), lat.shift.data() + l);
  if (lat.cong) {
    j["v"] = std::vector<long long>(lat.cong->v.data(), lat.cong->v.data() + l);
    j["N"] = lat.cong->N;
  }
  return j;
}

inline Lattice lattice_from_json(const nlohmann::json& j) {
  const LatticeKind kind = lattice_kind_from_string(j.at("kind").get<std::string>());
  const auto rows = j.at("basis").get<std::vector<std::vector<double>>>();
  const int l = static_cast<int>(rows.size());
  Eigen::MatrixXd basis(l, l);
  for (int r = 0; r < l; ++r) {
    if (static_cast<int>(rows[r].size()) != l)
      throw std::invalid_argument("lattice_from_json: basis must be square");
    for (int c = 0; c < l; ++c) basis(r, c) = rows[r][c];
  }
  detail::check_basis(basis);

  Lattice lat;
  lat.kind = kind;
  lat.basis = basis;
  lat.shift = Eigen::VectorXd::Zero(l);
  if (j.contains("shift")) {
    const auto s = j.at("shift").get<std::vector<double>>();
    if (static_cast<int>(s.size()) != l)
      throw std::invalid_argument("lattice_from_json: shift length mismatch");
    for (int i = 0; i < l; ++i) lat.shift[i] = s[i];
  }
  if (kind == LatticeKind::Congruence) {
    const auto v = j.at("v").get<std::vector<long long>>();
    const long long N = j.at("N").get<long long>();
    Eigen::VectorXi vi(l);
    if (static_cast<int>(v.size()) != l)
      throw std::invalid_argument("lattice_from_json: v length mismatch");
    for (int i = 0; i < l; ++i) vi[i] = static_cast<int>(v[i]);
    detail::check_congruence_data(vi, N, l);
    lat.cong = CongruenceData{vi, N};
  }
  return lat;
}

}  // namespace latstat
