#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace latstat {

struct LllResult {
  Eigen::MatrixXd basis;      // = input * transform
  Eigen::MatrixXd transform;  // unimodular; integer-valued entries stored as doubles
  int swaps = 0;
};

// Floating-point LLL on the columns of `input` with Lovasz parameter delta.
// Gram-Schmidt data is recomputed from scratch after every swap: dimensions
// here are tiny (l <= 8), so the O(l^3) refresh costs less than keeping
// incremental state trustworthy across large size-reduction quotients.
inline LllResult lll_reduce(const Eigen::MatrixXd& input, double delta = 0.99) {
  const int n = static_cast<int>(input.cols());
  LllResult out{input, Eigen::MatrixXd::Identity(n, n), 0};
  if (n < 2) return out;

  Eigen::MatrixXd& B = out.basis;
  Eigen::MatrixXd& U = out.transform;
  Eigen::MatrixXd bstar(B.rows(), n);
  Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd norm2(n);

  auto refresh = [&]() {
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd v = B.col(i);
      for (int j = 0; j < i; ++j) {
        mu(i, j) = norm2[j] > 0.0 ? B.col(i).dot(bstar.col(j)) / norm2[j] : 0.0;
        v -= mu(i, j) * bstar.col(j);
      }
      bstar.col(i) = v;
      norm2[i] = v.squaredNorm();
    }
  };
  refresh();

  int k = 1;
  long iterations = 0;
  const long max_iterations = 20000;
  while (k < n && ++iterations < max_iterations) {
    // Size-reduce column k; this leaves the Gram-Schmidt vectors untouched.
    for (int j = k - 1; j >= 0; --j) {
      const double q = std::round(mu(k, j));
      if (q != 0.0 && std::isfinite(q)) {
        B.col(k) -= q * B.col(j);
        U.col(k) -= q * U.col(j);
        for (int t = 0; t < j; ++t) mu(k, t) -= q * mu(j, t);
        mu(k, j) -= q;
      }
    }
    if (norm2[k] >= (delta - mu(k, k - 1) * mu(k, k - 1)) * norm2[k - 1]) {
      ++k;
    } else {
      B.col(k).swap(B.col(k - 1));
      U.col(k).swap(U.col(k - 1));
      ++out.swaps;
      refresh();
      k = std::max(k - 1, 1);
    }
  }
  return out;
}

}  // namespace latstat
