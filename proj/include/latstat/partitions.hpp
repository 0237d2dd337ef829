#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace latstat {

// Partition of {1, ..., r}: disjoint nonempty blocks covering the set, each
// block sorted, blocks ordered by least element.
struct SetPartition {
  std::vector<std::vector<int>> blocks;

  int r() const {
    int total = 0;
    for (const auto& b : blocks) total += static_cast<int>(b.size());
    return total;
  }

  void validate(int r_expected) const {
    std::vector<char> seen(static_cast<std::size_t>(r_expected) + 1, 0);
    int count = 0;
    for (const auto& b : blocks) {
      if (b.empty()) throw std::invalid_argument("SetPartition: empty block");
      for (int e : b) {
        if (e < 1 || e > r_expected || seen[static_cast<std::size_t>(e)])
          throw std::invalid_argument("SetPartition: blocks must partition {1..r}");
        seen[static_cast<std::size_t>(e)] = 1;
        ++count;
      }
    }
    if (count != r_expected) throw std::invalid_argument("SetPartition: cover violated");
  }
};

// All partitions of {1, ..., r} in canonical order, generated via restricted
// growth strings (block of element i = code[i]); count is Bell(r).
inline std::vector<SetPartition> enumerate_partitions(int r) {
  if (r < 1 || r > 10) throw std::invalid_argument("enumerate_partitions: 1 <= r <= 10");
  std::vector<SetPartition> out;
  std::vector<int> code(static_cast<std::size_t>(r), 0);
  auto emit = [&]() {
    const int nblocks = *std::max_element(code.begin(), code.end()) + 1;
    SetPartition p;
    p.blocks.assign(static_cast<std::size_t>(nblocks), {});
    for (int i = 0; i < r; ++i)
      p.blocks[static_cast<std::size_t>(code[static_cast<std::size_t>(i)])].push_back(i + 1);
    out.push_back(std::move(p));
  };
  // code[0] = 0 always; code[i] <= 1 + max(code[0..i-1]).
  std::vector<int> maxes(static_cast<std::size_t>(r), 0);
  int i = 1;
  if (r == 1) {
    emit();
    return out;
  }
  while (true) {
    if (i == r) {
      emit();
      --i;
      while (i >= 1 && code[static_cast<std::size_t>(i)] == maxes[static_cast<std::size_t>(i - 1)] + 1)
        code[static_cast<std::size_t>(i--)] = 0;
      if (i < 1) break;
      ++code[static_cast<std::size_t>(i)];
      maxes[static_cast<std::size_t>(i)] =
          std::max(maxes[static_cast<std::size_t>(i - 1)], code[static_cast<std::size_t>(i)]);
      ++i;
      continue;
    }
    code[static_cast<std::size_t>(i)] = 0;
    maxes[static_cast<std::size_t>(i)] = maxes[static_cast<std::size_t>(i - 1)];
    ++i;
  }
  return out;
}

// Parameter schedule for the index-space decomposition: beta_1 = eta and
//   beta_{j+1} = max(eta + (3+r) beta_j, eta + r (3+r) q tau / delta_prime),
// alpha_0 = 0, alpha_j = (3+r) beta_j.  The proof constants delta_prime, q,
// tau are opaque positive inputs.  decay_margin records
//   min_j (delta_prime * beta_{j+1} - q r tau * alpha_j),
// the exponent margin the surrounding estimates rely on; it is reported, not
// enforced, since the cover property below is independent of it.
struct Schedule {
  int r = 0;
  double eta = 0.0, delta_prime = 1.0, q = 1.0, tau = 1.0;
  std::vector<double> alpha;  // alpha_0 .. alpha_{r-1}
  std::vector<double> beta;   // beta_1 .. beta_r
  double decay_margin = 0.0;
};

inline Schedule beta_schedule(int r, double eta, double delta_prime = 1.0, double q = 1.0,
                              double tau = 1.0) {
  if (r < 3) throw std::invalid_argument("beta_schedule: r >= 3 required");
  if (!(eta > 0.0) || !(delta_prime > 0.0) || !(q > 0.0) || !(tau > 0.0))
    throw std::invalid_argument("beta_schedule: parameters must be positive");
  Schedule s;
  s.r = r;
  s.eta = eta;
  s.delta_prime = delta_prime;
  s.q = q;
  s.tau = tau;
  s.beta.resize(static_cast<std::size_t>(r));
  s.alpha.resize(static_cast<std::size_t>(r));
  s.beta[0] = eta;
  const double floor_branch = eta + r * (3.0 + r) * q * tau / delta_prime;
  for (int j = 1; j < r; ++j)
    s.beta[static_cast<std::size_t>(j)] =
        std::max(eta + (3.0 + r) * s.beta[static_cast<std::size_t>(j - 1)], floor_branch);
  s.alpha[0] = 0.0;
  for (int j = 1; j < r; ++j)
    s.alpha[static_cast<std::size_t>(j)] = (3.0 + r) * s.beta[static_cast<std::size_t>(j - 1)];
  // The region decomposition needs beta_{j+1} > alpha_j strictly; in the
  // zero-based vectors that is beta[j] > alpha[j].
  for (int j = 0; j < r; ++j) {
    if (!(s.beta[static_cast<std::size_t>(j)] > s.alpha[static_cast<std::size_t>(j)]))
      throw std::logic_error("beta_schedule: interleaving violated");
  }
  double margin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < r; ++j)
    margin = std::min(margin, delta_prime * s.beta[static_cast<std::size_t>(j)] -
                                  q * r * tau * s.alpha[static_cast<std::size_t>(j)]);
  s.decay_margin = margin;
  return s;
}

// Region labels of the decomposition of {0..M-1}^r:
//  - Delta(beta_r): all pairwise gaps <= beta_r;
//  - OmegaQ(Q, j): intra-block gaps <= alpha_j and inter-block gaps > beta_{j+1}.
struct RegionLabel {
  bool is_delta = false;
  SetPartition Q;  // empty for Delta
  int j = -1;      // schedule level for OmegaQ

  std::string str() const {
    if (is_delta) return "Delta";
    std::string s = "Omega[j=" + std::to_string(j) + "]{";
    for (std::size_t b = 0; b < Q.blocks.size(); ++b) {
      if (b) s += "|";
      for (std::size_t i = 0; i < Q.blocks[b].size(); ++i) {
        if (i) s += ",";
        s += std::to_string(Q.blocks[b][i]);
      }
    }
    return s + "}";
  }
};

namespace detail {

inline bool in_omega_Q(const std::vector<double>& k, const SetPartition& Q, double alpha,
                       double beta) {
  for (const auto& block : Q.blocks) {
    for (std::size_t a = 0; a < block.size(); ++a)
      for (std::size_t b = a + 1; b < block.size(); ++b) {
        const double gap = std::abs(k[static_cast<std::size_t>(block[a] - 1)] -
                                    k[static_cast<std::size_t>(block[b] - 1)]);
        if (!(gap <= alpha)) return false;
      }
  }
  for (std::size_t bi = 0; bi < Q.blocks.size(); ++bi)
    for (std::size_t bj = bi + 1; bj < Q.blocks.size(); ++bj) {
      for (int a : Q.blocks[bi])
        for (int b : Q.blocks[bj]) {
          const double gap = std::abs(k[static_cast<std::size_t>(a - 1)] -
                                      k[static_cast<std::size_t>(b - 1)]);
          if (!(gap > beta)) return false;
        }
    }
  return true;
}

}  // namespace detail

// Every region of the decomposition containing the tuple (exhaustive, so
// overlap questions can be measured); the decomposition asserts at least one.
inline std::vector<RegionLabel> classify_tuple(const std::vector<double>& k,
                                               const Schedule& sched, int M) {
  const int r = sched.r;
  if (static_cast<int>(k.size()) != r)
    throw std::invalid_argument("classify_tuple: tuple length must equal schedule order");
  for (double ki : k)
    if (ki < 0.0 || ki >= static_cast<double>(M))
      throw std::invalid_argument("classify_tuple: entries must lie in [0, M)");

  std::vector<RegionLabel> out;
  double maxgap = 0.0;
  for (int a = 0; a < r; ++a)
    for (int b = a + 1; b < r; ++b)
      maxgap = std::max(maxgap, std::abs(k[static_cast<std::size_t>(a)] -
                                         k[static_cast<std::size_t>(b)]));
  if (maxgap <= sched.beta[static_cast<std::size_t>(r - 1)]) {
    RegionLabel lab;
    lab.is_delta = true;
    out.push_back(lab);
  }
  for (const auto& Q : enumerate_partitions(r)) {
    if (Q.blocks.size() < 2) continue;
    for (int j = 0; j <= r - 1; ++j) {
      // Level j pairs alpha_j with beta_{j+1}; zero-based: alpha[j], beta[j].
      const double alpha = sched.alpha[static_cast<std::size_t>(j)];
      const double beta = sched.beta[static_cast<std::size_t>(j)];
      if (detail::in_omega_Q(k, Q, alpha, beta)) {
        RegionLabel lab;
        lab.Q = Q;
        lab.j = j;
        out.push_back(lab);
      }
    }
  }
  return out;
}

struct CoverReport {
  std::vector<std::vector<int>> uncovered;
  std::int64_t total_tuples = 0;
  bool covered() const { return uncovered.empty(); }
};

// Exhaustive check that {0..M-1}^r = Delta(beta_r) ∪ ⋃_{Q,j} OmegaQ(alpha_j,
// beta_{j+1}).  A tuple lies in some OmegaQ at level j iff clustering its
// entries at threshold beta_{j+1} yields >= 2 clusters whose internal spans
// are all <= alpha_j: pairs closer than beta_{j+1} must share a block, and
// merging blocks only grows the spans, so the threshold clustering is the
// optimal witness.  classify_tuple cross-checks this equivalence in tests.
inline CoverReport verify_cover(int r, int M, const Schedule& sched,
                                std::int64_t max_tuples = 10'000'000) {
  if (sched.r != r) throw std::invalid_argument("verify_cover: schedule order mismatch");
  if (M < 1) throw std::invalid_argument("verify_cover: M >= 1 required");
  double total = std::pow(static_cast<double>(M), r);
  if (total > static_cast<double>(max_tuples))
    throw std::invalid_argument("verify_cover: M^r exceeds the exhaustive cap");

  CoverReport rep;
  rep.total_tuples = static_cast<std::int64_t>(total);
  std::vector<int> tuple(static_cast<std::size_t>(r), 0);
  std::vector<int> sorted(static_cast<std::size_t>(r));
  const double beta_r = sched.beta[static_cast<std::size_t>(r - 1)];

  while (true) {
    sorted.assign(tuple.begin(), tuple.end());
    std::sort(sorted.begin(), sorted.end());
    bool covered = sorted.back() - sorted.front() <= beta_r;
    for (int j = 0; !covered && j <= r - 1; ++j) {
      const double alpha = sched.alpha[static_cast<std::size_t>(j)];
      const double beta = sched.beta[static_cast<std::size_t>(j)];
      int clusters = 1;
      int cluster_start = sorted.front();
      bool spans_ok = true;
      for (int i = 1; i < r && spans_ok; ++i) {
        if (sorted[static_cast<std::size_t>(i)] - sorted[static_cast<std::size_t>(i - 1)] >
            beta) {
          ++clusters;
          cluster_start = sorted[static_cast<std::size_t>(i)];
        } else if (sorted[static_cast<std::size_t>(i)] - cluster_start > alpha) {
          spans_ok = false;
        }
      }
      covered = spans_ok && clusters >= 2;
    }
    if (!covered) rep.uncovered.push_back(tuple);

    int pos = r - 1;
    while (pos >= 0 && tuple[static_cast<std::size_t>(pos)] == M - 1)
      tuple[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) break;
    ++tuple[static_cast<std::size_t>(pos)];
  }
  return rep;
}

// Bell numbers (oracle for the partition enumeration).
inline std::uint64_t bell_number(int r) {
  if (r < 0 || r > 20) throw std::invalid_argument("bell_number: 0 <= r <= 20");
  std::vector<std::vector<std::uint64_t>> tri;
  tri.push_back({1});
  for (int i = 1; i <= r; ++i) {
    std::vector<std::uint64_t> row;
    row.push_back(tri.back().back());
    for (std::uint64_t x : tri.back()) row.push_back(row.back() + x);
    tri.push_back(std::move(row));
  }
  return tri[static_cast<std::size_t>(r)][0];
}

}  // namespace latstat
