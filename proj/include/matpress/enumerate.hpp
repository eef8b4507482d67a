// Word-tree enumeration shared by the pressure, equilibrium and singular
// value function modules.  A walk visits every word J of length 1..n in
// lexicographic order, carrying the running product M_J, and feeds each node
// to a scorer returning a log-domain weight.
//
// Determinism contract: the tree is split into chunks at a prefix depth that
// depends only on (ell, n).  Chunks are processed by any number of worker
// threads, but each chunk accumulates sequentially and partial results are
// merged in chunk-index order, so output is bitwise independent of the
// thread count.
#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "matpress/errors.hpp"
#include "matpress/family.hpp"

namespace matpress {

struct WalkOptions {
  std::uint64_t budget = std::uint64_t{1} << 24;  // cap on leaf words ell^n
  int threads = 0;                                // 0 = hardware concurrency
};

// Scorer receives the running product in rescaled form: the true product is
// scaled * exp(log_scale).  Returns the node's log weight, -inf to skip.
using Scorer = std::function<double(const Matrix& scaled, double log_scale)>;

// Streaming log-sum-exp: running max plus rescaled accumulator.
struct LogSum {
  double mx = kNegInf;
  double sum = 0.0;

  void add(double x) {
    if (x == kNegInf) return;
    if (mx == kNegInf) {
      mx = x;
      sum = 1.0;
    } else if (x <= mx) {
      sum += std::exp(x - mx);
    } else {
      sum = sum * std::exp(mx - x) + 1.0;
      mx = x;
    }
  }

  void merge(const LogSum& o) {
    if (o.mx == kNegInf) return;
    if (mx == kNegInf) {
      *this = o;
    } else if (o.mx <= mx) {
      sum += o.sum * std::exp(o.mx - mx);
    } else {
      sum = sum * std::exp(mx - o.mx) + o.sum;
      mx = o.mx;
    }
  }

  double value() const { return mx == kNegInf ? kNegInf : mx + std::log(sum); }
};

namespace detail {

// Keep running products inside a safe dynamic range; the true magnitude
// lives in log_scale.
inline void rescale(Matrix& m, double& log_scale) {
  const double f = m.norm();
  if (f > 0.0 && (f > 1e100 || f < 1e-100)) {
    m /= f;
    log_scale += std::log(f);
  }
}

inline int default_chunk_depth(int ell, int n) {
  // Deterministic function of (ell, n) only: smallest p with ell^p >= 64.
  int p = 0;
  std::uint64_t count = 1;
  while (p < n && count < 64) {
    count *= static_cast<std::uint64_t>(ell);
    ++p;
  }
  return p;
}

inline void check_budget(const MatrixFamily& fam, int n, const WalkOptions& opts) {
  if (n < 1) throw input_error("enumeration depth must be >= 1");
  const std::uint64_t leaves =
      saturating_pow(static_cast<std::uint64_t>(fam.size()), n);
  if (leaves > opts.budget) {
    throw budget_error("word enumeration: " + std::to_string(fam.size()) + "^" +
                       std::to_string(n) + " leaf words exceed budget " +
                       std::to_string(opts.budget));
  }
}

// Sequential DFS below a given prefix.  Visits depths (from_depth..n];
// pruning: an exactly-zero running product kills its subtree.
template <typename Visit>
void dfs(const MatrixFamily& fam, const Matrix& prefix_prod, double prefix_scale,
         int from_depth, int n, Visit&& visit) {
  const int ell = fam.size();
  const int d = fam.dim();
  const int levels = n - from_depth;
  if (levels <= 0) return;
  std::vector<Matrix> prod(static_cast<std::size_t>(levels), Matrix(d, d));
  std::vector<double> scale(static_cast<std::size_t>(levels), 0.0);
  std::vector<int> sym(static_cast<std::size_t>(levels), 1);
  int depth = 0;  // filled levels beyond the prefix
  while (true) {
    if (sym[static_cast<std::size_t>(depth)] > ell) {
      if (depth == 0) break;
      --depth;
      ++sym[static_cast<std::size_t>(depth)];
      continue;
    }
    const Matrix& parent =
        depth == 0 ? prefix_prod : prod[static_cast<std::size_t>(depth - 1)];
    const double parent_scale =
        depth == 0 ? prefix_scale : scale[static_cast<std::size_t>(depth - 1)];
    Matrix& cur = prod[static_cast<std::size_t>(depth)];
    cur.noalias() = parent * fam.member(sym[static_cast<std::size_t>(depth)]);
    double cur_scale = parent_scale;
    rescale(cur, cur_scale);
    scale[static_cast<std::size_t>(depth)] = cur_scale;
    const bool dead = cur.isZero(0.0);
    if (!dead) {
      visit(from_depth + depth + 1, cur, cur_scale,
            sym.data(), depth + 1);
    }
    if (!dead && depth + 1 < levels) {
      ++depth;
      sym[static_cast<std::size_t>(depth)] = 1;
    } else {
      ++sym[static_cast<std::size_t>(depth)];
    }
  }
}

struct Chunk {
  Matrix prod;
  double log_scale = 0.0;
  std::uint64_t rank = 0;  // lexicographic rank of the prefix word
};

// All chunk roots at the fixed prefix depth, in lexicographic order, with a
// callback applied to every node at depth <= p (handled once, sequentially).
template <typename Visit>
std::vector<Chunk> chunk_roots(const MatrixFamily& fam, int p, Visit&& shallow) {
  std::vector<Chunk> chunks;
  if (p == 0) return chunks;
  const int ell = fam.size();
  struct Frame {
    Matrix prod;
    double scale;
    std::uint64_t rank;
  };
  std::vector<Frame> stack;
  // Iterative lexicographic walk of depths 1..p.
  std::vector<int> sym(static_cast<std::size_t>(p), 1);
  std::vector<Frame> path(static_cast<std::size_t>(p));
  int depth = 0;
  while (true) {
    if (sym[static_cast<std::size_t>(depth)] > ell) {
      if (depth == 0) break;
      --depth;
      ++sym[static_cast<std::size_t>(depth)];
      continue;
    }
    const Matrix* parent = depth == 0 ? nullptr : &path[static_cast<std::size_t>(depth - 1)].prod;
    const double parent_scale = depth == 0 ? 0.0 : path[static_cast<std::size_t>(depth - 1)].scale;
    const std::uint64_t parent_rank = depth == 0 ? 0 : path[static_cast<std::size_t>(depth - 1)].rank;
    Frame& f = path[static_cast<std::size_t>(depth)];
    if (parent == nullptr) {
      f.prod = fam.member(sym[0]);
    } else {
      f.prod.noalias() = *parent * fam.member(sym[static_cast<std::size_t>(depth)]);
    }
    f.scale = parent_scale;
    rescale(f.prod, f.scale);
    f.rank = parent_rank * static_cast<std::uint64_t>(ell) +
             static_cast<std::uint64_t>(sym[static_cast<std::size_t>(depth)] - 1);
    const bool dead = f.prod.isZero(0.0);
    if (!dead) {
      shallow(depth + 1, f.prod, f.scale, sym.data(), depth + 1);
      if (depth + 1 == p) {
        chunks.push_back(Chunk{f.prod, f.scale, f.rank});
      }
    }
    if (!dead && depth + 1 < p) {
      ++depth;
      sym[static_cast<std::size_t>(depth)] = 1;
    } else {
      ++sym[static_cast<std::size_t>(depth)];
    }
  }
  return chunks;
}

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs job(chunk_index) over all chunks on a small thread pool.  Results must
// be written to per-chunk slots by the job itself.
inline void run_chunks(std::size_t count, int threads,
                       const std::function<void(std::size_t)>& job) {
  if (count == 0) return;
  const int nthreads = std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)), count);
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nthreads));
  for (int t = 0; t < nthreads; ++t) {
    pool.emplace_back([&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        job(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

// Per-depth log-sum-exp of scorer over all words of lengths 1..n.
// Result r satisfies r[m-1] = log sum_{|J|=m} exp(score(M_J)).
inline std::vector<double> walk_depth_logsums(const MatrixFamily& fam, int n,
                                              const Scorer& score,
                                              const WalkOptions& opts = {}) {
  detail::check_budget(fam, n, opts);
  const int p = detail::default_chunk_depth(fam.size(), n);
  std::vector<LogSum> shallow(static_cast<std::size_t>(n));
  auto shallow_visit = [&](int depth, const Matrix& m, double s, const int*, int) {
    shallow[static_cast<std::size_t>(depth - 1)].add(score(m, s));
  };
  const auto chunks = detail::chunk_roots(fam, p, shallow_visit);
  std::vector<std::vector<LogSum>> partial(chunks.size());
  detail::run_chunks(chunks.size(), opts.threads, [&](std::size_t i) {
    std::vector<LogSum> acc(static_cast<std::size_t>(n));
    detail::dfs(fam, chunks[i].prod, chunks[i].log_scale, p, n,
                [&](int depth, const Matrix& m, double s, const int*, int) {
                  acc[static_cast<std::size_t>(depth - 1)].add(score(m, s));
                });
    partial[i] = std::move(acc);
  });
  // Fixed merge order over chunks.
  for (const auto& acc : partial) {
    for (int m = 0; m < n; ++m) {
      shallow[static_cast<std::size_t>(m)].merge(acc[static_cast<std::size_t>(m)]);
    }
  }
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) out[static_cast<std::size_t>(m)] = shallow[static_cast<std::size_t>(m)].value();
  return out;
}

// Scores of every word of length exactly n, indexed by lexicographic rank.
// Words below an exactly-zero product keep score -inf.
inline std::vector<double> walk_leaf_scores(const MatrixFamily& fam, int n,
                                            const Scorer& score,
                                            const WalkOptions& opts = {}) {
  detail::check_budget(fam, n, opts);
  const std::uint64_t leaves = saturating_pow(static_cast<std::uint64_t>(fam.size()), n);
  std::vector<double> out(leaves, kNegInf);
  const int ell = fam.size();
  const int p = detail::default_chunk_depth(ell, n);
  const std::uint64_t tail = saturating_pow(static_cast<std::uint64_t>(ell), n - p);
  auto shallow_visit = [&](int depth, const Matrix& m, double s, const int* sym, int len) {
    if (depth != n) return;  // only possible when p == n
    std::uint64_t rank = 0;
    for (int i = 0; i < len; ++i) {
      rank = rank * static_cast<std::uint64_t>(ell) + static_cast<std::uint64_t>(sym[i] - 1);
    }
    out[rank] = score(m, s);
  };
  const auto chunks = detail::chunk_roots(fam, p, shallow_visit);
  detail::run_chunks(chunks.size(), opts.threads, [&](std::size_t i) {
    const std::uint64_t base = chunks[i].rank * tail;
    detail::dfs(fam, chunks[i].prod, chunks[i].log_scale, p, n,
                [&](int depth, const Matrix& m, double s, const int* sym, int len) {
                  if (depth != n) return;
                  std::uint64_t rank = 0;
                  for (int j = 0; j < len; ++j) {
                    rank = rank * static_cast<std::uint64_t>(ell) +
                           static_cast<std::uint64_t>(sym[j] - 1);
                  }
                  out[base + rank] = score(m, s);
                });
  });
  return out;
}

}  // namespace matpress
