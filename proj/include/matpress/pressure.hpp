// Finite-depth bounds for the pressure of a matrix family: the growth
// exponent of Z_n(q) = sum over length-n words of |M_J|^q.
//
// Upper bounds are rigorous at every depth: sub-additivity of a_m = log Z_m
// gives P(q) = inf_m a_m/m (Fekete), so every a_m/m is an upper bound.
// Lower bounds come from two routes:
//   * periodic: P(q) >= (q/m) log rho(M_J) for every word of length m,
//     unconditionally (powers of the word already appear in Z_{km});
//   * connecting: P(q) >= (a_m + q log D - log(k+1)) / (m+k) for an
//     irreducible family with connecting data (D, k).  The data is an
//     empirical finite-depth estimate, so the route is off by default and
//     tagged non-rigorous when used.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "matpress/decompose.hpp"
#include "matpress/enumerate.hpp"
#include "matpress/errors.hpp"
#include "matpress/family.hpp"

namespace matpress {

struct PressureOptions {
  Norm norm = Norm::op;
  int depth = 10;
  std::uint64_t budget = std::uint64_t{1} << 24;
  int threads = 0;
  bool periodic_route = true;
  int periodic_depth = -1;  // -1: min(depth, 6)
  std::optional<ConnectingEstimate> connecting;  // enables the conditional route
};

struct PressureEstimate {
  double q = 0.0;
  Norm norm = Norm::op;
  double upper = kPosInf;
  double lower = kNegInf;
  int depth = 0;
  std::vector<std::pair<int, double>> per_depth;  // (m, a_m / m)
  std::vector<std::string> method_tags;
  bool trivial_detected = false;

  double width() const {
    if (upper == lower) return 0.0;  // covers the -inf/-inf trivial case
    return upper - lower;
  }
  double midpoint() const {
    if (lower == kNegInf) return upper;
    return 0.5 * (upper + lower);
  }
};

struct PressureCurve {
  std::vector<double> q_grid;
  std::vector<PressureEstimate> estimates;
};

// log sum over length-n words of |M_J|^q, computed in the log domain with
// streaming log-sum-exp; -inf iff every length-n product vanishes.
inline double log_partition_sum(const MatrixFamily& fam, double q, int n,
                                Norm norm, const WalkOptions& wopts = {}) {
  if (q <= 0.0) throw input_error("log_partition_sum: q must be positive");
  const auto sums = walk_depth_logsums(
      fam, n,
      [q, norm](const Matrix& m, double log_scale) {
        const double nm = matrix_norm(m, norm);
        if (!(nm > 0.0)) return kNegInf;
        return q * (std::log(nm) + log_scale);
      },
      wopts);
  return sums.back();
}

namespace detail {

// All of a_1 .. a_n in one prefix-tree walk.
inline std::vector<double> partition_sums(const MatrixFamily& fam, double q, int n,
                                          Norm norm, const WalkOptions& wopts) {
  return walk_depth_logsums(
      fam, n,
      [q, norm](const Matrix& m, double log_scale) {
        const double nm = matrix_norm(m, norm);
        if (!(nm > 0.0)) return kNegInf;
        return q * (std::log(nm) + log_scale);
      },
      wopts);
}

}  // namespace detail

inline PressureEstimate pressure_bounds(const MatrixFamily& fam, double q,
                                        const PressureOptions& opts = {}) {
  if (q <= 0.0) throw input_error("pressure_bounds: q must be positive");
  if (opts.depth < 1) throw input_error("pressure_bounds: depth must be >= 1");
  WalkOptions wopts{opts.budget, opts.threads};

  PressureEstimate est;
  est.q = q;
  est.norm = opts.norm;
  est.depth = opts.depth;

  const auto a = detail::partition_sums(fam, q, opts.depth, opts.norm, wopts);
  double running_min = kPosInf;
  for (int m = 1; m <= opts.depth; ++m) {
    const double am = a[static_cast<std::size_t>(m - 1)];
    const double value = am == kNegInf ? kNegInf : am / m;
    running_min = std::min(running_min, value);
    est.per_depth.emplace_back(m, value);
  }
  est.upper = running_min;
  est.method_tags.push_back("fekete_upper");
  if (est.upper == kNegInf) {
    // Some Z_m vanished entirely, so every longer product vanishes too and
    // the pressure is -inf exactly.
    est.trivial_detected = true;
    est.lower = kNegInf;
    est.method_tags.push_back("trivial");
    return est;
  }

  double lower = kNegInf;
  if (opts.periodic_route) {
    // Maximise (q/|J|) log rho(M_J) over all words with |J| <= pd.  The
    // spectral radius per word makes this costlier per node than the
    // partition walk, hence the separate, shallower depth.
    const int pd = opts.periodic_depth > 0 ? std::min(opts.periodic_depth, opts.depth)
                                           : std::min(opts.depth, 6);
    detail::check_budget(fam, pd, wopts);
    double best_rate = kNegInf;
    Word best_word;
    Word cur;
    std::function<void(const Matrix*, double, int)> walk = [&](const Matrix* prod,
                                                               double scale, int len) {
      if (len > 0) {
        const double rho = spectral_radius(*prod);
        if (rho > 0.0) {
          const double rate = q * (std::log(rho) + scale) / len;
          if (rate > best_rate) {
            best_rate = rate;
            best_word = cur;
          }
        }
        if (prod->isZero(0.0)) return;
      }
      if (len == pd) return;
      for (int s = 1; s <= fam.size(); ++s) {
        Matrix next = len == 0 ? fam.member(s) : Matrix(*prod * fam.member(s));
        double next_scale = scale;
        const double f = next.norm();
        if (f > 0.0 && (f > 1e100 || f < 1e-100)) {
          next /= f;
          next_scale += std::log(f);
        }
        cur.push_back(s);
        walk(&next, next_scale, len + 1);
        cur.pop_back();
      }
    };
    walk(nullptr, 0.0, 0);
    if (best_rate > lower) lower = best_rate;
    if (best_rate != kNegInf) {
      est.method_tags.push_back("periodic_lower(word=" +
                                word_to_string(best_word, fam.size()) + ")");
    }
  }
  if (opts.connecting) {
    const ConnectingEstimate& ce = *opts.connecting;
    if (ce.d_const > 0.0) {
      double best = kNegInf;
      int best_m = 0;
      for (int m = 1; m <= opts.depth; ++m) {
        const double am = a[static_cast<std::size_t>(m - 1)];
        if (am == kNegInf) continue;
        const double v = (am + q * std::log(ce.d_const) - std::log(ce.k + 1.0)) /
                         static_cast<double>(m + ce.k);
        if (v > best) {
          best = v;
          best_m = m;
        }
      }
      if (best > lower) lower = best;
      est.method_tags.push_back(
          "connecting_lower(D=" + std::to_string(ce.d_const) +
          ",k=" + std::to_string(ce.k) + ",m=" + std::to_string(best_m) +
          ",conditional on empirical (D,k) estimate)");
    }
  }
  est.lower = std::min(lower, est.upper);
  if (lower > est.upper) est.method_tags.push_back("lower_clamped_to_upper");
  return est;
}

struct BlockPressure {
  PressureEstimate combined;
  std::map<int, PressureEstimate> per_block;  // keyed by 1-based block index in lambda
  std::vector<int> achievers;                 // blocks whose upper reaches max lower
};

// Pressure through the decomposition: P(q) = max over irreducible diagonal
// blocks of the block pressure, so the interval is
// [max_j lower_j, max_j upper_j].  When auto_connecting is set, a connecting
// estimate is computed per block and its conditional lower route enabled
// (exact for 1x1 blocks, where norms multiply and D=1, k=0).
inline BlockPressure pressure_via_blocks(const MatrixFamily& fam,
                                         const BlockDecomposition& decomp, double q,
                                         const PressureOptions& opts = {},
                                         bool auto_connecting = false,
                                         const SearchOptions& sopts = {}) {
  (void)fam;
  BlockPressure result;
  result.combined.q = q;
  result.combined.norm = opts.norm;
  result.combined.depth = opts.depth;
  if (decomp.trivial()) {
    result.combined.upper = kNegInf;
    result.combined.lower = kNegInf;
    result.combined.trivial_detected = true;
    result.combined.method_tags.push_back("block_route(trivial: lambda empty)");
    return result;
  }
  double best_upper = kNegInf;
  double best_lower = kNegInf;
  for (int j : decomp.lambda) {
    const MatrixFamily& blk = decomp.diagonal_blocks[static_cast<std::size_t>(j - 1)];
    PressureOptions bopts = opts;
    if (auto_connecting && !bopts.connecting) {
      bopts.connecting = connecting_constant(
          blk, std::min(3, std::max(1, bopts.depth)), -1, sopts);
    }
    PressureEstimate est = pressure_bounds(blk, q, bopts);
    best_upper = std::max(best_upper, est.upper);
    best_lower = std::max(best_lower, est.lower);
    result.per_block.emplace(j, std::move(est));
  }
  result.combined.upper = best_upper;
  result.combined.lower = best_lower;
  result.combined.method_tags.push_back("block_route");
  for (const auto& [j, est] : result.per_block) {
    if (est.upper >= best_lower - 1e-12) result.achievers.push_back(j);
  }
  return result;
}

// Exact spectral route for the Frobenius-norm pressure at even integers:
// sum over |J|=n of |M_J|_F^{2m} equals the trace of the n-th power of the
// completely positive lift X -> sum_i N_i X N_i^* with N_i = M_i^{(x) m}, so
// P_F(2m) = log rho(sum_i conj(N_i) (x) N_i).  Used as an independent oracle
// (the limit P is norm-independent).
inline double pressure_even_spectral(const MatrixFamily& fam, int m,
                                     std::uint64_t size_budget = 4096) {
  if (m < 1) throw input_error("pressure_even_spectral: m must be >= 1");
  const std::uint64_t lift_dim =
      saturating_pow(static_cast<std::uint64_t>(fam.dim()), 2 * m);
  if (lift_dim > size_budget) {
    throw budget_error("pressure_even_spectral: lift dimension " +
                       std::to_string(lift_dim) + " exceeds budget " +
                       std::to_string(size_budget));
  }
  auto kron = [](const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < a.cols(); ++j) {
        out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
      }
    }
    return out;
  };
  const Eigen::Index n = static_cast<Eigen::Index>(lift_dim);
  Matrix lift = Matrix::Zero(n, n);
  for (const Matrix& mat : fam.matrices()) {
    Matrix power = mat;
    for (int i = 1; i < m; ++i) power = kron(power, mat);
    lift += kron(power.conjugate(), power);
  }
  const double rho = spectral_radius(lift);
  if (!(rho > 0.0)) return kNegInf;
  return std::log(rho);
}

inline PressureCurve pressure_curve(const MatrixFamily& fam,
                                    const std::vector<double>& q_grid,
                                    const PressureOptions& opts = {},
                                    const BlockDecomposition* decomp = nullptr,
                                    bool auto_connecting = false) {
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    if (q_grid[i] <= 0.0) throw input_error("pressure_curve: q grid must be positive");
    if (i > 0 && q_grid[i] <= q_grid[i - 1]) {
      throw input_error("pressure_curve: q grid must be strictly increasing");
    }
  }
  PressureCurve curve;
  curve.q_grid = q_grid;
  for (double q : q_grid) {
    if (decomp != nullptr) {
      curve.estimates.push_back(
          pressure_via_blocks(fam, *decomp, q, opts, auto_connecting).combined);
    } else {
      curve.estimates.push_back(pressure_bounds(fam, q, opts));
    }
  }
  return curve;
}

}  // namespace matpress
