// Finite-level equilibrium state machinery: norm-weighted cylinder
// distributions, their shift (Cesaro) averages, Gibbs ratio diagnostics,
// equilibrium descriptions through the block decomposition, and the
// derivative identity P'(q) = Lyapunov exponent of the equilibrium state.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "matpress/decompose.hpp"
#include "matpress/enumerate.hpp"
#include "matpress/errors.hpp"
#include "matpress/family.hpp"
#include "matpress/measures.hpp"
#include "matpress/pressure.hpp"

namespace matpress {

// A probability assignment on the words of a fixed length, stored in the log
// domain and indexed by lexicographic rank.
class CylinderDistribution {
 public:
  CylinderDistribution(int ell, int level, std::vector<double> log_mass)
      : ell_(ell), level_(level), log_mass_(std::move(log_mass)) {
    if (log_mass_.size() != saturating_pow(static_cast<std::uint64_t>(ell_), level_)) {
      throw input_error("cylinder distribution: size does not match ell^level");
    }
  }

  // Normalizes log weights into a distribution; throws when all weights
  // vanish.
  static CylinderDistribution from_log_weights(int ell, int level,
                                               std::vector<double> logw) {
    LogSum total;
    for (double x : logw) total.add(x);
    const double z = total.value();
    if (z == kNegInf) {
      throw degenerate_input_error(
          "cylinder distribution: all weights vanish at level " +
          std::to_string(level));
    }
    for (double& x : logw) {
      if (x != kNegInf) x -= z;
    }
    return CylinderDistribution(ell, level, std::move(logw));
  }

  int ell() const { return ell_; }
  int level() const { return level_; }
  std::uint64_t size() const { return log_mass_.size(); }

  double log_mass_at(std::uint64_t rank) const { return log_mass_[rank]; }
  double mass_at(std::uint64_t rank) const {
    const double lm = log_mass_[rank];
    return lm == kNegInf ? 0.0 : std::exp(lm);
  }

  std::uint64_t rank_of(const Word& w) const {
    validate_word(w, ell_);
    if (static_cast<int>(w.size()) != level_) {
      throw input_error("cylinder distribution: word length != level");
    }
    std::uint64_t rank = 0;
    for (int s : w) {
      rank = rank * static_cast<std::uint64_t>(ell_) + static_cast<std::uint64_t>(s - 1);
    }
    return rank;
  }
  double mass(const Word& w) const { return mass_at(rank_of(w)); }

  Word word_at(std::uint64_t rank) const {
    Word w(static_cast<std::size_t>(level_));
    for (int i = level_ - 1; i >= 0; --i) {
      w[static_cast<std::size_t>(i)] =
          static_cast<int>(rank % static_cast<std::uint64_t>(ell_)) + 1;
      rank /= static_cast<std::uint64_t>(ell_);
    }
    return w;
  }

  double total_mass() const {
    LogSum total;
    for (double x : log_mass_) total.add(x);
    const double z = total.value();
    return z == kNegInf ? 0.0 : std::exp(z);
  }

 private:
  int ell_;
  int level_;
  std::vector<double> log_mass_;
};

// The norm-weighted distribution at level n: mass of [I] proportional to
// |M_I|^q.
inline CylinderDistribution norm_weighted_distribution(const MatrixFamily& fam,
                                                       double q, int n, Norm norm,
                                                       const WalkOptions& wopts = {}) {
  if (q <= 0.0) throw input_error("norm_weighted_distribution: q must be positive");
  auto logw = walk_leaf_scores(
      fam, n,
      [q, norm](const Matrix& m, double log_scale) {
        const double nm = matrix_norm(m, norm);
        if (!(nm > 0.0)) return kNegInf;
        return q * (std::log(nm) + log_scale);
      },
      wopts);
  return CylinderDistribution::from_log_weights(fam.size(), n, std::move(logw));
}

// Marginal onto the first m coordinates: mass of [I] is the sum of masses of
// [IK] over suffixes K.
inline CylinderDistribution marginalize(const CylinderDistribution& dist, int m) {
  if (m < 1 || m > dist.level()) {
    throw input_error("marginalize: target level out of range");
  }
  if (m == dist.level()) return dist;
  const std::uint64_t block =
      saturating_pow(static_cast<std::uint64_t>(dist.ell()), dist.level() - m);
  const std::uint64_t out_size = dist.size() / block;
  std::vector<double> out(out_size, kNegInf);
  for (std::uint64_t r = 0; r < out_size; ++r) {
    LogSum acc;
    for (std::uint64_t k = 0; k < block; ++k) acc.add(dist.log_mass_at(r * block + k));
    out[r] = acc.value();
  }
  return CylinderDistribution(dist.ell(), m, std::move(out));
}

// Level-m average of the level-n norm-weighted distribution over its first
// n-m+1 shifts: mass(I) = (1/(n-m+1)) sum_j nu(sigma^{-j}[I]).  Approximates
// the equilibrium state when one exists; no convergence rate is claimed.
inline CylinderDistribution cesaro_shift_average(const MatrixFamily& fam, double q,
                                                 int n, int m, Norm norm,
                                                 const WalkOptions& wopts = {}) {
  if (m < 1 || m > n) throw input_error("cesaro_shift_average: need 1 <= m <= n");
  const CylinderDistribution nu = norm_weighted_distribution(fam, q, n, norm, wopts);
  const int ell = fam.size();
  const std::uint64_t out_size = saturating_pow(static_cast<std::uint64_t>(ell), m);
  // Linear-domain accumulation is safe: nu sums to one.
  std::vector<double> acc(out_size, 0.0);
  for (int j = 0; j + m <= n; ++j) {
    const std::uint64_t suffix = saturating_pow(static_cast<std::uint64_t>(ell),
                                                n - m - j);
    for (std::uint64_t w = 0; w < nu.size(); ++w) {
      const double mass = nu.mass_at(w);
      if (mass == 0.0) continue;
      acc[(w / suffix) % out_size] += mass;
    }
  }
  const double shifts = static_cast<double>(n - m + 1);
  std::vector<double> logw(out_size, kNegInf);
  for (std::uint64_t r = 0; r < out_size; ++r) {
    if (acc[r] > 0.0) logw[r] = std::log(acc[r] / shifts);
  }
  return CylinderDistribution(ell, m, std::move(logw));
}

struct GibbsDiagnostics {
  int level = 0;
  double ratio_min = kPosInf;
  double ratio_max = 0.0;
  long zero_mismatch_count = 0;  // words where exactly one of mass, |M_J| vanishes
  double p_hat = 0.0;            // pressure plug-in used for the ratios
  double p_half_width = 0.0;     // half the bound width; ratio drift up to
                                 // exp(level * half_width) is attributable to it
};

// Two-sided comparability of cylinder masses with exp(-m P) |M_J|^q.  The
// true pressure is unknown, so the bound midpoint stands in (upper bound when
// the lower is -inf); the half width is reported alongside.  The spread
// ratio_max / ratio_min is independent of the plug-in.
inline GibbsDiagnostics gibbs_ratio_stats(const MatrixFamily& fam, double q,
                                          const CylinderDistribution& mu_hat,
                                          const PressureEstimate& pressure, Norm norm,
                                          const WalkOptions& wopts = {}) {
  GibbsDiagnostics diag;
  diag.level = mu_hat.level();
  diag.p_hat = pressure.midpoint();
  diag.p_half_width = pressure.lower == kNegInf ? kPosInf : 0.5 * pressure.width();
  const auto log_norms = walk_leaf_scores(
      fam, mu_hat.level(),
      [norm](const Matrix& m, double log_scale) {
        const double nm = matrix_norm(m, norm);
        if (!(nm > 0.0)) return kNegInf;
        return std::log(nm) + log_scale;
      },
      wopts);
  double log_min = kPosInf;
  double log_max = kNegInf;
  for (std::uint64_t r = 0; r < mu_hat.size(); ++r) {
    const double lm = mu_hat.log_mass_at(r);
    const double ln = log_norms[r];
    const bool mass_zero = lm == kNegInf;
    const bool norm_zero = ln == kNegInf;
    if (mass_zero != norm_zero) {
      ++diag.zero_mismatch_count;
      continue;
    }
    if (mass_zero) continue;
    const double log_ratio = lm + diag.level * diag.p_hat - q * ln;
    log_min = std::min(log_min, log_ratio);
    log_max = std::max(log_max, log_ratio);
  }
  if (log_max >= log_min) {
    diag.ratio_min = std::exp(log_min);
    diag.ratio_max = std::exp(log_max);
  }
  return diag;
}

struct EquilibriumDescription {
  std::vector<int> achiever_blocks;  // blocks whose pressure interval reaches the max
  // Level-m approximant of the equilibrium state of each achiever block; the
  // equilibrium set of the full family is the convex hull of these.
  std::map<int, CylinderDistribution> extremal_states;
  BlockPressure pressure;
};

struct EquilibriumOptions {
  int depth = 10;       // enumeration depth n for the shift average
  int level = 3;        // marginal level m of the reported states
  Norm norm = Norm::op;
  PressureOptions pressure;
  bool auto_connecting = true;  // per-block connecting bounds (exact for 1x1 blocks)
  SearchOptions search;
};

// Equilibrium structure at parameter q through the decomposition: the
// achieving blocks and the finite-level approximant of each block's unique
// equilibrium state.  Several achievers signal a non-singleton equilibrium
// set (the pressure graph has a kink at such q).
inline EquilibriumDescription equilibrium_description(const MatrixFamily& fam,
                                                      const BlockDecomposition& decomp,
                                                      double q,
                                                      const EquilibriumOptions& opts = {}) {
  if (decomp.trivial()) {
    throw degenerate_input_error(
        "equilibrium_description: trivial family has no equilibrium structure");
  }
  PressureOptions popts = opts.pressure;
  popts.norm = opts.norm;
  EquilibriumDescription out{{},
                             {},
                             pressure_via_blocks(fam, decomp, q, popts,
                                                 opts.auto_connecting, opts.search)};
  out.achiever_blocks = out.pressure.achievers;
  WalkOptions wopts{popts.budget, popts.threads};
  for (int j : out.achiever_blocks) {
    const MatrixFamily& blk = decomp.diagonal_blocks[static_cast<std::size_t>(j - 1)];
    out.extremal_states.emplace(
        j, cesaro_shift_average(blk, q, opts.depth, opts.level, opts.norm, wopts));
  }
  return out;
}

struct DerivativeCheck {
  double derivative_left = 0.0;
  double derivative_right = 0.0;
  double finite_difference = 0.0;  // central
  double lyapunov_of_state = 0.0;
  double gap = 0.0;  // |central difference - state exponent|
  int level = 0;
};

using PressureEvaluator = std::function<PressureEstimate(double q)>;

// Differentiability check: central and one-sided difference quotients of the
// pressure (midpoints of the supplied evaluator's bounds) against the
// Lyapunov exponent of the level-m shift-average state.  At a kink the
// one-sided slopes differ; the caller judges tolerances.
inline DerivativeCheck pressure_derivative_check(const MatrixFamily& fam, double q,
                                                 double h, int n, int m, Norm norm,
                                                 const PressureEvaluator& evaluate,
                                                 const WalkOptions& wopts = {}) {
  if (!(h > 0.0) || q - h <= 0.0) {
    throw input_error("pressure_derivative_check: need h > 0 and q - h > 0");
  }
  const double p_minus = evaluate(q - h).midpoint();
  const double p_mid = evaluate(q).midpoint();
  const double p_plus = evaluate(q + h).midpoint();

  DerivativeCheck out;
  out.level = m;
  out.derivative_left = (p_mid - p_minus) / h;
  out.derivative_right = (p_plus - p_mid) / h;
  out.finite_difference = (p_plus - p_minus) / (2.0 * h);

  const CylinderDistribution state = cesaro_shift_average(fam, q, n, m, norm, wopts);
  const auto log_norms = walk_leaf_scores(
      fam, m,
      [norm](const Matrix& mat, double log_scale) {
        const double nm = matrix_norm(mat, norm);
        if (!(nm > 0.0)) return kNegInf;
        return std::log(nm) + log_scale;
      },
      wopts);
  double acc = 0.0;
  bool dead = false;
  for (std::uint64_t r = 0; r < state.size(); ++r) {
    const double mass = state.mass_at(r);
    if (mass == 0.0) continue;
    if (log_norms[r] == kNegInf) {
      dead = true;
      break;
    }
    acc += mass * log_norms[r];
  }
  out.lyapunov_of_state = dead ? kNegInf : acc / m;
  out.gap = std::abs(out.finite_difference - out.lyapunov_of_state);
  return out;
}

// Convenience evaluator: direct bounds with a periodic lower route.
inline PressureEvaluator direct_pressure_evaluator(const MatrixFamily& fam,
                                                   PressureOptions opts) {
  return [&fam, opts](double q) { return pressure_bounds(fam, q, opts); };
}

// Convenience evaluator through the blocks with per-block connecting bounds;
// exact for families whose irreducible blocks are 1x1.
inline PressureEvaluator block_pressure_evaluator(const MatrixFamily& fam,
                                                  const BlockDecomposition& decomp,
                                                  PressureOptions opts,
                                                  SearchOptions sopts = {}) {
  return [&fam, &decomp, opts, sopts](double q) {
    return pressure_via_blocks(fam, decomp, q, opts, /*auto_connecting=*/true, sopts)
        .combined;
  };
}

}  // namespace matpress
