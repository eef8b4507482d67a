// Singular value function phi^q, its pressure, the exterior-power identity
// at integer q, and the affinity dimension of strictly contractive
// invertible real families.
//
// phi^q(M) = a_1 ... a_k a_{k+1}^{q-k} for 0 <= q < d (k = floor(q), a_i the
// singular values in decreasing order) and |det M|^{q/d} for q >= d; both
// formulas agree at q = d.  phi^q is sub-multiplicative, so the partition
// sums b_m = log sum phi^q(M_J) obey Fekete and every b_m/m is a rigorous
// upper bound for the pressure P_phi(q).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "matpress/enumerate.hpp"
#include "matpress/errors.hpp"
#include "matpress/family.hpp"
#include "matpress/measures.hpp"
#include "matpress/pressure.hpp"

namespace matpress {

struct SvfValue {
  double q = 0.0;
  double log_value = 0.0;
};

namespace detail {

// log phi^q from the singular values of the rescaled product; the true
// matrix is scaled * exp(log_scale), so each log alpha_i picks up log_scale.
// Zero singular values in the touched range raise an input error: the
// setting assumes invertibility and a silent -inf would hide modeling
// mistakes.
inline double log_phi(const Eigen::VectorXd& sv, double log_scale, double q, int d) {
  if (q < 0.0) throw input_error("phi: q must be non-negative");
  if (q == 0.0) return 0.0;
  auto log_alpha = [&](int i) {  // 1-based
    const double s = sv(i - 1);
    if (!(s > 0.0) || s <= zero_threshold(sv(0))) {
      throw input_error("phi: singular value " + std::to_string(i) +
                        " vanishes; the singular value function requires "
                        "invertible input on this range");
    }
    return std::log(s) + log_scale;
  };
  if (q >= static_cast<double>(d)) {
    double log_det_abs = 0.0;
    for (int i = 1; i <= d; ++i) log_det_abs += log_alpha(i);
    return q / d * log_det_abs;
  }
  const int k = static_cast<int>(std::floor(q));
  double value = 0.0;
  for (int i = 1; i <= k; ++i) value += log_alpha(i);
  const double frac = q - k;
  if (frac > 0.0) value += frac * log_alpha(k + 1);
  return value;
}

}  // namespace detail

inline SvfValue phi(const Matrix& m, double q) {
  if (m.rows() != m.cols()) throw input_error("phi: matrix must be square");
  return SvfValue{q, detail::log_phi(singular_values(m), 0.0, q,
                                     static_cast<int>(m.rows()))};
}

struct ExteriorIdentity {
  double lhs = 0.0;  // log of the top singular value of the k-th compound
  double rhs = 0.0;  // log phi^k
  double gap = 0.0;
};

// At integer q the top singular value of the q-th compound matrix equals the
// product of the q largest singular values, i.e. phi^q.
inline ExteriorIdentity exterior_identity_check(const Matrix& m, int q) {
  if (m.rows() != m.cols()) throw input_error("exterior_identity_check: square input");
  if (q < 1 || q > m.rows()) {
    throw input_error("exterior_identity_check: q must lie in 1..d");
  }
  ExteriorIdentity out;
  out.lhs = std::log(op_norm(exterior_power(m, q)));
  out.rhs = phi(m, static_cast<double>(q)).log_value;
  out.gap = std::abs(out.lhs - out.rhs);
  return out;
}

struct SvfOptions {
  int depth = 8;
  std::uint64_t budget = std::uint64_t{1} << 24;
  int threads = 0;
  bool periodic_route = true;  // integer q only (through the compound family)
  int periodic_depth = -1;     // -1: min(depth, 5)
};

namespace detail {

inline void require_invertible_real(const MatrixFamily& fam, const char* who) {
  if (fam.field() != Field::real) {
    throw input_error(std::string(who) + ": defined for real families");
  }
  for (const Matrix& m : fam.matrices()) {
    const Eigen::VectorXd sv = singular_values(m);
    if (sv(sv.size() - 1) <= zero_threshold(sv(0))) {
      throw input_error(std::string(who) + ": every matrix must be invertible");
    }
  }
}

}  // namespace detail

// Bounds for P_phi(q) = lim (1/n) log sum_{|J|=n} phi^q(M_J).  The upper
// bound is Fekete over the sampled depths.  The lower bound exists only at
// integer q, where phi^q(M_J^k) = a_1((M_J^wedge q)^k) turns the best word's
// compound spectral radius into (1/m) log rho(M_J^wedge q) <= P_phi(q).
inline PressureEstimate svf_pressure_bounds(const MatrixFamily& fam, double q,
                                            const SvfOptions& opts = {}) {
  detail::require_invertible_real(fam, "svf_pressure_bounds");
  if (q < 0.0) throw input_error("svf_pressure_bounds: q must be non-negative");
  if (opts.depth < 1) throw input_error("svf_pressure_bounds: depth must be >= 1");
  WalkOptions wopts{opts.budget, opts.threads};
  const int d = fam.dim();

  PressureEstimate est;
  est.q = q;
  est.norm = Norm::op;
  est.depth = opts.depth;
  const auto b = walk_depth_logsums(
      fam, opts.depth,
      [q, d](const Matrix& m, double log_scale) {
        return detail::log_phi(singular_values(m), log_scale, q, d);
      },
      wopts);
  double running_min = kPosInf;
  for (int m = 1; m <= opts.depth; ++m) {
    const double value = b[static_cast<std::size_t>(m - 1)] / m;
    running_min = std::min(running_min, value);
    est.per_depth.emplace_back(m, value);
  }
  est.upper = running_min;
  est.method_tags.push_back("svf_fekete_upper");

  const bool integer_q = q > 0.0 && std::abs(q - std::round(q)) < 1e-12 &&
                         static_cast<int>(std::round(q)) <= d;
  double lower = kNegInf;
  if (opts.periodic_route && integer_q) {
    const int k = static_cast<int>(std::round(q));
    const int pd = opts.periodic_depth > 0 ? std::min(opts.periodic_depth, opts.depth)
                                           : std::min(opts.depth, 5);
    detail::check_budget(fam, pd, wopts);
    Word best_word;
    std::function<void(const Matrix*, double, Word&, int)> walk =
        [&](const Matrix* prod, double scale, Word& cur, int len) {
          if (len > 0) {
            const double rho = spectral_radius(exterior_power(*prod, k));
            if (rho > 0.0) {
              const double rate = (std::log(rho) + k * scale) / len;
              if (rate > lower) {
                lower = rate;
                best_word = cur;
              }
            }
          }
          if (len == pd) return;
          for (int s = 1; s <= fam.size(); ++s) {
            Matrix next = len == 0 ? fam.member(s) : Matrix(*prod * fam.member(s));
            double next_scale = scale;
            detail::rescale(next, next_scale);
            cur.push_back(s);
            walk(&next, next_scale, cur, len + 1);
            cur.pop_back();
          }
        };
    Word cur;
    walk(nullptr, 0.0, cur, 0);
    if (lower != kNegInf) {
      est.method_tags.push_back("svf_periodic_lower(word=" +
                                word_to_string(best_word, fam.size()) + ")");
    }
  } else if (opts.periodic_route) {
    est.method_tags.push_back("svf_lower_unavailable(non-integer q)");
  }
  est.lower = std::min(lower, est.upper);
  return est;
}

// Truncated energy (1/n) sum over positive-mass words of mu(J) log phi^q(M_J).
inline double svf_energy(const MatrixFamily& fam, const ShiftMeasure& mu, double q,
                         int n, const SvfOptions& opts = {}) {
  detail::require_invertible_real(fam, "svf_energy");
  mu.validate_for(fam.size());
  detail::check_budget(fam, n, WalkOptions{opts.budget, 1});
  const int d = fam.dim();
  double acc = 0.0;
  Word prefix;
  std::function<void(const Matrix*, double, int)> walk = [&](const Matrix* prod,
                                                             double scale, int len) {
    if (len > 0 && mu.cylinder_mass(prefix) == 0.0) return;
    if (len == n) {
      const double mass = mu.cylinder_mass(prefix);
      if (mass == 0.0) return;
      acc += mass * detail::log_phi(singular_values(*prod), scale, q, d);
      return;
    }
    for (int s = 1; s <= fam.size(); ++s) {
      Matrix next = len == 0 ? fam.member(s) : Matrix(*prod * fam.member(s));
      double next_scale = scale;
      detail::rescale(next, next_scale);
      prefix.push_back(s);
      walk(&next, next_scale, len + 1);
      prefix.pop_back();
    }
  };
  walk(nullptr, 0.0, 0);
  return acc / n;
}

struct AffinityOptions {
  double tol = 1e-6;
  int max_iterations = 200;
  SvfOptions pressure;  // per-evaluation settings
};

struct AffinityResult {
  double s_low = 0.0;
  double s_high = 0.0;
  int iterations = 0;
  PressureEstimate at_low;
  PressureEstimate at_high;
  bool certified_upper = true;   // upper(s_high) < 0 is rigorous: dim <= s_high
  bool certified_lower = false;  // true when a valid lower bound >= 0 was seen
                                 // at some s >= s_low - tol
  std::vector<std::tuple<double, double, double>> trace;  // (s, lower, upper)
};

// Bisection for the zero of s -> P_phi(s) over [0, 2d] for a strictly
// contractive invertible family.  The upper bound is strictly decreasing in
// s, so upper(s) < 0 certifies dim <= s; the lower endpoint is heuristic
// unless an integer-q periodic bound fires.
inline AffinityResult affinity_dimension(const MatrixFamily& fam,
                                         const AffinityOptions& opts = {}) {
  detail::require_invertible_real(fam, "affinity_dimension");
  for (const Matrix& m : fam.matrices()) {
    if (!(op_norm(m) < 1.0)) {
      throw input_error("affinity_dimension: every matrix must be a strict contraction");
    }
  }
  AffinityResult out;
  auto eval = [&](double s) { return svf_pressure_bounds(fam, s, opts.pressure); };

  double lo = 0.0;
  double hi = 2.0 * fam.dim();
  PressureEstimate at_lo = eval(lo);
  PressureEstimate at_hi = eval(hi);
  out.trace.emplace_back(lo, at_lo.lower, at_lo.upper);
  out.trace.emplace_back(hi, at_hi.lower, at_hi.upper);
  if (at_lo.upper < 0.0) {
    // The empty-ish case: pressure already negative at s = 0 (single map).
    out.s_low = 0.0;
    out.s_high = 0.0;
    out.at_low = at_lo;
    out.at_high = at_lo;
    out.certified_lower = true;
    return out;
  }
  if (at_hi.upper >= 0.0) {
    throw search_error(
        "affinity_dimension: upper bound does not become negative on [0, 2d]");
  }
  double best_certified = kNegInf;
  if (at_lo.lower >= 0.0) best_certified = lo;
  while (hi - lo > opts.tol && out.iterations < opts.max_iterations) {
    const double mid = 0.5 * (lo + hi);
    const PressureEstimate at_mid = eval(mid);
    out.trace.emplace_back(mid, at_mid.lower, at_mid.upper);
    ++out.iterations;
    if (at_mid.lower >= 0.0) best_certified = std::max(best_certified, mid);
    if (at_mid.upper < 0.0) {
      hi = mid;
      at_hi = at_mid;
    } else {
      lo = mid;
      at_lo = at_mid;
    }
  }
  out.s_low = lo;
  out.s_high = hi;
  out.at_low = at_lo;
  out.at_high = at_hi;
  out.certified_lower = best_certified >= lo - opts.tol;
  return out;
}

// Largest observed violation of log phi^q(AB) <= log phi^q(A) + log phi^q(B)
// over random semigroup pairs and random q in [0, d]; non-positive up to
// roundoff for genuinely sub-multiplicative input.
inline double svf_submultiplicativity_check(const MatrixFamily& fam, int trials,
                                            std::uint64_t seed) {
  detail::require_invertible_real(fam, "svf_submultiplicativity_check");
  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  auto random_word_product = [&]() {
    const int len = 1 + static_cast<int>(uniform() * 6.0);
    Matrix prod = fam.member(1 + static_cast<int>(uniform() * fam.size()));
    for (int i = 1; i < len; ++i) {
      prod = prod * fam.member(1 + static_cast<int>(uniform() * fam.size()));
    }
    return prod;
  };
  double worst = kNegInf;
  for (int t = 0; t < trials; ++t) {
    const Matrix a = random_word_product();
    const Matrix b = random_word_product();
    const double q = uniform() * fam.dim();
    const double v = phi(a * b, q).log_value - phi(a, q).log_value -
                     phi(b, q).log_value;
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace matpress
