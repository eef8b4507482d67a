// Shift-invariant measures on the full one-sided shift, their entropy, and
// Lyapunov exponents of matrix families with respect to them.
//
// Supported measure kinds are Bernoulli, periodic orbit measures, and convex
// combinations.  The periodic kind for a word w is the uniform average over
// the shift orbit of w^infinity; for |w| = 1 this is the Dirac mass at the
// constant sequence, and for longer w the orbit average is what makes the
// measure shift-invariant.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "matpress/decompose.hpp"
#include "matpress/errors.hpp"
#include "matpress/family.hpp"
#include "matpress/pressure.hpp"

namespace matpress {

class ShiftMeasure {
 public:
  enum class Kind { bernoulli, periodic, convex };

  static ShiftMeasure bernoulli(std::vector<double> p) {
    if (p.empty()) throw input_error("bernoulli: needs at least one weight");
    double sum = 0.0;
    for (double x : p) {
      if (!(x >= 0.0)) throw input_error("bernoulli: weights must be non-negative");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw input_error("bernoulli: weights must sum to 1 (got " + std::to_string(sum) + ")");
    }
    ShiftMeasure m;
    m.kind_ = Kind::bernoulli;
    m.p_ = std::move(p);
    return m;
  }

  static ShiftMeasure dirac(Word w) {
    if (w.empty()) throw input_error("dirac: periodic word must be non-empty");
    for (int s : w) {
      if (s < 1) throw input_error("dirac: symbols are 1-based");
    }
    ShiftMeasure m;
    m.kind_ = Kind::periodic;
    m.word_ = std::move(w);
    return m;
  }

  static ShiftMeasure mix(std::vector<double> weights, std::vector<ShiftMeasure> parts) {
    if (weights.size() != parts.size() || parts.empty()) {
      throw input_error("mix: needs matching, non-empty weights and components");
    }
    double sum = 0.0;
    for (double w : weights) {
      if (!(w > 0.0)) throw input_error("mix: weights must be positive");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw input_error("mix: weights must sum to 1 (got " + std::to_string(sum) + ")");
    }
    ShiftMeasure m;
    m.kind_ = Kind::convex;
    m.weights_ = std::move(weights);
    for (auto& p : parts) m.parts_.push_back(std::make_shared<ShiftMeasure>(std::move(p)));
    return m;
  }

  Kind kind() const { return kind_; }
  const std::vector<double>& probabilities() const { return p_; }
  const Word& periodic_word() const { return word_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t components() const { return parts_.size(); }
  const ShiftMeasure& component(std::size_t i) const { return *parts_[i]; }

  // Largest symbol mentioned; Bernoulli fixes the alphabet size exactly.
  int min_alphabet() const {
    switch (kind_) {
      case Kind::bernoulli:
        return static_cast<int>(p_.size());
      case Kind::periodic:
        return *std::max_element(word_.begin(), word_.end());
      case Kind::convex: {
        int ell = 1;
        for (const auto& p : parts_) ell = std::max(ell, p->min_alphabet());
        return ell;
      }
    }
    return 1;
  }

  void validate_for(int ell) const {
    switch (kind_) {
      case Kind::bernoulli:
        if (static_cast<int>(p_.size()) != ell) {
          throw input_error("measure: bernoulli arity " + std::to_string(p_.size()) +
                            " does not match alphabet " + std::to_string(ell));
        }
        return;
      case Kind::periodic:
        if (min_alphabet() > ell) {
          throw input_error("measure: periodic word uses symbols beyond alphabet " +
                            std::to_string(ell));
        }
        return;
      case Kind::convex:
        for (const auto& p : parts_) p->validate_for(ell);
        return;
    }
  }

  double cylinder_mass(const Word& w) const {
    if (w.empty()) return 1.0;
    switch (kind_) {
      case Kind::bernoulli: {
        double mass = 1.0;
        for (int s : w) {
          if (s < 1 || s > static_cast<int>(p_.size())) return 0.0;
          mass *= p_[static_cast<std::size_t>(s - 1)];
        }
        return mass;
      }
      case Kind::periodic: {
        const std::size_t period = word_.size();
        int hits = 0;
        for (std::size_t shift = 0; shift < period; ++shift) {
          bool match = true;
          for (std::size_t i = 0; i < w.size(); ++i) {
            if (w[i] != word_[(shift + i) % period]) {
              match = false;
              break;
            }
          }
          if (match) ++hits;
        }
        return static_cast<double>(hits) / static_cast<double>(period);
      }
      case Kind::convex: {
        double mass = 0.0;
        for (std::size_t i = 0; i < parts_.size(); ++i) {
          mass += weights_[i] * parts_[i]->cylinder_mass(w);
        }
        return mass;
      }
    }
    return 0.0;
  }

  // Measure-theoretic entropy; affine over convex combinations.
  double entropy() const {
    switch (kind_) {
      case Kind::bernoulli: {
        double h = 0.0;
        for (double p : p_) {
          if (p > 0.0) h -= p * std::log(p);
        }
        return h;
      }
      case Kind::periodic:
        return 0.0;
      case Kind::convex: {
        double h = 0.0;
        for (std::size_t i = 0; i < parts_.size(); ++i) {
          h += weights_[i] * parts_[i]->entropy();
        }
        return h;
      }
    }
    return 0.0;
  }

  bool ergodic_kind() const { return kind_ != Kind::convex; }

 private:
  ShiftMeasure() = default;
  Kind kind_ = Kind::bernoulli;
  std::vector<double> p_;
  Word word_;
  std::vector<double> weights_;
  std::vector<std::shared_ptr<const ShiftMeasure>> parts_;
};

// Mini-language: "bernoulli:0.5,0.5", "dirac:121" (periodic word, digits;
// comma-separated for alphabets past 9), "mix:0.3*dirac:1+0.7*bernoulli:0.5,0.5".
inline ShiftMeasure parse_measure_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) {
    throw input_error("measure spec '" + spec + "': expected kind:args");
  }
  const std::string kind = spec.substr(0, colon);
  const std::string args = spec.substr(colon + 1);
  auto parse_double = [&](const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw input_error("measure spec: bad number '" + s + "'");
    }
  };
  auto split = [](const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
      const auto pos = s.find(sep, start);
      out.push_back(s.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    return out;
  };
  if (kind == "bernoulli") {
    std::vector<double> p;
    for (const auto& tok : split(args, ',')) p.push_back(parse_double(tok));
    return ShiftMeasure::bernoulli(std::move(p));
  }
  if (kind == "dirac") {
    Word w;
    if (args.find(',') != std::string::npos) {
      for (const auto& tok : split(args, ',')) {
        w.push_back(static_cast<int>(parse_double(tok)));
      }
    } else {
      for (char c : args) {
        if (c < '1' || c > '9') {
          throw input_error("measure spec: dirac word must be digits 1-9, got '" +
                            args + "'");
        }
        w.push_back(c - '0');
      }
    }
    return ShiftMeasure::dirac(std::move(w));
  }
  if (kind == "mix") {
    std::vector<double> weights;
    std::vector<ShiftMeasure> parts;
    for (const auto& term : split(args, '+')) {
      const auto star = term.find('*');
      if (star == std::string::npos) {
        throw input_error("measure spec: mix term '" + term + "' needs weight*component");
      }
      weights.push_back(parse_double(term.substr(0, star)));
      const std::string sub = term.substr(star + 1);
      if (sub.rfind("mix:", 0) == 0) {
        throw input_error("measure spec: nested mix is not supported");
      }
      parts.push_back(parse_measure_spec(sub));
    }
    return ShiftMeasure::mix(std::move(weights), std::move(parts));
  }
  throw input_error("measure spec: unknown kind '" + kind + "'");
}

struct LyapunovReport {
  double value = kNegInf;
  enum class Method { exact_enumeration, closed_form, monte_carlo } method =
      Method::exact_enumeration;
  int depth = 0;
  long samples = 0;
  std::uint64_t seed = 0;
  double std_error = 0.0;
  long zero_products = 0;
  // Filled by block_lyapunov only.
  std::map<int, double> per_block;
  double w_max = kNegInf;
  double defect = 0.0;
  bool nonergodic = false;
};

namespace detail {

// (1/n) sum over positive-mass words of mass * log|M_J|; -inf as soon as a
// positive-mass word has a vanishing product (log 0 = -inf convention;
// zero-mass cylinders are skipped, 0 log 0 = 0).
inline double truncated_exponent(const MatrixFamily& fam, const ShiftMeasure& mu,
                                 int n, Norm norm, long* zero_count,
                                 std::uint64_t budget) {
  check_budget(fam, n, WalkOptions{budget, 1});
  double acc = 0.0;
  bool dead = false;
  Word prefix;
  std::function<void(const Matrix*, double, int)> walk = [&](const Matrix* prod,
                                                             double scale, int len) {
    if (len > 0 && mu.cylinder_mass(prefix) == 0.0) return;  // nested masses vanish too
    if (len == n) {
      const double mass = mu.cylinder_mass(prefix);
      if (mass == 0.0) return;
      const double nm = matrix_norm(*prod, norm);
      if (!(nm > 0.0)) {
        ++*zero_count;
        dead = true;
        return;
      }
      acc += mass * (std::log(nm) + scale);
      return;
    }
    for (int s = 1; s <= fam.size(); ++s) {
      Matrix next = len == 0 ? fam.member(s) : Matrix(*prod * fam.member(s));
      double next_scale = scale;
      rescale(next, next_scale);
      prefix.push_back(s);
      walk(&next, next_scale, len + 1);
      prefix.pop_back();
    }
  };
  walk(nullptr, 0.0, 0);
  if (dead) return kNegInf;
  return acc / n;
}

inline double periodic_closed_form(const MatrixFamily& fam, const Word& w, Norm norm) {
  (void)norm;  // the Gelfand limit is norm-independent
  validate_word(w, fam.size());
  Matrix prod = word_product(fam, w);
  const double rho = spectral_radius(prod);
  if (!(rho > 0.0)) return kNegInf;
  return std::log(rho) / static_cast<double>(w.size());
}

}  // namespace detail

// Lyapunov exponent of the family with respect to mu.  Periodic measures use
// the closed form (1/|w|) log rho(M_w); convex combinations evaluate
// affinely over their components; Bernoulli measures use exact truncated
// enumeration at depth n.
inline LyapunovReport lyapunov(const MatrixFamily& fam, const ShiftMeasure& mu, int n,
                               Norm norm = Norm::op,
                               std::uint64_t budget = std::uint64_t{1} << 24) {
  mu.validate_for(fam.size());
  LyapunovReport report;
  report.depth = n;
  switch (mu.kind()) {
    case ShiftMeasure::Kind::periodic:
      report.method = LyapunovReport::Method::closed_form;
      report.value = detail::periodic_closed_form(fam, mu.periodic_word(), norm);
      return report;
    case ShiftMeasure::Kind::convex: {
      double value = 0.0;
      bool closed = true;
      bool minus_inf = false;
      for (std::size_t i = 0; i < mu.components(); ++i) {
        LyapunovReport part = lyapunov(fam, mu.component(i), n, norm, budget);
        if (part.method != LyapunovReport::Method::closed_form) closed = false;
        report.zero_products += part.zero_products;
        if (part.value == kNegInf) {
          minus_inf = true;
        } else {
          value += mu.weights()[i] * part.value;
        }
      }
      report.method = closed ? LyapunovReport::Method::closed_form
                             : LyapunovReport::Method::exact_enumeration;
      report.value = minus_inf ? kNegInf : value;
      return report;
    }
    case ShiftMeasure::Kind::bernoulli:
      break;
  }
  report.method = LyapunovReport::Method::exact_enumeration;
  report.value =
      detail::truncated_exponent(fam, mu, n, norm, &report.zero_products, budget);
  return report;
}

// Monte Carlo estimate along i.i.d. Bernoulli samples; deterministic for a
// given seed (hand-rolled inverse-CDF sampling, no library distributions).
inline LyapunovReport lyapunov_mc(const MatrixFamily& fam, const ShiftMeasure& mu,
                                  int n, long samples, std::uint64_t seed,
                                  Norm norm = Norm::op) {
  if (mu.kind() != ShiftMeasure::Kind::bernoulli) {
    throw input_error("lyapunov_mc: sampling path is defined for bernoulli measures");
  }
  mu.validate_for(fam.size());
  if (samples < 1) throw input_error("lyapunov_mc: samples must be >= 1");
  if (n < 1) throw input_error("lyapunov_mc: depth must be >= 1");

  std::vector<double> cdf(mu.probabilities().size());
  double acc = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    acc += mu.probabilities()[i];
    cdf[i] = acc;
  }
  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  auto draw = [&]() {
    const double u = uniform();
    for (std::size_t i = 0; i < cdf.size(); ++i) {
      if (u < cdf[i]) return static_cast<int>(i) + 1;
    }
    return static_cast<int>(cdf.size());
  };

  LyapunovReport report;
  report.method = LyapunovReport::Method::monte_carlo;
  report.depth = n;
  report.samples = samples;
  report.seed = seed;
  double mean = 0.0;
  double m2 = 0.0;
  long finite = 0;
  for (long s = 0; s < samples; ++s) {
    Matrix prod = fam.member(draw());
    double scale = 0.0;
    for (int i = 1; i < n; ++i) {
      prod = prod * fam.member(draw());
      detail::rescale(prod, scale);
      if (prod.isZero(0.0)) break;
    }
    const double nm = matrix_norm(prod, norm);
    if (!(nm > 0.0)) {
      ++report.zero_products;
      continue;
    }
    const double x = (std::log(nm) + scale) / n;
    ++finite;
    const double delta = x - mean;
    mean += delta / static_cast<double>(finite);
    m2 += delta * (x - mean);
  }
  if (report.zero_products > 0) {
    report.value = kNegInf;
    report.std_error = 0.0;
  } else {
    report.value = mean;
    report.std_error =
        finite > 1 ? std::sqrt(m2 / (static_cast<double>(finite) - 1.0) /
                               static_cast<double>(finite))
                   : 0.0;
  }
  return report;
}

// Exponents through the decomposition: A^(j) for each irreducible diagonal
// block, their maximum W, and the defect |M - W| at the working depth.  For
// ergodic kinds the defect shrinks with depth; convex combinations of
// distinct ergodic measures are non-ergodic and the defect is reported with
// no expectation of vanishing.
inline LyapunovReport block_lyapunov(const MatrixFamily& fam,
                                     const BlockDecomposition& decomp,
                                     const ShiftMeasure& mu, int n,
                                     Norm norm = Norm::op,
                                     std::uint64_t budget = std::uint64_t{1} << 24) {
  LyapunovReport full = lyapunov(fam, mu, n, norm, budget);
  full.nonergodic = !mu.ergodic_kind();
  full.w_max = kNegInf;
  for (int j : decomp.lambda) {
    const MatrixFamily& blk = decomp.diagonal_blocks[static_cast<std::size_t>(j - 1)];
    const LyapunovReport part = lyapunov(blk, mu, n, norm, budget);
    full.per_block[j] = part.value;
    full.w_max = std::max(full.w_max, part.value);
  }
  if (full.value == kNegInf && full.w_max == kNegInf) {
    full.defect = 0.0;
  } else if (full.value == kNegInf || full.w_max == kNegInf) {
    full.defect = kPosInf;
  } else {
    full.defect = std::abs(full.value - full.w_max);
  }
  return full;
}

// Slack in the variational inequality q M(mu) + h(mu) <= P(q): zero exactly
// at equilibrium, at least -(bound width) for every measure.
inline double variational_defect(const MatrixFamily& fam, const ShiftMeasure& mu,
                                 double q, const PressureEstimate& pressure,
                                 std::uint64_t budget = std::uint64_t{1} << 24) {
  const LyapunovReport rep = lyapunov(fam, mu, std::max(1, pressure.depth),
                                      pressure.norm, budget);
  if (rep.value == kNegInf) return kPosInf;
  return pressure.upper - (q * rep.value + mu.entropy());
}

}  // namespace matpress
