// Irreducibility certificates, invariant subspace search, and simultaneous
// block upper-triangularization with irreducible-or-zero diagonal blocks.
//
// Over C the generated-algebra dimension decides irreducibility outright
// (Burnside: a subalgebra of M_d(C) acting irreducibly is all of M_d(C)).
// Over R there is no algebra-dimension criterion; reducibility is decided by
// a seeded randomized search whose seeds come from eigenspaces of random
// algebra elements, kernels and images of the generators, and conversions of
// complex invariant subspaces through V /\ conj(V) and V + conj(V).  A real
// "irreducible" verdict is therefore high-confidence evidence, not proof;
// the certificate records the search effort.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "matpress/errors.hpp"
#include "matpress/family.hpp"

namespace matpress {

struct SearchOptions {
  std::uint64_t seed = 0;
  int random_elements = 16;   // random algebra combinations per escalation round
  int escalation_rounds = 4;  // rounds of doubling when a witness is required
};

enum class Verdict { irreducible, reducible };

struct IrreducibilityCertificate {
  Verdict verdict = Verdict::irreducible;
  // Orthonormal basis of a proper nonzero invariant subspace (reducible
  // case).  Empty for the 1x1 zero family, which admits no proper subspace
  // but is excluded from the irreducible class so that lambda membership
  // matches the all-products-vanish characterisation.
  std::vector<Vector> witness;
  int algebra_dim = -1;  // dimension of the generated algebra over C
  int seeds_tried = 0;
  // Real families only: no real invariant subspace was found but a complex
  // one exists (conjugation-unstable), e.g. a rotation acting on R^2.
  bool complex_reducible = false;
  std::string note;
};

struct BlockDecomposition {
  Matrix conjugator;             // unitary by construction
  std::vector<int> block_sizes;  // d_1, ..., d_t in construction order
  std::vector<MatrixFamily> diagonal_blocks;
  std::vector<int> lambda;  // 1-based indices of irreducible blocks
  double condition_number = 1.0;
  double residual = 0.0;  // max off-pattern entry relative to 1 + |M_i|

  int total_blocks() const { return static_cast<int>(block_sizes.size()); }
  bool trivial() const { return lambda.empty(); }
};

struct TrivialityReport {
  bool trivial = false;
  int t = 0;  // number of diagonal blocks
  // Evidence: largest norm among products of length t+1 (vanishes when
  // trivial) and whether some product of each length <= t+1 is nonzero
  // (holds when non-trivial).  Skipped when ell^(t+1) exceeds the guard.
  bool evidence_checked = false;
  double max_product_norm = 0.0;
  bool nonzero_at_each_length = false;
};

struct ConnectingEstimate {
  int k = 0;           // smallest connector length bound that worked
  double d_const = 0;  // worst-pair best ratio |M_IKJ| / (|M_I| |M_J|)
  int depth = 0;       // word lengths sampled; the estimate is empirical
};

namespace detail {

inline Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

// Orthonormal column set with twice-through Gram-Schmidt insertion; the
// residual threshold follows the global rank rule.
class OrthoSet {
 public:
  explicit OrthoSet(Eigen::Index dim) : q_(dim, 0) {}

  bool insert(Vector v) {
    const double original = v.norm();
    if (!(original > 0.0)) return false;
    for (int pass = 0; pass < 2; ++pass) {
      if (q_.cols() > 0) v -= q_ * (q_.adjoint() * v).eval();
    }
    const double res = v.norm();
    if (res <= kRankTol * std::max(1.0, original)) return false;
    q_.conservativeResize(Eigen::NoChange, q_.cols() + 1);
    q_.col(q_.cols() - 1) = v / res;
    return true;
  }

  Eigen::Index size() const { return q_.cols(); }
  const Eigen::MatrixXcd& basis() const { return q_; }

 private:
  Eigen::MatrixXcd q_;
};

// Orthonormalized basis of the unital algebra generated by the family,
// capped at d^2 elements.  Closing the span under one-step left
// multiplication starting from the identity reaches every word.
inline std::vector<Matrix> algebra_basis(const MatrixFamily& fam) {
  const int d = fam.dim();
  OrthoSet span(static_cast<Eigen::Index>(d) * d);
  std::vector<Matrix> basis;
  auto push = [&](const Matrix& m) {
    if (span.insert(vec(m))) {
      basis.push_back(Eigen::Map<const Matrix>(
          span.basis().col(span.size() - 1).data(), d, d));
    }
  };
  push(Matrix::Identity(d, d));
  const std::size_t cap = static_cast<std::size_t>(d) * static_cast<std::size_t>(d);
  for (std::size_t head = 0; head < basis.size() && basis.size() < cap; ++head) {
    const Matrix current = basis[head];
    for (const Matrix& g : fam.matrices()) {
      if (basis.size() >= cap) break;
      push(g * current);
    }
  }
  return basis;
}

// Smallest family-invariant subspace containing the seed columns, as an
// orthonormal basis.  Grows the span by one-step images until stable.
inline Eigen::MatrixXcd orbit_closure(const MatrixFamily& fam,
                                      const Eigen::MatrixXcd& seeds) {
  const int d = fam.dim();
  OrthoSet span(d);
  for (Eigen::Index c = 0; c < seeds.cols(); ++c) span.insert(seeds.col(c));
  std::size_t head = 0;
  while (head < static_cast<std::size_t>(span.size()) &&
         span.size() < static_cast<Eigen::Index>(d)) {
    const Vector v = span.basis().col(static_cast<Eigen::Index>(head));
    ++head;
    for (const Matrix& m : fam.matrices()) {
      span.insert(m * v);
      if (span.size() == static_cast<Eigen::Index>(d)) break;
    }
  }
  return span.basis();
}

inline double subspace_invariance_residual(const MatrixFamily& fam,
                                           const Eigen::MatrixXcd& basis) {
  double worst = 0.0;
  for (const Matrix& m : fam.matrices()) {
    const double scale = op_norm(m);
    if (scale <= 0.0) continue;
    for (Eigen::Index c = 0; c < basis.cols(); ++c) {
      Vector image = m * basis.col(c);
      image -= basis * (basis.adjoint() * image).eval();
      worst = std::max(worst, image.norm() / scale);
    }
  }
  return worst;
}

inline bool verify_invariant_subspace(const MatrixFamily& fam,
                                      const Eigen::MatrixXcd& basis) {
  if (basis.cols() == 0 || basis.cols() >= fam.dim()) return false;
  return subspace_invariance_residual(fam, basis) <= 1e-8;
}

// Candidate seed subspaces (one or two columns) for the orbit-closure
// search.  Family-invariant subspaces are invariant under every algebra
// element and decompose along any element's eigenspaces, so eigenvectors of
// random algebra elements expose minimal candidates; generic random vectors
// do not (their orbits are typically full even for reducible families).
inline std::vector<Eigen::MatrixXcd> collect_seeds(const MatrixFamily& fam,
                                                   const std::vector<Matrix>& basis,
                                                   int random_elements,
                                                   std::mt19937_64& rng) {
  const int d = fam.dim();
  std::vector<Eigen::MatrixXcd> seeds;
  auto add_vector = [&](const Vector& v) {
    if (v.norm() > 0.0) seeds.push_back(v);
  };

  // Kernel and image basis vectors of each generator.
  for (const Matrix& m : fam.matrices()) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) <= zero_threshold(smax)) {
        add_vector(svd.matrixV().col(i));  // kernel direction
      } else {
        add_vector(svd.matrixU().col(i));  // image direction
      }
    }
  }

  const bool real = fam.field() == Field::real;
  std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
  auto random_element = [&]() {
    Matrix a = Matrix::Zero(d, d);
    for (const Matrix& b : basis) {
      if (real) {
        a += (rng() & 1 ? 1.0 : -1.0) * b;
      } else {
        const double th = angle(rng);
        a += Complex(std::cos(th), std::sin(th)) * b;
      }
    }
    return a;
  };

  for (int r = 0; r < random_elements; ++r) {
    // The first few trials use single algebra elements, then random
    // unit-coefficient combinations.
    const Matrix a = (r > 0 && r < static_cast<int>(basis.size()))
                         ? basis[static_cast<std::size_t>(r)]
                         : random_element();
    if (real) {
      Eigen::EigenSolver<Eigen::MatrixXd> es(a.real());
      if (es.info() != Eigen::Success) continue;
      const auto& vals = es.eigenvalues();
      const auto& vecs = es.eigenvectors();
      const double scale = std::max(1.0, vals.cwiseAbs().maxCoeff());
      for (Eigen::Index i = 0; i < vals.size(); ++i) {
        if (std::abs(vals(i).imag()) <= 1e-12 * scale) {
          Eigen::VectorXd rv = vecs.col(i).real();
          if (rv.norm() <= 1e-8) rv = vecs.col(i).imag();
          add_vector(rv.cast<Complex>());
        } else if (vals(i).imag() > 0.0) {
          // Conjugate pair: the invariant 2-plane spanned by Re v, Im v.
          Eigen::MatrixXcd plane(d, 2);
          plane.col(0) = vecs.col(i).real().cast<Complex>();
          plane.col(1) = vecs.col(i).imag().cast<Complex>();
          seeds.push_back(plane);
        }
      }
    } else {
      Eigen::ComplexEigenSolver<Matrix> es(a);
      if (es.info() != Eigen::Success) continue;
      for (Eigen::Index i = 0; i < es.eigenvectors().cols(); ++i) {
        add_vector(es.eigenvectors().col(i));
      }
    }
  }
  return seeds;
}

// Orthonormal basis of the intersection of two subspaces given by
// orthonormal bases, via the null space of [A, -B].
inline Eigen::MatrixXcd subspace_intersection(const Eigen::MatrixXcd& a,
                                              const Eigen::MatrixXcd& b) {
  const Eigen::Index d = a.rows();
  Eigen::MatrixXcd stacked(d, a.cols() + b.cols());
  stacked << a, -b;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(stacked, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  OrthoSet out(d);
  for (Eigen::Index i = 0; i < svd.matrixV().cols(); ++i) {
    if (i < sv.size() && sv(i) > zero_threshold(smax)) continue;
    const Vector coeff = svd.matrixV().col(i).head(a.cols());
    out.insert(a * coeff);
  }
  return out.basis();
}

// Real orthonormal basis of a conjugation-stable complex subspace.
inline Eigen::MatrixXcd real_form(const Eigen::MatrixXcd& q) {
  OrthoSet out(q.rows());
  for (Eigen::Index c = 0; c < q.cols(); ++c) {
    out.insert(q.col(c).real().cast<Complex>());
    out.insert(q.col(c).imag().cast<Complex>());
  }
  return out.basis();
}

inline std::vector<Vector> basis_columns(const Eigen::MatrixXcd& q) {
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(q.cols()));
  for (Eigen::Index c = 0; c < q.cols(); ++c) out.push_back(q.col(c));
  return out;
}

struct SubspaceSearch {
  std::optional<Eigen::MatrixXcd> found;
  int seeds_tried = 0;
  bool complex_witness_seen = false;
};

inline SubspaceSearch search_invariant_subspace(const MatrixFamily& fam,
                                                const SearchOptions& opts) {
  SubspaceSearch result;
  const int d = fam.dim();
  if (d == 1) return result;
  const auto basis = algebra_basis(fam);
  if (fam.field() == Field::complex &&
      basis.size() == static_cast<std::size_t>(d) * static_cast<std::size_t>(d)) {
    return result;  // full algebra: definitively irreducible
  }
  std::mt19937_64 rng(opts.seed);
  const bool real = fam.field() == Field::real;
  int random_elements = std::max(1, opts.random_elements);
  for (int round = 0; round < std::max(1, opts.escalation_rounds); ++round) {
    const auto seeds = collect_seeds(fam, basis, random_elements, rng);
    result.seeds_tried += static_cast<int>(seeds.size());
    for (const auto& seed : seeds) {
      const Eigen::MatrixXcd closure = orbit_closure(fam, seed);
      if (closure.cols() == 0 || closure.cols() >= d) continue;
      if (real && !closure.imag().isZero(1e-12)) continue;
      if (verify_invariant_subspace(fam, closure)) {
        result.found = real ? Eigen::MatrixXcd(closure.real().cast<Complex>()) : closure;
        return result;
      }
    }
    if (real) {
      // Complexified search; convert conjugation-stable combinations back.
      const MatrixFamily cfam(Field::complex, fam.matrices());
      const auto cseeds = collect_seeds(cfam, basis, random_elements, rng);
      result.seeds_tried += static_cast<int>(cseeds.size());
      for (const auto& seed : cseeds) {
        const Eigen::MatrixXcd v = orbit_closure(cfam, seed);
        if (v.cols() == 0 || v.cols() >= d) continue;
        if (!verify_invariant_subspace(cfam, v)) continue;
        result.complex_witness_seen = true;
        const Eigen::MatrixXcd conj = v.conjugate();
        const Eigen::MatrixXcd meet = subspace_intersection(v, conj);
        if (meet.cols() > 0 && meet.cols() < d) {
          const Eigen::MatrixXcd rf = real_form(meet);
          if (verify_invariant_subspace(fam, rf)) {
            result.found = rf;
            return result;
          }
        }
        OrthoSet join(d);
        for (Eigen::Index c = 0; c < v.cols(); ++c) join.insert(v.col(c));
        for (Eigen::Index c = 0; c < conj.cols(); ++c) join.insert(conj.col(c));
        if (join.size() > 0 && join.size() < d) {
          const Eigen::MatrixXcd rf = real_form(join.basis());
          if (verify_invariant_subspace(fam, rf)) {
            result.found = rf;
            return result;
          }
        }
      }
    }
    random_elements *= 2;
  }
  return result;
}

}  // namespace detail

// Searches for a proper nonzero invariant subspace; absence of a return value
// is definitive over C (Burnside) and best-effort over R.
inline std::optional<std::vector<Vector>> find_invariant_subspace(
    const MatrixFamily& fam, const SearchOptions& opts = {}) {
  const auto search = detail::search_invariant_subspace(fam, opts);
  if (!search.found) return std::nullopt;
  return detail::basis_columns(*search.found);
}

inline IrreducibilityCertificate is_irreducible(const MatrixFamily& fam,
                                                const SearchOptions& opts = {}) {
  IrreducibilityCertificate cert;
  const int d = fam.dim();
  cert.algebra_dim = static_cast<int>(detail::algebra_basis(fam).size());

  if (is_zero_family(fam)) {
    cert.verdict = Verdict::reducible;
    cert.note = "zero family";
    if (d > 1) {
      Eigen::MatrixXcd e1 = Eigen::MatrixXcd::Zero(d, 1);
      e1(0, 0) = 1.0;
      cert.witness = detail::basis_columns(e1);
    }
    return cert;
  }
  if (d == 1) {
    cert.verdict = Verdict::irreducible;
    return cert;
  }
  if (cert.algebra_dim == d * d) {
    cert.verdict = Verdict::irreducible;  // Burnside, over either field
    return cert;
  }
  const auto search = detail::search_invariant_subspace(fam, opts);
  cert.seeds_tried = search.seeds_tried;
  if (search.found) {
    cert.verdict = Verdict::reducible;
    cert.witness = detail::basis_columns(*search.found);
    return cert;
  }
  if (fam.field() == Field::complex) {
    // algebra_dim < d^2 guarantees a witness exists; failing to expose one is
    // a numerical failure, not a verdict.
    throw numerical_error(
        "is_irreducible: generated algebra is proper but no invariant subspace "
        "was found after " +
        std::to_string(search.seeds_tried) + " seeds");
  }
  cert.verdict = Verdict::irreducible;
  cert.complex_reducible = search.complex_witness_seen;
  cert.note = search.complex_witness_seen
                  ? "irreducible over R, reducible over C"
                  : "no invariant subspace found (search evidence, not proof)";
  return cert;
}

namespace detail {

struct DecompositionStep {
  Matrix conjugator;  // unitary
  std::vector<int> sizes;
  std::vector<MatrixFamily> blocks;
};

// Unitary whose first cols(basis) columns span col(basis).
inline Matrix unitary_extension(const Eigen::MatrixXcd& basis, int d) {
  Eigen::HouseholderQR<Matrix> qr(basis);
  Matrix q = qr.householderQ();
  return q.leftCols(d).eval();
}

inline DecompositionStep triangularize_rec(const MatrixFamily& fam,
                                           const SearchOptions& opts, double scale,
                                           int depth_budget) {
  const int d = fam.dim();
  DecompositionStep leaf{Matrix::Identity(d, d), {d}, {fam}};
  if (depth_budget <= 0) {
    throw numerical_error("block_triangularize: refinement failed to terminate");
  }
  if (d == 1) return leaf;
  if (is_zero_family(fam, scale)) {
    // Split all-zero blocks down to 1x1 so the dichotomy "irreducible or
    // zero" holds per diagonal block.
    DecompositionStep step;
    step.conjugator = Matrix::Identity(d, d);
    step.sizes.assign(static_cast<std::size_t>(d), 1);
    const Matrix zero1 = Matrix::Zero(1, 1);
    for (int j = 0; j < d; ++j) {
      step.blocks.emplace_back(
          fam.field(),
          std::vector<Matrix>(static_cast<std::size_t>(fam.size()), zero1));
    }
    return step;
  }
  const auto search = search_invariant_subspace(fam, opts);
  if (!search.found) return leaf;

  const Eigen::MatrixXcd& v_basis = *search.found;
  const int v = static_cast<int>(v_basis.cols());
  Matrix q = unitary_extension(v_basis, d);
  if (fam.field() == Field::real) q = q.real().cast<Complex>();

  std::vector<Matrix> upper_mats, lower_mats;
  upper_mats.reserve(static_cast<std::size_t>(fam.size()));
  lower_mats.reserve(static_cast<std::size_t>(fam.size()));
  for (const Matrix& m : fam.matrices()) {
    const Matrix conj = q.adjoint() * m * q;
    upper_mats.push_back(conj.topLeftCorner(v, v));
    lower_mats.push_back(conj.bottomRightCorner(d - v, d - v));
  }
  const MatrixFamily upper(fam.field(), std::move(upper_mats));
  const MatrixFamily lower(fam.field(), std::move(lower_mats));
  const DecompositionStep s1 = triangularize_rec(upper, opts, scale, depth_budget - 1);
  const DecompositionStep s2 = triangularize_rec(lower, opts, scale, depth_budget - 1);

  DecompositionStep step;
  Matrix block_diag = Matrix::Zero(d, d);
  block_diag.topLeftCorner(v, v) = s1.conjugator;
  block_diag.bottomRightCorner(d - v, d - v) = s2.conjugator;
  step.conjugator = q * block_diag;
  step.sizes = s1.sizes;
  step.sizes.insert(step.sizes.end(), s2.sizes.begin(), s2.sizes.end());
  step.blocks = s1.blocks;
  step.blocks.insert(step.blocks.end(), s2.blocks.begin(), s2.blocks.end());
  return step;
}

inline double off_pattern_residual(const MatrixFamily& fam, const Matrix& t,
                                   const std::vector<int>& sizes) {
  double worst = 0.0;
  const Matrix t_inv = t.adjoint();  // unitary conjugator
  std::vector<int> offsets{0};
  for (int s : sizes) offsets.push_back(offsets.back() + s);
  for (const Matrix& m : fam.matrices()) {
    const Matrix c = t_inv * m * t;
    const double scale = 1.0 + op_norm(m);
    for (std::size_t j = 1; j < offsets.size(); ++j) {
      const int row0 = offsets[j - 1];
      const int rows = offsets[j] - row0;
      const int cols = row0;  // everything strictly left of the diagonal block
      if (cols == 0) continue;
      const double entry = c.block(row0, 0, rows, cols).cwiseAbs().maxCoeff();
      worst = std::max(worst, entry / scale);
    }
  }
  return worst;
}

}  // namespace detail

// Simultaneous unitary conjugation to block upper-triangular form with
// irreducible-or-zero diagonal blocks, built by recursing on an invariant
// subspace and its orthogonal complement.  Blocks come out in construction
// order (invariant subspace first); no canonical sort is imposed.
inline BlockDecomposition block_triangularize(const MatrixFamily& fam,
                                              const SearchOptions& opts = {}) {
  double scale = 0.0;
  for (const Matrix& m : fam.matrices()) scale = std::max(scale, op_norm(m));

  detail::DecompositionStep step =
      detail::triangularize_rec(fam, opts, scale, 4 * fam.dim() + 8);

  // Refine any block a second verdict pass still considers reducible (the
  // recursion can miss one only through thresholding asymmetries).
  for (int pass = 0; pass < fam.dim(); ++pass) {
    bool changed = false;
    std::vector<int> new_sizes;
    std::vector<MatrixFamily> new_blocks;
    Matrix refine = Matrix::Zero(fam.dim(), fam.dim());
    int offset = 0;
    for (std::size_t j = 0; j < step.blocks.size(); ++j) {
      const int dj = step.sizes[j];
      const MatrixFamily& blk = step.blocks[j];
      bool split = false;
      if (dj > 1 && !is_zero_family(blk, scale)) {
        const auto cert = is_irreducible(blk, opts);
        if (cert.verdict == Verdict::reducible) {
          const auto sub = detail::triangularize_rec(blk, opts, scale, 4 * dj + 8);
          if (sub.sizes.size() > 1) {
            refine.block(offset, offset, dj, dj) = sub.conjugator;
            new_sizes.insert(new_sizes.end(), sub.sizes.begin(), sub.sizes.end());
            new_blocks.insert(new_blocks.end(), sub.blocks.begin(), sub.blocks.end());
            split = true;
            changed = true;
          }
        }
      }
      if (!split) {
        refine.block(offset, offset, dj, dj) = Matrix::Identity(dj, dj);
        new_sizes.push_back(dj);
        new_blocks.push_back(blk);
      }
      offset += dj;
    }
    if (!changed) break;
    step.conjugator = step.conjugator * refine;
    step.sizes = std::move(new_sizes);
    step.blocks = std::move(new_blocks);
  }

  BlockDecomposition out;
  out.conjugator = step.conjugator;
  out.block_sizes = step.sizes;
  out.diagonal_blocks = step.blocks;
  out.residual = detail::off_pattern_residual(fam, out.conjugator, out.block_sizes);
  if (out.residual > 1e-8) {
    // One re-orthonormalization pass, then give up.
    Eigen::HouseholderQR<Matrix> qr(out.conjugator);
    out.conjugator = Matrix(qr.householderQ()).leftCols(fam.dim());
    out.residual = detail::off_pattern_residual(fam, out.conjugator, out.block_sizes);
    if (out.residual > 1e-8) {
      throw numerical_error("block_triangularize: conjugation residual above tolerance",
                            out.residual);
    }
  }
  const Eigen::VectorXd sv = singular_values(out.conjugator);
  out.condition_number = sv(0) / sv(sv.size() - 1);
  for (std::size_t j = 0; j < out.diagonal_blocks.size(); ++j) {
    const MatrixFamily& blk = out.diagonal_blocks[j];
    if (is_zero_family(blk, scale)) continue;
    if (is_irreducible(blk, opts).verdict == Verdict::irreducible) {
      out.lambda.push_back(static_cast<int>(j) + 1);
    }
  }
  return out;
}

// Lambda = {} iff every long product vanishes; the report cross-checks the
// products of length t+1 directly on the input family.
inline TrivialityReport is_trivial(const MatrixFamily& fam,
                                   const SearchOptions& opts = {}) {
  const BlockDecomposition decomp = block_triangularize(fam, opts);
  TrivialityReport report;
  report.trivial = decomp.trivial();
  report.t = decomp.total_blocks();
  const int check_len = report.t + 1;
  const std::uint64_t n_words =
      saturating_pow(static_cast<std::uint64_t>(fam.size()), check_len);
  if (n_words > (std::uint64_t{1} << 20)) return report;

  report.evidence_checked = true;
  std::vector<bool> seen(static_cast<std::size_t>(check_len) + 1, false);
  std::function<void(const Matrix&, int)> rec = [&](const Matrix& prod, int len) {
    if (len > 0) {
      const double norm = op_norm(prod);
      if (norm > 0.0) seen[static_cast<std::size_t>(len)] = true;
      if (len == check_len) {
        report.max_product_norm = std::max(report.max_product_norm, norm);
        return;
      }
      if (prod.isZero(0.0)) return;
    }
    for (int s = 1; s <= fam.size(); ++s) {
      rec(len == 0 ? fam.member(s) : Matrix(prod * fam.member(s)), len + 1);
    }
  };
  rec(Matrix(), 0);
  report.nonzero_at_each_length = true;
  for (int len = 1; len <= check_len; ++len) {
    if (!seen[static_cast<std::size_t>(len)]) report.nonzero_at_each_length = false;
  }
  return report;
}

// Empirical connecting estimate: the smallest k such that every sampled pair
// of words I, J admits a connector K with |K| <= k (the empty connector is
// allowed) and |M_IKJ| >= D |M_I| |M_J|; D is the worst pair's best ratio.
// Pairs whose norms vanish satisfy the inequality trivially and are skipped.
inline ConnectingEstimate connecting_constant(const MatrixFamily& fam, int depth,
                                              int k_max = -1,
                                              const SearchOptions& opts = {}) {
  const auto cert = is_irreducible(fam, opts);
  if (cert.verdict != Verdict::irreducible) {
    throw input_error("connecting_constant: family must be irreducible");
  }
  if (depth < 1) throw input_error("connecting_constant: depth must be >= 1");
  if (k_max < 0) k_max = std::max(8, 2 * fam.dim());

  const std::uint64_t n_words =
      saturating_pow(static_cast<std::uint64_t>(fam.size()),
                     std::max(depth, k_max) + 1);
  if (n_words > (std::uint64_t{1} << 14)) {
    throw budget_error("connecting_constant: too many sample words at depth " +
                       std::to_string(depth));
  }

  struct Entry {
    Matrix prod;
    double norm;
  };
  auto enumerate_by_length = [&](int max_len) {
    std::vector<std::vector<Entry>> by_len(static_cast<std::size_t>(max_len) + 1);
    by_len[0].push_back({Matrix::Identity(fam.dim(), fam.dim()), 1.0});
    std::function<void(const Matrix&, int)> rec = [&](const Matrix& prod, int len) {
      if (len > 0) by_len[static_cast<std::size_t>(len)].push_back({prod, op_norm(prod)});
      if (len == max_len) return;
      for (int s = 1; s <= fam.size(); ++s) {
        rec(len == 0 ? fam.member(s) : Matrix(prod * fam.member(s)), len + 1);
      }
    };
    rec(Matrix(), 0);
    return by_len;
  };
  const auto sample = enumerate_by_length(depth);
  const auto connectors = enumerate_by_length(k_max);

  std::vector<const Entry*> words;
  for (int len = 1; len <= depth; ++len) {
    for (const Entry& e : sample[static_cast<std::size_t>(len)]) {
      if (e.norm > 0.0) words.push_back(&e);
    }
  }
  if (words.empty()) {
    throw search_error("connecting_constant: all sampled products vanish");
  }

  std::vector<double> best_ratio(words.size() * words.size(), 0.0);
  for (int k = 0; k <= k_max; ++k) {
    bool all_positive = true;
    std::size_t p = 0;
    for (const Entry* wi : words) {
      for (const Entry* wj : words) {
        double& best = best_ratio[p++];
        for (const Entry& conn : connectors[static_cast<std::size_t>(k)]) {
          const double norm = op_norm(wi->prod * conn.prod * wj->prod);
          best = std::max(best, norm / (wi->norm * wj->norm));
        }
        if (best <= 0.0) all_positive = false;
      }
    }
    if (all_positive) {
      double d_const = kPosInf;
      for (double r : best_ratio) d_const = std::min(d_const, r);
      return ConnectingEstimate{k, d_const, depth};
    }
  }
  throw search_error("connecting_constant: no connector of length <= " +
                     std::to_string(k_max) + " works for every sampled pair");
}

}  // namespace matpress
