// Dense matrix kernel: families of square matrices over R or C, word
// products, norms, singular values, spectral radius and exterior powers.
//
// Matrices are stored uniformly with complex entries; real families carry a
// field tag and the invariant that every imaginary part is exactly zero.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "matpress/errors.hpp"

namespace matpress {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

// Rank decisions everywhere use the same rule: a singular value sigma counts
// as zero when sigma <= kRankTol * max(1, sigma_max).
inline constexpr double kRankTol = 1e-10;

enum class Field { real, complex };

enum class Norm { op, frobenius };

inline const char* to_string(Norm n) {
  return n == Norm::op ? "operator" : "frobenius";
}

inline const char* to_string(Field f) {
  return f == Field::real ? "real" : "complex";
}

// A word over the alphabet {1, ..., ell}; symbols are 1-based throughout.
using Word = std::vector<int>;

inline std::string word_to_string(const Word& w, int ell) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (ell > 9 && i > 0) out += ',';
    out += std::to_string(w[i]);
  }
  return out;
}

namespace detail {

inline void check_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw input_error(std::string(what) + ": entries must be finite");
  }
}

}  // namespace detail

// The central input object: an ordered family {M_1, ..., M_ell} of d x d
// matrices over the tagged field.  Immutable after construction.
class MatrixFamily {
 public:
  MatrixFamily(Field field, std::vector<Matrix> matrices)
      : field_(field), matrices_(std::move(matrices)) {
    if (matrices_.empty()) throw input_error("family: needs at least one matrix");
    dim_ = static_cast<int>(matrices_.front().rows());
    if (dim_ < 1) throw input_error("family: dimension must be positive");
    for (const Matrix& m : matrices_) {
      if (m.rows() != dim_ || m.cols() != dim_) {
        throw input_error("family: all matrices must be square of equal size");
      }
      detail::check_finite(m, "family");
      if (field_ == Field::real && !m.imag().isZero(0.0)) {
        throw input_error("family: real field requires exactly zero imaginary parts");
      }
    }
  }

  Field field() const noexcept { return field_; }
  int dim() const noexcept { return dim_; }
  int size() const noexcept { return static_cast<int>(matrices_.size()); }

  // 1-based access matching word symbols.
  const Matrix& member(int symbol) const {
    if (symbol < 1 || symbol > size()) {
      throw input_error("word symbol " + std::to_string(symbol) +
                        " out of range 1.." + std::to_string(size()));
    }
    return matrices_[static_cast<std::size_t>(symbol - 1)];
  }

  const std::vector<Matrix>& matrices() const noexcept { return matrices_; }

 private:
  Field field_;
  std::vector<Matrix> matrices_;
  int dim_ = 0;
};

inline MatrixFamily real_family(std::vector<Eigen::MatrixXd> mats) {
  std::vector<Matrix> out;
  out.reserve(mats.size());
  for (const auto& m : mats) out.push_back(m.cast<Complex>());
  return MatrixFamily(Field::real, std::move(out));
}

inline void validate_word(const Word& w, int ell) {
  if (w.empty()) throw input_error("word: must be non-empty");
  for (int s : w) {
    if (s < 1 || s > ell) {
      throw input_error("word symbol " + std::to_string(s) + " out of range 1.." +
                        std::to_string(ell));
    }
  }
}

// Left-to-right product M_{j_1} ... M_{j_n}.
inline Matrix word_product(const MatrixFamily& fam, const Word& word) {
  validate_word(word, fam.size());
  Matrix prod = fam.member(word.front());
  Matrix tmp(fam.dim(), fam.dim());
  for (std::size_t i = 1; i < word.size(); ++i) {
    tmp.noalias() = prod * fam.member(word[i]);
    prod.swap(tmp);
  }
  return prod;
}

// Singular values, non-increasing.  Jacobi SVD keeps small dimensions at
// full relative accuracy.
inline Eigen::VectorXd singular_values(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues();
}

// Operator 2-norm = largest singular value; shares the SVD code path so that
// op_norm(m) == singular_values(m)[0] holds exactly.
inline double op_norm(const Matrix& m) { return singular_values(m)(0); }

inline double frobenius_norm(const Matrix& m) { return m.norm(); }

inline double matrix_norm(const Matrix& m, Norm which) {
  return which == Norm::op ? op_norm(m) : frobenius_norm(m);
}

inline double spectral_radius(const Matrix& m) {
  if (m.rows() != m.cols()) throw input_error("spectral_radius: matrix must be square");
  if (m.rows() == 1) return std::abs(m(0, 0));
  Eigen::ComplexEigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw numerical_error("spectral_radius: eigenvalue iteration failed");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline double zero_threshold(double scale) {
  return kRankTol * std::max(1.0, scale);
}

inline bool is_zero_matrix(const Matrix& m, double scale) {
  return op_norm(m) <= zero_threshold(scale);
}

// All members zero relative to the given norm scale (defaults to the
// family's own largest norm).
inline bool is_zero_family(const MatrixFamily& fam, double scale = -1.0) {
  double norms_max = 0.0;
  for (const Matrix& m : fam.matrices()) norms_max = std::max(norms_max, op_norm(m));
  if (scale < 0.0) scale = norms_max;
  return norms_max <= zero_threshold(scale);
}

namespace detail {

// Lexicographically ordered k-subsets of {0, ..., d-1}.
inline std::vector<std::vector<int>> index_subsets(int d, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) cur[static_cast<std::size_t>(i)] = i;
  while (true) {
    out.push_back(cur);
    int i = k - 1;
    while (i >= 0 && cur[static_cast<std::size_t>(i)] == d - k + i) --i;
    if (i < 0) break;
    ++cur[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) {
      cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return out;
}

inline std::uint64_t binomial(int d, int k) {
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<std::uint64_t>(d - k + i) / static_cast<std::uint64_t>(i);
  }
  return r;
}

}  // namespace detail

// k-th compound matrix: the C(d,k) x C(d,k) matrix of k x k minors, rows and
// columns indexed by lexicographically ordered index subsets.  Satisfies
// (AB)^{wedge k} = A^{wedge k} B^{wedge k}.
inline Matrix exterior_power(const Matrix& m, int k) {
  if (m.rows() != m.cols()) throw input_error("exterior_power: matrix must be square");
  const int d = static_cast<int>(m.rows());
  if (k < 1 || k > d) {
    throw input_error("exterior_power: order must lie in 1..d");
  }
  const std::uint64_t n = detail::binomial(d, k);
  if (n > (1u << 16)) {
    throw budget_error("exterior_power: compound dimension " + std::to_string(n) +
                       " exceeds 65536");
  }
  const auto subsets = detail::index_subsets(d, k);
  Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Matrix minor(k, k);
  for (std::size_t r = 0; r < subsets.size(); ++r) {
    for (std::size_t c = 0; c < subsets.size(); ++c) {
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
          minor(i, j) = m(subsets[r][static_cast<std::size_t>(i)],
                          subsets[c][static_cast<std::size_t>(j)]);
        }
      }
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          k == 1 ? minor(0, 0) : minor.determinant();
    }
  }
  return out;
}

// ell^n with saturation, for budget checks.
inline std::uint64_t saturating_pow(std::uint64_t base, int exp) {
  std::uint64_t r = 1;
  const std::uint64_t cap = std::numeric_limits<std::uint64_t>::max();
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && r > cap / base) return cap;
    r *= base;
  }
  return r;
}

}  // namespace matpress
