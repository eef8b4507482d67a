// Shared builders for the test suites, plus the small stable of families the
// checks revolve around.
#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "matpress/family.hpp"

namespace test {

using matpress::Complex;
using matpress::Field;
using matpress::Matrix;
using matpress::MatrixFamily;

inline Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << Complex(a), Complex(b), Complex(c), Complex(d);
  return m;
}

inline Matrix diag2(double a, double b) { return mat2(a, 0, 0, b); }

inline Matrix scalar1(double a) {
  Matrix m(1, 1);
  m(0, 0) = Complex(a);
  return m;
}

// diag(1,2), diag(3,2): reducible with two scalar blocks {1,3} and {2,2}.
inline MatrixFamily diag_pair() {
  return MatrixFamily(Field::real, {diag2(1, 2), diag2(3, 2)});
}

// Upper/lower unit shears: irreducible over both fields.
inline MatrixFamily shear_pair() {
  return MatrixFamily(Field::real, {mat2(1, 1, 0, 1), mat2(1, 0, 1, 1)});
}

// Two strictly upper-triangular nilpotents: every product of length >= 2
// vanishes exactly.
inline MatrixFamily nilpotent_pair() {
  return MatrixFamily(Field::real, {mat2(0, 1, 0, 0), mat2(0, 2, 0, 0)});
}

inline MatrixFamily identity_pair() {
  return MatrixFamily(Field::real, {Matrix::Identity(2, 2), Matrix::Identity(2, 2)});
}

inline MatrixFamily scalar_pair_1_3() {
  return MatrixFamily(Field::real, {scalar1(1), scalar1(3)});
}

inline MatrixFamily rotation_family(Field field) {
  return MatrixFamily(field, {mat2(0, -1, 1, 0)});
}

inline Matrix random_matrix(int d, std::mt19937_64& rng, bool complex_entries = false) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      m(i, j) = complex_entries ? Complex(u(rng), u(rng)) : Complex(u(rng), 0.0);
    }
  }
  return m;
}

// Random well-conditioned invertible matrix (regenerates until the smallest
// singular value clears the floor).
inline Matrix random_invertible(int d, std::mt19937_64& rng, double min_sv = 0.05) {
  while (true) {
    Matrix m = random_matrix(d, rng);
    const Eigen::VectorXd sv = matpress::singular_values(m);
    if (sv(sv.size() - 1) > min_sv) return m;
  }
}

// Random real orthogonal matrix from the QR of a Gaussian sample.
inline Matrix random_orthogonal(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = g(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  return q.cast<Complex>();
}

}  // namespace test
