#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "matpress/family.hpp"

using namespace matpress;
using test::mat2;

TEST_CASE("family construction validates input") {
  CHECK_THROWS_AS(MatrixFamily(Field::real, {}), input_error);
  CHECK_THROWS_AS(MatrixFamily(Field::real, {test::mat2(0, 1, 0, 0), Matrix::Identity(3, 3)}),
                  input_error);
  Matrix bad = test::mat2(1, 0, 0, 1);
  bad(0, 1) = Complex(std::numeric_limits<double>::quiet_NaN(), 0);
  CHECK_THROWS_AS(MatrixFamily(Field::real, {bad}), input_error);
  Matrix cx = test::mat2(1, 0, 0, 1);
  cx(0, 0) = Complex(1, 0.5);
  CHECK_THROWS_AS(MatrixFamily(Field::real, {cx}), input_error);
  CHECK_NOTHROW(MatrixFamily(Field::complex, {cx}));
}

TEST_CASE("word products") {
  const auto idpair = test::identity_pair();
  CHECK(word_product(idpair, {1, 2, 1, 2}).isApprox(Matrix::Identity(2, 2)));

  const auto nil = test::nilpotent_pair();
  CHECK(word_product(nil, {1, 2}).isZero(0.0));

  const MatrixFamily diags(Field::real, {test::diag2(1, 2), test::diag2(3, 2)});
  const Matrix p = word_product(diags, {1, 2, 2});
  CHECK(p(0, 0) == Complex(9.0));
  CHECK(p(1, 1) == Complex(8.0));

  CHECK_THROWS_AS(word_product(diags, {1, 3}), input_error);
  CHECK_THROWS_AS(word_product(diags, {}), input_error);
}

TEST_CASE("operator norm") {
  CHECK(op_norm(Matrix::Identity(3, 3)) == Catch::Approx(1.0));
  CHECK(op_norm(test::diag2(3, 1)) == Catch::Approx(3.0));
  CHECK(op_norm(mat2(0, 2, 0, 0)) == Catch::Approx(2.0));
  CHECK(op_norm(Matrix::Zero(2, 2)) == 0.0);
}

TEST_CASE("frobenius norm") {
  CHECK(frobenius_norm(Matrix::Identity(2, 2)) == Catch::Approx(std::sqrt(2.0)));
  CHECK(frobenius_norm(Matrix::Zero(2, 2)) == 0.0);
  CHECK(frobenius_norm(mat2(1, 1, 0, 1)) == Catch::Approx(std::sqrt(3.0)));
}

TEST_CASE("spectral radius") {
  CHECK(spectral_radius(mat2(1, 1, 0, 1)) == Catch::Approx(1.0));
  CHECK(spectral_radius(test::diag2(1, 2)) == Catch::Approx(2.0));
  CHECK(spectral_radius(mat2(0, -1, 1, 0)) == Catch::Approx(1.0));
  Matrix rect(1, 2);
  rect << Complex(1), Complex(2);
  CHECK_THROWS_AS(spectral_radius(rect), input_error);
}

TEST_CASE("singular values") {
  const Eigen::VectorXd sv = singular_values(Matrix(test::diag2(3, 2)));
  CHECK(sv(0) == Catch::Approx(3.0));
  CHECK(sv(1) == Catch::Approx(2.0));

  CHECK(singular_values(Matrix::Zero(2, 2)).isZero(0.0));

  // Unit shear: M^T M has eigenvalues (3 +- sqrt 5)/2, so the singular
  // values are the golden ratio and its inverse.
  const Eigen::VectorXd shear = singular_values(mat2(1, 1, 0, 1));
  const double golden = 0.5 * (1.0 + std::sqrt(5.0));
  CHECK(shear(0) == Catch::Approx(golden).epsilon(1e-12));
  CHECK(shear(1) == Catch::Approx(1.0 / golden).epsilon(1e-12));
}

TEST_CASE("exterior powers") {
  std::mt19937_64 rng(7);
  const Matrix m = test::random_matrix(2, rng);
  const Matrix top = exterior_power(m, 2);
  REQUIRE(top.rows() == 1);
  CHECK(std::abs(top(0, 0) - m.determinant()) < 1e-12);

  Matrix d3(3, 3);
  d3.setZero();
  d3(0, 0) = 3;
  d3(1, 1) = 2;
  d3(2, 2) = 1;
  const Matrix c2 = exterior_power(d3, 2);
  CHECK(c2(0, 0) == Complex(6.0));  // {1,2}
  CHECK(c2(1, 1) == Complex(3.0));  // {1,3}
  CHECK(c2(2, 2) == Complex(2.0));  // {2,3}
  CHECK(std::abs(c2(0, 1)) == 0.0);

  CHECK(exterior_power(Matrix::Identity(4, 4), 2).isApprox(Matrix::Identity(6, 6)));
  CHECK_THROWS_AS(exterior_power(d3, 4), input_error);
  CHECK_THROWS_AS(exterior_power(d3, 0), input_error);
}

TEST_CASE("norm properties on random matrices") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 3);
    const Matrix a = test::random_matrix(d, rng, trial % 2 == 1);
    const Matrix b = test::random_matrix(d, rng, trial % 2 == 1);

    // Submultiplicativity of both norms.
    CHECK(op_norm(a * b) <= op_norm(a) * op_norm(b) + 1e-12);
    CHECK(frobenius_norm(a * b) <= frobenius_norm(a) * frobenius_norm(b) + 1e-12);

    // Norm sandwich and the spectral bound.
    CHECK(op_norm(a) <= frobenius_norm(a) + 1e-12);
    CHECK(frobenius_norm(a) <= std::sqrt(static_cast<double>(d)) * op_norm(a) + 1e-12);
    CHECK(spectral_radius(a) <= op_norm(a) + 1e-12);

    // Top singular value is the operator norm by construction.
    CHECK(singular_values(a)(0) == op_norm(a));
  }
}

TEST_CASE("exterior power multiplicativity on random pairs") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 25; ++trial) {
    const int d = 3 + static_cast<int>(rng() % 2);
    const int k = 2 + static_cast<int>(rng() % (d - 1));
    const Matrix a = test::random_matrix(d, rng);
    const Matrix b = test::random_matrix(d, rng);
    const Matrix lhs = exterior_power(a * b, k);
    const Matrix rhs = exterior_power(a, k) * exterior_power(b, k);
    const double scale = std::max(1.0, frobenius_norm(lhs));
    CHECK(frobenius_norm(lhs - rhs) / scale < 1e-9);
  }
}
