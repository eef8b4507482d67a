#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "matpress/decompose.hpp"
#include "matpress/pressure.hpp"

using namespace matpress;

namespace {

// Brute-force partition sum: odometer over all words, direct products, plain
// accumulation in long double.  Independent of the prefix-tree walker.
double oracle_log_partition(const MatrixFamily& fam, double q, int n, Norm norm) {
  const int ell = fam.size();
  std::vector<int> word(static_cast<std::size_t>(n), 1);
  long double sum = 0.0L;
  while (true) {
    Matrix prod = fam.member(word[0]);
    for (int i = 1; i < n; ++i) prod = prod * fam.member(word[static_cast<std::size_t>(i)]);
    const double nm = matrix_norm(prod, norm);
    if (nm > 0.0) sum += std::pow(static_cast<long double>(nm), static_cast<long double>(q));
    int i = n - 1;
    while (i >= 0 && word[static_cast<std::size_t>(i)] == ell) {
      word[static_cast<std::size_t>(i)] = 1;
      --i;
    }
    if (i < 0) break;
    ++word[static_cast<std::size_t>(i)];
  }
  if (sum == 0.0L) return kNegInf;
  return static_cast<double>(std::log(sum));
}

PressureOptions quick(int depth, Norm norm = Norm::op) {
  PressureOptions opts;
  opts.depth = depth;
  opts.norm = norm;
  return opts;
}

}  // namespace

TEST_CASE("log partition sums on closed forms") {
  CHECK(log_partition_sum(test::identity_pair(), 1.0, 5, Norm::op) ==
        Catch::Approx(std::log(32.0)).margin(1e-12));

  CHECK(log_partition_sum(test::scalar_pair_1_3(), 2.0, 3, Norm::op) ==
        Catch::Approx(3.0 * std::log(10.0)).margin(1e-12));

  CHECK(log_partition_sum(test::nilpotent_pair(), 1.0, 2, Norm::op) == kNegInf);

  CHECK_THROWS_AS(log_partition_sum(test::identity_pair(), 0.0, 3, Norm::op),
                  input_error);
}

TEST_CASE("log partition sums match brute force on random families") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 12; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 2);
    const int ell = 2 + static_cast<int>(rng() % 2);
    std::vector<Matrix> mats;
    for (int i = 0; i < ell; ++i) mats.push_back(test::random_matrix(d, rng));
    const MatrixFamily fam(Field::real, std::move(mats));
    const double q = 0.5 + 2.5 * static_cast<double>(rng() % 100) / 100.0;
    const int n = 2 + static_cast<int>(rng() % 4);
    const Norm norm = trial % 2 == 0 ? Norm::op : Norm::frobenius;
    const double got = log_partition_sum(fam, q, n, norm);
    const double want = oracle_log_partition(fam, q, n, norm);
    CHECK(got == Catch::Approx(want).margin(1e-10));
  }
}

TEST_CASE("enumeration budget") {
  WalkOptions tiny;
  tiny.budget = 8;
  CHECK_THROWS_AS(log_partition_sum(test::identity_pair(), 1.0, 4, Norm::op, tiny),
                  budget_error);
}

TEST_CASE("enumeration is thread-count independent") {
  const auto fam = test::shear_pair();
  WalkOptions one;
  one.threads = 1;
  WalkOptions four;
  four.threads = 4;
  for (int n : {3, 9}) {
    const double a = log_partition_sum(fam, 1.25, n, Norm::op, one);
    const double b = log_partition_sum(fam, 1.25, n, Norm::op, four);
    CHECK(a == b);  // bitwise
  }
}

TEST_CASE("pressure bounds: single shear matrix") {
  // |M^n| grows linearly, so the upper bound decays like log(n)/n while the
  // periodic route pins the true value P = q log rho = 0.
  const MatrixFamily single(Field::real, {test::mat2(1, 1, 0, 1)});
  const auto est = pressure_bounds(single, 1.0, quick(128));
  CHECK(est.upper <= 0.04);
  CHECK(est.upper >= 0.0);
  CHECK(est.lower == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("pressure bounds: scalar family is exact at depth one") {
  const auto est = pressure_bounds(test::scalar_pair_1_3(), 1.0, quick(4));
  CHECK(est.upper == Catch::Approx(std::log(4.0)).margin(1e-12));
  CHECK(est.lower == Catch::Approx(std::log(3.0)).margin(1e-12));  // periodic route

  // The connecting route with the exact scalar data (D=1, k=0) closes the
  // interval.
  PressureOptions opts = quick(4);
  opts.connecting = connecting_constant(test::scalar_pair_1_3(), 2);
  const auto exact = pressure_bounds(test::scalar_pair_1_3(), 1.0, opts);
  CHECK(exact.lower == Catch::Approx(std::log(4.0)).margin(1e-12));
  CHECK(exact.upper == Catch::Approx(std::log(4.0)).margin(1e-12));
}

TEST_CASE("pressure bounds: identity pair") {
  const auto est = pressure_bounds(test::identity_pair(), 7.0, quick(3));
  CHECK(est.upper == Catch::Approx(std::log(2.0)).margin(1e-12));
  PressureOptions opts = quick(3);
  opts.connecting = ConnectingEstimate{0, 1.0, 3};
  const auto exact = pressure_bounds(test::identity_pair(), 7.0, opts);
  CHECK(exact.lower == Catch::Approx(std::log(2.0)).margin(1e-12));
}

TEST_CASE("pressure bounds: trivial family reports -inf") {
  const auto est = pressure_bounds(test::nilpotent_pair(), 1.0, quick(4));
  CHECK(est.trivial_detected);
  CHECK(est.upper == kNegInf);
  CHECK(est.lower == kNegInf);
  CHECK(est.width() == 0.0);
}

TEST_CASE("per-depth upper bounds are monotone (running minimum)") {
  const auto est = pressure_bounds(test::shear_pair(), 1.5, quick(10));
  double running = kPosInf;
  for (const auto& [m, value] : est.per_depth) {
    running = std::min(running, value);
    CHECK(est.upper <= running + 1e-15);
  }
  CHECK(est.lower <= est.upper);
}

TEST_CASE("block pressure on the diagonal pair is exact") {
  const auto fam = test::diag_pair();
  const auto decomp = block_triangularize(fam);
  REQUIRE(decomp.lambda.size() == 2);

  struct Case {
    double q;
    double expected;
    std::size_t achievers;
  };
  // P(q) = max(log(1 + 3^q), log(2 * 2^q)).
  const std::vector<Case> cases = {
      {0.5, std::log(2.0 * std::sqrt(2.0)), 1},
      {1.0, std::log(4.0), 2},
      {2.0, std::log(10.0), 1},
  };
  for (const auto& c : cases) {
    const auto bp = pressure_via_blocks(fam, decomp, c.q, quick(6),
                                        /*auto_connecting=*/true);
    CHECK(bp.combined.upper == Catch::Approx(c.expected).margin(1e-12));
    CHECK(bp.combined.lower == Catch::Approx(c.expected).margin(1e-12));
    CHECK(bp.achievers.size() == c.achievers);
  }
}

TEST_CASE("block pressure flags trivial families") {
  const auto fam = test::nilpotent_pair();
  const auto decomp = block_triangularize(fam);
  const auto bp = pressure_via_blocks(fam, decomp, 1.0, quick(4));
  CHECK(bp.combined.trivial_detected);
  CHECK(bp.combined.upper == kNegInf);
  CHECK(bp.achievers.empty());
}

TEST_CASE("block and direct intervals intersect") {
  // Numerical shadow of the block formula P = max_j P_j.
  for (const MatrixFamily& fam :
       {test::diag_pair(), test::shear_pair(), test::identity_pair()}) {
    const auto decomp = block_triangularize(fam);
    if (decomp.trivial()) continue;
    for (double q : {0.5, 1.0, 2.0}) {
      const auto direct = pressure_bounds(fam, q, quick(10));
      const auto blocks = pressure_via_blocks(fam, decomp, q, quick(10), true);
      CHECK(direct.lower <= blocks.combined.upper + 1e-9);
      CHECK(blocks.combined.lower <= direct.upper + 1e-9);
    }
  }
}

TEST_CASE("even spectral oracle") {
  // Scalars: the lift is 1-dimensional.
  const MatrixFamily scalars(Field::real, {test::scalar1(1), test::scalar1(3)});
  CHECK(pressure_even_spectral(scalars, 1) == Catch::Approx(std::log(10.0)).margin(1e-12));

  CHECK(pressure_even_spectral(test::identity_pair(), 1) ==
        Catch::Approx(std::log(2.0)).margin(1e-12));

  // Shear pair: compare against a directly assembled 4x4 lift.
  const auto fam = test::shear_pair();
  Matrix lift = Matrix::Zero(4, 4);
  for (const Matrix& m : fam.matrices()) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        lift.block(2 * i, 2 * j, 2, 2) += m(i, j) * m;
      }
    }
  }
  const double direct = std::log(spectral_radius(lift));
  const double got = pressure_even_spectral(fam, 1);
  CHECK(got == Catch::Approx(direct).margin(1e-10));

  // It must land inside the Frobenius bounds at q = 2.
  const auto frob = pressure_bounds(fam, 2.0, quick(12, Norm::frobenius));
  CHECK(got <= frob.upper + 1e-9);
  CHECK(got >= frob.lower - 1e-9);

  CHECK_THROWS_AS(pressure_even_spectral(fam, 7), budget_error);
}

TEST_CASE("pressure curve closed forms") {
  const auto idpair = test::identity_pair();
  const auto curve = pressure_curve(idpair, {1.0, 2.0, 3.0}, quick(4));
  for (const auto& est : curve.estimates) {
    CHECK(est.upper == Catch::Approx(std::log(2.0)).margin(1e-12));
  }

  const auto fam = test::diag_pair();
  const auto decomp = block_triangularize(fam);
  const auto blocks =
      pressure_curve(fam, {0.5, 1.0, 2.0}, quick(6), &decomp, true);
  CHECK(blocks.estimates[0].upper ==
        Catch::Approx(std::log(2.0 * std::sqrt(2.0))).margin(1e-12));
  CHECK(blocks.estimates[1].upper == Catch::Approx(std::log(4.0)).margin(1e-12));
  CHECK(blocks.estimates[2].upper == Catch::Approx(std::log(10.0)).margin(1e-12));

  const MatrixFamily two(Field::real, {test::scalar1(2)});
  const auto scal = pressure_curve(two, {1.0, 2.0}, quick(4));
  CHECK(scal.estimates[0].upper == Catch::Approx(std::log(2.0)).margin(1e-12));
  CHECK(scal.estimates[0].lower == Catch::Approx(std::log(2.0)).margin(1e-12));
  CHECK(scal.estimates[1].upper == Catch::Approx(2.0 * std::log(2.0)).margin(1e-12));

  CHECK_THROWS_AS(pressure_curve(idpair, {2.0, 1.0}, quick(3)), input_error);
}

TEST_CASE("convexity shadow") {
  // Midpoint convexity P(q2) <= (P(q1) + P(q3))/2 up to the bound widths:
  // the midpoint's lower bound cannot exceed the endpoint uppers' average.
  const auto fam = test::diag_pair();
  const auto decomp = block_triangularize(fam);
  const std::vector<double> grid = {0.5, 1.0, 1.5, 2.0, 2.5};
  const auto block_curve = pressure_curve(fam, grid, quick(8), &decomp, true);
  const auto direct_curve = pressure_curve(fam, grid, quick(8));
  for (const auto& curve : {block_curve, direct_curve}) {
    for (std::size_t i = 0; i + 2 < grid.size(); i += 2) {
      const auto& a = curve.estimates[i];
      const auto& b = curve.estimates[i + 1];
      const auto& c = curve.estimates[i + 2];
      CHECK(b.lower <= 0.5 * (a.upper + c.upper) + 1e-12);
    }
  }
}

TEST_CASE("norm independence shadow") {
  for (const MatrixFamily& fam : {test::diag_pair(), test::shear_pair()}) {
    for (double q : {1.0, 2.0}) {
      const auto op = pressure_bounds(fam, q, quick(10, Norm::op));
      const auto fr = pressure_bounds(fam, q, quick(10, Norm::frobenius));
      CHECK(op.lower <= fr.upper + 1e-9);
      CHECK(fr.lower <= op.upper + 1e-9);
    }
  }
}

TEST_CASE("conjugation invariance shadow") {
  std::mt19937_64 rng(55);
  const auto fam = test::shear_pair();
  const Matrix g = test::random_invertible(2, rng, 0.3);
  const Matrix g_inv = g.inverse();
  std::vector<Matrix> conj;
  for (const Matrix& m : fam.matrices()) conj.push_back(g_inv * m * g);
  const MatrixFamily conj_fam(Field::real, std::move(conj));
  for (double q : {0.5, 1.0, 2.0}) {
    const auto a = pressure_bounds(fam, q, quick(10));
    const auto b = pressure_bounds(conj_fam, q, quick(10));
    CHECK(a.lower <= b.upper + 1e-9);
    CHECK(b.lower <= a.upper + 1e-9);
  }
}
