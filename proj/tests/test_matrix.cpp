#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sofsyn/matrix.hpp"

#include <random>

using namespace sofsyn;

namespace {

Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

SymmetricMatrix random_spd(std::mt19937_64& rng, int dim, double shift = 0.1) {
  Matrix a = random_matrix(rng, dim, dim);
  return SymmetricMatrix::from_dense(a * a.transpose() +
                                     shift * Matrix::Identity(dim, dim));
}

}  // namespace

TEST_CASE("kron identity and zero cases") {
  std::mt19937_64 rng(1);
  Matrix b = random_matrix(rng, 3, 2);
  CHECK((kron(Matrix::Identity(1, 1), b) - b).cwiseAbs().maxCoeff() == 0.0);
  Matrix z = Matrix::Zero(2, 3);
  Matrix kz = kron(z, b);
  CHECK(kz.rows() == 6);
  CHECK(kz.cols() == 6);
  CHECK(kz.isZero(0.0));
}

TEST_CASE("kron expands block-by-block") {
  Matrix a(2, 2), b(2, 2);
  a << 1, 2, 3, 4;
  b << 0, 1, 1, 0;
  // Oracle: the definition a_ij * B, expanded entry by entry.
  Matrix expected(4, 4);
  expected << 0, 1, 0, 2,
              1, 0, 2, 0,
              0, 3, 0, 4,
              3, 0, 4, 0;
  CHECK((kron(a, b) - expected).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("kron is bilinear") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix a = random_matrix(rng, 3, 3);
    Matrix b = random_matrix(rng, 3, 3);
    Matrix c = random_matrix(rng, 3, 3);
    Matrix lhs = kron(a, b + c);
    Matrix rhs = kron(a, b) + kron(a, c);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("hadamard identity, masking and entrywise oracle") {
  std::mt19937_64 rng(11);
  Matrix a = random_matrix(rng, 3, 3);
  CHECK((hadamard(a, Matrix::Ones(3, 3)) - a).cwiseAbs().maxCoeff() == 0.0);
  Matrix masked = hadamard(a, Matrix::Identity(3, 3));
  CHECK(masked.diagonal() == a.diagonal());
  CHECK(masked(0, 1) == 0.0);

  Matrix x(2, 2), y(2, 2), expected(2, 2);
  x << 1, 2, 3, 4;
  y << 2, 0, 0, 2;
  expected << 2, 0, 0, 8;
  CHECK((hadamard(x, y) - expected).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(hadamard(x, Matrix::Zero(3, 2)), std::invalid_argument);
}

TEST_CASE("vec stacks columns") {
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  Vector v = vec(a);
  CHECK(v.size() == 4);
  CHECK(v[0] == 1);
  CHECK(v[1] == 3);
  CHECK(v[2] == 2);
  CHECK(v[3] == 4);

  Vector col = Vector::LinSpaced(3, 1, 3);
  CHECK((vec(Matrix(col)) - col).cwiseAbs().maxCoeff() == 0.0);
  CHECK(vec(Matrix::Zero(2, 3)).isZero(0.0));
}

TEST_CASE("vec(AXB) = kron(B^T, A) vec(X)") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix a = random_matrix(rng, 3, 4);
    Matrix x = random_matrix(rng, 4, 2);
    Matrix b = random_matrix(rng, 2, 5);
    Vector lhs = vec(a * x * b);
    Vector rhs = kron(b.transpose(), a) * vec(x);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("elementwise_leq") {
  std::mt19937_64 rng(17);
  Matrix a = random_matrix(rng, 3, 4);
  CHECK(elementwise_leq(a, a));
  CHECK(elementwise_leq(a.cwiseAbs(), a.cwiseAbs() + Matrix::Ones(3, 4)));
  Matrix x(1, 2), y(1, 2);
  x << 1, 5;
  y << 2, 4;
  CHECK_FALSE(elementwise_leq(x, y));
  CHECK_THROWS_AS(elementwise_leq(x, Matrix::Zero(2, 2)), std::invalid_argument);
}

TEST_CASE("spectral_norm") {
  CHECK(spectral_norm(Matrix::Identity(4, 4)) == doctest::Approx(1.0).epsilon(1e-12));
  Vector d(5);
  d << 0.1, 0.2, 0.3, 0.0, 0.1;
  CHECK(spectral_norm(Matrix(d.asDiagonal())) == doctest::Approx(0.3).epsilon(1e-12));
  Matrix m(2, 2);
  m << 3, 4, 0, 0;
  // Oracle: M M^T = [[25, 0], [0, 0]] has largest eigenvalue 25.
  CHECK(spectral_norm(m) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("spectral norm is submultiplicative w.r.t. hadamard product") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    Matrix a = random_matrix(rng, 4, 4);
    Matrix b = random_matrix(rng, 4, 4);
    CHECK(spectral_norm(hadamard(a, b)) <=
          spectral_norm(a) * spectral_norm(b) + 1e-10);
  }
}

TEST_CASE("is_positive_definite") {
  CHECK(is_positive_definite(SymmetricMatrix::identity(3), 0.5));
  CHECK_FALSE(is_positive_definite(SymmetricMatrix(2), 0.0));
  Matrix m(2, 2);
  m << 2, 1, 1, 2;  // eigenvalues 1 and 3
  CHECK(is_positive_definite(SymmetricMatrix::from_dense(m), 0.9));
  CHECK_FALSE(is_positive_definite(SymmetricMatrix::from_dense(m), 1.0));
  CHECK_THROWS_AS(is_positive_definite(SymmetricMatrix::identity(2), -1.0),
                  std::invalid_argument);
}

TEST_CASE("symmetric matrix storage reconstructs exactly") {
  std::mt19937_64 rng(23);
  Matrix a = random_matrix(rng, 5, 5);
  Matrix sym = 0.5 * (a + a.transpose());
  SymmetricMatrix s = SymmetricMatrix::from_dense(sym);
  Matrix d = s.dense();
  CHECK((d - d.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((d - sym).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK_THROWS_AS(SymmetricMatrix::from_dense(random_matrix(rng, 3, 3)),
                  std::invalid_argument);
}

TEST_CASE("young inequality holds on random draws") {
  std::mt19937_64 rng(29);
  SymmetricMatrix eye = SymmetricMatrix::identity(3);
  CHECK(young_inequality_holds(Vector::Zero(3), Vector::Zero(3), eye));
  Vector y = random_matrix(rng, 3, 1).col(0);
  CHECK(young_inequality_holds(Vector::Zero(3), y, eye));
  for (int trial = 0; trial < 1000; ++trial) {
    int n = 2 + static_cast<int>(trial % 4);
    Vector x = random_matrix(rng, n, 1, 5.0).col(0);
    Vector z = random_matrix(rng, n, 1, 5.0).col(0);
    CHECK(young_inequality_holds(x, z, random_spd(rng, n)));
  }
}

TEST_CASE("uncertainty quadratic bound holds on admissible draws") {
  std::mt19937_64 rng(31);
  int n = 3;
  SymmetricMatrix p = random_spd(rng, n);
  Matrix a = random_matrix(rng, n, n);
  Matrix e = random_matrix(rng, n, n);

  // D = 0 reduces the bound to A^T P A <= A^T P A + eps E^T E.
  CHECK(uncertainty_quadratic_bound_holds(a, Matrix::Zero(n, n), e,
                                          Matrix::Zero(n, n), p, 1.0));

  for (int trial = 0; trial < 1000; ++trial) {
    Matrix aa = random_matrix(rng, n, n);
    Matrix d = random_matrix(rng, n, n);
    Matrix ee = random_matrix(rng, n, n);
    Matrix f = random_matrix(rng, n, n);
    double fn = spectral_norm(f);
    if (fn > 0) f /= (fn * 1.001);  // enforce F^T F <= I
    SymmetricMatrix pp = random_spd(rng, n);
    // eps must satisfy P^{-1} - eps^{-1} D D^T > 0, i.e. eps > lambda_max(D^T P D).
    double eps_min = largest_eigenvalue(d.transpose() * pp.dense() * d);
    double eps = eps_min * 1.5 + 0.1;
    CHECK(uncertainty_quadratic_bound_holds(aa, d, ee, f, pp, eps));
    if (trial == 0) {
      // F = 0 admissible as well.
      CHECK(uncertainty_quadratic_bound_holds(aa, d, ee, Matrix::Zero(n, n), pp, eps));
    }
  }
}

TEST_CASE("uncertainty quadratic bound rejects bad preconditions") {
  std::mt19937_64 rng(37);
  int n = 2;
  SymmetricMatrix p = random_spd(rng, n);
  Matrix a = random_matrix(rng, n, n);
  CHECK_THROWS_AS(uncertainty_quadratic_bound_holds(
                      a, Matrix::Identity(n, n), a, 2.0 * Matrix::Identity(n, n),
                      p, 10.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(uncertainty_quadratic_bound_holds(
                      a, Matrix::Zero(n, n), a, Matrix::Zero(n, n), p, -1.0),
                  std::invalid_argument);
}

TEST_CASE("require_finite rejects NaN") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(kron(m, m), std::invalid_argument);
}
