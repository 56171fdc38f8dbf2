#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sofsyn/sdp.hpp"

#include <cstdio>
#include <fstream>
#include <random>

using namespace sofsyn;

namespace {

Matrix random_symmetric(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = dist(rng);
  return 0.5 * (m + m.transpose());
}

// minimize t subject to A + t I >= tau I, as a one-variable SDP.
SdpProblem min_shift_problem(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  SdpProblem p = SdpProblem::with_vars(1);
  p.objective[0] = 1.0;
  LmiBlock block;
  block.dim = n;
  block.constant_term = SymmetricMatrix::from_dense(-a);
  block.coefficient_terms.push_back({0, SymmetricMatrix::from_dense(-Matrix::Identity(n, n))});
  p.lmi_blocks.push_back(block);
  return p;
}

// Feasibility of P > 0, A^T P A - P < 0 over symmetric P (packed upper triangle).
SdpProblem lyapunov_problem(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  const int nv = n * (n + 1) / 2;
  SdpProblem p = SdpProblem::with_vars(nv);

  auto basis = [&](int k) {
    int idx = 0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i <= j; ++i) {
        if (idx == k) {
          Matrix e = Matrix::Zero(n, n);
          e(i, j) = e(j, i) = 1.0;
          return e;
        }
        ++idx;
      }
    throw std::logic_error("basis index");
  };

  LmiBlock pos, lyap;
  pos.dim = n;
  pos.constant_term = SymmetricMatrix(n);
  lyap.dim = n;
  lyap.constant_term = SymmetricMatrix(n);
  for (int k = 0; k < nv; ++k) {
    Matrix e = basis(k);
    pos.coefficient_terms.push_back({k, SymmetricMatrix::from_dense(-e)});
    lyap.coefficient_terms.push_back(
        {k, SymmetricMatrix::from_dense(a.transpose() * e * a - e)});
  }
  p.lmi_blocks.push_back(pos);
  p.lmi_blocks.push_back(lyap);
  return p;
}

}  // namespace

TEST_CASE("min shift matches -lambda_min in closed form") {
  Matrix a(2, 2);
  a << 0, 1, 1, 0;  // eigenvalues -1 and +1
  SolverConfig config;
  config.strictness_margin = 1e-9;
  SdpSolution sol = solve(min_shift_problem(a), config);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("min shift matches -lambda_min on random symmetric matrices") {
  std::mt19937_64 rng(101);
  SolverConfig config;
  config.strictness_margin = 1e-9;
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + trial % 4;
    Matrix a = random_symmetric(rng, n, 2.0);
    SdpSolution sol = solve(min_shift_problem(a), config);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective_value ==
          doctest::Approx(-smallest_eigenvalue(a)).epsilon(1e-5));
  }
}

TEST_CASE("lyapunov feasibility tracks the spectral radius") {
  SdpSolution stable = solve(lyapunov_problem(0.5 * Matrix::Identity(2, 2)));
  CHECK(stable.status == SolveStatus::Optimal);

  SdpSolution unstable = solve(lyapunov_problem(2.0 * Matrix::Identity(2, 2)));
  CHECK(unstable.status == SolveStatus::Infeasible);
}

TEST_CASE("solutions round-trip through check_feasible") {
  Matrix a(3, 3);
  a << 0.2, 0.4, 0.0,
       0.1, -0.3, 0.2,
       0.0, 0.5, 0.1;
  SolverConfig config;
  SdpProblem problem = lyapunov_problem(a);
  SdpSolution sol = solve(problem, config);
  REQUIRE(sol.status == SolveStatus::Optimal);
  FeasibilityReport report = check_feasible(problem, sol.v, config);
  CHECK(report.feasible);
  CHECK(report.block_slacks.maxCoeff() <= -config.strictness_margin + config.feas_tol);
}

TEST_CASE("check_feasible rejects the zero vector when F0 has a positive eigenvalue") {
  Matrix a(2, 2);
  a << 0, 1, 1, 0;
  SdpProblem problem = min_shift_problem(a);  // F0 = -A has eigenvalue +1
  FeasibilityReport report = check_feasible(problem, Vector::Zero(1));
  CHECK_FALSE(report.feasible);
  CHECK(report.block_slacks.maxCoeff() > 0.0);
}

TEST_CASE("check_feasible rejects a perturbation along a violating direction") {
  Matrix a(2, 2);
  a << 0, 1, 1, 0;
  SolverConfig config;
  SdpProblem problem = min_shift_problem(a);
  SdpSolution sol = solve(problem, config);
  REQUIRE(sol.status == SolveStatus::Optimal);
  // Decreasing t pushes the top eigenvalue of M(t) = -A - tI upward.
  Vector v = sol.v;
  v[0] -= 10.0 * config.feas_tol;
  FeasibilityReport report = check_feasible(problem, v, config);
  CHECK_FALSE(report.feasible);
}

TEST_CASE("adding an LMI block never decreases the optimum") {
  std::mt19937_64 rng(211);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int nv = 3;
    const int dim = 3;
    SdpProblem p = SdpProblem::with_vars(nv);
    p.lower_bounds = Vector::Constant(nv, -10.0);
    p.upper_bounds = Vector::Constant(nv, 10.0);
    for (int i = 0; i < nv; ++i) p.objective[i] = dist(rng);

    // Blocks built to be strictly feasible at a common point v_bar.
    Vector v_bar(nv);
    for (int i = 0; i < nv; ++i) v_bar[i] = dist(rng);
    auto feasible_block = [&]() {
      LmiBlock block;
      block.dim = dim;
      Matrix sum = Matrix::Zero(dim, dim);
      for (int i = 0; i < nv; ++i) {
        Matrix fi = random_symmetric(rng, dim);
        block.coefficient_terms.push_back({i, SymmetricMatrix::from_dense(fi)});
        sum += v_bar[i] * fi;
      }
      Matrix g = random_symmetric(rng, dim);
      Matrix slack = g * g.transpose() + 0.5 * Matrix::Identity(dim, dim);
      block.constant_term = SymmetricMatrix::from_dense(-sum - slack);
      return block;
    };

    p.lmi_blocks.push_back(feasible_block());
    SdpSolution before = solve(p);
    p.lmi_blocks.push_back(feasible_block());
    SdpSolution after = solve(p);
    REQUIRE(before.status == SolveStatus::Optimal);
    REQUIRE(after.status == SolveStatus::Optimal);
    CHECK(after.objective_value >= before.objective_value - 1e-5);
  }
}

TEST_CASE("equality constraints are honored") {
  // minimize v0 + v1 with v0 + v1 = 1 pinned by an equality; LMI keeps both in [-5, 5].
  SdpProblem p = SdpProblem::with_vars(2);
  p.objective << 1.0, 0.0;
  p.eq_lhs = Matrix::Ones(1, 2);
  p.eq_rhs = Vector::Ones(1);
  LmiBlock box;
  box.dim = 2;
  Matrix f0(2, 2);
  f0 << -5, 0, 0, -5;
  box.constant_term = SymmetricMatrix::from_dense(f0);
  Matrix e0 = Matrix::Zero(2, 2), e1 = Matrix::Zero(2, 2);
  e0(0, 0) = 1.0;
  e1(1, 1) = 1.0;
  box.coefficient_terms.push_back({0, SymmetricMatrix::from_dense(e0)});
  box.coefficient_terms.push_back({1, SymmetricMatrix::from_dense(e1)});
  p.lmi_blocks.push_back(box);

  SdpSolution sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.v[0] + sol.v[1] == doctest::Approx(1.0).epsilon(1e-9));
  // v1 rides its block limit +5, so the equality pins v0 near -4.
  CHECK(sol.v[0] == doctest::Approx(-4.0).epsilon(1e-4));
}

TEST_CASE("problem validation rejects malformed input") {
  SdpProblem p = SdpProblem::with_vars(2);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);  // no blocks
  LmiBlock block;
  block.dim = 2;
  block.constant_term = SymmetricMatrix(2);
  block.coefficient_terms.push_back({5, SymmetricMatrix(2)});
  p.lmi_blocks.push_back(block);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);  // index out of range
}

TEST_CASE("dump_problem writes a readable block dump") {
  Matrix a(2, 2);
  a << 0, 1, 1, 0;
  SdpProblem problem = min_shift_problem(a);
  const std::string path = "sdp_dump_test.txt";
  dump_problem(problem, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  bool saw_block = false;
  while (std::getline(in, line))
    if (line.rfind("block 2 1", 0) == 0) saw_block = true;
  CHECK(saw_block);
  in.close();
  std::remove(path.c_str());
}
