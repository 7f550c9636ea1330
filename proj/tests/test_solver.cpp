#include <cmath>
#include <random>

#include <Eigen/SparseCholesky>
#include <gtest/gtest.h>

#include "richards/assembly.hpp"
#include "richards/solver.hpp"

using namespace richards;

namespace {

struct AbsPhi
{
  double value(double x) const { return std::abs(x); }
  double slope(double x) const { return x >= 0 ? 1.0 : -1.0; }
  double left_slope(double x) const { return x > 0 ? 1.0 : -1.0; }
  double curvature(double) const { return 0.0; }
  std::array<double, 1> kinks() const { return {0.0}; }
};

/// phi_q(x) = c_q x^4 / 4, smooth and convex.
struct QuarticTerm
{
  std::vector<double> c;

  struct Node
  {
    double k;
    double value(double x) const { return 0.25 * k * x * x * x * x; }
    double slope(double x) const { return k * x * x * x; }
    double left_slope(double x) const { return slope(x); }
    double curvature(double x) const { return 3 * k * x * x; }
    std::array<double, 0> kinks() const { return {}; }
  };

  Node node(std::size_t q) const { return {c[q]}; }
};

SparseMatrix laplace_1d(int n, double shift)
{
  SparseMatrix A(n, n);
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 2.0 + shift);
    if (i > 0)
      t.emplace_back(i, i - 1, -1.0);
    if (i + 1 < n)
      t.emplace_back(i, i + 1, -1.0);
  }
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

template <class Term>
ObstacleProblem<Term> box_problem(SparseMatrix A, Vector b, Term phi, double lo, double hi)
{
  ObstacleProblem<Term> P;
  const auto n = b.size();
  P.A = std::move(A);
  P.b = std::move(b);
  P.phi = std::move(phi);
  P.lower = Vector::Constant(n, lo);
  P.upper = Vector::Constant(n, hi);
  return P;
}

const Hydraulics& sand_bc()
{
  static const Hydraulics h(sand());
  return h;
}

struct SeepStep
{
  MeshHierarchy hier;
  TraceGrid tg;
  Vector x0;
  ObstacleProblem<RichardsNodalTerm> P;

  explicit SeepStep(int J, double w = 0.0)
    : hier(build_rect_hierarchy(10, 1, 10, 1, J, BoundarySpec{{{0.0, 0.5}, {9.5, 10.0}}})),
      tg(trace_grid(hier.fine()))
  {
    const auto& hyd = sand_bc();
    x0 = Vector::Constant(Eigen::Index(hier.fine().vertex_count()), hyd.kirchhoff(-2e4).reduced);
    Vector wv(static_cast<Eigen::Index>(tg.size()));
    for (std::size_t k = 0; k < tg.size(); ++k)
      wv[Eigen::Index(k)] = tg.centers[k] >= 5.0 ? w : 0.0;
    P = assemble_spatial_problem(hier, J, x0, wv, StepParams{}, hyd);
  }
};

} // namespace

TEST(ScalarMinimize, ProjectedQuadratic)
{
  const ZeroTerm::Node z;
  EXPECT_EQ(0.0 + scalar_convex_minimize(1.0, -1.0, z, -infinity, 0.0, 0.0), 0.0);
  EXPECT_NEAR(0.0 + scalar_convex_minimize(1.0, -1.0, z, -infinity, infinity, 0.0), 1.0, 1e-15);
  EXPECT_NEAR(2.0 + scalar_convex_minimize(1.0, -1.0, z, -infinity, infinity, 2.0), 1.0, 1e-15);
}

TEST(ScalarMinimize, KinkBySignTest)
{
  EXPECT_EQ(0.3 + scalar_convex_minimize(1.0, -0.5, AbsPhi{}, -infinity, infinity, 0.3), 0.0);
  EXPECT_NEAR(scalar_convex_minimize(1.0, -3.0, AbsPhi{}, -infinity, infinity, 0.0), 2.0, 1e-14);
  EXPECT_NEAR(scalar_convex_minimize(1.0, 4.0, AbsPhi{}, -infinity, infinity, 0.0), -3.0, 1e-14);
}

TEST(ScalarMinimize, NotCoercive)
{
  EXPECT_THROW(scalar_convex_minimize(0.0, 1.0, ZeroTerm::Node{}, -1.0, 1.0, 0.0), NotCoercive);
  EXPECT_THROW(scalar_convex_minimize(-1.0, 1.0, ZeroTerm::Node{}, -1.0, 1.0, 0.0), NotCoercive);
}

TEST(ScalarMinimize, NonlinearTermComplementarity)
{
  const QuarticTerm::Node nd{2.0};
  for (double r : {-10.0, -0.1, 0.0, 0.7, 25.0}) {
    const double x = scalar_convex_minimize(0.5, r, nd, -infinity, infinity, 0.0);
    EXPECT_NEAR(0.5 * x + r + nd.slope(x), 0.0, 1e-13 * std::max(1.0, std::abs(r)));
  }
  const double x = scalar_convex_minimize(0.5, -10.0, nd, -infinity, 1.0, 0.0);
  EXPECT_EQ(x, 1.0);
}

TEST(ScalarMinimize, RichardsNode)
{
  SeepStep F(1, 0.01);
  const auto& P = F.P;
  for (std::size_t q = 0; q < P.size(); ++q) {
    const auto nd = P.phi.node(q);
    const double a = P.A.coeff(Eigen::Index(q), Eigen::Index(q));
    for (double r : {-P.b[q] - 1e-4, -P.b[q], -P.b[q] + 1e-5}) {
      const double x = F.x0[q] + scalar_convex_minimize(a, r, nd, P.lower[q], P.upper[q], F.x0[q]);
      const double scale = problem_scale(P, F.x0) * a;
      if (x > P.lower[q]) {
        EXPECT_LE(a * x + r + nd.left_slope(x), 1e-12 * scale);
      }
      if (x < P.upper[q]) {
        EXPECT_GE(a * x + r + nd.slope(x), -1e-12 * scale);
      }
    }
  }
}

TEST(PGS, TwoByTwo)
{
  SparseMatrix A = laplace_1d(2, 0.0);
  auto P = box_problem(A, Vector::Ones(2), ZeroTerm{}, -infinity, infinity);
  Vector v = Vector::Zero(2);
  pgs_sweep(P, v);
  EXPECT_NEAR(v[0], 0.5, 1e-15);
  EXPECT_NEAR(v[1], 0.75, 1e-15);
  for (int i = 0; i < 100; ++i)
    pgs_sweep(P, v);
  EXPECT_NEAR(v[0], 1.0, 1e-14);
  EXPECT_NEAR(v[1], 1.0, 1e-14);
}

TEST(PGS, SingleVertexExact)
{
  SparseMatrix A(1, 1);
  A.insert(0, 0) = 3.0;
  auto P = box_problem(A, Vector::Constant(1, 6.0), QuarticTerm{{1.0}}, -infinity, infinity);
  Vector v = Vector::Zero(1);
  pgs_sweep(P, v);
  EXPECT_NEAR(3 * v[0] + v[0] * v[0] * v[0], 6.0, 1e-13);
  const double before = v[0];
  EXPECT_LE(pgs_sweep(P, v), 1e-15 * 6.0);
  EXPECT_NEAR(v[0], before, 1e-15);
}

TEST(PGS, FixedPointAtMinimizer)
{
  SeepStep F(2, 0.01);
  SolverConfig cfg;
  cfg.tol = 1e-13;
  SolveReport rep;
  Vector v = solve(F.P, F.x0, cfg, &F.hier, &rep);
  EXPECT_LE(pgs_sweep(F.P, v, cfg.scalar_tol), 1e-10 * rep.scale);
}

TEST(PGS, AdmissibleAndMonotone)
{
  std::mt19937_64 rng(17);
  std::normal_distribution<double> N;
  const int n = 30;
  Vector b(n);
  for (auto& x : b)
    x = 3 * N(rng);
  auto P = box_problem(laplace_1d(n, 0.1), b, QuarticTerm{std::vector<double>(n, 0.5)}, -0.7, 0.4);
  Vector v = Vector::Zero(n);
  double E = evaluate_energy(P, v);
  for (int s = 0; s < 20; ++s) {
    pgs_sweep(P, v);
    for (int q = 0; q < n; ++q) {
      EXPECT_GE(v[q], -0.7);
      EXPECT_LE(v[q], 0.4);
    }
    const double E1 = evaluate_energy(P, v);
    EXPECT_LE(E1, E + 1e-12 * std::abs(E));
    E = E1;
  }
}

TEST(CoarseCorrection, QuadraticNewtonStep)
{
  std::mt19937_64 rng(19);
  std::normal_distribution<double> N;
  const int n = 40;
  Vector b(n);
  for (auto& x : b)
    x = N(rng);
  auto P = box_problem(laplace_1d(n, 0.05), b, ZeroTerm{}, -infinity, infinity);
  Vector v = Vector::Zero(n);
  SolverConfig cfg;
  const auto info = coarse_correction(P, v, nullptr, cfg, problem_scale(P, v));
  EXPECT_EQ(info.theta, 1.0);
  EXPECT_EQ(info.truncated, 0u);
  const Vector exact = Eigen::MatrixXd(P.A).ldlt().solve(b);
  EXPECT_LE((v - exact).cwiseAbs().maxCoeff(), 1e-12 * exact.cwiseAbs().maxCoeff());
}

TEST(CoarseCorrection, AllTruncatedIsNoop)
{
  const int n = 5;
  auto P = box_problem(laplace_1d(n, 0.0), Vector::Constant(n, 10.0), ZeroTerm{}, 0.0, 1.0);
  Vector v = Vector::Ones(n);
  const Vector before = v;
  const auto info = coarse_correction(P, v, nullptr, SolverConfig{}, 1.0);
  EXPECT_EQ(info.truncated, std::size_t(n));
  EXPECT_EQ(info.theta, 0.0);
  EXPECT_EQ(v, before);
}

TEST(CoarseCorrection, EnergyNonincreasingRandom)
{
  std::mt19937_64 rng(23);
  std::normal_distribution<double> N;
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 5 + int(20 * U(rng));
    Vector b(n);
    for (auto& x : b)
      x = 5 * N(rng);
    std::vector<double> c(n);
    for (auto& x : c)
      x = U(rng);
    auto P = box_problem(laplace_1d(n, 0.01 + U(rng)), b, QuarticTerm{c}, -1.0 - U(rng), 0.5 + U(rng));
    Vector v(n);
    for (int q = 0; q < n; ++q)
      v[q] = P.lower[q] + (P.upper[q] - P.lower[q]) * U(rng);
    pgs_sweep(P, v);
    const double E0 = evaluate_energy(P, v);
    const auto info = coarse_correction(P, v, nullptr, SolverConfig{}, problem_scale(P, v));
    const double E1 = evaluate_energy(P, v);
    EXPECT_LE(E1, E0 + 1e-12 * std::abs(E0)) << trial;
    EXPECT_LE(info.energy_change, 0.0);
    for (int q = 0; q < n; ++q) {
      EXPECT_GE(v[q], P.lower[q]);
      EXPECT_LE(v[q], P.upper[q]);
    }
  }
}

TEST(Solve, QuadraticMatchesDirect)
{
  std::mt19937_64 rng(29);
  std::normal_distribution<double> N;
  const int n = 150;
  Vector b(n);
  for (auto& x : b)
    x = N(rng);
  auto P = box_problem(laplace_1d(n, 1e-3), b, ZeroTerm{}, -infinity, infinity);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Eigen::SparseMatrix<double>(P.A));
  const Vector exact = ldlt.solve(b);
  SolverConfig cfg;
  cfg.tol = 1e-14;
  const Vector v = solve(P, Vector::Zero(n), cfg);
  EXPECT_LE((v - exact).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, exact.cwiseAbs().maxCoeff()));
}

TEST(Solve, MMGMatchesPGS)
{
  SeepStep F(1, 0.01);
  SolverConfig mmg;
  SolverConfig pgs;
  pgs.mode = SolverMode::PGSOnly;
  pgs.tol = 1e-13;
  pgs.max_iterations = 200000;
  SolveReport rm, rp;
  const Vector a = solve(F.P, F.x0, mmg, &F.hier, &rm);
  const Vector b = solve(F.P, F.x0, pgs, &F.hier, &rp);
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-9 * rm.scale);
  EXPECT_LT(rm.iterations, rp.iterations);
}

TEST(Solve, EnergyHistoryNonincreasing)
{
  for (double w : {0.0, 0.01, 0.05}) {
    SeepStep F(2, w);
    SolveReport rep;
    solve(F.P, F.x0, SolverConfig{}, &F.hier, &rep);
    ASSERT_GE(rep.energy.size(), 2u);
    for (std::size_t k = 1; k < rep.energy.size(); ++k)
      EXPECT_LE(rep.energy[k], rep.energy[k - 1] + 1e-12 * std::abs(rep.energy[k - 1]));
    EXPECT_TRUE(rep.converged);
    EXPECT_LE(rep.residual, SolverConfig{}.tol);
  }
}

TEST(Solve, AdmissibleStart)
{
  SeepStep F(1);
  Vector v0 = F.x0;
  v0[0] = -5.0; // below the floor, projected on entry
  const Vector v = solve(F.P, v0, SolverConfig{}, &F.hier);
  for (std::size_t q = 0; q < F.P.size(); ++q) {
    EXPECT_GE(v[q], F.P.lower[q]);
    EXPECT_LE(v[q], F.P.upper[q]);
  }
}

TEST(Solve, MirrorSymmetric)
{
  const auto hier = build_rect_hierarchy(10, 1, 10, 1, 2, BoundarySpec{{{0.0, 0.5}, {9.5, 10.0}}});
  const auto tg = trace_grid(hier.fine());
  const auto& m = hier.fine();
  const auto& hyd = sand_bc();
  const Vector x0 = Vector::Constant(Eigen::Index(m.vertex_count()), hyd.kirchhoff(-2e4).reduced);
  Vector w(static_cast<Eigen::Index>(tg.size()));
  for (std::size_t k = 0; k < tg.size(); ++k)
    w[Eigen::Index(k)] = 0.03 * std::exp(-std::pow(tg.centers[k] - 5.0, 2));
  const auto P = assemble_spatial_problem(hier, 2, x0, w, StepParams{}, hyd);
  SolverConfig cfg;
  cfg.tol = 1e-13;
  SolveReport rep;
  const Vector v = solve(P, x0, cfg, &hier, &rep);
  for (int k = 0; k <= m.ny; ++k)
    for (int i = 0; i <= m.nx; ++i)
      EXPECT_NEAR(v[m.index(i, k)], v[m.index(m.nx - i, k)], 1e-9 * rep.scale);
}

TEST(Solve, RestState)
{
  const auto hier = build_rect_hierarchy(10, 1, 10, 1, 2, {});
  const auto tg = trace_grid(hier.fine());
  const auto& hyd = sand_bc();
  const auto& m = hier.fine();
  const Vector x = Vector::Constant(Eigen::Index(m.vertex_count()), hyd.reduced_zero());
  const StepParams prm;
  auto P = assemble_spatial_problem(hier, 2, x, Vector::Zero(Eigen::Index(tg.size())), prm, hyd);
  P.b += prm.tau * assemble_gravity_load(m, std::vector<double>(m.vertex_count(), 1.0), hyd, prm.upwind);
  SolveReport rep;
  const Vector v = solve(P, x, SolverConfig{}, &hier, &rep);
  EXPECT_EQ(rep.iterations, 0);
  EXPECT_EQ(v, x);
}

TEST(Solve, NonConvergenceCarriesReport)
{
  SeepStep F(2, 0.01);
  SolverConfig cfg;
  cfg.mode = SolverMode::PGSOnly;
  cfg.max_iterations = 2;
  try {
    solve(F.P, F.x0, cfg, &F.hier);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_EQ(e.report().iterations, 2);
    EXPECT_GT(e.report().residual, cfg.tol);
  }
}

TEST(Solve, IterationsMildlyMeshDependent)
{
  int its[2];
  int k = 0;
  for (int J : {2, 4}) {
    SeepStep F(J, 0.01);
    SolveReport rep;
    solve(F.P, F.x0, SolverConfig{}, &F.hier, &rep);
    its[k++] = rep.iterations;
  }
  EXPECT_LE(its[1], 2 * std::max(its[0], 1)) << its[0] << " " << its[1];
}

TEST(ViResidual, Behaviour)
{
  SeepStep F(1, 0.01);
  SolverConfig cfg;
  cfg.tol = 1e-13;
  SolveReport rep;
  const Vector u = solve(F.P, F.x0, cfg, &F.hier, &rep);
  EXPECT_LE(vi_residual(F.P, u, rep.scale), cfg.tol);

  // interior vertex perturbed: residual grows like a_qq * eps plus the curvature term
  const auto& m = F.hier.fine();
  const Eigen::Index q = m.index(m.nx / 2, m.ny / 2);
  const double eps = 1e-3 * rep.scale;
  Vector v = u;
  v[q] += eps;
  const double a = F.P.A.coeff(q, q);
  const double expect = a * eps + (F.P.phi.node(std::size_t(q)).slope(v[q]) - F.P.phi.node(std::size_t(q)).slope(u[q]));
  EXPECT_NEAR(vi_residual_abs(F.P, v), expect, 1e-6 * expect);
  EXPECT_GT(expect, a * eps);
}

TEST(ViResidual, ActiveUpperBoundPushingOutward)
{
  SparseMatrix A(1, 1);
  A.insert(0, 0) = 1.0;
  auto P = box_problem(A, Vector::Constant(1, 5.0), ZeroTerm{}, -infinity, 0.0);
  EXPECT_EQ(vi_residual_abs(P, Vector::Zero(1)), 0.0);
  EXPECT_GT(vi_residual_abs(P, Vector::Constant(1, -1.0)), 0.0);
}
