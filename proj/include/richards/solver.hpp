#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "richards/assembly.hpp"
#include "richards/errors.hpp"
#include "richards/mesh.hpp"

namespace richards {

enum class SolverMode
{
  MMG,
  PGSOnly
};

struct SolverConfig
{
  int max_iterations = 1000;
  double tol = 1e-12;        ///< on vi_residual, relative to max(diag A) * scale
  int pre_smooth = 1;
  int post_smooth = 1;
  SolverMode mode = SolverMode::MMG;
  double scalar_tol = 1e-15; ///< relative step size at which the 1D Newton iteration stops
  double kink_tol = 1e-10;   ///< truncation band around curvature jumps, relative to scale
  int vcycle_smooth = 2;     ///< Gauss-Seidel sweeps per level inside the linear V-cycle

  void validate() const
  {
    if (!(tol > 0))
      throw ValidationError("solver.tol", "must be > 0");
    if (max_iterations < 1)
      throw ValidationError("solver.max_iterations", "must be >= 1");
    if (pre_smooth < 1 || post_smooth < 1)
      throw ValidationError("solver.pre_smooth", "sweep counts must be >= 1");
    if (!(scalar_tol > 0))
      throw ValidationError("solver.scalar_tol", "must be > 0");
  }
};

struct SolveReport
{
  int iterations = 0;
  double residual = infinity;    ///< relative VI residual at exit
  std::vector<double> energy;    ///< energy before the first and after every outer iteration
  double wall_time = 0.0;        ///< seconds
  std::size_t active_lower = 0;
  std::size_t active_upper = 0;
  double scale = 1.0;
  bool converged = false;
};

class NonConvergence : public Error
{
public:
  NonConvergence(const std::string& what, SolveReport report) : Error(what), report_(std::move(report)) {}

  const SolveReport& report() const noexcept { return report_; }

private:
  SolveReport report_;
};

namespace detail {

/// Minimizer x of 1/2 a x^2 + r x + phi(x) over [lo, hi].
template <class Phi>
double scalar_minimizer(double a, double r, const Phi& phi, double lo, double hi, double x0, double scalar_tol)
{
  if (!(a > 0))
    throw NotCoercive("scalar_convex_minimize: quadratic coefficient must be > 0");
  x0 = std::clamp(x0, lo, hi);
  auto dl = [&](double x) { return a * x + r + phi.left_slope(x); };
  auto dr = [&](double x) { return a * x + r + phi.slope(x); };

  // Breakpoints: bounds and kinks, increasing.
  std::array<double, 8> pts{};
  int np = 0;
  pts[np++] = lo;
  {
    auto ks = phi.kinks();
    std::array<double, 6> inner{};
    int nk = 0;
    for (double k : ks)
      if (k > lo && k < hi && nk < 6)
        inner[nk++] = k;
    std::sort(inner.begin(), inner.begin() + nk);
    for (int i = 0; i < nk; ++i)
      if (i == 0 || inner[i] != inner[i - 1])
        pts[np++] = inner[i];
  }
  pts[np++] = hi;

  if (std::isfinite(lo) && dr(lo) >= 0)
    return lo;
  if (std::isfinite(hi) && dl(hi) <= 0)
    return hi;

  // First breakpoint where the left derivative is positive; the minimizer lies below it.
  int i = 1;
  for (; i < np - 1; ++i) {
    const double k = pts[i];
    const double gl = dl(k);
    if (gl > 0)
      break;
    if (dr(k) >= 0)
      return k;
  }
  double L = pts[i - 1], R = pts[i];

  // Geometric bracketing towards infinite ends.
  const double step0 = std::max({std::abs(x0), std::abs(r) / a, 1e-300});
  if (!std::isfinite(L)) {
    double step = step0;
    L = std::min(R, x0) - step;
    while (dr(L) >= 0) {
      R = L;
      step *= 2;
      L -= step;
      if (!std::isfinite(L))
        throw NotCoercive("scalar_convex_minimize: no minimizer below");
    }
  }
  if (!std::isfinite(R)) {
    double step = step0;
    R = std::max(L, x0) + step;
    while (dl(R) <= 0) {
      L = R;
      step *= 2;
      R += step;
      if (!std::isfinite(R))
        throw NotCoercive("scalar_convex_minimize: no minimizer above");
    }
  }

  // Safeguarded Newton on the derivative within (L, R), dr(L) < 0 < dl(R).
  double x = (x0 > L && x0 < R) ? x0 : 0.5 * (L + R);
  for (int it = 0; it < 400; ++it) {
    const double f = dr(x);
    if (f == 0)
      return x;
    if (f < 0)
      L = x;
    else
      R = x;
    if (!(R > L) || R - L <= 2 * std::numeric_limits<double>::epsilon() * std::max(std::abs(L), std::abs(R)))
      break;
    const double curv = a + phi.curvature(x);
    double next = std::isfinite(curv) ? x - f / curv : 0.5 * (L + R);
    if (!(next > L && next < R))
      next = 0.5 * (L + R);
    if (std::abs(next - x) <= scalar_tol * std::abs(x) && std::isfinite(next)) {
      x = next;
      break;
    }
    x = next;
  }
  return std::clamp(x, lo, hi);
}

template <class Term>
double max_diagonal(const ObstacleProblem<Term>& P)
{
  double m = 0;
  for (Eigen::Index q = 0; q < P.A.rows(); ++q)
    m = std::max(m, P.A.coeff(q, q));
  return m > 0 ? m : 1.0;
}

template <class Term>
double term_scale(const Term& t)
{
  if constexpr (requires { t.hydraulics(); }) {
    const auto& hyd = t.hydraulics();
    return hyd.mobility() * hyd.characteristic_pressure();
  } else {
    return 0.0;
  }
}

} // namespace detail

/// Step alpha minimizing 1/2 a (x0+alpha)^2 + r (x0+alpha) + phi(x0+alpha) with x0+alpha in [lo, hi].
template <class Phi>
double scalar_convex_minimize(double a, double r, const Phi& phi, double lo, double hi, double x0,
                              double scalar_tol = 1e-15)
{
  return detail::scalar_minimizer(a, r, phi, lo, hi, x0, scalar_tol) - x0;
}

/// Problem scale: max(|b|/max diag A, |v0|, intrinsic scale of the nodal term).
template <class Term>
double problem_scale(const ObstacleProblem<Term>& P, const Vector& v0)
{
  const double d = detail::max_diagonal(P);
  double s = std::max(P.b.size() ? P.b.cwiseAbs().maxCoeff() / d : 0.0, v0.size() ? v0.cwiseAbs().maxCoeff() : 0.0);
  s = std::max(s, detail::term_scale(P.phi));
  return s > 0 ? s : 1.0;
}

/// One lexicographic projected nonlinear Gauss-Seidel pass; returns the largest change.
template <class Term>
double pgs_sweep(const ObstacleProblem<Term>& P, Vector& v, double scalar_tol = 1e-15)
{
  double change = 0;
  for (Eigen::Index q = 0; q < P.A.outerSize(); ++q) {
    double diag = 0, off = 0;
    for (typename SparseMatrix::InnerIterator it(P.A, q); it; ++it) {
      if (it.col() == q)
        diag += it.value();
      else
        off += it.value() * v[it.col()];
    }
    const double r = off - P.b[q];
    const double x = detail::scalar_minimizer(diag, r, P.phi.node(std::size_t(q)), P.lower[q], P.upper[q], v[q],
                                              scalar_tol);
    change = std::max(change, std::abs(x - v[q]));
    v[q] = x;
  }
  return change;
}

/// Largest coordinatewise violation of the variational inequality, absolute.
template <class Term>
double vi_residual_abs(const ObstacleProblem<Term>& P, const Vector& v)
{
  const Vector g = P.A * v - P.b;
  double res = 0;
  for (Eigen::Index q = 0; q < v.size(); ++q) {
    const auto nd = P.phi.node(std::size_t(q));
    if (v[q] > P.lower[q])
      res = std::max(res, g[q] + nd.left_slope(v[q]));
    if (v[q] < P.upper[q])
      res = std::max(res, -(g[q] + nd.slope(v[q])));
  }
  return res;
}

/// vi_residual_abs relative to max(diag A) * scale.
template <class Term>
double vi_residual(const ObstacleProblem<Term>& P, const Vector& v, double scale)
{
  return vi_residual_abs(P, v) / (detail::max_diagonal(P) * scale);
}

namespace detail {

inline void gauss_seidel(const SparseMatrix& H, const Vector& rhs, Vector& x, int sweeps, bool backward)
{
  const Eigen::Index n = H.rows();
  for (int s = 0; s < sweeps; ++s)
    for (Eigen::Index k = 0; k < n; ++k) {
      const Eigen::Index q = backward ? n - 1 - k : k;
      double diag = 0, acc = rhs[q];
      for (SparseMatrix::InnerIterator it(H, q); it; ++it) {
        if (it.col() == q)
          diag += it.value();
        else
          acc -= it.value() * x[it.col()];
      }
      if (diag > 0)
        x[q] = acc / diag;
    }
}

/// One V-cycle for H_top x = rhs; levels[i] are Galerkin operators, transfers[i] maps level i to i+1.
inline Vector vcycle(const std::vector<SparseMatrix>& H, const std::vector<SparseMatrix>& transfer, int level,
                     const Vector& rhs, int sweeps)
{
  if (level == 0) {
    const Eigen::MatrixXd D(H[0]);
    return D.completeOrthogonalDecomposition().solve(rhs);
  }
  Vector x = Vector::Zero(rhs.size());
  gauss_seidel(H[level], rhs, x, sweeps, false);
  const Vector r = rhs - H[level] * x;
  const Vector rc = transfer[level - 1].transpose() * r;
  const Vector ec = vcycle(H, transfer, level - 1, rc, sweeps);
  x += transfer[level - 1] * ec;
  gauss_seidel(H[level], rhs, x, sweeps, true);
  return x;
}

} // namespace detail

/// Outcome of one coarse-grid correction.
struct CorrectionInfo
{
  std::size_t truncated = 0;
  double theta = 0.0;
  double energy_change = 0.0;
};

/// Truncated Newton linearization, one linear V-cycle, projection and a halving line search.
///
/// Without a hierarchy (or on level 0) the truncated linear system is solved directly.
template <class Term>
CorrectionInfo coarse_correction(const ObstacleProblem<Term>& P, Vector& v, const MeshHierarchy* hier,
                                 const SolverConfig& cfg, double scale)
{
  const Eigen::Index n = v.size();
  CorrectionInfo info;
  Vector grad = P.A * v - P.b;
  Vector curv(n);
  std::vector<char> trunc(std::size_t(n), 0);
  const double band = cfg.kink_tol * scale;
  for (Eigen::Index q = 0; q < n; ++q) {
    const auto nd = P.phi.node(std::size_t(q));
    grad[q] += nd.slope(v[q]);
    curv[q] = nd.curvature(v[q]);
    bool t = v[q] <= P.lower[q] || v[q] >= P.upper[q] || !std::isfinite(curv[q]) || !std::isfinite(grad[q]);
    for (double k : nd.kinks())
      if (std::abs(v[q] - k) <= band)
        t = true;
    trunc[q] = t;
    info.truncated += t;
  }
  if (info.truncated == std::size_t(n))
    return info;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(std::size_t(P.A.nonZeros()) + std::size_t(n));
  Vector rhs(n);
  for (Eigen::Index q = 0; q < n; ++q) {
    if (trunc[q]) {
      trip.emplace_back(q, q, 1.0);
      rhs[q] = 0;
      continue;
    }
    rhs[q] = -grad[q];
    trip.emplace_back(q, q, curv[q]);
    for (SparseMatrix::InnerIterator it(P.A, q); it; ++it)
      if (!trunc[it.col()])
        trip.emplace_back(q, it.col(), it.value());
  }
  SparseMatrix Hf(n, n);
  Hf.setFromTriplets(trip.begin(), trip.end());

  Vector d;
  const int top = P.level;
  if (hier && top > 0 && top <= hier->finest()) {
    std::vector<SparseMatrix> H(std::size_t(top) + 1);
    std::vector<SparseMatrix> T(static_cast<std::size_t>(top));
    H[top] = Hf;
    for (int j = top - 1; j >= 0; --j) {
      T[j] = hier->prolongations[j];
      if (j == top - 1) {
        // Coarse functions must not touch truncated fine nodes.
        for (Eigen::Index q = 0; q < n; ++q)
          if (trunc[q])
            for (SparseMatrix::InnerIterator it(T[j], q); it; ++it)
              it.valueRef() = 0.0;
        T[j].prune(0.0);
      }
      H[j] = SparseMatrix(T[j].transpose() * H[j + 1] * T[j]);
    }
    d = detail::vcycle(H, T, top, rhs, cfg.vcycle_smooth);
  } else {
    const Eigen::MatrixXd D(Hf);
    d = D.completeOrthogonalDecomposition().solve(rhs);
  }

  for (Eigen::Index q = 0; q < n; ++q) {
    if (trunc[q] || !std::isfinite(d[q])) {
      d[q] = 0;
      continue;
    }
    d[q] = std::clamp(d[q], P.lower[q] - v[q], P.upper[q] - v[q]);
  }
  if (d.cwiseAbs().maxCoeff() == 0)
    return info;

  double theta = 1.0;
  for (int k = 0; k <= 30; ++k, theta *= 0.5) {
    Vector step = theta * d;
    // keep the trial point inside the box despite rounding of v + step
    for (Eigen::Index q = 0; q < n; ++q)
      step[q] = std::clamp(v[q] + step[q], P.lower[q], P.upper[q]) - v[q];
    const double dF = energy_difference(P, v, step);
    if (dF <= 0) {
      v += step;
      for (Eigen::Index q = 0; q < n; ++q)
        v[q] = std::clamp(v[q], P.lower[q], P.upper[q]);
      info.theta = theta;
      info.energy_change = dF;
      return info;
    }
  }
  return info;
}

/// Monotone multigrid (or projected Gauss-Seidel alone) for the obstacle problem.
template <class Term>
Vector solve(const ObstacleProblem<Term>& P, const Vector& v0, const SolverConfig& cfg,
             const MeshHierarchy* hier = nullptr, SolveReport* report_out = nullptr)
{
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  if (v0.size() != P.b.size())
    throw DimensionError("solve: initial iterate has the wrong size");
  Vector v = v0;
  for (Eigen::Index q = 0; q < v.size(); ++q)
    v[q] = std::clamp(v[q], P.lower[q], P.upper[q]);

  SolveReport rep;
  rep.scale = problem_scale(P, v0);
  rep.energy.push_back(evaluate_energy(P, v));
  rep.residual = vi_residual(P, v, rep.scale);

  while (rep.residual > cfg.tol && rep.iterations < cfg.max_iterations) {
    for (int s = 0; s < cfg.pre_smooth; ++s)
      pgs_sweep(P, v, cfg.scalar_tol);
    if (cfg.mode == SolverMode::MMG)
      coarse_correction(P, v, hier, cfg, rep.scale);
    for (int s = 0; s < cfg.post_smooth; ++s)
      pgs_sweep(P, v, cfg.scalar_tol);
    ++rep.iterations;
    rep.energy.push_back(evaluate_energy(P, v));
    rep.residual = vi_residual(P, v, rep.scale);
  }
  rep.converged = rep.residual <= cfg.tol;
  for (Eigen::Index q = 0; q < v.size(); ++q) {
    rep.active_lower += v[q] <= P.lower[q];
    rep.active_upper += v[q] >= P.upper[q];
  }
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (report_out)
    *report_out = rep;
  if (!rep.converged)
    throw NonConvergence("solve: VI residual above tolerance after the iteration limit", rep);
  return v;
}

} // namespace richards
