#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Sparse>

#include "richards/errors.hpp"
#include "richards/hydraulics.hpp"
#include "richards/mesh.hpp"
#include "richards/parallel.hpp"

namespace richards {

enum class UpwindScheme
{
  NodalMaxZ,
  Central
};

/// A convex problem  min 1/2 <Av,v> - <b,v> + sum_q phi_q(v_q)  subject to lower <= v <= upper.
///
/// `Term` supplies the separable part: `term.node(q)` returns an object with
/// value(x), slope(x) (right derivative), left_slope(x), curvature(x) and kinks().
template <class Term>
struct ObstacleProblem
{
  SparseMatrix A;
  Vector b;
  Term phi;
  Vector lower;
  Vector upper;
  int level = 0;

  std::size_t size() const { return std::size_t(b.size()); }
};

/// phi = 0.
struct ZeroTerm
{
  struct Node
  {
    double value(double) const { return 0.0; }
    double slope(double) const { return 0.0; }
    double left_slope(double) const { return 0.0; }
    double curvature(double) const { return 0.0; }
    std::array<double, 0> kinks() const { return {}; }
  };

  Node node(std::size_t) const { return {}; }
};

/// Lumped nodal term of the time-discrete Richards functional, in reduced coordinates.
///
/// phi_q(x) = h_q Psi_x(x) + h_q^in Psi_xi(x; w_q).
class RichardsNodalTerm
{
public:
  RichardsNodalTerm() = default;

  RichardsNodalTerm(const Hydraulics& hyd, std::vector<double> h, std::vector<double> h_in,
                    std::vector<double> w, double tau, double c, double sigma, SourceLaw f)
    : hyd_(&hyd), h_(std::move(h)), h_in_(std::move(h_in)), w_(std::move(w)), tau_(tau), c_(c),
      sigma_(sigma), f_(f)
  {
    coeff_ = hyd.porosity() - tau * f.f1;
    x_ref_ = hyd.primitive_reference();
    G_ref_ = hyd.saturation_primitive(x_ref_);
    bnd_ = tau / (c * hyd.rho_g());
  }

  class Node
  {
  public:
    Node(const RichardsNodalTerm& t, std::size_t q)
      : t_(&t), h_(t.h_[q]), h_in_(t.h_in_[q]),
        psi_(h_in_ > 0 ? psi_factor(t.w_[q], t.sigma_) : 0.0)
    {
    }

    double value(double x) const
    {
      const auto& hyd = *t_->hyd_;
      double v = h_ * (t_->coeff_ * (hyd.saturation_primitive(x) - t_->G_ref_) -
                       t_->tau_ * t_->f_.f0 * (x - t_->x_ref_));
      if (h_in_ > 0) {
        const double wgt = weight(x);
        if (wgt > 0)
          v += h_in_ * t_->bnd_ * wgt * hyd.pressure_primitive(x);
      }
      return v;
    }

    double slope(double x) const
    {
      const auto& hyd = *t_->hyd_;
      double d = h_ * (t_->coeff_ * hyd.saturation_from_reduced(x) - t_->tau_ * t_->f_.f0);
      if (h_in_ > 0) {
        const double wgt = weight(x);
        if (wgt > 0)
          d += h_in_ * t_->bnd_ * wgt * hyd.pressure_from_reduced(x);
      }
      return d;
    }

    // phi is C^1, both one-sided derivatives coincide
    double left_slope(double x) const { return slope(x); }

    double curvature(double x) const
    {
      const auto& hyd = *t_->hyd_;
      const double ds = hyd.saturation_slope(x);
      double c = ds == 0 ? 0.0 : h_ * t_->coeff_ * ds;
      if (h_in_ > 0) {
        const double wgt = weight(x);
        if (wgt > 0)
          c += h_in_ * t_->bnd_ * wgt * hyd.pressure_slope(x);
      }
      return c;
    }

    /// Points where the curvature jumps.
    std::array<double, 2> kinks() const
    {
      return {t_->hyd_->reduced_entry(), h_in_ > 0 ? t_->hyd_->reduced_zero() : t_->hyd_->reduced_entry()};
    }

  private:
    double weight(double x) const { return x >= t_->hyd_->reduced_zero() ? 1.0 : psi_; }

    const RichardsNodalTerm* t_;
    double h_, h_in_, psi_;
  };

  Node node(std::size_t q) const { return Node(*this, q); }

  const Hydraulics& hydraulics() const { return *hyd_; }
  const std::vector<double>& weights() const { return h_; }
  const std::vector<double>& boundary_weights() const { return h_in_; }
  const std::vector<double>& surface() const { return w_; }
  double tau() const { return tau_; }
  double resistance() const { return c_; }
  double sigma() const { return sigma_; }
  const SourceLaw& source() const { return f_; }

private:
  const Hydraulics* hyd_ = nullptr;
  std::vector<double> h_, h_in_, w_;
  double tau_ = 0, c_ = 1, sigma_ = 1;
  SourceLaw f_;
  double coeff_ = 0, x_ref_ = 0, G_ref_ = 0, bnd_ = 0;
};

namespace detail {

/// Gradients of the three hat functions on a triangle, and its area.
inline std::array<std::array<double, 2>, 3> hat_gradients(const Mesh& mesh, std::size_t t, double& area)
{
  const auto& tri = mesh.triangles[t];
  const auto& a = mesh.vertices[tri[0]];
  const auto& b = mesh.vertices[tri[1]];
  const auto& c = mesh.vertices[tri[2]];
  const double det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
  area = 0.5 * det;
  return {{{(b[1] - c[1]) / det, (c[0] - b[0]) / det},
           {(c[1] - a[1]) / det, (a[0] - c[0]) / det},
           {(a[1] - b[1]) / det, (b[0] - a[0]) / det}}};
}

} // namespace detail

/// S_qr = int grad(lambda_q) . grad(lambda_r).
inline SparseMatrix assemble_stiffness(const Mesh& mesh)
{
  const std::size_t nt = mesh.triangle_count();
  std::vector<std::array<double, 9>> local(nt);
  parallel_for(nt, [&](std::size_t t) {
    double area = 0;
    const auto g = detail::hat_gradients(mesh, t, area);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        local[t][3 * i + j] = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
  });
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * nt);
  for (std::size_t t = 0; t < nt; ++t)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(mesh.triangles[t][i], mesh.triangles[t][j], local[t][3 * i + j]);
  SparseMatrix S(Eigen::Index(mesh.vertex_count()), Eigen::Index(mesh.vertex_count()));
  S.setFromTriplets(trip.begin(), trip.end());
  return S;
}

/// g_q = sum_T m_T rho g |T| d(lambda_q)/dz with m_T an element mobility from the nodal saturations.
///
/// NodalMaxZ takes the mobility at the highest node of the element (the mean over tied nodes);
/// Central takes the mean of the three nodal mobilities. The time step factor is not included.
inline Vector assemble_gravity_load(const Mesh& mesh, const std::vector<double>& s, const Hydraulics& hyd,
                                    UpwindScheme upwind = UpwindScheme::NodalMaxZ)
{
  if (s.size() != mesh.vertex_count())
    throw DimensionError("assemble_gravity_load: saturation length does not match the mesh");
  const std::size_t nt = mesh.triangle_count();
  const double rg = hyd.rho_g();
  std::vector<std::array<double, 3>> local(nt);
  parallel_for(nt, [&](std::size_t t) {
    double area = 0;
    const auto g = detail::hat_gradients(mesh, t, area);
    const auto& tri = mesh.triangles[t];
    double m = 0;
    if (upwind == UpwindScheme::Central) {
      for (int v : tri)
        m += hyd.mobility(s[v]);
      m /= 3.0;
    } else {
      double ztop = -std::numeric_limits<double>::infinity();
      for (int v : tri)
        ztop = std::max(ztop, mesh.vertices[v][1]);
      int count = 0;
      for (int v : tri)
        if (mesh.vertices[v][1] == ztop) {
          m += hyd.mobility(s[v]);
          ++count;
        }
      m /= count;
    }
    for (int i = 0; i < 3; ++i)
      local[t][i] = m * rg * area * g[i][1];
  });
  Vector out = Vector::Zero(Eigen::Index(mesh.vertex_count()));
  for (std::size_t t = 0; t < nt; ++t)
    for (int i = 0; i < 3; ++i)
      out[mesh.triangles[t][i]] += local[t][i];
  return out;
}

/// Inputs of one implicit step besides the state.
struct StepParams
{
  double tau = 100.0;
  double c = 1e5;
  double sigma = 0.02;
  SourceLaw f;
  UpwindScheme upwind = UpwindScheme::NodalMaxZ;
};

/// The discrete minimization problem for u^{n+1} on level j, in reduced coordinates.
///
/// `x_n` holds u^n - datum per vertex, `w_n` the surface height per trace cell.
inline ObstacleProblem<RichardsNodalTerm> assemble_spatial_problem(const MeshHierarchy& hier, int j,
                                                                   const Vector& x_n, const Vector& w_n,
                                                                   const StepParams& prm, const Hydraulics& hyd)
{
  if (j < 0 || j > hier.finest())
    throw DimensionError("assemble_spatial_problem: no such level");
  const Mesh& mesh = hier.levels[j];
  const std::size_t n = mesh.vertex_count();
  if (std::size_t(x_n.size()) != n)
    throw DimensionError("assemble_spatial_problem: u^n does not live on this level");
  const TraceGrid tg = trace_grid(mesh);
  if (std::size_t(w_n.size()) != tg.size())
    throw DimensionError("assemble_spatial_problem: w^n does not live on this level");
  if (!(prm.tau > 0))
    throw DomainError("assemble_spatial_problem: tau must be > 0");

  std::vector<double> s(n);
  for (std::size_t q = 0; q < n; ++q)
    s[q] = hyd.saturation_from_reduced(x_n[q]);

  const std::vector<double> h = lumped_weights(mesh);
  std::vector<double> h_in(n, 0.0), w(n, 0.0);
  for (std::size_t k = 0; k < tg.size(); ++k) {
    h_in[tg.nodes[k]] = tg.weights[k];
    w[tg.nodes[k]] = w_n[k];
  }

  ObstacleProblem<RichardsNodalTerm> P;
  P.level = j;
  P.A = prm.tau * assemble_stiffness(mesh);
  const Vector g = assemble_gravity_load(mesh, s, hyd, prm.upwind);
  P.b.resize(Eigen::Index(n));
  for (std::size_t q = 0; q < n; ++q)
    P.b[q] = h[q] * hyd.porosity() * s[q] - prm.tau * g[q] + prm.tau * h_in[q] * w[q] / prm.c;
  P.lower = Vector::Constant(Eigen::Index(n), hyd.reduced_floor());
  P.upper = Vector::Constant(Eigen::Index(n), infinity);
  for (std::size_t q = 0; q < n; ++q)
    if (mesh.out_node[q])
      P.upper[q] = hyd.reduced_zero();
  P.phi = RichardsNodalTerm(hyd, h, std::move(h_in), std::move(w), prm.tau, prm.c, prm.sigma, prm.f);
  return P;
}

/// F(v) = 1/2 <Av,v> - <b,v> + sum phi_q(v_q); +infinity outside the bounds.
template <class Term>
double evaluate_energy(const ObstacleProblem<Term>& P, const Vector& v)
{
  if (v.size() != P.b.size())
    throw DimensionError("evaluate_energy: size mismatch");
  for (Eigen::Index q = 0; q < v.size(); ++q)
    if (!(v[q] >= P.lower[q] && v[q] <= P.upper[q]))
      return infinity;
  double e = 0.5 * v.dot(P.A * v) - P.b.dot(v);
  for (Eigen::Index q = 0; q < v.size(); ++q)
    e += P.phi.node(std::size_t(q)).value(v[q]);
  return e;
}

/// F(v + d) - F(v), computed without forming the two energies.
template <class Term>
double energy_difference(const ObstacleProblem<Term>& P, const Vector& v, const Vector& d)
{
  const Vector y = v + d;
  for (Eigen::Index q = 0; q < v.size(); ++q)
    if (!(y[q] >= P.lower[q] && y[q] <= P.upper[q]))
      return infinity;
  const Vector Ad = P.A * d;
  double e = d.dot(P.A * v) + 0.5 * d.dot(Ad) - P.b.dot(d);
  for (Eigen::Index q = 0; q < v.size(); ++q)
    if (d[q] != 0) {
      const auto nd = P.phi.node(std::size_t(q));
      e += nd.value(y[q]) - nd.value(v[q]);
    }
  return e;
}

/// Water budget of one step on the solved problem.
struct MassBalance
{
  double storage_change = 0.0; ///< sum h n (s^{n+1} - s^n)                 [m^2]
  double infiltration = 0.0;   ///< tau sum h_in g, net inflow through Sigma_in [m^2]
  double source = 0.0;         ///< tau sum h f(s^{n+1})                    [m^2]
  double outflow = 0.0;        ///< water leaving through active Sigma_out nodes [m^2]
  double residual = 0.0;       ///< storage - infiltration - source + outflow [m^2]
};

/// Budget of the step whose problem is `P`, solution `x` (reduced), previous state `x_n`.
///
/// The outflow at a node resting on the Signorini bound is read off its energy gradient.
inline MassBalance mass_balance(const ObstacleProblem<RichardsNodalTerm>& P, const Vector& x, const Vector& x_n)
{
  const auto& term = P.phi;
  const auto& hyd = term.hydraulics();
  const Vector grad = P.A * x - P.b;
  MassBalance mb;
  for (Eigen::Index q = 0; q < x.size(); ++q) {
    const double h = term.weights()[q];
    const double s1 = hyd.saturation_from_reduced(x[q]);
    const double s0 = hyd.saturation_from_reduced(x_n[q]);
    mb.storage_change += h * hyd.porosity() * (s1 - s0);
    mb.source += term.tau() * h * term.source()(s1);
    const double hin = term.boundary_weights()[q];
    if (hin > 0) {
      const double w = term.surface()[q];
      const double p = hyd.pressure_from_reduced(x[q]);
      const double kappa = hyd.kappa_from_pressure(p, w, term.resistance(), term.sigma());
      mb.infiltration += term.tau() * hin * (w / term.resistance() - kappa);
    }
    if (x[q] >= P.upper[q]) {
      const double gq = grad[q] + term.node(std::size_t(q)).left_slope(x[q]);
      mb.outflow += -gq;
    }
  }
  mb.residual = mb.storage_change - mb.infiltration - mb.source + mb.outflow;
  return mb;
}

} // namespace richards
