#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Sparse>

#include "richards/errors.hpp"

namespace richards {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class BoundaryTag
{
  Neumann,
  In,
  Out
};

struct Interval
{
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Out intervals on the bottom edge z = 0; the whole top edge is the infiltration boundary.
struct BoundarySpec
{
  std::vector<Interval> out;
};

struct BoundaryEdge
{
  std::array<int, 2> v;
  BoundaryTag tag;
};

/// Structured triangulation of [0, Lx] x [0, Ly].
///
/// Vertices are numbered row by row from the bottom, vertex (i, k) has index k*(nx+1) + i.
/// Every cell is split along its lower-left to upper-right diagonal.
struct Mesh
{
  int level = 0;
  int nx = 0, ny = 0;
  double Lx = 0.0, Ly = 0.0;
  std::vector<std::array<double, 2>> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<char> out_node; ///< 1 where the Signorini constraint u <= 0 applies

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t triangle_count() const { return triangles.size(); }
  int index(int i, int k) const { return k * (nx + 1) + i; }
  double dx() const { return Lx / nx; }
  double dz() const { return Ly / ny; }

  double area(std::size_t t) const
  {
    const auto& tri = triangles[t];
    const auto& a = vertices[tri[0]];
    const auto& b = vertices[tri[1]];
    const auto& c = vertices[tri[2]];
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
  }

  /// Longest triangle edge.
  double max_diameter() const { return std::hypot(dx(), dz()); }

  /// Vertices of the top edge, left to right.
  std::vector<int> top_nodes() const
  {
    std::vector<int> r(nx + 1);
    for (int i = 0; i <= nx; ++i)
      r[i] = index(i, ny);
    return r;
  }
};

/// Vertex-centred dual cells of the infiltration boundary.
struct TraceGrid
{
  std::vector<int> nodes;        ///< mesh vertex of each cell
  std::vector<double> centers;   ///< x-coordinate of each cell centre [m]
  std::vector<double> weights;   ///< h_q^in [m]

  std::size_t size() const { return nodes.size(); }
};

namespace detail {

/// Out interval endpoints must be vertices of the mesh with nx cells along the bottom.
inline void check_out_alignment(const BoundarySpec& spec, double Lx, int nx)
{
  const double h = Lx / nx;
  auto aligned = [&](double x) {
    const double r = x / h;
    return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, std::abs(r));
  };
  for (const auto& iv : spec.out) {
    if (!(iv.lo >= 0 && iv.hi <= Lx && iv.lo < iv.hi))
      throw GeometryError("out interval outside the bottom edge or empty");
    if (!aligned(iv.lo) || !aligned(iv.hi))
      throw GeometryError("out interval endpoints must coincide with grid vertices");
  }
  for (std::size_t a = 0; a < spec.out.size(); ++a)
    for (std::size_t b = a + 1; b < spec.out.size(); ++b)
      if (spec.out[a].lo < spec.out[b].hi && spec.out[b].lo < spec.out[a].hi)
        throw GeometryError("out intervals overlap");
}

inline Mesh build_rect_mesh(double Lx, double Ly, int nx, int ny, int level, const BoundarySpec& spec)
{
  Mesh m;
  m.level = level;
  m.nx = nx;
  m.ny = ny;
  m.Lx = Lx;
  m.Ly = Ly;
  m.vertices.resize(std::size_t(nx + 1) * (ny + 1));
  for (int k = 0; k <= ny; ++k)
    for (int i = 0; i <= nx; ++i)
      m.vertices[m.index(i, k)] = {Lx * i / nx, Ly * k / ny};
  m.triangles.reserve(std::size_t(2) * nx * ny);
  for (int k = 0; k < ny; ++k)
    for (int i = 0; i < nx; ++i) {
      const int v00 = m.index(i, k), v10 = m.index(i + 1, k);
      const int v01 = m.index(i, k + 1), v11 = m.index(i + 1, k + 1);
      m.triangles.push_back({v00, v10, v11});
      m.triangles.push_back({v00, v11, v01});
    }

  const double h = Lx / nx;
  auto in_out = [&](int i) {
    // bottom edge between vertex i and i+1, Out only if it lies inside an interval
    const double a = h * i, b = h * (i + 1), eps = 1e-9 * h;
    for (const auto& iv : spec.out)
      if (a >= iv.lo - eps && b <= iv.hi + eps)
        return true;
    return false;
  };
  m.out_node.assign(m.vertex_count(), 0);
  for (int i = 0; i < nx; ++i) {
    const bool out = in_out(i);
    m.boundary_edges.push_back({{m.index(i, 0), m.index(i + 1, 0)}, out ? BoundaryTag::Out : BoundaryTag::Neumann});
    if (out)
      m.out_node[m.index(i, 0)] = m.out_node[m.index(i + 1, 0)] = 1;
  }
  for (int k = 0; k < ny; ++k)
    m.boundary_edges.push_back({{m.index(nx, k), m.index(nx, k + 1)}, BoundaryTag::Neumann});
  for (int i = nx; i > 0; --i)
    m.boundary_edges.push_back({{m.index(i, ny), m.index(i - 1, ny)}, BoundaryTag::In});
  for (int k = ny; k > 0; --k)
    m.boundary_edges.push_back({{m.index(0, k), m.index(0, k - 1)}, BoundaryTag::Neumann});
  return m;
}

/// Nodal interpolation from a structured level to its uniform refinement.
inline SparseMatrix build_prolongation(const Mesh& coarse, const Mesh& fine)
{
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(fine.vertex_count() * 2);
  for (int K = 0; K <= fine.ny; ++K)
    for (int I = 0; I <= fine.nx; ++I) {
      const int row = fine.index(I, K);
      const int i0 = I / 2, k0 = K / 2;
      const bool oi = I % 2, ok = K % 2;
      if (!oi && !ok) {
        t.emplace_back(row, coarse.index(i0, k0), 1.0);
      } else if (oi && !ok) {
        t.emplace_back(row, coarse.index(i0, k0), 0.5);
        t.emplace_back(row, coarse.index(i0 + 1, k0), 0.5);
      } else if (!oi && ok) {
        t.emplace_back(row, coarse.index(i0, k0), 0.5);
        t.emplace_back(row, coarse.index(i0, k0 + 1), 0.5);
      } else {
        // midpoint of the cell diagonal
        t.emplace_back(row, coarse.index(i0, k0), 0.5);
        t.emplace_back(row, coarse.index(i0 + 1, k0 + 1), 0.5);
      }
    }
  SparseMatrix P(Eigen::Index(fine.vertex_count()), Eigen::Index(coarse.vertex_count()));
  P.setFromTriplets(t.begin(), t.end());
  return P;
}

} // namespace detail

/// Uniformly refined meshes, coarse (index 0) to fine.
struct MeshHierarchy
{
  std::vector<Mesh> levels;
  std::vector<SparseMatrix> prolongations; ///< prolongations[j] maps level j to level j+1

  int finest() const { return int(levels.size()) - 1; }
  const Mesh& fine() const { return levels.back(); }
};

inline MeshHierarchy build_rect_hierarchy(double Lx, double Ly, int nx0, int ny0, int J,
                                          const BoundarySpec& spec)
{
  if (nx0 < 1 || ny0 < 1)
    throw GeometryError("coarse cell counts must be >= 1");
  if (J < 0)
    throw GeometryError("level count must be >= 0");
  if (!(Lx > 0 && Ly > 0))
    throw GeometryError("domain extents must be > 0");
  detail::check_out_alignment(spec, Lx, nx0 << J);
  MeshHierarchy h;
  for (int j = 0; j <= J; ++j)
    h.levels.push_back(detail::build_rect_mesh(Lx, Ly, nx0 << j, ny0 << j, j, spec));
  for (int j = 0; j < J; ++j)
    h.prolongations.push_back(detail::build_prolongation(h.levels[j], h.levels[j + 1]));
  return h;
}

/// h_q = integral of the hat function of q.
inline std::vector<double> lumped_weights(const Mesh& mesh)
{
  std::vector<double> h(mesh.vertex_count(), 0.0);
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const double a = mesh.area(t) / 3.0;
    for (int v : mesh.triangles[t])
      h[v] += a;
  }
  return h;
}

inline TraceGrid trace_grid(const Mesh& mesh)
{
  TraceGrid tg;
  std::vector<double> w(mesh.vertex_count(), 0.0);
  std::vector<char> on(mesh.vertex_count(), 0);
  bool any = false;
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag != BoundaryTag::In)
      continue;
    any = true;
    const auto& a = mesh.vertices[e.v[0]];
    const auto& b = mesh.vertices[e.v[1]];
    const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
    for (int v : e.v) {
      w[v] += 0.5 * len;
      on[v] = 1;
    }
  }
  if (!any)
    throw GeometryError("mesh has no infiltration edges");
  for (int v : mesh.top_nodes())
    if (on[v]) {
      tg.nodes.push_back(v);
      tg.centers.push_back(mesh.vertices[v][0]);
      tg.weights.push_back(w[v]);
    }
  return tg;
}

inline Vector prolongate(const MeshHierarchy& h, int j, const Vector& coarse)
{
  if (j < 0 || j >= h.finest())
    throw DimensionError("prolongate: no finer level");
  if (coarse.size() != Eigen::Index(h.levels[j].vertex_count()))
    throw DimensionError("prolongate: field length does not match the level");
  return h.prolongations[j] * coarse;
}

/// Transpose of prolongate: maps a level j+1 residual to level j.
inline Vector restrict(const MeshHierarchy& h, int j, const Vector& fine)
{
  if (j < 0 || j >= h.finest())
    throw DimensionError("restrict: no finer level");
  if (fine.size() != Eigen::Index(h.levels[j + 1].vertex_count()))
    throw DimensionError("restrict: field length does not match the level");
  return h.prolongations[j].transpose() * fine;
}

} // namespace richards
