#pragma once

#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>

#include "richards/errors.hpp"
#include "richards/hydraulics.hpp"
#include "richards/mesh.hpp"

namespace richards {

namespace detail {

struct FileCloser
{
  void operator()(std::FILE* f) const
  {
    if (f)
      std::fclose(f);
  }
};

using File = std::unique_ptr<std::FILE, FileCloser>;

inline File open_file(const std::filesystem::path& path, const char* mode)
{
  File f(std::fopen(path.string().c_str(), mode));
  if (!f)
    throw IoError("cannot open " + path.string() + " for writing");
  return f;
}

inline void close_checked(File& f, const std::filesystem::path& path)
{
  if (std::ferror(f.get()) || std::fclose(f.release()) != 0)
    throw IoError("write failed: " + path.string());
}

} // namespace detail

/// Legacy ASCII VTK snapshot with point fields p [Pa], s [-], u [m^2/s]; x holds u - datum.
inline void write_vtk(const std::filesystem::path& path, const Mesh& mesh, const Vector& x, const Hydraulics& hyd)
{
  if (std::size_t(x.size()) != mesh.vertex_count())
    throw DimensionError("write_vtk: field does not match the mesh");
  auto f = detail::open_file(path, "w");
  std::FILE* o = f.get();
  std::fprintf(o, "# vtk DataFile Version 3.0\nrichards fields\nASCII\nDATASET UNSTRUCTURED_GRID\n");
  std::fprintf(o, "POINTS %zu double\n", mesh.vertex_count());
  for (const auto& v : mesh.vertices)
    std::fprintf(o, "%.17g %.17g 0\n", v[0], v[1]);
  std::fprintf(o, "CELLS %zu %zu\n", mesh.triangle_count(), 4 * mesh.triangle_count());
  for (const auto& t : mesh.triangles)
    std::fprintf(o, "3 %d %d %d\n", t[0], t[1], t[2]);
  std::fprintf(o, "CELL_TYPES %zu\n", mesh.triangle_count());
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t)
    std::fprintf(o, "5\n");
  std::fprintf(o, "POINT_DATA %zu\n", mesh.vertex_count());
  std::fprintf(o, "SCALARS p double 1\nLOOKUP_TABLE default\n");
  for (Eigen::Index q = 0; q < x.size(); ++q)
    std::fprintf(o, "%.17g\n", hyd.pressure_from_reduced(x[q]));
  std::fprintf(o, "SCALARS s double 1\nLOOKUP_TABLE default\n");
  for (Eigen::Index q = 0; q < x.size(); ++q)
    std::fprintf(o, "%.17g\n", hyd.saturation_from_reduced(x[q]));
  std::fprintf(o, "SCALARS u double 1\nLOOKUP_TABLE default\n");
  for (Eigen::Index q = 0; q < x.size(); ++q)
    std::fprintf(o, "%.17g\n", x[q] + hyd.datum());
  detail::close_checked(f, path);
}

/// Appends rows t,x_center,w.
inline void append_surface_csv(std::FILE* o, double t, const TraceGrid& tg, const Vector& w)
{
  for (std::size_t k = 0; k < tg.size(); ++k)
    std::fprintf(o, "%.17g,%.17g,%.17g\n", t, tg.centers[k], w[Eigen::Index(k)]);
}

inline void write_surface_csv(const std::filesystem::path& path, double t, const TraceGrid& tg, const Vector& w)
{
  if (std::size_t(w.size()) != tg.size())
    throw DimensionError("write_surface_csv: field does not match the trace grid");
  auto f = detail::open_file(path, "w");
  std::fprintf(f.get(), "t,x_center,w\n");
  append_surface_csv(f.get(), t, tg, w);
  detail::close_checked(f, path);
}

} // namespace richards
