#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "richards/assembly.hpp"
#include "richards/errors.hpp"
#include "richards/hydraulics.hpp"
#include "richards/mesh.hpp"
#include "richards/soil.hpp"
#include "richards/solver.hpp"
#include "richards/surface.hpp"

namespace richards {

struct GeometryConfig
{
  double Lx = 10.0;
  double Ly = 1.0;
  int nx0 = 10;
  int ny0 = 1;
  int levels = 4;
  std::vector<Interval> out_intervals{{0.0, 0.5}, {9.5, 10.0}};
};

struct InitialConfig
{
  double p0 = -2e4;         ///< [Pa], used when p0_file is empty
  double w0 = 0.0;          ///< [m], used when w0_file is empty
  std::string p0_file;      ///< one pressure per fine-level vertex
  std::string w0_file;      ///< one height per trace cell
};

struct OutputConfig
{
  std::string directory = "out";
  int vtk_every = 0;        ///< 0 = only the initial and final snapshots
  int csv_every = 1;
};

struct SimConfig
{
  SoilParams soil;
  GeometryConfig geometry;
  double c = 1e5;           ///< [s]
  double sigma = 0.02;      ///< [m]
  RainSpec rain;
  double tau = 100.0;       ///< [s]
  double T = 350000.0;      ///< [s]
  InitialConfig initial;
  SourceLaw source;
  SolverConfig solver;
  OutputConfig output;
  UpwindScheme upwind = UpwindScheme::NodalMaxZ;

  /// Checks every invariant; throws ValidationError naming the first violated field.
  void validate() const
  {
    soil.validate();
    const auto& g = geometry;
    if (!(g.Lx > 0))
      throw ValidationError("geometry.Lx", "must be > 0");
    if (!(g.Ly > 0))
      throw ValidationError("geometry.Ly", "must be > 0");
    if (g.nx0 < 1)
      throw ValidationError("geometry.nx0", "must be >= 1");
    if (g.ny0 < 1)
      throw ValidationError("geometry.ny0", "must be >= 1");
    if (g.levels < 0 || g.levels > 12)
      throw ValidationError("geometry.levels", "must lie in [0, 12]");
    for (std::size_t a = 0; a < g.out_intervals.size(); ++a) {
      const auto& iv = g.out_intervals[a];
      if (!(iv.lo >= 0 && iv.hi <= g.Lx && iv.lo < iv.hi))
        throw ValidationError("geometry.out_intervals_m", "interval outside [0, Lx] or empty");
      for (std::size_t b = a + 1; b < g.out_intervals.size(); ++b) {
        const auto& jv = g.out_intervals[b];
        if (iv.lo < jv.hi && jv.lo < iv.hi)
          throw ValidationError("geometry.out_intervals_m", "intervals overlap");
      }
    }
    if (!(c > 0))
      throw ValidationError("coupling.c", "must be > 0");
    if (!(sigma > 0))
      throw ValidationError("coupling.sigma", "must be > 0");
    rain.validate();
    if (!(tau > 0) || !std::isfinite(tau))
      throw ValidationError("time.tau", "must be > 0");
    if (!(T >= tau) || !std::isfinite(T))
      throw ValidationError("time.T", "must be >= tau");
    if (!std::isfinite(initial.p0))
      throw ValidationError("initial.p0", "must be finite");
    if (!std::isfinite(initial.w0))
      throw ValidationError("initial.w0", "must be finite");
    for (const auto* f : {&initial.p0_file, &initial.w0_file})
      if (!f->empty() && !std::filesystem::exists(*f))
        throw ValidationError(f == &initial.p0_file ? "initial.p0_file" : "initial.w0_file", "file not found: " + *f);
    source.validate();
    solver.validate();
    if (output.vtk_every < 0)
      throw ValidationError("output.vtk_every", "must be >= 0");
    if (output.csv_every < 1)
      throw ValidationError("output.csv_every", "must be >= 1");
  }

  int step_count() const { return int(std::ceil(T / tau - 1e-9)); }

  BoundarySpec boundary() const { return BoundarySpec{geometry.out_intervals}; }

  StepParams step_params() const { return StepParams{tau, c, sigma, source, upwind}; }
};

namespace detail {

using json = nlohmann::json;

/// Reads keys of one JSON object, remembering which were consumed.
class Section
{
public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path))
  {
    if (!j_.is_object())
      throw ValidationError(path_, "must be an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& raw(const char* key)
  {
    used_.insert(key);
    return j_.at(key);
  }

  double number(const char* key, const char* field, double fallback, bool required = false)
  {
    if (!j_.contains(key)) {
      if (required)
        throw ValidationError(field, "missing");
      return fallback;
    }
    used_.insert(key);
    const auto& v = j_.at(key);
    if (!v.is_number())
      throw ValidationError(field, "must be a number");
    return v.get<double>();
  }

  int integer(const char* key, const char* field, int fallback)
  {
    if (!j_.contains(key))
      return fallback;
    used_.insert(key);
    const auto& v = j_.at(key);
    if (!v.is_number_integer())
      throw ValidationError(field, "must be an integer");
    return v.get<int>();
  }

  std::string text(const char* key, const char* field, std::string fallback)
  {
    if (!j_.contains(key))
      return fallback;
    used_.insert(key);
    const auto& v = j_.at(key);
    if (!v.is_string())
      throw ValidationError(field, "must be a string");
    return v.get<std::string>();
  }

  void finish() const
  {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key()))
        throw ValidationError(path_ + "." + it.key(), "unknown key");
  }

private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

inline Interval read_interval(const json& v, const char* field)
{
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ValidationError(field, "must be a [lo, hi] pair of numbers");
  return {v[0].get<double>(), v[1].get<double>()};
}

inline std::size_t line_of(const std::string& text, std::size_t byte)
{
  std::size_t line = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i)
    line += text[i] == '\n';
  return line;
}

} // namespace detail

/// Parses and validates a configuration from JSON text. `base` resolves relative file paths.
inline SimConfig parse_config(const std::string& text, const std::filesystem::path& base = {})
{
  using detail::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("line " + std::to_string(detail::line_of(text, e.byte)) + ": " + e.what());
  }
  SimConfig cfg;
  detail::Section top(root, "config");

  if (!top.has("soil"))
    throw ValidationError("soil", "missing");
  {
    detail::Section s(top.raw("soil"), "soil");
    auto& p = cfg.soil;
    const std::string model = s.text("model", "soil.model", "brooks_corey");
    if (model == "brooks_corey")
      p.model = RetentionModel::BrooksCorey;
    else if (model == "van_genuchten")
      p.model = RetentionModel::VanGenuchten;
    else
      throw ValidationError("soil.model", "expected brooks_corey or van_genuchten");
    p.K = s.number("K_m2", "soil.K", 0, true);
    p.mu = s.number("mu_Pa_s", "soil.mu", p.mu);
    p.n = s.number("porosity", "soil.n", p.n);
    p.rho = s.number("rho_kg_m3", "soil.rho", p.rho);
    p.g = s.number("g_m_s2", "soil.g", p.g);
    p.s_m = s.number("s_m", "soil.s_m", p.model == RetentionModel::BrooksCorey ? p.s_m : 0.0);
    p.s_M = s.number("s_M", "soil.s_M", p.s_M);
    if (p.model == RetentionModel::BrooksCorey) {
      p.p_b = s.number("p_b_Pa", "soil.p_b", p.p_b);
      p.lambda = s.number("lambda", "soil.lambda", p.lambda);
    } else {
      if (s.has("alpha_per_cm") == s.has("alpha_per_Pa"))
        throw ValidationError("soil.alpha", "give exactly one of alpha_per_cm, alpha_per_Pa");
      p.alpha = s.has("alpha_per_cm") ? s.number("alpha_per_cm", "soil.alpha", 0) / pascal_per_cm_water
                                      : s.number("alpha_per_Pa", "soil.alpha", 0);
      p.l = s.number("l", "soil.l", 0, true);
    }
    p.delta = s.number("delta", "soil.delta", 0.0);
    const std::string reg = s.text("regularization", "soil.regularization", "max");
    if (reg == "max")
      p.regularization = RegularizationKind::Max;
    else if (reg == "additive")
      p.regularization = RegularizationKind::Additive;
    else
      throw ValidationError("soil.regularization", "expected max or additive");
    const std::string conv = s.text("rho_g_convention", "soil.rho_g_convention", "paper_normalized");
    if (conv == "paper_normalized")
      p.rho_g_convention = RhoGConvention::PaperNormalized;
    else if (conv == "physical")
      p.rho_g_convention = RhoGConvention::Physical;
    else
      throw ValidationError("soil.rho_g_convention", "expected physical or paper_normalized");
    s.finish();
  }

  if (top.has("geometry")) {
    detail::Section s(top.raw("geometry"), "geometry");
    auto& g = cfg.geometry;
    g.Lx = s.number("Lx_m", "geometry.Lx", g.Lx);
    g.Ly = s.number("Ly_m", "geometry.Ly", g.Ly);
    g.nx0 = s.integer("nx0", "geometry.nx0", g.nx0);
    g.ny0 = s.integer("ny0", "geometry.ny0", g.ny0);
    g.levels = s.integer("levels", "geometry.levels", g.levels);
    if (s.has("out_intervals_m")) {
      const auto& arr = s.raw("out_intervals_m");
      if (!arr.is_array())
        throw ValidationError("geometry.out_intervals_m", "must be an array");
      g.out_intervals.clear();
      for (const auto& v : arr)
        g.out_intervals.push_back(detail::read_interval(v, "geometry.out_intervals_m"));
    }
    s.finish();
  }

  if (top.has("coupling")) {
    detail::Section s(top.raw("coupling"), "coupling");
    cfg.c = s.number("c_s", "coupling.c", cfg.c);
    cfg.sigma = s.number("sigma_m", "coupling.sigma", cfg.sigma);
    s.finish();
  }

  if (top.has("rain")) {
    const auto& arr = top.raw("rain");
    if (!arr.is_array())
      throw ValidationError("rain", "must be an array");
    for (const auto& ev : arr) {
      detail::Section s(ev, "rain");
      RainEvent e;
      if (!s.has("x_m"))
        throw ValidationError("rain.x_m", "missing");
      e.x = detail::read_interval(s.raw("x_m"), "rain.x_m");
      e.rate = s.number("rate_m_s", "rain.rate_m_s", 0, true);
      if (s.has("t_s"))
        e.t = detail::read_interval(s.raw("t_s"), "rain.t_s");
      s.finish();
      cfg.rain.events.push_back(e);
    }
  }

  if (!top.has("time"))
    throw ValidationError("time", "missing");
  {
    detail::Section s(top.raw("time"), "time");
    cfg.tau = s.number("tau_s", "time.tau", 0, true);
    cfg.T = s.number("T_s", "time.T", 0, true);
    s.finish();
  }

  auto resolve = [&](const std::string& f) {
    if (f.empty())
      return f;
    std::filesystem::path p(f);
    return p.is_absolute() || base.empty() ? p.string() : (base / p).string();
  };
  if (top.has("initial")) {
    detail::Section s(top.raw("initial"), "initial");
    cfg.initial.p0 = s.number("p0_Pa", "initial.p0", cfg.initial.p0);
    cfg.initial.w0 = s.number("w0_m", "initial.w0", cfg.initial.w0);
    cfg.initial.p0_file = resolve(s.text("p0_file", "initial.p0_file", ""));
    cfg.initial.w0_file = resolve(s.text("w0_file", "initial.w0_file", ""));
    s.finish();
  }

  if (top.has("source")) {
    detail::Section s(top.raw("source"), "source");
    cfg.source.f0 = s.number("f0_per_s", "source.f0", 0.0);
    cfg.source.f1 = s.number("f1_per_s", "source.f1", 0.0);
    s.finish();
  }

  if (top.has("solver")) {
    detail::Section s(top.raw("solver"), "solver");
    auto& sc = cfg.solver;
    const std::string mode = s.text("mode", "solver.mode", "mmg");
    if (mode == "mmg")
      sc.mode = SolverMode::MMG;
    else if (mode == "pgs")
      sc.mode = SolverMode::PGSOnly;
    else
      throw ValidationError("solver.mode", "expected mmg or pgs");
    sc.tol = s.number("tol", "solver.tol", sc.tol);
    sc.max_iterations = s.integer("max_iterations", "solver.max_iterations", sc.max_iterations);
    sc.pre_smooth = s.integer("pre_smooth", "solver.pre_smooth", sc.pre_smooth);
    sc.post_smooth = s.integer("post_smooth", "solver.post_smooth", sc.post_smooth);
    sc.scalar_tol = s.number("scalar_tol", "solver.scalar_tol", sc.scalar_tol);
    sc.kink_tol = s.number("kink_tol", "solver.kink_tol", sc.kink_tol);
    sc.vcycle_smooth = s.integer("vcycle_smooth", "solver.vcycle_smooth", sc.vcycle_smooth);
    s.finish();
  }

  if (top.has("output")) {
    detail::Section s(top.raw("output"), "output");
    cfg.output.directory = s.text("directory", "output.directory", cfg.output.directory);
    cfg.output.vtk_every = s.integer("vtk_every", "output.vtk_every", cfg.output.vtk_every);
    cfg.output.csv_every = s.integer("csv_every", "output.csv_every", cfg.output.csv_every);
    s.finish();
  }

  {
    const std::string up = top.text("upwind", "upwind", "nodal_max_z");
    if (up == "nodal_max_z")
      cfg.upwind = UpwindScheme::NodalMaxZ;
    else if (up == "central")
      cfg.upwind = UpwindScheme::Central;
    else
      throw ValidationError("upwind", "expected nodal_max_z or central");
  }
  top.finish();
  cfg.validate();
  return cfg;
}

inline SimConfig load_config(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

} // namespace richards
