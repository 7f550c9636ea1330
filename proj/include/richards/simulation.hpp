#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "richards/assembly.hpp"
#include "richards/config.hpp"
#include "richards/errors.hpp"
#include "richards/hydraulics.hpp"
#include "richards/mesh.hpp"
#include "richards/output.hpp"
#include "richards/solver.hpp"
#include "richards/surface.hpp"

namespace richards {

/// Diagnostics of one time step n -> n+1.
struct StepRecord
{
  int n = 0;                  ///< index of the step start
  double t = 0.0;             ///< t_{n+1}
  double c = 0.0;
  double theta1_min = infinity;
  double theta2_min = infinity;
  double tau_max = 0.0;       ///< positivity bound at the step start
  double tau = 0.0;           ///< step actually taken
  int iterations = 0;
  double residual = 0.0;
  bool energy_monotone = true;
  MassBalance balance;
  double rain = 0.0;          ///< tau sum h_in r [m^2]
  double surface_change = 0.0;
  double min_w = 0.0;
  double min_s = 0.0;
  std::size_t active_upper = 0;
};

/// Cumulative water budget and per-step records.
struct Ledger
{
  double storage = 0.0;
  double infiltration = 0.0;
  double source = 0.0;
  double outflow = 0.0;
  double rain = 0.0;
  double residual = 0.0;
  double min_w = 0.0;           ///< watermark of the surface height
  int bound_violations = 0;     ///< steps with tau above the positivity bound
  std::vector<StepRecord> steps;
};

/// Time-loop state: u^n stored as u - datum on the finest level, w^n per trace cell.
struct SimState
{
  int step = 0;
  double t = 0.0;
  Vector x;
  Vector w;
  Ledger ledger;
};

namespace detail {

inline std::vector<double> read_numbers(const std::string& path, std::size_t expected, const char* field)
{
  std::ifstream in(path);
  if (!in)
    throw IoError(std::string(field) + ": cannot open " + path);
  std::vector<double> v;
  double d;
  while (in >> d)
    v.push_back(d);
  if (!in.eof())
    throw ParseError(std::string(field) + ": non-numeric entry in " + path);
  if (v.size() != expected)
    throw ValidationError(field, "expected " + std::to_string(expected) + " values, found " + std::to_string(v.size()));
  return v;
}

} // namespace detail

/// Everything derived from a configuration once: mesh hierarchy, trace grid and hydraulics.
struct Model
{
  SimConfig cfg;
  MeshHierarchy hier;
  TraceGrid trace;
  Hydraulics hyd;

  explicit Model(SimConfig c)
    : cfg((c.validate(), std::move(c))),
      hier(build_rect_hierarchy(cfg.geometry.Lx, cfg.geometry.Ly, cfg.geometry.nx0, cfg.geometry.ny0,
                                cfg.geometry.levels, cfg.boundary())),
      trace(trace_grid(hier.fine())), hyd(cfg.soil)
  {
  }

  const Mesh& mesh() const { return hier.fine(); }

  Vector pressures_on_trace(const Vector& x) const
  {
    Vector p(Eigen::Index(trace.size()));
    for (std::size_t k = 0; k < trace.size(); ++k)
      p[Eigen::Index(k)] = hyd.pressure_from_reduced(x[trace.nodes[k]]);
    return p;
  }
};

inline SimState init_state(const SimConfig& cfg, const MeshHierarchy& hier, const Hydraulics& hyd)
{
  const Mesh& mesh = hier.fine();
  const TraceGrid tg = trace_grid(mesh);
  SimState st;
  st.x.resize(Eigen::Index(mesh.vertex_count()));
  if (cfg.initial.p0_file.empty()) {
    const double x0 = hyd.kirchhoff(cfg.initial.p0).reduced;
    if (hyd.has_floor() && !(x0 > 0))
      throw BelowMinimalPressure("initial pressure maps to the minimal generalized pressure");
    st.x.setConstant(x0);
  } else {
    const auto p = detail::read_numbers(cfg.initial.p0_file, mesh.vertex_count(), "initial.p0_file");
    for (std::size_t q = 0; q < p.size(); ++q) {
      st.x[Eigen::Index(q)] = hyd.kirchhoff(p[q]).reduced;
      if (hyd.has_floor() && !(st.x[Eigen::Index(q)] > 0))
        throw BelowMinimalPressure("initial pressure maps to the minimal generalized pressure");
    }
  }
  st.w.resize(Eigen::Index(tg.size()));
  if (cfg.initial.w0_file.empty()) {
    st.w.setConstant(cfg.initial.w0);
  } else {
    const auto w = detail::read_numbers(cfg.initial.w0_file, tg.size(), "initial.w0_file");
    for (std::size_t k = 0; k < w.size(); ++k)
      st.w[Eigen::Index(k)] = w[k];
  }
  st.ledger.min_w = st.w.size() ? st.w.minCoeff() : 0.0;
  return st;
}

inline SimState init_state(const Model& m) { return init_state(m.cfg, m.hier, m.hyd); }

/// Assemble with (u^n, w^n), solve for u^{n+1}, then update w explicitly.
inline void time_step(SimState& st, const Model& m, SolveReport* report_out = nullptr)
{
  const auto& cfg = m.cfg;
  const auto& hyd = m.hyd;
  const double tau = cfg.tau;
  const double t1 = (st.step + 1) * tau;

  StepRecord rec;
  rec.n = st.step;
  rec.t = t1;
  rec.c = cfg.c;
  rec.tau = tau;
  const Vector p_n = m.pressures_on_trace(st.x);
  const StepBound bound = positivity_step_bound(p_n, cfg.rain.on_cells(m.trace, st.t), cfg.c, cfg.sigma, hyd);
  rec.theta1_min = bound.theta1_min;
  rec.theta2_min = bound.theta2_min;
  rec.tau_max = bound.tau_max;

  const auto P = assemble_spatial_problem(m.hier, m.hier.finest(), st.x, st.w, cfg.step_params(), hyd);
  SolveReport rep;
  Vector x1;
  try {
    x1 = solve(P, st.x, cfg.solver, &m.hier, &rep);
  } catch (const NonConvergence& e) {
    throw NonConvergence("step " + std::to_string(st.step) + ": " + e.what(), e.report());
  }
  rec.iterations = rep.iterations;
  rec.residual = rep.residual;
  rec.active_upper = rep.active_upper;
  for (std::size_t k = 1; k < rep.energy.size(); ++k)
    if (rep.energy[k] > rep.energy[k - 1] + 1e-12 * std::abs(rep.energy[k - 1]))
      rec.energy_monotone = false;
  rec.balance = mass_balance(P, x1, st.x);

  const Vector r1 = cfg.rain.on_cells(m.trace, t1);
  const Vector w1 = update_surface(st.w, m.pressures_on_trace(x1), r1, tau, cfg.c, cfg.sigma, hyd);
  for (std::size_t k = 0; k < m.trace.size(); ++k) {
    rec.rain += tau * m.trace.weights[k] * r1[Eigen::Index(k)];
    rec.surface_change += m.trace.weights[k] * (w1[Eigen::Index(k)] - st.w[Eigen::Index(k)]);
  }
  rec.min_w = w1.size() ? w1.minCoeff() : 0.0;
  rec.min_s = infinity;
  for (Eigen::Index q = 0; q < x1.size(); ++q)
    rec.min_s = std::min(rec.min_s, hyd.saturation_from_reduced(x1[q]));

  auto& L = st.ledger;
  L.storage += rec.balance.storage_change;
  L.infiltration += rec.balance.infiltration;
  L.source += rec.balance.source;
  L.outflow += rec.balance.outflow;
  L.residual += rec.balance.residual;
  L.rain += rec.rain;
  L.min_w = std::min(L.min_w, rec.min_w);
  L.bound_violations += tau > bound.tau_max;
  L.steps.push_back(rec);

  st.x = std::move(x1);
  st.w = w1;
  ++st.step;
  st.t = st.step * tau;
  if (report_out)
    *report_out = rep;
}

/// Summary of a finished (or failed) run.
struct RunReport
{
  int steps = 0;
  bool completed = false;
  std::string failure;
  double min_p = infinity, max_p = -infinity;
  double min_s = infinity, max_s = -infinity;
  double min_w = infinity, max_w = -infinity;
  double min_w_watermark = 0.0;
  int bound_violations = 0;
  double max_residual = 0.0;
  bool energy_monotone = true;
};

inline void write_bounds_csv(const std::filesystem::path& path, const Ledger& L)
{
  auto f = detail::open_file(path, "w");
  std::fprintf(f.get(), "n,c,theta1_min,theta2_min,tau\n");
  for (const auto& r : L.steps)
    std::fprintf(f.get(), "%d,%.17g,%.17g,%.17g,%.17g\n", r.n, r.c, r.theta1_min, r.theta2_min, r.tau);
  detail::close_checked(f, path);
}

/// Writes the state as text; doubles in %.17g so that a reload is bit-identical.
inline void save_state(const std::filesystem::path& path, const SimState& st)
{
  auto f = detail::open_file(path, "w");
  std::FILE* o = f.get();
  std::fprintf(o, "richards-state 1\n%d %.17g\n%td\n", st.step, st.t, st.x.size());
  for (Eigen::Index q = 0; q < st.x.size(); ++q)
    std::fprintf(o, "%.17g\n", st.x[q]);
  std::fprintf(o, "%td\n", st.w.size());
  for (Eigen::Index k = 0; k < st.w.size(); ++k)
    std::fprintf(o, "%.17g\n", st.w[k]);
  const auto& L = st.ledger;
  std::fprintf(o, "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %d\n", L.storage, L.infiltration, L.source, L.outflow,
               L.rain, L.residual, L.min_w, L.bound_violations);
  detail::close_checked(f, path);
}

inline SimState load_state(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open state " + path.string());
  std::string tag;
  int version = 0;
  in >> tag >> version;
  if (tag != "richards-state" || version != 1)
    throw ParseError("not a state file: " + path.string());
  SimState st;
  auto num = [&]() {
    std::string s;
    in >> s;
    if (!in)
      throw ParseError("truncated state file: " + path.string());
    return std::strtod(s.c_str(), nullptr);
  };
  in >> st.step;
  st.t = num();
  long n = 0;
  in >> n;
  st.x.resize(n);
  for (long q = 0; q < n; ++q)
    st.x[q] = num();
  in >> n;
  st.w.resize(n);
  for (long k = 0; k < n; ++k)
    st.w[k] = num();
  auto& L = st.ledger;
  L.storage = num();
  L.infiltration = num();
  L.source = num();
  L.outflow = num();
  L.rain = num();
  L.residual = num();
  L.min_w = num();
  in >> L.bound_violations;
  if (!in)
    throw ParseError("truncated state file: " + path.string());
  return st;
}

/// Runs the configured scenario, writing fields_<n>.vtk, surface.csv, bounds.csv and summary.json.
///
/// On a step failure the outputs so far are kept, the failure is recorded and the error rethrown.
inline RunReport run(const Model& m, const std::filesystem::path& out_dir, SimState* final_state = nullptr)
{
  std::filesystem::create_directories(out_dir);
  const auto& cfg = m.cfg;
  SimState st = init_state(m);
  RunReport rep;
  const int nsteps = cfg.step_count();

  const auto surf_path = out_dir / "surface.csv";
  auto surf = detail::open_file(surf_path, "w");
  std::fprintf(surf.get(), "t,x_center,w\n");
  append_surface_csv(surf.get(), st.t, m.trace, st.w);
  write_vtk(out_dir / "fields_0.vtk", m.mesh(), st.x, m.hyd);

  auto summarize = [&]() {
    for (Eigen::Index q = 0; q < st.x.size(); ++q) {
      const double p = m.hyd.pressure_from_reduced(st.x[q]);
      const double s = m.hyd.saturation_from_reduced(st.x[q]);
      rep.min_p = std::min(rep.min_p, p);
      rep.max_p = std::max(rep.max_p, p);
      rep.min_s = std::min(rep.min_s, s);
      rep.max_s = std::max(rep.max_s, s);
    }
    if (st.w.size()) {
      rep.min_w = st.w.minCoeff();
      rep.max_w = st.w.maxCoeff();
    }
    rep.steps = st.step;
    rep.min_w_watermark = st.ledger.min_w;
    rep.bound_violations = st.ledger.bound_violations;
    for (const auto& r : st.ledger.steps) {
      rep.max_residual = std::max(rep.max_residual, r.residual);
      rep.energy_monotone = rep.energy_monotone && r.energy_monotone;
    }
    nlohmann::json j;
    j["steps"] = rep.steps;
    j["completed"] = rep.completed;
    if (!rep.failure.empty())
      j["failure"] = rep.failure;
    j["upwind"] = cfg.upwind == UpwindScheme::NodalMaxZ ? "nodal_max_z" : "central";
    j["rho_g_convention"] = cfg.soil.rho_g_convention == RhoGConvention::Physical ? "physical" : "paper_normalized";
    j["mesh"] = {{"vertices", m.mesh().vertex_count()}, {"h_m", m.mesh().max_diameter()}};
    j["tau_cfl_s"] = cfl_bound(m.mesh().max_diameter(), m.hyd);
    j["p_Pa"] = {rep.min_p, rep.max_p};
    j["s"] = {rep.min_s, rep.max_s};
    j["w_m"] = {rep.min_w, rep.max_w};
    j["min_w_watermark_m"] = rep.min_w_watermark;
    j["bound_violations"] = rep.bound_violations;
    j["max_vi_residual"] = rep.max_residual;
    j["energy_monotone"] = rep.energy_monotone;
    const auto& L = st.ledger;
    j["ledger_m2"] = {{"storage", L.storage}, {"infiltration", L.infiltration}, {"source", L.source},
                      {"outflow", L.outflow},  {"rain", L.rain},                 {"residual", L.residual}};
    std::ofstream o(out_dir / "summary.json");
    o << j.dump(2) << "\n";
    write_bounds_csv(out_dir / "bounds.csv", st.ledger);
  };

  try {
    for (int n = 0; n < nsteps; ++n) {
      time_step(st, m);
      if (st.step % cfg.output.csv_every == 0 || st.step == nsteps)
        append_surface_csv(surf.get(), st.t, m.trace, st.w);
      if ((cfg.output.vtk_every > 0 && st.step % cfg.output.vtk_every == 0) || st.step == nsteps)
        write_vtk(out_dir / ("fields_" + std::to_string(st.step) + ".vtk"), m.mesh(), st.x, m.hyd);
    }
  } catch (const Error& e) {
    rep.failure = e.what();
    detail::close_checked(surf, surf_path);
    summarize();
    throw;
  }
  rep.completed = true;
  detail::close_checked(surf, surf_path);
  summarize();
  if (final_state)
    *final_state = std::move(st);
  return rep;
}

} // namespace richards
