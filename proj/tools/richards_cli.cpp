#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "richards/richards.hpp"

using namespace richards;

namespace {

int cmd_run(const std::string& path, std::optional<std::string> out, std::optional<int> levels,
            std::optional<double> tau, std::optional<double> t_end)
{
  SimConfig cfg = load_config(path);
  if (out)
    cfg.output.directory = *out;
  if (levels)
    cfg.geometry.levels = *levels;
  if (tau)
    cfg.tau = *tau;
  if (t_end)
    cfg.T = *t_end;
  const Model m(cfg);
  std::printf("mesh %zu vertices, h = %.6g m, %d steps of %.6g s\n", m.mesh().vertex_count(),
              m.mesh().max_diameter(), m.cfg.step_count(), m.cfg.tau);
  const RunReport r = run(m, m.cfg.output.directory);
  std::printf("steps %d\n", r.steps);
  std::printf("p [Pa]  min %.10g max %.10g\n", r.min_p, r.max_p);
  std::printf("s [-]   min %.10g max %.10g\n", r.min_s, r.max_s);
  std::printf("w [m]   min %.10g max %.10g\n", r.min_w, r.max_w);
  std::printf("min-w watermark %.10g m\n", r.min_w_watermark);
  std::printf("steps with tau above positivity bound %d\n", r.bound_violations);
  std::printf("outputs in %s\n", m.cfg.output.directory.c_str());
  return 0;
}

int cmd_bounds(const std::string& path)
{
  const Model m(load_config(path));
  const double h = m.mesh().max_diameter();
  const SimState st = init_state(m);
  const StepBound b = positivity_step_bound(m.pressures_on_trace(st.x), m.cfg.rain.on_cells(m.trace, 0.0),
                                            m.cfg.c, m.cfg.sigma, m.hyd);
  std::printf("h          %.10g m\n", h);
  std::printf("tau_cfl    %.10g s\n", cfl_bound(h, m.hyd));
  std::printf("c          %.10g s\n", m.cfg.c);
  std::printf("theta1_min %.10g s\n", b.theta1_min);
  std::printf("theta2_min %.10g s\n", b.theta2_min);
  std::printf("tau_max    %.10g s\n", b.tau_max);
  std::printf("tau        %.10g s\n", m.cfg.tau);
  return 0;
}

int cmd_probe(const std::string& path, double p)
{
  const SimConfig cfg = load_config(path);
  const Hydraulics hyd(cfg.soil);
  const double s = hyd.saturation_from_pressure(p);
  std::printf("s    %.10g\n", s);
  std::printf("kr   %.10g\n", hyd.rel_perm(s));
  std::printf("u    %.10g m^2/s\n", hyd.kirchhoff(p).value());
  std::printf("head %.10g m\n", hyd.head(p));
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Richards equation with surface water coupling"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::string> out;
  std::optional<int> levels;
  std::optional<double> tau, t_end;
  auto* run_cmd = app.add_subcommand("run", "run a simulation");
  run_cmd->add_option("--config", config, "JSON configuration")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out, "output directory");
  run_cmd->add_option("--levels", levels, "refinement levels");
  run_cmd->add_option("--tau", tau, "time step [s]");
  run_cmd->add_option("--t-end", t_end, "final time [s]");

  auto* bounds_cmd = app.add_subcommand("bounds", "print step-size bounds of the initial state");
  bounds_cmd->add_option("--config", config, "JSON configuration")->required()->check(CLI::ExistingFile);

  double pressure = 0;
  auto* probe_cmd = app.add_subcommand("probe", "evaluate the soil laws at one pressure");
  probe_cmd->add_option("--config", config, "JSON configuration")->required()->check(CLI::ExistingFile);
  probe_cmd->add_option("--pressure", pressure, "pressure [Pa]")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*run_cmd)
      return cmd_run(config, out, levels, tau, t_end);
    if (*bounds_cmd)
      return cmd_bounds(config);
    return cmd_probe(config, pressure);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "invalid configuration: %s\n", e.what());
    return 1;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "invalid configuration: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
