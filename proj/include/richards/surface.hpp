#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "richards/errors.hpp"
#include "richards/hydraulics.hpp"
#include "richards/mesh.hpp"

namespace richards {

/// Rain rate on an x-interval of the top edge during a time interval (both closed).
struct RainEvent
{
  Interval x;
  double rate = 0.0; ///< [m/s]
  Interval t{0.0, infinity};
};

struct RainSpec
{
  std::vector<RainEvent> events;

  /// Point value of the rain rate at position x and time t.
  double rate(double x, double t) const
  {
    double r = 0;
    for (const auto& e : events)
      if (e.x.contains(x) && e.t.contains(t))
        r += e.rate;
    return r;
  }

  Vector on_cells(const TraceGrid& tg, double t) const
  {
    Vector r(Eigen::Index(tg.size()));
    for (std::size_t k = 0; k < tg.size(); ++k)
      r[Eigen::Index(k)] = rate(tg.centers[k], t);
    return r;
  }

  void validate() const
  {
    for (const auto& e : events) {
      if (!(e.rate >= 0) || !std::isfinite(e.rate))
        throw ValidationError("rain.rate_m_s", "must be >= 0");
      if (!(e.x.lo <= e.x.hi))
        throw ValidationError("rain.x_m", "empty interval");
      if (!(e.t.lo <= e.t.hi))
        throw ValidationError("rain.t_s", "empty interval");
    }
  }
};

/// g(u, w) = w/c - kappa*(u, w), the flux leaving the surface store into the soil [m/s].
inline double coupling_flux_g_from_pressure(double p, double w, const Hydraulics& hyd, double c, double sigma)
{
  if (!(c > 0))
    throw DomainError("coupling_flux_g: c must be > 0");
  return w / c - hyd.kappa_from_pressure(p, w, c, sigma);
}

inline double coupling_flux_g(double u, double w, const Hydraulics& hyd, double c, double sigma)
{
  return coupling_flux_g_from_pressure(hyd.inv_kirchhoff(u), w, hyd, c, sigma);
}

inline double coupling_flux_g(const GeneralizedPressure& u, double w, const Hydraulics& hyd, double c, double sigma)
{
  return coupling_flux_g_from_pressure(hyd.inv_kirchhoff(u), w, hyd, c, sigma);
}

/// w^{n+1} = w^n + tau (r^{n+1} - g(u^{n+1}, w^n)), cell by cell; p_in holds the pressures of u^{n+1}.
inline Vector update_surface(const Vector& w_n, const Vector& p_in, const Vector& r, double tau, double c,
                             double sigma, const Hydraulics& hyd)
{
  if (w_n.size() != p_in.size() || w_n.size() != r.size())
    throw DimensionError("update_surface: field sizes differ");
  if (!(tau > 0))
    throw DomainError("update_surface: tau must be > 0");
  Vector w(w_n.size());
  for (Eigen::Index k = 0; k < w.size(); ++k)
    w[k] = w_n[k] + tau * (r[k] - coupling_flux_g_from_pressure(p_in[k], w_n[k], hyd, c, sigma));
  return w;
}

struct StepBound
{
  double theta1_min = infinity;
  double theta2_min = infinity;
  double tau_max = 0.0; ///< min(c, theta1_min, theta2_min)
};

inline double theta_of(double c, double sigma, double denom)
{
  return denom > 0 ? c * sigma / denom : infinity;
}

/// Largest explicit step keeping w >= 0, per cell and minimized over cells.
///
/// theta1 = c sigma / (sigma - c r + h), theta2 = c sigma / (sigma + h), each infinite when its
/// denominator is not positive; h is the suction head -min(p, 0)/(rho g) at the cell.
inline StepBound positivity_step_bound(const Vector& p_in, const Vector& r, double c, double sigma,
                                       const Hydraulics& hyd)
{
  if (p_in.size() != r.size())
    throw DimensionError("positivity_step_bound: field sizes differ");
  StepBound b;
  for (Eigen::Index k = 0; k < p_in.size(); ++k) {
    const double h = std::max(-p_in[k], 0.0) / hyd.rho_g();
    b.theta1_min = std::min(b.theta1_min, theta_of(c, sigma, sigma - c * r[k] + h));
    b.theta2_min = std::min(b.theta2_min, theta_of(c, sigma, sigma + h));
  }
  b.tau_max = std::min({c, b.theta1_min, b.theta2_min});
  return b;
}

/// tau_cfl = h n mu / (K rho g sup k'), with sup k' = 3 + 2/lambda for Brooks-Corey.
///
/// van Genuchten permeability has an unbounded derivative at full saturation, giving 0.
inline double cfl_bound(double h, const Hydraulics& hyd)
{
  if (!(h > 0))
    throw DomainError("cfl_bound: h must be > 0");
  const auto& p = hyd.params();
  if (p.model != RetentionModel::BrooksCorey)
    return 0.0;
  return h * p.n * p.mu / (p.K * hyd.rho_g() * (3.0 + 2.0 / p.lambda));
}

} // namespace richards
