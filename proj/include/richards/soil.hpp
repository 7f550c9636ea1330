#pragma once

#include <cmath>
#include <string>

#include "richards/errors.hpp"

namespace richards {

enum class RetentionModel
{
  BrooksCorey,
  VanGenuchten
};

/// How the regularized permeability k_delta is built from k.
enum class RegularizationKind
{
  Max,     ///< k_delta = max(k, delta^2)
  Additive ///< k_delta = k + delta^2
};

/// Which value of rho*g enters gravity, pressure head and the CFL estimate.
enum class RhoGConvention
{
  Physical,        ///< rho * g
  PaperNormalized  ///< g only (rho taken as 1)
};

/// Pascal per centimetre of water column, used to convert van Genuchten alpha given in 1/cm.
inline constexpr double pascal_per_cm_water = 98.0665;

/// Homogeneous soil description plus the physical constants of water.
struct SoilParams
{
  RetentionModel model = RetentionModel::BrooksCorey;
  double K = 6.66e-9;        ///< absolute permeability [m^2]
  double mu = 1.002e-3;      ///< dynamic viscosity [Pa s]
  double n = 0.437;          ///< porosity [-]
  double rho = 1000.0;       ///< water density [kg/m^3]
  double g = 9.81;           ///< gravitational acceleration [m/s^2]
  double s_m = 0.0458;       ///< residual saturation [-]
  double s_M = 1.0;          ///< maximal saturation [-]
  double p_b = -712.2;       ///< bubbling pressure [Pa], Brooks-Corey
  double lambda = 0.694;     ///< pore size distribution factor, Brooks-Corey
  double alpha = 0.0;        ///< van Genuchten alpha [1/Pa]
  double l = 0.0;            ///< van Genuchten exponent (m = 1 - 1/l)
  double delta = 0.0;        ///< regularization parameter, 0 = unregularized
  RegularizationKind regularization = RegularizationKind::Max;
  RhoGConvention rho_g_convention = RhoGConvention::PaperNormalized;

  double mobility() const { return K / mu; }

  double rho_g() const
  {
    return rho_g_convention == RhoGConvention::Physical ? rho * g : g;
  }

  /// Throws ValidationError naming the first violated invariant.
  void validate() const
  {
    auto require = [](bool ok, const char* field, const char* what) {
      if (!ok)
        throw ValidationError(field, what);
    };
    require(std::isfinite(K) && K > 0, "soil.K", "must be > 0");
    require(std::isfinite(mu) && mu > 0, "soil.mu", "must be > 0");
    require(n > 0 && n <= 1, "soil.n", "must lie in (0, 1]");
    require(rho > 0, "soil.rho", "must be > 0");
    require(g > 0, "soil.g", "must be > 0");
    require(s_m >= 0 && s_m < s_M && s_M <= 1, "soil.s_m", "need 0 <= s_m < s_M <= 1");
    require(delta >= 0 && std::isfinite(delta), "soil.delta", "must be >= 0");
    if (model == RetentionModel::BrooksCorey) {
      require(p_b < 0, "soil.p_b", "must be < 0");
      require(lambda > 0, "soil.lambda", "must be > 0");
    } else {
      require(alpha > 0, "soil.alpha", "must be > 0");
      require(l > 1, "soil.l", "must be > 1");
    }
  }
};

/// Sand from the surface/subsurface benchmark: Brooks-Corey, Burdine permeability.
inline SoilParams sand()
{
  return SoilParams{};
}

/// van Genuchten soil with alpha given in 1/cm of water column and zero residual saturation.
inline SoilParams van_genuchten_soil(double alpha_per_cm, double l, double K = 6.66e-9)
{
  SoilParams p;
  p.model = RetentionModel::VanGenuchten;
  p.K = K;
  p.s_m = 0.0;
  p.s_M = 1.0;
  p.alpha = alpha_per_cm / pascal_per_cm_water;
  p.l = l;
  return p;
}

struct NamedSoil
{
  const char* name;
  double alpha_per_cm;
  double l;
};

/// The van Genuchten parameter sets (alpha [1/cm], l) of the classic soil table.
inline constexpr NamedSoil van_genuchten_table[] = {
  {"Hygiene sandstone", 0.0079, 10.4},
  {"Touchet Silt Loam G.E.3", 0.005, 7.09},
  {"Silt Loam G.E.3", 0.00423, 2.06},
  {"Guelph Loam (drying)", 0.0115, 2.03},
  {"Guelph Loam (wetting)", 0.02, 2.76},
  {"Beit Netofa Clay", 0.00152, 1.17},
};

} // namespace richards
