#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "richards/errors.hpp"
#include "richards/soil.hpp"

namespace richards {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// psi(w) = min{1, (w/sigma)_+}, the switch that suppresses suction when no water is ponded.
inline double psi_factor(double w, double sigma)
{
  if (!(sigma > 0))
    throw DomainError("psi_factor: sigma must be > 0");
  return std::clamp(w / sigma, 0.0, 1.0);
}

/// Volumetric source f(s) = f0 + f1*s [1/s].
struct SourceLaw
{
  double f0 = 0.0;
  double f1 = 0.0;

  double operator()(double s) const { return f0 + f1 * s; }

  /// Bounded, nonincreasing in s, f(1) <= 0 <= f(0).
  void validate() const
  {
    if (!(f1 <= 0))
      throw ValidationError("source.f1", "must be <= 0 (f decreasing in s)");
    if (!(f0 >= 0))
      throw ValidationError("source.f0", "f(0) must be >= 0");
    if (!(f0 + f1 <= 0))
      throw ValidationError("source.f0", "f(1) = f0 + f1 must be <= 0");
  }
};

/// Generalized (Kirchhoff) pressure.
///
/// Stored as the offset `reduced` above a datum. When the minimal pressure u_min is finite the
/// datum is u_min, so values close to the degenerate end keep full relative precision; otherwise
/// the datum is 0. `value()` is the usual u with u(p = 0) = 0.
struct GeneralizedPressure
{
  double reduced = 0.0;
  double datum = 0.0;

  double value() const { return datum + reduced; }
};

namespace detail {

/// Closed-form and quadrature-free pieces of a retention law, in effective saturation.
struct RetentionLaw
{
  RetentionModel model;
  double p_b, lambda;  // Brooks-Corey
  double alpha, l, m;  // van Genuchten
  double delta2;
  RegularizationKind kind;

  explicit RetentionLaw(const SoilParams& sp)
    : model(sp.model), p_b(sp.p_b), lambda(sp.lambda), alpha(sp.alpha), l(sp.l),
      m(sp.model == RetentionModel::VanGenuchten ? 1.0 - 1.0 / sp.l : 0.0),
      delta2(sp.delta * sp.delta), kind(sp.regularization)
  {
  }

  double entry_pressure() const { return model == RetentionModel::BrooksCorey ? p_b : 0.0; }

  double characteristic_pressure() const
  {
    return model == RetentionModel::BrooksCorey ? -p_b : 1.0 / alpha;
  }

  double se_from_pressure(double p) const
  {
    if (p >= entry_pressure())
      return 1.0;
    if (model == RetentionModel::BrooksCorey)
      return std::pow(p / p_b, -lambda);
    return std::pow(1.0 + std::pow(-alpha * p, l), -m);
  }

  /// d se / dp, zero on the saturated branch.
  double se_slope(double p) const
  {
    if (p >= entry_pressure())
      return 0.0;
    if (model == RetentionModel::BrooksCorey)
      return lambda * std::pow(p / p_b, -lambda - 1.0) / (-p_b);
    const double ap = -alpha * p;
    return m * l * alpha * std::pow(ap, l - 1.0) * std::pow(1.0 + std::pow(ap, l), -m - 1.0);
  }

  double pressure_from_se(double se) const
  {
    if (model == RetentionModel::BrooksCorey)
      return p_b * std::pow(se, -1.0 / lambda);
    const double t = std::expm1(-std::log(se) / m); // se^{-1/m} - 1
    return -std::pow(t, 1.0 / l) / alpha;
  }

  double pressure_slope_se(double se) const
  {
    if (model == RetentionModel::BrooksCorey)
      return -p_b / lambda * std::pow(se, -1.0 / lambda - 1.0);
    const double t = std::expm1(-std::log(se) / m);
    return std::pow(t, 1.0 / l - 1.0) * std::pow(se, -1.0 / m - 1.0) / (alpha * l * m);
  }

  double kr_raw(double se) const
  {
    if (se <= 0)
      return 0.0;
    if (se >= 1)
      return 1.0;
    if (model == RetentionModel::BrooksCorey)
      return std::pow(se, 3.0 + 2.0 / lambda);
    const double y = std::exp(std::log(se) / m);       // se^{1/m}
    const double b = -std::expm1(m * std::log1p(-y)); // 1 - (1 - y)^m
    return std::sqrt(se) * b * b;
  }

  double kr_raw_slope(double se) const
  {
    if (se <= 0 || se >= 1)
      return model == RetentionModel::BrooksCorey && se >= 1 ? 3.0 + 2.0 / lambda : 0.0;
    if (model == RetentionModel::BrooksCorey) {
      const double e = 3.0 + 2.0 / lambda;
      return e * std::pow(se, e - 1.0);
    }
    const double y = std::exp(std::log(se) / m);
    const double b = -std::expm1(m * std::log1p(-y));
    const double am1 = std::exp((m - 1.0) * std::log1p(-y)); // (1 - y)^{m-1}
    return 0.5 / std::sqrt(se) * b * b + 2.0 * b * am1 * std::pow(se, 1.0 / m - 0.5);
  }

  double kr(double se) const
  {
    const double k = kr_raw(se);
    if (delta2 <= 0)
      return k;
    return kind == RegularizationKind::Max ? std::max(k, delta2) : k + delta2;
  }

  double kr_slope(double se) const
  {
    if (delta2 > 0 && kind == RegularizationKind::Max && kr_raw(se) < delta2)
      return 0.0;
    return kr_raw_slope(se);
  }
};

// One integrator per thread: their integrate() members are not const.
inline boost::math::quadrature::tanh_sinh<double>& tanh_sinh_rule()
{
  thread_local boost::math::quadrature::tanh_sinh<double> rule;
  return rule;
}

inline boost::math::quadrature::exp_sinh<double>& exp_sinh_rule()
{
  thread_local boost::math::quadrature::exp_sinh<double> rule;
  return rule;
}

/// Cumulative integrals over a log-spaced pressure grid below the entry pressure.
///
/// With w(q) = M0 kr(se(q)) the tables hold, at each knot p_k:
///   x = reduced Kirchhoff value, G = int s dx (saturation primitive), P = int p dx from u = 0.
class KirchhoffTables
{
public:
  static constexpr int knot_count = 2048;

  KirchhoffTables(const RetentionLaw& law, double M0, double s_m, double s_M)
    : law_(law), M0_(M0), s_m_(s_m), ds_(s_M - s_m), s_M_(s_M)
  {
    p_entry_ = law.entry_pressure();
    k1_ = law.kr(1.0);
    finite_floor_ = !(law.delta2 > 0);
    const double pc = law.characteristic_pressure();

    p_.resize(knot_count);
    for (int k = 0; k < knot_count - 1; ++k) {
      // k = 0 is the most negative knot.
      const double t = 10.0 - 20.0 * double(k) / double(knot_count - 2);
      p_[k] = p_entry_ - pc * std::pow(10.0, t);
    }
    p_.back() = p_entry_;

    x_.assign(knot_count, 0.0);
    G_.assign(knot_count, 0.0);
    P_.assign(knot_count, 0.0);

    const int last = knot_count - 1;
    P_[last] = 0.5 * M0_ * k1_ * p_entry_ * p_entry_;
    for (int k = last - 1; k >= 0; --k)
      P_[k] = P_[k + 1] - segment(p_[k], p_[k + 1], Moment::Pressure);

    if (finite_floor_) {
      x_[0] = tail(p_[0], Moment::Zero);
      G_[0] = tail(p_[0], Moment::Saturation);
      for (int k = 0; k < last; ++k) {
        x_[k + 1] = x_[k] + segment(p_[k], p_[k + 1], Moment::Zero);
        G_[k + 1] = G_[k] + segment(p_[k], p_[k + 1], Moment::Saturation);
      }
      datum_ = -(x_[last] - M0_ * k1_ * p_entry_);
    } else {
      x_[last] = M0_ * k1_ * p_entry_;
      G_[last] = s_M_ * x_[last];
      for (int k = last - 1; k >= 0; --k) {
        x_[k] = x_[k + 1] - segment(p_[k], p_[k + 1], Moment::Zero);
        G_[k] = G_[k + 1] - segment(p_[k], p_[k + 1], Moment::Saturation);
      }
      datum_ = 0.0;
    }
  }

  double datum() const { return datum_; }
  bool finite_floor() const { return finite_floor_; }
  double x_entry() const { return x_.back(); }
  double G_entry() const { return G_.back(); }

  double density(double q) const { return M0_ * law_.kr(law_.se_from_pressure(q)); }

  double saturation(double q) const { return s_m_ + ds_ * law_.se_from_pressure(q); }

  /// Reduced Kirchhoff value of a pressure below the entry pressure.
  double reduced(double p) const { return evaluate(p, Moment::Zero, x_); }
  double saturation_primitive(double p) const { return evaluate(p, Moment::Saturation, G_); }
  double pressure_primitive(double p) const { return evaluate(p, Moment::Pressure, P_); }

  /// Pressure below the entry pressure whose reduced value is x (x < x_entry, x > floor).
  double pressure(double x) const
  {
    const int last = knot_count - 1;
    double lo, hi;
    if (x < x_[0]) {
      hi = p_[0];
      lo = p_entry_ - 2.0 * (p_entry_ - p_[0]);
      while (reduced(lo) > x) {
        hi = lo;
        lo = p_entry_ - 2.0 * (p_entry_ - lo);
        if (!std::isfinite(lo))
          return -infinity;
      }
    } else {
      const auto it = std::upper_bound(x_.begin(), x_.end(), x);
      const int k = std::clamp(int(it - x_.begin()) - 1, 0, last - 1);
      lo = p_[k];
      hi = p_[k + 1];
    }
    // Safeguarded Newton on x(p) - x, x'(p) = density(p) > 0.
    double p = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      const double f = reduced(p) - x;
      if (f == 0)
        return p;
      if (f > 0)
        hi = p;
      else
        lo = p;
      const double d = density(p);
      double next = p - f / d;
      if (!(next > lo && next < hi) || !std::isfinite(next))
        next = 0.5 * (lo + hi);
      if (std::abs(next - p) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(p) ||
          hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(p))
        return next;
      p = next;
    }
    return p;
  }

private:
  enum class Moment
  {
    Zero,
    Saturation,
    Pressure
  };

  double integrand(double q, Moment mo) const
  {
    const double w = density(q);
    switch (mo) {
      case Moment::Zero: return w;
      case Moment::Saturation: return saturation(q) * w;
      case Moment::Pressure: return q * w;
    }
    return w;
  }

  double segment(double a, double b, Moment mo) const
  {
    if (a == b)
      return 0.0;
    auto f = [&](double q) { return integrand(q, mo); };
    if (b >= p_entry_ || a >= p_entry_)
      return tanh_sinh_rule().integrate(f, a, b, 1e-15);
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 4, 1e-14);
  }

  double tail(double b, Moment mo) const
  {
    auto f = [&](double q) { return integrand(q, mo); };
    return exp_sinh_rule().integrate(f, -infinity, b, 1e-15);
  }

  double evaluate(double p, Moment mo, const std::vector<double>& table) const
  {
    const int last = knot_count - 1;
    if (p >= p_entry_)
      return table[last];
    if (p < p_[0]) {
      if (finite_floor_ && mo != Moment::Pressure)
        return tail(p, mo);
      return table[0] - segment(p, p_[0], mo);
    }
    const auto it = std::upper_bound(p_.begin(), p_.end(), p);
    const int k = std::clamp(int(it - p_.begin()) - 1, 0, last - 1);
    if (p - p_[k] <= p_[k + 1] - p)
      return table[k] + segment(p_[k], p, mo);
    return table[k + 1] - segment(p, p_[k + 1], mo);
  }

  RetentionLaw law_;
  double M0_, s_m_, ds_, s_M_;
  double p_entry_, k1_;
  bool finite_floor_;
  double datum_ = 0.0;
  std::vector<double> p_, x_, G_, P_;
};

} // namespace detail

/// Result of checking the structural inequalities on k and p_c.
struct InequalityCheck
{
  std::string name;
  double sup = 0.0;       ///< largest value of the bounded quantity on the grid
  double growth = 0.0;    ///< sup near the endpoint divided by sup in the bulk
  bool pass = true;
};

struct AssumptionReport
{
  std::array<InequalityCheck, 4> inequalities;
  bool crucial_implication = false; ///< bounded u_- implies bounded p_-
};

/// Hydraulic functions of a homogeneous soil: retention, permeability and the Kirchhoff transform.
///
/// Immutable after construction. Brooks-Corey without regularization uses closed forms; any other
/// law goes through cumulative quadrature tables (built once, shared between copies).
class Hydraulics
{
public:
  enum class Engine
  {
    Auto,
    ClosedForm,
    Quadrature
  };

  explicit Hydraulics(SoilParams params, Engine engine = Engine::Auto)
    : params_(params), law_(params), clamp_count_(std::make_shared<std::atomic<std::size_t>>(0))
  {
    params_.validate();
    M0_ = params_.mobility();
    ds_ = params_.s_M - params_.s_m;
    const bool closed_ok = params_.model == RetentionModel::BrooksCorey && params_.delta == 0;
    if (engine == Engine::ClosedForm && !closed_ok)
      throw DomainError("closed-form Kirchhoff transform needs unregularized Brooks-Corey");
    closed_ = engine == Engine::ClosedForm || (engine == Engine::Auto && closed_ok);
    if (closed_) {
      const double lam = params_.lambda;
      gamma_ = 1.0 / (3.0 * lam + 1.0);
      beta_ = lam * gamma_;
      x_entry_ = M0_ * (-params_.p_b) * gamma_;
      datum_ = M0_ * params_.p_b * (3.0 * lam + 2.0) * gamma_;
      G_entry_ = params_.s_m * x_entry_ + ds_ * x_entry_ / (beta_ + 1.0);
    } else {
      tables_ = std::make_shared<const detail::KirchhoffTables>(law_, M0_, params_.s_m, params_.s_M);
      x_entry_ = tables_->x_entry();
      datum_ = tables_->datum();
      G_entry_ = tables_->G_entry();
    }
    k1_ = law_.kr(1.0);
  }

  const SoilParams& params() const { return params_; }
  bool closed_form() const { return closed_; }
  double mobility() const { return M0_; }
  double rho_g() const { return params_.rho_g(); }
  double porosity() const { return params_.n; }
  double k_saturated() const { return k1_; }
  double entry_pressure() const { return law_.entry_pressure(); }
  double characteristic_pressure() const { return law_.characteristic_pressure(); }

  // ---- retention and permeability ----

  double saturation_from_pressure(double p) const
  {
    return params_.s_m + ds_ * law_.se_from_pressure(p);
  }

  double pressure_from_saturation(double s) const
  {
    if (s > params_.s_M)
      throw DomainError("pressure_from_saturation: s above s_M");
    if (!(s > params_.s_m))
      throw DegenerateSaturation("pressure_from_saturation: s at or below residual saturation");
    const double se = (s - params_.s_m) / ds_;
    if (se >= 1.0)
      return law_.entry_pressure();
    return law_.pressure_from_se(se);
  }

  /// Relative permeability (normalized by K). Out-of-range s is clamped and counted.
  double rel_perm(double s) const
  {
    if (s < params_.s_m || s > params_.s_M) {
      clamp_count_->fetch_add(1, std::memory_order_relaxed);
      s = std::clamp(s, params_.s_m, params_.s_M);
    }
    return law_.kr((s - params_.s_m) / ds_);
  }

  std::size_t clamp_count() const { return clamp_count_->load(std::memory_order_relaxed); }

  /// Mobility m(s) = K kr(s) / mu.
  double mobility(double s) const { return M0_ * rel_perm(s); }

  // ---- Kirchhoff transform, unshifted u ----

  /// Minimal generalized pressure, -infinity when regularized.
  double u_min() const { return has_floor() ? datum_ : -infinity; }

  bool has_floor() const { return closed_ || tables_->finite_floor(); }

  GeneralizedPressure kirchhoff(double p) const
  {
    return GeneralizedPressure{reduced_from_pressure(p), datum_};
  }

  double inv_kirchhoff(const GeneralizedPressure& u) const
  {
    return inv_reduced(u.reduced + (u.datum - datum_));
  }

  double inv_kirchhoff(double u) const { return inv_reduced(u - datum_); }

  /// h(u) = -p(min(u, 0)) >= 0.
  double h_neg(double u) const { return -inv_kirchhoff(std::min(u, 0.0)); }

  double head(double p) const { return p / rho_g(); }

  /// Boundary flux density kappa*(u, w) = (head_+ + head_- psi(w)) / c  [m/s].
  double kappa_star(double u, double w, double c, double sigma) const
  {
    return kappa_from_pressure(inv_kirchhoff(u), w, c, sigma);
  }

  double kappa_from_pressure(double p, double w, double c, double sigma) const
  {
    const double h = head(p);
    if (h >= 0)
      return h / c;
    const double ps = psi_factor(w, sigma);
    return ps == 0 ? 0.0 : h * ps / c;
  }

  // ---- reduced coordinate x = u - datum ----

  double datum() const { return datum_; }
  /// Lower end of the reduced coordinate: 0 with a finite minimal pressure, else -infinity.
  double reduced_floor() const { return has_floor() ? 0.0 : -infinity; }
  /// Reduced value of u = 0 (p = 0).
  double reduced_zero() const { return -datum_; }
  /// Reduced value where the soil becomes fully saturated (p = entry pressure).
  double reduced_entry() const { return x_entry_; }

  double reduced_from_pressure(double p) const
  {
    const double pe = law_.entry_pressure();
    if (p >= pe)
      return x_entry_ + M0_ * k1_ * (p - pe);
    if (closed_)
      return x_entry_ * std::pow(p / params_.p_b, -1.0 / gamma_);
    return tables_->reduced(p);
  }

  /// p(x); -infinity at or below a finite floor.
  double pressure_from_reduced(double x) const
  {
    if (has_floor() && x <= 0)
      return -infinity;
    const double pe = law_.entry_pressure();
    if (x >= x_entry_)
      return pe + (x - x_entry_) / (M0_ * k1_);
    if (closed_)
      return params_.p_b * std::pow(x / x_entry_, -gamma_);
    return tables_->pressure(x);
  }

  /// Saturation as a function of the reduced generalized pressure (inverse Kirchhoff in s).
  double saturation_from_reduced(double x) const
  {
    if (has_floor() && x <= 0)
      return params_.s_m;
    if (x >= x_entry_)
      return params_.s_M;
    if (closed_)
      return params_.s_m + ds_ * std::pow(x / x_entry_, beta_);
    return saturation_from_pressure(tables_->pressure(x));
  }

  /// d s / d x, taken from the right at the entry kink; +infinity at a finite floor.
  double saturation_slope(double x) const
  {
    if (x >= x_entry_)
      return 0.0;
    if (has_floor() && x <= 0)
      return infinity;
    if (closed_)
      return ds_ * beta_ * std::pow(x / x_entry_, beta_ - 1.0) / x_entry_;
    const double p = tables_->pressure(x);
    return ds_ * law_.se_slope(p) / tables_->density(p);
  }

  /// d p / d x = 1 / (M0 kr).
  double pressure_slope(double x) const
  {
    if (x >= x_entry_)
      return 1.0 / (M0_ * k1_);
    if (has_floor() && x <= 0)
      return infinity;
    if (closed_)
      return gamma_ * (-params_.p_b) * std::pow(x / x_entry_, -gamma_ - 1.0) / x_entry_;
    return 1.0 / tables_->density(tables_->pressure(x));
  }

  /// int s(x') dx' from x' = 0 (the floor, or u = 0 when there is none) to x.
  double saturation_primitive(double x) const
  {
    if (x >= x_entry_)
      return G_entry_ + params_.s_M * (x - x_entry_);
    if (has_floor() && x <= 0)
      return params_.s_m * x;
    if (closed_)
      return params_.s_m * x + ds_ * x_entry_ * std::pow(x / x_entry_, beta_ + 1.0) / (beta_ + 1.0);
    return tables_->saturation_primitive(tables_->pressure(x));
  }

  /// int p(x') dx' from u = 0 to x; nonnegative, minimal at u = 0.
  double pressure_primitive(double x) const
  {
    const double pe = law_.entry_pressure();
    if (x >= x_entry_) {
      const double p = pe + (x - x_entry_) / (M0_ * k1_);
      return 0.5 * M0_ * k1_ * p * p;
    }
    if (closed_) {
      const double pb = params_.p_b;
      const double top = 0.5 * M0_ * pb * pb;
      const double xx = std::max(x, 0.0);
      return top + pb * x_entry_ * (std::pow(xx / x_entry_, 1.0 - gamma_) - 1.0) / (1.0 - gamma_);
    }
    if (has_floor() && x <= 0)
      return tables_->pressure_primitive(-infinity);
    return tables_->pressure_primitive(tables_->pressure(x));
  }

  /// Lower limit of the domain primitive: the floor, or -U_cap without one.
  double primitive_reference() const
  {
    if (has_floor())
      return 0.0;
    return -10.0 * M0_ * characteristic_pressure() * cap_factor();
  }

  // ---- primitives in unshifted u ----

  /// Psi_x(v) = int_ref^v [n s(z) - tau f(s(z))] dz.
  double primitive_domain(double v, double tau, const SourceLaw& f = {}) const
  {
    const double x = v - datum_;
    if (has_floor() && x < 0)
      throw DomainError("primitive_domain: v below the minimal pressure");
    const double ref = primitive_reference();
    return (params_.n - tau * f.f1) * (saturation_primitive(x) - saturation_primitive(ref)) -
           tau * f.f0 * (x - ref);
  }

  /// Psi_xi(v) = tau int_0^v kappa*(z, w) dz.
  double primitive_boundary(double v, double w, double tau, double c, double sigma) const
  {
    const double x = v - datum_;
    if (has_floor() && x < 0)
      throw BelowMinimalPressure("primitive_boundary: v below the minimal pressure");
    const double weight = x >= reduced_zero() ? 1.0 : psi_factor(w, sigma);
    return tau / (c * rho_g()) * weight * pressure_primitive(x);
  }

  /// (3 lambda + 2)/(3 lambda + 1) for Brooks-Corey, 1 otherwise.
  double cap_factor() const
  {
    if (params_.model != RetentionModel::BrooksCorey)
      return 1.0;
    const double lam = params_.lambda;
    return (3.0 * lam + 2.0) / (3.0 * lam + 1.0);
  }

  const detail::RetentionLaw& law() const { return law_; }

private:
  double inv_reduced(double x) const
  {
    if (has_floor() && x <= 0)
      throw BelowMinimalPressure("inv_kirchhoff: u at or below the minimal generalized pressure");
    return pressure_from_reduced(x);
  }

  SoilParams params_;
  detail::RetentionLaw law_;
  std::shared_ptr<std::atomic<std::size_t>> clamp_count_;
  std::shared_ptr<const detail::KirchhoffTables> tables_;
  bool closed_ = false;
  double M0_ = 0, ds_ = 0, k1_ = 1;
  double gamma_ = 0, beta_ = 0;
  double x_entry_ = 0, datum_ = 0, G_entry_ = 0;
};

/// Same soil with permeability bounded below by delta^2.
inline Hydraulics regularize(const Hydraulics& hyd, double delta,
                             RegularizationKind kind = RegularizationKind::Max)
{
  if (!(delta > 0))
    throw DomainError("regularize: delta must be > 0");
  SoilParams p = hyd.params();
  p.delta = delta;
  p.regularization = kind;
  return Hydraulics(p);
}

/// Evaluate the four structural inequalities on k and p_c over log-spaced saturation grids.
///
/// Each inequality asks a quantity to stay bounded near an end of its interval. The grid
/// approaches the end down to a distance of 1e-12; an inequality fails when the quantity near
/// the end exceeds its bulk value by more than three orders of magnitude.
inline AssumptionReport verify_assumptions(const Hydraulics& hyd, int grid_size = 200)
{
  if (grid_size < 10)
    throw DomainError("verify_assumptions: grid_size must be >= 10");
  const auto& law = hyd.law();
  auto k = [&](double s) { return law.kr(s); };
  auto dk = [&](double s) { return law.kr_slope(s); };
  auto pc = [&](double s) { return law.pressure_from_se(s); };
  auto dpc = [&](double s) { return law.pressure_slope_se(s); };

  // distances from an end, log-spaced from 0.25 down to 1e-12
  std::vector<double> dist(grid_size);
  for (int i = 0; i < grid_size; ++i)
    dist[i] = 0.25 * std::pow(4e-12, double(i) / double(grid_size - 1));

  auto check = [&](const char* name, auto quantity, bool at_zero, bool at_one) {
    InequalityCheck c;
    c.name = name;
    double bulk = 0.0, near = 0.0;
    auto visit = [&](double s, double d) {
      const double v = quantity(s);
      if (!std::isfinite(v)) {
        near = infinity;
        return;
      }
      (d >= 1e-3 ? bulk : near) = std::max(d >= 1e-3 ? bulk : near, v);
    };
    for (double d : dist) {
      if (at_zero)
        visit(d, d);
      if (at_one)
        visit(1.0 - d, d);
    }
    c.sup = std::max(bulk, near);
    c.growth = bulk > 0 ? near / bulk : (near > 0 ? infinity : 0.0);
    c.pass = c.growth <= 1e3;
    return c;
  };

  AssumptionReport r;
  // d p_c / ds >= 1/c0  <=>  1 / p_c' bounded on (0, 1)
  r.inequalities[0] = check("1/p_c' bounded", [&](double s) { return 1.0 / dpc(s); }, true, true);
  // |k'|^2 <= c0 k
  r.inequalities[1] = check("|k'|^2/k bounded",
                            [&](double s) {
                              const double kk = k(s);
                              const double d = dk(s);
                              return kk > 0 ? d * d / kk : (d == 0 ? 0.0 : infinity);
                            },
                            true, true);
  // k |p_c| + sqrt(k) p_c' <= c0 on (0, 1/2)
  r.inequalities[2] = check("k|p_c| + sqrt(k) p_c' bounded on (0,1/2)",
                            [&](double s) { return k(s) * std::abs(pc(s)) + std::sqrt(k(s)) * dpc(s); },
                            true, false);
  // (1 - s) sqrt(p_c') <= c0 on (1/2, 1)
  r.inequalities[3] = check("(1-s) sqrt(p_c') bounded on (1/2,1)",
                            [&](double s) { return (1.0 - s) * std::sqrt(dpc(s)); }, false, true);
  // Bounded u_- keeps p_- bounded unless u reaches a finite minimal value at p = -infinity.
  r.crucial_implication = !hyd.has_floor();
  return r;
}

} // namespace richards
