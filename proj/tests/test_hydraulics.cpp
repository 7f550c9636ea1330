#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "richards/hydraulics.hpp"

using namespace richards;

namespace {

const Hydraulics& sand_bc()
{
  static const Hydraulics h(sand());
  return h;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

std::vector<double> logspace_neg(double lo, double hi, int n)
{
  // -10^lo .. -10^hi
  std::vector<double> p(n);
  for (int i = 0; i < n; ++i)
    p[i] = -std::pow(10.0, lo + (hi - lo) * i / (n - 1));
  return p;
}

} // namespace

TEST(Saturation, SandInitialValue)
{
  EXPECT_NEAR(sand_bc().saturation_from_pressure(-2e4), 0.1401, 5e-4);
}

TEST(Saturation, EntryPressureIsSaturated)
{
  const auto& h = sand_bc();
  EXPECT_EQ(h.saturation_from_pressure(-712.2), 1.0);
  EXPECT_EQ(h.saturation_from_pressure(0.0), 1.0);
  EXPECT_EQ(h.saturation_from_pressure(5e4), 1.0);
}

TEST(Saturation, TenTimesEntryPressure)
{
  const auto& h = sand_bc();
  const double expect = 0.0458 + (1 - 0.0458) * std::pow(10.0, -0.694);
  EXPECT_NEAR(h.saturation_from_pressure(-7122.0), expect, 1e-14);
  // bisection on the inverse
  double lo = -1e5, hi = -712.2;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (h.saturation_from_pressure(mid) < expect ? lo : hi) = mid;
  }
  EXPECT_NEAR(0.5 * (lo + hi), -7122.0, 1e-8);
  EXPECT_NEAR(h.pressure_from_saturation(expect), -7122.0, 1e-8);
}

TEST(Saturation, Monotone)
{
  const auto& h = sand_bc();
  double prev = 0;
  for (int i = 0; i <= 1000; ++i) {
    const double p = -1e6 + i * (1e6 + 1e4) / 1000.0;
    const double s = h.saturation_from_pressure(p);
    EXPECT_GE(s, prev);
    EXPECT_GE(s, 0.0458);
    EXPECT_LE(s, 1.0);
    prev = s;
  }
}

TEST(PressureFromSaturation, Endpoints)
{
  const auto& h = sand_bc();
  EXPECT_DOUBLE_EQ(h.pressure_from_saturation(1.0), -712.2);
  EXPECT_NEAR(h.pressure_from_saturation(0.1401), -2e4, 0.005 * 2e4);
  EXPECT_THROW(h.pressure_from_saturation(0.0458), DegenerateSaturation);
  EXPECT_THROW(h.pressure_from_saturation(0.01), DegenerateSaturation);
  EXPECT_THROW(h.pressure_from_saturation(1.0 + 1e-9), DomainError);
}

TEST(PressureFromSaturation, ExactInverse)
{
  const auto& h = sand_bc();
  for (int i = 1; i <= 100; ++i) {
    const double s = 0.0458 + (1 - 0.0458) * i / 100.0;
    EXPECT_NEAR(h.saturation_from_pressure(h.pressure_from_saturation(s)), s, 1e-12 * s);
  }
}

TEST(PressureFromSaturation, HygieneSandstoneSaturated)
{
  const Hydraulics h(van_genuchten_soil(0.0079, 10.4, 6.66e-9));
  EXPECT_EQ(h.pressure_from_saturation(1.0), 0.0);
}

TEST(RelPerm, Endpoints)
{
  const auto& h = sand_bc();
  EXPECT_EQ(h.rel_perm(1.0), 1.0);
  EXPECT_EQ(h.rel_perm(0.0458), 0.0);
  // (0.09882)^5.8818 evaluated through logs
  const double se = (0.1401 - 0.0458) / (1 - 0.0458);
  EXPECT_NEAR(h.rel_perm(0.1401), std::exp((3 + 2 / 0.694) * std::log(se)), 1e-18);
  EXPECT_NEAR(h.rel_perm(0.1401), 1.22e-6, 0.01e-6);
}

TEST(RelPerm, ClampsAndCounts)
{
  const Hydraulics h(sand());
  EXPECT_EQ(h.clamp_count(), 0u);
  EXPECT_EQ(h.rel_perm(1.2), 1.0);
  EXPECT_EQ(h.rel_perm(-0.3), 0.0);
  EXPECT_EQ(h.clamp_count(), 2u);
}

TEST(Kirchhoff, Anchors)
{
  const auto& h = sand_bc();
  const double M0 = h.mobility();
  EXPECT_EQ(h.kirchhoff(0.0).value(), 0.0);
  EXPECT_NEAR(h.kirchhoff(-712.2).value(), M0 * -712.2, 1e-15 * M0 * 712.2);
  EXPECT_NEAR(h.kirchhoff(300.0).value(), M0 * 300.0, 1e-15 * M0 * 300);
}

TEST(Kirchhoff, MinimalPressureRatio)
{
  const auto& h = sand_bc();
  const double lam = 0.694;
  const double ratio = h.u_min() / (h.mobility() * -712.2);
  EXPECT_NEAR(ratio, (3 * lam + 2) / (3 * lam + 1), 1e-14);
  EXPECT_NEAR(ratio, 1.3245, 1e-3);
}

TEST(Kirchhoff, MinimalPressureByQuadrature)
{
  // integrate M0 kr(s(q)) from -1e9 to 0 on a geometric grid with Simpson panels
  const auto& h = sand_bc();
  const double M0 = h.mobility();
  auto f = [&](double q) { return M0 * h.rel_perm(h.saturation_from_pressure(q)); };
  double I = 712.2 * M0;
  const int panels = 20000;
  const double a = std::log(712.2), b = std::log(1e9);
  for (int k = 0; k < panels; ++k) {
    const double t0 = a + (b - a) * k / panels, t1 = a + (b - a) * (k + 1) / panels, tm = 0.5 * (t0 + t1);
    auto g = [&](double t) { return f(-std::exp(t)) * std::exp(t); };
    I += (t1 - t0) / 6 * (g(t0) + 4 * g(tm) + g(t1));
  }
  EXPECT_NEAR(-I, h.u_min(), 1e-6 * std::abs(h.u_min()));
}

TEST(Kirchhoff, ClosedFormMatchesQuadratureEngine)
{
  const Hydraulics q(sand(), Hydraulics::Engine::Quadrature);
  const auto& c = sand_bc();
  EXPECT_FALSE(q.closed_form());
  EXPECT_NEAR(q.u_min(), c.u_min(), 1e-12 * std::abs(c.u_min()));
  for (double p : logspace_neg(0, 6, 60)) {
    const double uc = c.kirchhoff(p).value(), uq = q.kirchhoff(p).value();
    EXPECT_NEAR(uq, uc, 1e-12 * std::abs(c.u_min())) << p;
  }
}

TEST(Kirchhoff, StrictlyIncreasing)
{
  const auto& h = sand_bc();
  double prev = -infinity;
  for (int i = 0; i <= 1000; ++i) {
    const double p = -1e6 + i * (1e6 + 1e4) / 1000.0;
    const double u = h.kirchhoff(p).value();
    EXPECT_GT(u, prev);
    EXPECT_GT(u, h.u_min());
    prev = u;
  }
}

TEST(InvKirchhoff, Anchors)
{
  const auto& h = sand_bc();
  EXPECT_EQ(h.inv_kirchhoff(0.0), 0.0);
  EXPECT_NEAR(h.inv_kirchhoff(h.mobility() * -712.2), -712.2, 1e-9);
  EXPECT_THROW(h.inv_kirchhoff(h.u_min()), BelowMinimalPressure);
  EXPECT_THROW(h.inv_kirchhoff(h.u_min() * (1 + 1e-12)), BelowMinimalPressure);
  EXPECT_THROW(h.inv_kirchhoff(2 * h.u_min()), BelowMinimalPressure);
}

TEST(InvKirchhoff, RoundTripClosedForm)
{
  const auto& h = sand_bc();
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const double p = i < 999 ? -std::pow(10.0, 6.0 - 6.0 * i / 998) : 1e4;
    worst = std::max(worst, rel(h.inv_kirchhoff(h.kirchhoff(p)), p));
  }
  EXPECT_LE(worst, 1e-8);
}

TEST(InvKirchhoff, RoundTripVanGenuchtenTable)
{
  for (const auto& row : van_genuchten_table) {
    const Hydraulics h(van_genuchten_soil(row.alpha_per_cm, row.l, 6.66e-9));
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
      const double p = i < 999 ? -std::pow(10.0, 6.0 - 6.0 * i / 998) : 1e4;
      worst = std::max(worst, rel(h.inv_kirchhoff(h.kirchhoff(p)), p));
    }
    EXPECT_LE(worst, 1e-6) << row.name;
  }
}

TEST(InvKirchhoff, Monotone)
{
  const auto& h = sand_bc();
  double prev = -infinity;
  for (int i = 1; i <= 1000; ++i) {
    const double u = h.u_min() * (1 - i / 1000.0) + 1e-4 * i / 1000.0;
    const double p = h.inv_kirchhoff(u);
    EXPECT_GE(p, prev);
    prev = p;
  }
}

TEST(HNeg, Identity)
{
  const auto& h = sand_bc();
  EXPECT_EQ(h.h_neg(0.5), 0.0);
  EXPECT_NEAR(h.h_neg(h.mobility() * -712.2), 712.2, 1e-9);
  for (int i = 1; i <= 100; ++i) {
    const double u = h.u_min() * i / 101.0;
    EXPECT_EQ(h.h_neg(u) + h.inv_kirchhoff(u), 0.0);
    EXPECT_GE(h.h_neg(u), 0.0);
  }
}

TEST(Psi, Clamps)
{
  EXPECT_EQ(psi_factor(-1.0, 0.02), 0.0);
  EXPECT_EQ(psi_factor(0.01, 0.02), 0.5);
  EXPECT_EQ(psi_factor(0.04, 0.02), 1.0);
  EXPECT_EQ(psi_factor(0.0, 0.02), 0.0);
}

TEST(KappaStar, Branches)
{
  const auto& h = sand_bc();
  const double c = 1e5, sigma = 0.02, M0 = h.mobility();
  for (double w : {0.0, 0.01, 0.02, 1.0})
    EXPECT_EQ(h.kappa_star(0.0, w, c, sigma), 0.0);
  EXPECT_EQ(h.kappa_star(-1e-4, 0.0, c, sigma), 0.0);
  const double u = -0.5 * M0 * 712.2;
  const double head = h.inv_kirchhoff(u) / h.rho_g();
  EXPECT_NEAR(h.kappa_star(u, 0.05, c, sigma), head / c, 1e-18);
  EXPECT_NEAR(h.kappa_star(u, 0.01, c, sigma), 0.5 * head / c, 1e-18);
  EXPECT_NEAR(h.kappa_star(2 * M0, 0.0, c, sigma), 2 / h.rho_g() / c, 1e-18);
}

TEST(KappaStar, NondecreasingInU)
{
  const auto& h = sand_bc();
  for (double w : {0.0, 0.005, 0.03}) {
    double prev = -infinity;
    for (int i = 1; i <= 1000; ++i) {
      const double u = h.u_min() * (1 - i / 1000.0) + 1e-5 * i / 1000.0;
      const double k = h.kappa_star(u, w, 1e5, 0.02);
      EXPECT_GE(k, prev);
      prev = k;
    }
  }
}

TEST(PrimitiveDomain, ReferenceIsZero)
{
  const auto& h = sand_bc();
  EXPECT_EQ(h.primitive_domain(h.u_min(), 100.0), 0.0);
  EXPECT_THROW(h.primitive_domain(h.u_min() * 1.01, 100.0), DomainError);
}

TEST(PrimitiveDomain, DerivativeMatchesIntegrand)
{
  const auto& h = sand_bc();
  const double n = h.porosity();
  for (double v : {-1e-3 * h.mobility() * 712.2, -1e-3, 0.3 * h.u_min(), 0.9 * h.u_min(), 2e-6}) {
    if (v <= h.u_min())
      continue;
    const double dv = 1e-6 * std::abs(v);
    const double fd = (h.primitive_domain(v + dv, 100.0) - h.primitive_domain(v - dv, 100.0)) / (2 * dv);
    const double exact = n * h.saturation_from_pressure(h.inv_kirchhoff(v));
    EXPECT_NEAR(fd, exact, 1e-6 * std::abs(exact)) << v;
  }
}

TEST(PrimitiveDomain, SourceShiftsDerivative)
{
  const auto& h = sand_bc();
  const SourceLaw f{1e-6, -2e-6};
  const double v = 0.5 * h.u_min(), tau = 100.0, dv = 1e-6 * std::abs(v);
  const double s = h.saturation_from_pressure(h.inv_kirchhoff(v));
  const double fd = (h.primitive_domain(v + dv, tau, f) - h.primitive_domain(v - dv, tau, f)) / (2 * dv);
  EXPECT_NEAR(fd, h.porosity() * s - tau * f(s), 1e-6);
}

TEST(PrimitiveDomain, MidpointConvex)
{
  const auto& h = sand_bc();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(h.u_min() * 0.999999, 2 * h.mobility() * 712.2);
  for (int i = 0; i < 50; ++i) {
    const double a = U(rng), b = U(rng);
    const double mid = h.primitive_domain(0.5 * (a + b), 100.0);
    const double avg = 0.5 * (h.primitive_domain(a, 100.0) + h.primitive_domain(b, 100.0));
    EXPECT_LE(mid, avg + 1e-15 * std::abs(avg));
  }
}

TEST(PrimitiveBoundary, Anchors)
{
  const auto& h = sand_bc();
  const double tau = 100, c = 1e5, sigma = 0.02, M0 = h.mobility();
  EXPECT_EQ(h.primitive_boundary(0.0, 0.01, tau, c, sigma), 0.0);
  EXPECT_EQ(h.primitive_boundary(0.5 * h.u_min(), 0.0, tau, c, sigma), 0.0);
  const double v = 3 * M0;
  EXPECT_NEAR(h.primitive_boundary(v, 0.05, tau, c, sigma), tau * v * v / (2 * c * M0 * h.rho_g()),
              1e-12 * tau * v * v / (2 * c * M0 * h.rho_g()));
}

TEST(PrimitiveBoundary, ConvexNonnegativeMinimumAtZero)
{
  const auto& h = sand_bc();
  const double tau = 100, c = 1e5, sigma = 0.02;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(h.u_min() * 0.999999, -h.u_min());
  for (double w : {0.0, 0.007, 0.05}) {
    for (int i = 0; i < 50; ++i) {
      const double a = U(rng), b = U(rng);
      const double fa = h.primitive_boundary(a, w, tau, c, sigma), fb = h.primitive_boundary(b, w, tau, c, sigma);
      EXPECT_GE(fa, 0.0);
      EXPECT_LE(h.primitive_boundary(0.5 * (a + b), w, tau, c, sigma), 0.5 * (fa + fb) * (1 + 1e-14) + 1e-300);
    }
    // derivative equals tau kappa*
    const double v = 0.4 * h.u_min(), dv = 1e-6 * std::abs(v);
    const double fd = (h.primitive_boundary(v + dv, w, tau, c, sigma) - h.primitive_boundary(v - dv, w, tau, c, sigma)) /
                      (2 * dv);
    const double exact = tau * h.kappa_star(v, w, c, sigma);
    EXPECT_NEAR(fd, exact, 1e-5 * std::abs(exact) + 1e-300) << w;
  }
}

TEST(Regularize, MaxVariant)
{
  const Hydraulics r = regularize(sand_bc(), std::sqrt(0.1));
  EXPECT_NEAR(r.rel_perm(0.0458), 0.1, 1e-15);
  EXPECT_EQ(r.rel_perm(1.0), 1.0);
  EXPECT_FALSE(r.has_floor());
  EXPECT_EQ(r.u_min(), -infinity);
  for (int i = 0; i <= 200; ++i) {
    const double s = 0.0458 + (1 - 0.0458) * i / 200.0;
    EXPECT_LE(std::abs(r.rel_perm(s) - sand_bc().rel_perm(s)), 0.1 + 1e-15);
    EXPECT_GE(r.rel_perm(s), 0.1 - 1e-15);
  }
}

TEST(Regularize, AdditiveVariant)
{
  const Hydraulics r = regularize(sand_bc(), std::sqrt(0.1), RegularizationKind::Additive);
  for (int i = 0; i <= 200; ++i) {
    const double s = 0.0458 + (1 - 0.0458) * i / 200.0;
    EXPECT_LE(std::abs(r.rel_perm(s) - sand_bc().rel_perm(s)), 0.1 + 1e-15);
  }
  EXPECT_FALSE(r.has_floor());
}

TEST(Regularize, RejectsNonpositiveDelta)
{
  EXPECT_THROW(regularize(sand_bc(), 0.0), DomainError);
  EXPECT_THROW(regularize(sand_bc(), -0.1), DomainError);
}

TEST(Regularize, ConvergesOnCompacts)
{
  double prev = infinity;
  for (double d : {1e-1, 1e-2, 1e-3}) {
    const Hydraulics r = regularize(sand_bc(), d);
    double err = 0;
    for (double p : logspace_neg(1, 4, 30))
      err = std::max(err, std::abs(r.kirchhoff(p).value() - sand_bc().kirchhoff(p).value()));
    EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(Regularize, RoundTripAndNoFloor)
{
  const Hydraulics r = regularize(sand_bc(), 0.05);
  for (double p : logspace_neg(0, 6, 50))
    EXPECT_LE(rel(r.inv_kirchhoff(r.kirchhoff(p)), p), 1e-8) << p;
  EXPECT_NO_THROW(r.inv_kirchhoff(10 * sand_bc().u_min()));
  EXPECT_LT(r.inv_kirchhoff(10 * sand_bc().u_min()), -1e4);
}

TEST(Assumptions, BrooksCorey)
{
  const auto rep = verify_assumptions(sand_bc());
  for (const auto& c : rep.inequalities)
    EXPECT_TRUE(c.pass) << c.name;
  EXPECT_FALSE(rep.crucial_implication);
}

TEST(Assumptions, SiltLoamSecondFails)
{
  const Hydraulics h(van_genuchten_soil(0.00423, 2.06, 6.66e-9));
  const auto rep = verify_assumptions(h);
  EXPECT_TRUE(rep.inequalities[0].pass);
  EXPECT_FALSE(rep.inequalities[1].pass);
  EXPECT_TRUE(rep.inequalities[2].pass);
  EXPECT_TRUE(rep.inequalities[3].pass);
}

TEST(Assumptions, RegularizedCrucialImplication)
{
  const auto rep = verify_assumptions(regularize(sand_bc(), 0.1));
  EXPECT_TRUE(rep.crucial_implication);
}

TEST(Assumptions, GridSizeChecked)
{
  EXPECT_THROW(verify_assumptions(sand_bc(), 5), DomainError);
}

TEST(SoilParams, Validation)
{
  auto p = sand();
  p.K = 0;
  EXPECT_THROW(p.validate(), ValidationError);
  p = sand();
  p.s_m = 1.0;
  EXPECT_THROW(p.validate(), ValidationError);
  p = sand();
  p.p_b = 10;
  EXPECT_THROW(p.validate(), ValidationError);
  p = sand();
  p.delta = -1;
  EXPECT_THROW(p.validate(), ValidationError);
}
