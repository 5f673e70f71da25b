#include <cmath>
#include <complex>
#include <vector>

#include <gtest/gtest.h>

#include <latticelab/functions.hpp>

using namespace latticelab;

namespace {

// Trapezoid rule for int exp(-pi a x^2) cos(2 pi x xi) dx, spectrally accurate
// for this integrand on a wide window.
double gaussian_ft_1d(double a, double xi)
{
  double const L = 12.0 / std::sqrt(a);
  int const n = 6000;
  double const h = 2.0 * L / n;
  double s = 0.0;
  for (int k = 0; k <= n; ++k) {
    double const x = -L + k * h;
    double const w = (k == 0 || k == n) ? 0.5 : 1.0;
    s += w * std::exp(-std::numbers::pi * a * x * x) * std::cos(2.0 * std::numbers::pi * x * xi);
  }
  return s * h;
}

// int over a box of g(xi) e^{2 pi i x.xi} by the tensor trapezoid rule. The
// integrands vanish with all derivatives at the box edges.
template <typename G>
cplx inverse_ft_2d(G&& g, double x0, double x1, double lo0, double hi0, double lo1, double hi1, int n)
{
  double const h0 = (hi0 - lo0) / n;
  double const h1 = (hi1 - lo1) / n;
  cplx s{};
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      double const a = lo0 + i * h0;
      double const b = lo1 + j * h1;
      double const ph = 2.0 * std::numbers::pi * (x0 * a + x1 * b);
      s += g(a, b) * cplx{std::cos(ph), std::sin(ph)};
    }
  return s * h0 * h1;
}

} // namespace

TEST(SmoothStep, EndpointsAndSymmetry)
{
  EXPECT_EQ(smooth_step(-0.5), 0.0);
  EXPECT_EQ(smooth_step(0.0), 0.0);
  EXPECT_EQ(smooth_step(1.0), 1.0);
  EXPECT_EQ(smooth_step(3.0), 1.0);
  double prev = 0.0;
  for (int k = 1; k < 100; ++k) {
    double const s = k / 100.0;
    double const v = smooth_step(s);
    EXPECT_GE(v, prev);
    EXPECT_NEAR(v + smooth_step(1.0 - s), 1.0, 1e-15);
    prev = v;
  }
}

TEST(Bumps, SupportAndPlateau)
{
  EXPECT_DOUBLE_EQ(compact_bump(0.0), 1.0);
  EXPECT_EQ(compact_bump(1.0), 0.0);
  EXPECT_GT(compact_bump(0.99), 0.0);
  EXPECT_EQ(plateau_bump(0.3), 1.0);
  EXPECT_EQ(plateau_bump(1.0), 1.0);
  EXPECT_EQ(plateau_bump(2.0), 0.0);
  EXPECT_GT(plateau_bump(1.5), 0.0);
  EXPECT_LT(plateau_bump(1.5), 1.0);
}

TEST(Gaussian, TransformMatchesQuadrature)
{
  TestFunction const f = make_gaussian(2, {4.0, 1.0});
  for (auto xi : {std::vector<double>{0.0, 0.0}, {0.3, -0.7}, {1.1, 0.4}, {-0.25, 1.6}}) {
    double const oracle = gaussian_ft_1d(4.0, xi[0]) * gaussian_ft_1d(1.0, xi[1]);
    cplx const v = f.eval_freq(xi);
    EXPECT_NEAR(v.real(), oracle, 1e-13);
    EXPECT_NEAR(v.imag(), 0.0, 1e-15);
  }
}

TEST(Gaussian, SpaceValuesAndNorms)
{
  std::vector<double> const a{1.0, 2.0, 0.5};
  TestFunction const f = make_gaussian(3, a, 2.0);
  std::vector<double> const x{0.2, -0.4, 1.0};
  double const expect = 2.0 * std::exp(-std::numbers::pi * (0.04 + 2.0 * 0.16 + 0.5));
  EXPECT_NEAR(f.eval_space(x).real(), expect, 1e-15);
  // ||f||_p^p = amp^p p^{-d/2} prod a_i^{-1/2}
  for (double p : {1.0, 1.2, 2.0}) {
    double const np = std::pow(2.0, p) * std::pow(p, -1.5) / std::sqrt(1.0 * 2.0 * 0.5);
    EXPECT_NEAR(f.lp_norm(p), std::pow(np, 1.0 / p), 1e-12) << "p = " << p;
  }
}

TEST(BandLimited, SpaceValuesInvertTheTransform)
{
  double const eps = 0.5;
  TestFunction const f = make_band_limited(2, eps);
  auto fhat = [&](double a, double b) { return std::norm(cplx{a, b}) < eps * eps ? f.eval_freq(std::vector{a, b}) : cplx{}; };
  for (auto x : {std::vector<double>{0.0, 0.0}, {0.3, -1.1}, {2.5, 0.7}}) {
    cplx const oracle = inverse_ft_2d(fhat, x[0], x[1], -eps, eps, -eps, eps, 600);
    cplx const v = f.eval_space(x);
    EXPECT_NEAR(v.real(), oracle.real(), 1e-9);
    EXPECT_NEAR(v.imag(), oracle.imag(), 1e-9);
  }
}

TEST(BandLimited, PlancherelAndDilationInvariantL1)
{
  double const eps = 0.5;
  TestFunction const f = make_band_limited(2, eps);
  // ||f||_2^2 = int |fhat|^2 over the disc, radial quadrature
  int const n = 20000;
  double s = 0.0;
  for (int k = 0; k < n; ++k) {
    double const r = (k + 0.5) * eps / n;
    double const v = compact_bump(r / eps);
    s += v * v * 2.0 * std::numbers::pi * r;
  }
  s *= eps / n;
  EXPECT_NEAR(f.lp_norm(2.0) * f.lp_norm(2.0), s, 1e-8 * s);
  // ||f_eps||_1 does not depend on eps
  double const l1 = make_band_limited(4, 0.5).lp_norm(1.0);
  EXPECT_NEAR(make_band_limited(4, 0.125).lp_norm(1.0), l1, 1e-12 * l1);
}

TEST(Plate, SpaceValuesInvertTheTransform)
{
  double const eps = 0.25;
  double const e2 = eps * eps;
  TestFunction const f = make_plate(2, eps);
  auto fhat = [&](double a, double b) { return f.eval_freq(std::vector{a, b}); };
  for (auto x : {std::vector<double>{0.0, 0.0}, {3.0, 1.5}, {-10.0, 4.0}}) {
    cplx const oracle = inverse_ft_2d(fhat, x[0], x[1], 1.0 - 2.0 * e2, 1.0 + 2.0 * e2, -2.0 * eps, 2.0 * eps, 800);
    cplx const v = f.eval_space(x);
    double const scale = std::pow(eps, 3);
    EXPECT_NEAR(v.real(), oracle.real(), 1e-7 * scale);
    EXPECT_NEAR(v.imag(), oracle.imag(), 1e-7 * scale);
  }
}

TEST(Plate, NormScaling)
{
  // ||f_eps||_p = eps^{(d+1)/p'} ||check_phi||_p
  double const p = 4.0 / 3.0;
  double const ratio = make_plate(4, 0.125).lp_norm(p) / make_plate(4, 0.25).lp_norm(p);
  EXPECT_NEAR(ratio, std::pow(0.5, 5.0 / conjugate_exponent(p)), 1e-12);
}

TEST(Majorants, DominateSamples)
{
  for (std::string const id : {"gaussian:d=3:a=1,2,3", "band_limited:d=3:eps=0.5", "plate:d=3:eps=0.2"}) {
    TestFunction const f = make_from_id(id);
    for (int k = 0; k < 200; ++k) {
      double const t = 0.01 * k;
      std::vector<double> const xi{t * 0.6, -t * 0.8, 0.0};
      EXPECT_LE(std::abs(f.eval_freq(xi)), f.freq_majorant(t) * (1 + 1e-12) + 1e-300) << id << " t=" << t;
      if (f.has_space_majorant()) {
        std::vector<double> const x{0.0, t * 5.0, 0.0};
        EXPECT_LE(std::abs(f.eval_space(x)), f.space_majorant(t * 5.0) * (1 + 1e-9) + 1e-300) << id << " r=" << 5 * t;
      }
    }
  }
}

TEST(Catalog, IdsRoundTrip)
{
  for (std::string const id : {"gaussian:d=4:a=4,1,1,1", "band_limited:d=5:eps=0.5", "plate:d=4:eps=0.2"}) {
    TestFunction const f = make_from_id(id);
    TestFunction const g = make_from_id(f.id());
    std::vector<double> xi(f.dimension(), 0.15);
    xi[0] = 0.95;
    EXPECT_EQ(f.eval_freq(xi), g.eval_freq(xi)) << id;
  }
  EXPECT_EQ(make_from_id("gaussian:d=3").symmetry(), Symmetry::radial);
  EXPECT_EQ(make_from_id("gaussian:d=3:a=1,1,2").symmetry(), Symmetry::none);
  EXPECT_EQ(make_from_id("plate:d=3:eps=0.1").symmetry(), Symmetry::axial);
}

TEST(Catalog, RejectsMalformedInput)
{
  EXPECT_THROW(make_from_id(""), std::invalid_argument);
  EXPECT_THROW(make_from_id("wavelet:d=3"), std::invalid_argument);
  EXPECT_THROW(make_from_id("gaussian:d=3:a=1,1"), std::invalid_argument);
  EXPECT_THROW(make_from_id("plate:d=4"), std::invalid_argument);
  EXPECT_THROW(make_from_id("plate:d=4:eps=0.5"), std::invalid_argument);
  EXPECT_THROW(make_from_id("band_limited:d=4:eps=2"), std::invalid_argument);
  EXPECT_THROW(make_gaussian(3, {1.0, 1.0, 1.0}).eval_freq(std::vector<double>{1.0}), std::invalid_argument);
  EXPECT_THROW(make_gaussian(2, {1.0, 1.0}).lp_norm(0.5), std::domain_error);
}
