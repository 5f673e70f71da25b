#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include <latticelab/shell_analysis.hpp>
#include <latticelab/sums_of_squares.hpp>

using namespace latticelab;

namespace {

// prod_i sum_k |fhat_i(s k)|^2 for the separable Gaussian exp(-pi sum a_i x_i^2)
double gaussian_lattice_sum(std::vector<double> const& a, double s)
{
  double out = 1.0;
  for (double ai : a) {
    double t = 0.0;
    for (int k = -40; k <= 40; ++k)
      t += std::exp(-2.0 * std::numbers::pi * s * s * k * k / ai) / ai;
    out *= t;
  }
  return out;
}

} // namespace

TEST(Shells, RadialGaussianMatchesProductFormula)
{
  for (int d : {2, 3, 5}) {
    std::vector<double> const a(d, 1.0);
    TestFunction const f = make_gaussian(d, a);
    auto const q = SphereQuadrature::monte_carlo(d, 16, 1);
    for (double scale : {1.0, std::sqrt(0.5)}) {
      std::int64_t const n = shell_cutoff_for(f, scale, 1e-14);
      ShellDecomposition const s = g2_by_shells(f, scale, n, q, 1e-14);
      double const oracle = gaussian_lattice_sum(a, scale);
      EXPECT_NEAR(s.total, oracle, 1e-13 * oracle) << "d=" << d << " scale=" << scale;
      EXPECT_EQ(s.method, AverageMethod::radial);
      EXPECT_EQ(s.stderr_, 0.0);
      EXPECT_LE(s.tail_bound, 1e-14);
    }
  }
}

TEST(Shells, QuotientIdentity)
{
  for (std::string const id : {"gaussian:d=4:a=4,1,1,1", "gaussian:d=5:a=1,1,1,1,1", "plate:d=4:eps=0.2",
                               "band_limited:d=5:eps=0.5"}) {
    TestFunction const f = make_from_id(id);
    auto const q = SphereQuadrature::monte_carlo(f.dimension(), 512, 2);
    ShellDecomposition const s = g2_by_shells(f, 1.0, shell_cutoff_for(f, 1.0, 1e-12), q, 1e-12);
    double const gmod2 = g2_modulo_constants(s);
    EXPECT_NEAR(gmod2 + s.dc_term, s.total, 1e-10 * s.total) << id;
    EXPECT_DOUBLE_EQ(s.dc_term, std::norm(f.eval_freq(std::vector<double>(f.dimension(), 0.0))));
  }
}

TEST(Shells, TermsCarryExactCounts)
{
  TestFunction const f = make_gaussian(4, {4.0, 1.0, 2.0, 1.0});
  auto const q = SphereQuadrature::monte_carlo(4, 256, 3);
  ShellDecomposition const s = g2_by_shells(f, 1.0, 40, q, 1e-8);
  auto const t = build_rd_table(4, 40);
  ASSERT_EQ(s.terms.size(), 40u);
  for (auto const& term : s.terms) {
    EXPECT_EQ(term.count, static_cast<double>(t.at(term.n)));
    EXPECT_DOUBLE_EQ(term.contribution, term.count * term.average);
  }
  EXPECT_EQ(s.method, AverageMethod::monte_carlo);
  EXPECT_GT(s.stderr_, 0.0);
  std::ostringstream os;
  s.write_csv(os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "n,r_d,A,contribution");
}

TEST(Shells, PlateOnlyTouchesTheUnitShell)
{
  TestFunction const f = make_plate(4, 0.2);
  auto const q = SphereQuadrature::monte_carlo(4, 16, 3);
  ShellDecomposition const s = g2_by_shells(f, 1.0, 10, q, 1e-12);
  EXPECT_GT(s.terms[0].contribution, 0.0);
  for (std::size_t i = 1; i < s.terms.size(); ++i)
    EXPECT_EQ(s.terms[i].contribution, 0.0) << s.terms[i].n;
  EXPECT_EQ(s.tail_bound, 0.0);
}

TEST(Shells, ScaleCovarianceOfTheLatticeSum)
{
  // f_lambda(x) = lambda^{-d/2} f(x / lambda) keeps ||f||_2 and has
  // fhat_lambda(xi) = lambda^{d/2} fhat(lambda xi), so G^2 of f_lambda is
  // lambda^d times G^2 of f over the lattice lambda Z^d.
  int const d = 3;
  std::vector<double> const a(d, 1.3);
  auto const q = SphereQuadrature::monte_carlo(d, 16, 3);
  for (double lambda : {0.5, 0.8, 1.25, 2.0}) {
    std::vector<double> al = a;
    for (double& v : al)
      v /= lambda * lambda;
    TestFunction const fl = make_gaussian(d, al, std::pow(lambda, -0.5 * d));
    EXPECT_NEAR(fl.lp_norm(2.0), make_gaussian(d, a).lp_norm(2.0), 1e-12);
    ShellDecomposition const s = g2_by_shells(fl, 1.0, shell_cutoff_for(fl, 1.0, 1e-13), q, 1e-13);
    ShellDecomposition const t =
      g2_by_shells(make_gaussian(d, a), lambda, shell_cutoff_for(make_gaussian(d, a), lambda, 1e-13), q, 1e-13);
    double const oracle = std::pow(lambda, d) * gaussian_lattice_sum(a, lambda);
    EXPECT_NEAR(s.total, oracle, 1e-12 * oracle) << lambda;
    EXPECT_NEAR(std::pow(lambda, d) * t.total, oracle, 1e-12 * oracle) << lambda;
  }
}

TEST(Shells, AnisotropicScaleFamilyStaysFinite)
{
  int const d = 4;
  std::vector<double> const a{1.0, 2.0, 0.5, 1.5};
  auto const q = SphereQuadrature::monte_carlo(d, 1024, 3);
  double prev = 0.0;
  for (double lambda = 0.5; lambda <= 2.0 + 1e-12; lambda *= std::pow(2.0, 0.25)) {
    std::vector<double> al = a;
    for (double& v : al)
      v /= lambda * lambda;
    TestFunction const fl = make_gaussian(d, al, std::pow(lambda, -0.5 * d));
    ShellDecomposition const s = g2_by_shells(fl, 1.0, shell_cutoff_for(fl, 1.0, 1e-12), q, 1e-12);
    ASSERT_TRUE(std::isfinite(s.total)) << lambda;
    ASSERT_TRUE(std::isfinite(s.stderr_)) << lambda;
    double const ratio = std::sqrt(g2_modulo_constants(s)) / fl.lp_norm(2.0);
    EXPECT_TRUE(std::isfinite(ratio));
    if (prev > 0.0) {
      // neighbouring lambda differ by 2^{1/4}; no jumps
      EXPECT_LT(std::abs(std::log(ratio / prev)), 2.0) << lambda;
    }
    prev = ratio;
  }
}

TEST(McVsShells, AnisotropicGaussianAgreesWithinNoise)
{
  TestFunction const f = make_gaussian(4, {4.0, 1.0, 1.0, 1.0});
  McVsShellsReport const r = mc_vs_shells(f, 64, 64, 7);
  EXPECT_LE(std::abs(r.z), 3.0) << "mc " << r.mc.estimate << " shells " << r.shells.total;
  EXPECT_FALSE(r.exact_paths);
  EXPECT_GT(r.sigma, 0.0);
}

TEST(McVsShells, RadialGaussianPathsAgreeExactly)
{
  TestFunction const f = make_gaussian(5, std::vector<double>(5, 1.0));
  McVsShellsReport const r = mc_vs_shells(f, 8, 64, 7);
  EXPECT_TRUE(r.exact_paths);
  EXPECT_LE(r.relative_difference, 1e-10);
}

TEST(Shells, RejectsUncertifiedTails)
{
  TestFunction const f = make_gaussian(3, {20.0, 20.0, 20.0});
  auto const q = SphereQuadrature::monte_carlo(3, 16, 3);
  EXPECT_THROW(g2_by_shells(f, 1.0, 2, q, 1e-12), std::runtime_error);
  EXPECT_THROW(g2_by_shells(f, 1.0, 0, q, 1e-12), std::invalid_argument);
  EXPECT_THROW(g2_by_shells(f, -1.0, 10, q, 1e-12), std::invalid_argument);
  EXPECT_GT(shell_tail_bound(f, 1.0, 2), 1e-12);
}
