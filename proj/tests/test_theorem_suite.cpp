#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include <latticelab/theorem_suite.hpp>

using namespace latticelab;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(std::string const& name)
{
  fs::path const p = fs::temp_directory_path() / ("latticelab_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(fs::path const& p)
{
  std::ifstream is{p, std::ios::binary};
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

} // namespace

TEST(Range, GatesMirrorTheStatements)
{
  EXPECT_DOUBLE_EQ(critical_exponent(4), 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(critical_exponent(5), 10.0 / 7.0);
  EXPECT_THROW(check_range(4, 4.0 / 3.0, Variant::T2), RangeError);
  EXPECT_NO_THROW(check_range(4, 1.3, Variant::T2));
  EXPECT_THROW(check_range(4, 0.9, Variant::T2), RangeError);
  EXPECT_THROW(check_range(3, 1.0, Variant::T1), RangeError);
  EXPECT_NO_THROW(check_range(4, 1.0, Variant::T1));
  EXPECT_THROW(check_range(4, 1.0, Variant::T1p), RangeError);
  EXPECT_NO_THROW(check_range(5, 1.0, Variant::T1p));
  EXPECT_THROW(check_range(5, 10.0 / 7.0, Variant::T2p), RangeError);
  EXPECT_NO_THROW(check_range(5, 1.4, Variant::T2p));

  TestFunction const f = make_plate(4, 0.2);
  EXPECT_THROW(check_inequality(f, 4.0 / 3.0, Variant::T2), RangeError);
  try {
    check_inequality(make_gaussian(3, {1.0, 1.0, 1.0}), 1.0, Variant::T1);
    FAIL() << "d = 3 accepted";
  }
  catch (RangeError const& e) {
    EXPECT_NE(std::string{e.what()}.find("d >= 4"), std::string::npos);
  }
}

TEST(Variants, ParseAndDispatch)
{
  for (Variant v : {Variant::T1, Variant::T2, Variant::T1p, Variant::T2p})
    EXPECT_EQ(parse_variant(to_string(v)), v);
  EXPECT_EQ(parse_variant("T2p"), Variant::T2p);
  EXPECT_THROW(parse_variant("T3"), std::invalid_argument);
  TestFunction const f = make_gaussian(5, std::vector<double>(5, 1.0));
  EXPECT_THROW(check_direct(f, 1.0, Variant::T1p), std::invalid_argument);
  EXPECT_THROW(check_inverse(f, 1.0, Variant::T2), std::invalid_argument);
}

TEST(Inequality, RecordIsConsistent)
{
  TestFunction const f = make_gaussian(5, {1.0, 2.0, 1.0, 1.0, 3.0});
  InequalityRecord const t1 = check_inequality(f, 1.3, Variant::T1);
  EXPECT_EQ(t1.p, 1.0);
  EXPECT_DOUBLE_EQ(t1.lhs, f.lp_norm(2.0));
  EXPECT_DOUBLE_EQ(t1.rhs, t1.g + f.lp_norm(1.0));
  EXPECT_DOUBLE_EQ(t1.ratio, t1.lhs / t1.rhs);

  InequalityRecord const t2p = check_inequality(f, 1.3, Variant::T2p);
  EXPECT_EQ(t2p.p, 1.3);
  EXPECT_DOUBLE_EQ(t2p.lhs, t2p.g_mod);
  EXPECT_DOUBLE_EQ(t2p.rhs, f.lp_norm(2.0) + f.lp_norm(1.3));

  TheoremOptions full;
  full.quotient = false;
  InequalityRecord const t2g = check_inequality(f, 1.3, Variant::T2p, full);
  EXPECT_FALSE(t2g.quotient);
  EXPECT_DOUBLE_EQ(t2g.lhs, t2g.g);
  EXPECT_GT(t2g.ratio, t2p.ratio);
}

TEST(Inequality, QuotientIdentityFromOneDecomposition)
{
  for (std::string const id : {"gaussian:d=4:a=4,1,1,1", "plate:d=5:eps=0.2", "gaussian:d=5:a=1,2,1,1,3"}) {
    TestFunction const f = make_from_id(id);
    GNorms const g = g_norms(f, {});
    double const dc = std::norm(f.eval_freq(std::vector<double>(f.dimension(), 0.0)));
    EXPECT_NEAR(g.g_mod * g.g_mod + dc, g.g * g.g, 1e-10 * g.g * g.g) << id;
  }
}

TEST(Inequality, BandLimitedQuotientVanishes)
{
  TestFunction const f = make_band_limited(5, 0.25);
  InequalityRecord const r = check_inequality(f, 1.2, Variant::T2p);
  EXPECT_EQ(r.g_mod, 0.0);
  EXPECT_EQ(r.ratio, 0.0);
  EXPECT_DOUBLE_EQ(r.g, 1.0);
}

TEST(Inequality, ScaleCovarianceKeepsRatiosFinite)
{
  std::vector<double> const a{1.0, 2.0, 0.5, 1.5, 1.0};
  double prev = 0.0;
  for (double lambda = 0.5; lambda <= 2.0 + 1e-12; lambda *= std::sqrt(2.0)) {
    std::vector<double> al = a;
    for (double& v : al)
      v /= lambda * lambda;
    TestFunction const f = make_gaussian(5, al, std::pow(lambda, -2.5));
    for (Variant v : {Variant::T1, Variant::T2, Variant::T1p, Variant::T2p}) {
      InequalityRecord const r = check_inequality(f, 1.2, v);
      EXPECT_TRUE(std::isfinite(r.ratio)) << lambda << " " << to_string(v);
      EXPECT_GT(r.ratio, 0.0);
    }
    double const r2 = check_inequality(f, 1.2, Variant::T2).ratio;
    if (prev > 0.0) {
      EXPECT_LT(std::abs(std::log(r2 / prev)), 1.5) << lambda;
    }
    prev = r2;
  }
}

TEST(Sweeps, DyadicGrid)
{
  auto const e = dyadic_eps(2, 6);
  ASSERT_EQ(e.size(), 5u);
  EXPECT_EQ(e.front(), 0.25);
  EXPECT_EQ(e.back(), 1.0 / 64);
  EXPECT_THROW(check_dyadic({0.25, 0.125, 0.1, 0.05}), std::invalid_argument);
  EXPECT_THROW(check_dyadic({0.25, 0.125}), std::invalid_argument);
  EXPECT_THROW(sharpness_sweep(SweepKind::plate, 4, 4.0 / 3.0, {0.3, 0.2, 0.1, 0.05}), std::invalid_argument);
  EXPECT_EQ(parse_sweep_kind("plate"), SweepKind::plate);
  EXPECT_THROW(parse_sweep_kind("disc"), std::invalid_argument);
}

TEST(Sweeps, BandLimitedDilationExponent)
{
  SweepResult const r = sharpness_sweep(SweepKind::band_limited, 5, 1.2, dyadic_eps(2, 6), 0.05);
  auto const& s = r.get("norm_p");
  EXPECT_NEAR(s.fit.slope, 5.0 / conjugate_exponent(1.2), 1e-9);
  EXPECT_GT(s.fit.r_squared, 0.999999);
  EXPECT_TRUE(r.passed());
}

TEST(Sweeps, PlateExponents)
{
  SweepResult const r = sharpness_sweep(SweepKind::plate, 4, 4.0 / 3.0, dyadic_eps(2, 6), 0.1);
  EXPECT_NEAR(r.get("g_mod_sq").fit.slope, 3.0, 0.1);
  EXPECT_NEAR(r.get("norm_p_sq").fit.slope, 2.5, 0.1);
  EXPECT_GE(r.get("g_mod_sq").fit.r_squared, 0.99);
  EXPECT_TRUE(r.passed());
}

TEST(Sweeps, ExploratoryHasNoVerdict)
{
  nlohmann::json const j = exploratory_sweep(5, 1.46, dyadic_eps(2, 5));
  EXPECT_TRUE(j["exploratory"].get<bool>());
  EXPECT_FALSE(j.contains("passed"));
  EXPECT_EQ(j["ratio"].size(), 4u);
}

TEST(Stability, FamilyRules)
{
  EXPECT_TRUE(evaluate_family("a", "seeds", {1.0, 2.0, 3.0}).passed);
  EXPECT_FALSE(evaluate_family("a", "seeds", {1.0, 20.0}).passed);
  EXPECT_FALSE(evaluate_family("a", "seeds", {1.0, std::numeric_limits<double>::quiet_NaN()}).passed);
  EXPECT_TRUE(evaluate_family("b", "eps", {1.0, 0.5, 2.0}).passed);
  EXPECT_FALSE(evaluate_family("b", "eps", {1.0, 30.0}).passed);
  EXPECT_TRUE(evaluate_family("c", "counter", {1.0, 4.0, 64.0}).passed);
  EXPECT_FALSE(evaluate_family("c", "counter", {1.0, 2.0}).passed);
  EXPECT_FALSE(evaluate_family("d", "seeds", {}).passed);
  StabilityFamily const zero = evaluate_family("z", "eps", {0.0, 0.0, 0.0});
  EXPECT_TRUE(zero.passed);
  EXPECT_EQ(zero.spread, 1.0);
}

TEST(Stability, CounterSweepDivergesWithoutQuotient)
{
  TheoremOptions opt;
  opt.quotient = false;
  double const coarse = check_inverse(make_band_limited(5, 0.25), 1.2, Variant::T2p, opt).ratio;
  double const fine = check_inverse(make_band_limited(5, 1.0 / 128), 1.2, Variant::T2p, opt).ratio;
  EXPECT_GT(fine / coarse, 10.0);
}

TEST(Corpus, EmptyConfigGivesEmptySuccessfulReport)
{
  ReportBundle const b = run_corpus(RunConfig{});
  EXPECT_TRUE(b.checks.empty());
  EXPECT_TRUE(b.all_passed());
  EXPECT_TRUE(b.report["all_passed"].get<bool>());
  fs::path const dir = scratch_dir("empty");
  b.write(dir, "csv");
  EXPECT_TRUE(fs::exists(dir / "report.json"));
  EXPECT_EQ(slurp(dir / "checks.csv"), "section,name,passed\n");
  fs::remove_all(dir);
}

TEST(Corpus, OutOfRangeMemberIsRejectedButReported)
{
  RunConfig cfg;
  cfg.corpus = {"gaussian:d=3:a=1,1,1"};
  cfg.theorems = true;
  ReportBundle const b = run_corpus(cfg);
  EXPECT_EQ(b.rejections.size(), 4u);
  EXPECT_TRUE(b.inequalities.empty());
  EXPECT_EQ(b.report["range_rejections"].size(), 4u);
  EXPECT_TRUE(b.all_passed());
  fs::path const dir = scratch_dir("rejected");
  b.write(dir, "json");
  EXPECT_NE(slurp(dir / "report.json").find("requires d >= 4"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Corpus, DimensionFilterAndDeterminism)
{
  RunConfig cfg;
  cfg.corpus = default_corpus();
  cfg.dims = {4};
  cfg.theorems = true;
  cfg.shells = true;
  cfg.rotations = 16;
  ReportBundle const a = run_corpus(cfg);
  ReportBundle const b = run_corpus(cfg);
  EXPECT_EQ(a.report.dump(), b.report.dump());
  for (auto const& r : a.inequalities)
    EXPECT_EQ(r.dimension, 4);
  EXPECT_EQ(a.mc_vs_shells.size(), 4u);
  fs::path const d1 = scratch_dir("det1"), d2 = scratch_dir("det2");
  a.write(d1, "csv");
  b.write(d2, "csv");
  for (auto const* name : {"report.json", "checks.csv", "inequalities.csv", "sweeps.csv", "mc_vs_shells.csv"})
    EXPECT_EQ(slurp(d1 / name), slurp(d2 / name)) << name;
  fs::remove_all(d1);
  fs::remove_all(d2);
}
