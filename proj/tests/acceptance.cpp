// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <latticelab/theorem_suite.hpp>

using namespace latticelab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(double v)
{
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome parseval()
{
  auto const t0 = std::chrono::steady_clock::now();
  bool ok = true;
  double worst = 0.0;
  SplitRng const root{1};
  for (int d : {2, 3, 4}) {
    TestFunction const f = make_gaussian(d, std::vector<double>(d, 1.0));
    int const n_g = detail::parseval_grid_size(d);
    for (std::uint64_t i = 0; i < 5; ++i) {
      SplitRng rng = root.split(1000 + i);
      ParsevalReport const r = parseval_check(f, sample_haar(d, rng), n_g, 3, 1e-12);
      ok = ok && r.m_max == 3 && r.within_contract && r.discrepancy <= 1e-6;
      worst = std::max(worst, r.discrepancy);
    }
  }
  double const secs = seconds_since(t0);
  return {ok && secs <= 60.0, "worst relative error " + fmt(worst) + ", " + fmt(secs) + " s"};
}

Outcome shells_vs_monte_carlo()
{
  auto const t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (std::string const id : {"gaussian:d=4:a=4,1,1,1", "gaussian:d=4:a=4,1,2,1", "plate:d=4:eps=0.2"}) {
    McVsShellsReport const r = mc_vs_shells(make_from_id(id), 256, 64, 1);
    ok = ok && std::abs(r.z) <= 3.0;
    detail += id + " z=" + fmt(r.z) + "; ";
  }
  McVsShellsReport const radial = mc_vs_shells(make_gaussian(5, std::vector<double>(5, 1.0)), 256, 64, 1);
  ok = ok && radial.exact_paths && radial.relative_difference <= 1e-10;
  double const secs = seconds_since(t0);
  detail += "radial d=5 rel=" + fmt(radial.relative_difference) + ", " + fmt(secs) + " s";
  return {ok && secs <= 300.0, detail};
}

// r_d(n) for all n <= n_max by enumerating the box [-m, m]^d
std::vector<std::uint64_t> brute_counts(int d, int n_max)
{
  int const m = static_cast<int>(std::sqrt(static_cast<double>(n_max))) + 1;
  std::vector<std::uint64_t> r(n_max + 1, 0);
  std::vector<int> x(d, -m);
  for (;;) {
    long s = 0;
    for (int v : x)
      s += static_cast<long>(v) * v;
    if (s <= n_max)
      ++r[s];
    int i = 0;
    while (i < d && x[i] == m)
      x[i++] = -m;
    if (i == d)
      break;
    ++x[i];
  }
  return r;
}

Outcome rd_tables()
{
  bool brute_ok = true;
  for (int d = 1; d <= 5; ++d) {
    RdTable const t = build_rd_table(d, 200);
    auto const b = brute_counts(d, 200);
    for (int n = 0; n <= 200; ++n)
      brute_ok = brute_ok && static_cast<std::uint64_t>(t.at(n)) == b[n];
  }
  RdTable const t5 = build_rd_table(5, 10000);
  double min5 = INFINITY;
  for (int n = 1; n <= 10000; ++n)
    min5 = std::min(min5, static_cast<double>(t5.at(n)) / std::pow(n, 1.5));
  RdTable const t4 = build_rd_table(4, 10000);
  double lo = INFINITY, hi = 0.0;
  for (int n = 1; n <= 10000; n += 2) {
    double const q = static_cast<double>(t4.at(n)) / n;
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  bool pow2 = true;
  for (int n = 2; n <= 10000; n *= 2)
    pow2 = pow2 && t4.at(n) == 24;
  bool const ok = brute_ok && min5 > 0.0 && lo >= 8.0 && hi <= 24.0 && pow2;
  return {ok, std::string{"brute force "} + (brute_ok ? "equal" : "DIFFERS") + ", min r5/n^1.5=" + fmt(min5) +
                ", odd r4/n in [" + fmt(lo) + ", " + fmt(hi) + "], r4(2^k)=24 " + (pow2 ? "yes" : "no")};
}

Outcome remark1()
{
  TestFunction const f = make_band_limited(4, 0.5);
  SplitRng const root{1};
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 5; ++i) {
    SplitRng rng = root.split(2000 + i);
    PeriodizationGrid const g = periodize(f, sample_haar(4, rng), 8, 1e-12);
    for (auto const& v : g.samples)
      worst = std::max(worst, std::abs(v - 1.0));
  }
  auto quad = SphereQuadrature::monte_carlo(4, 64, 1);
  double const gmod = g2_modulo_constants(g2_by_shells(f, 1.0, 16, quad, 1e-12));
  SweepResult const sw = sharpness_sweep(SweepKind::band_limited, 4, 1.0, dyadic_eps(1, 6), 0.05);
  double const slope = sw.get("norm_p").fit.slope;
  bool const ok = worst <= 1e-9 && gmod == 0.0 && std::abs(slope) <= 0.05;
  return {ok, "grid deviation " + fmt(worst) + ", G_mod^2=" + fmt(gmod) + ", ||f||_1 slope " + fmt(slope)};
}

Outcome plate()
{
  auto const t0 = std::chrono::steady_clock::now();
  SweepResult const sw = sharpness_sweep(SweepKind::plate, 4, 4.0 / 3.0, dyadic_eps(2, 6), 0.1);
  auto const& g = sw.get("g_mod_sq").fit;
  auto const& n = sw.get("norm_p_sq").fit;
  double const secs = seconds_since(t0);
  bool const ok = std::abs(g.slope - 3.0) <= 0.1 && std::abs(n.slope - 2.5) <= 0.1 && g.r_squared >= 0.99 &&
                  n.r_squared >= 0.99 && secs <= 600.0;
  return {ok, "G_mod^2 slope " + fmt(g.slope) + " (R^2 " + fmt(g.r_squared) + "), ||f||_{4/3}^2 slope " +
                fmt(n.slope) + " (R^2 " + fmt(n.r_squared) + "), " + fmt(secs) + " s"};
}

Outcome kernel_envelope()
{
  bool ok = true;
  std::string detail;
  for (int d : {4, 5}) {
    EnvelopeReport const e = envelope_check(d);
    double const expected = d == 4 ? 1.0 : 1.5;
    ok = ok && e.stability <= 2.0 && std::abs(e.far_fit.slope - expected) <= 0.2 && e.dyadic_bounded;
    detail += "d=" + std::to_string(d) + " C_N spread " + fmt(e.stability) + ", far exponent " + fmt(e.far_fit.slope) +
              ", dyadic max " + fmt(e.dyadic_max) + "; ";
  }
  return {ok, detail};
}

Outcome ratio_stability_check()
{
  std::vector<StabilityFamily> const fams = ratio_stability(StabilityConfig{});
  bool ok = !fams.empty();
  double worst = 0.0;
  double counter = 0.0;
  std::string failed;
  for (auto const& s : fams) {
    ok = ok && s.passed;
    if (!s.passed)
      failed += " [" + s.name + "]";
    if (s.rule == "counter")
      counter = s.spread;
    else
      worst = std::max(worst, s.spread);
  }
  return {ok, std::to_string(fams.size()) + " families, worst spread " + fmt(worst) + ", counter growth " +
                fmt(counter) + failed};
}

std::string slurp(fs::path const& p)
{
  std::ifstream is{p, std::ios::binary};
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

Outcome determinism()
{
  fs::path const base = fs::temp_directory_path() / "lattice_lab_acceptance";
  fs::remove_all(base);
  fs::create_directories(base);
  // both runs target the same directory so stdout, which names it, is comparable
  fs::path const out = base / "out", a = base / "a", b = base / "b";
  for (fs::path const& keep : {a, b}) {
    std::string const cmd =
      std::string{LATTICE_LAB_EXE} + " run-all --format csv --out " + out.string() + " > " + (out.string() + ".stdout");
    if (std::system(cmd.c_str()) != 0)
      return {false, "run-all exited nonzero"};
    fs::rename(out, keep);
    fs::rename(out.string() + ".stdout", keep.string() + ".stdout");
  }
  std::size_t files = 0;
  for (auto const& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file())
      continue;
    fs::path const twin = b / fs::relative(e.path(), a);
    if (!fs::exists(twin) || slurp(e.path()) != slurp(twin))
      return {false, "differs: " + fs::relative(e.path(), a).string()};
    ++files;
  }
  std::size_t files_b = 0;
  for (auto const& e : fs::recursive_directory_iterator(b))
    files_b += e.is_regular_file();
  bool const same_stdout = slurp(a.string() + ".stdout") == slurp(b.string() + ".stdout");
  bool const ok = files > 0 && files == files_b && same_stdout;
  if (ok)
    fs::remove_all(base);
  return {ok, std::to_string(files) + " files identical, stdout " + (same_stdout ? "identical" : "differs")};
}

} // namespace

int main()
{
  std::vector<std::pair<std::string, std::function<Outcome()>>> const criteria{
    {"1 parseval", parseval},
    {"2 shells vs monte carlo", shells_vs_monte_carlo},
    {"3 r_d tables", rd_tables},
    {"4 band-limited constancy", remark1},
    {"5 plate exponents", plate},
    {"6 kernel envelope", kernel_envelope},
    {"7 ratio stability", ratio_stability_check},
    {"8 determinism", determinism},
  };
  int failed = 0;
  for (auto const& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    }
    catch (std::exception const& e) {
      o = {false, std::string{"exception: "} + e.what()};
    }
    failed += !o.passed;
    std::cout << (o.passed ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
