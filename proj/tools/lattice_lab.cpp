// lattice_lab: command-line front end for the latticelab library.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <latticelab/latticelab.hpp>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace latticelab;

namespace {

struct Common {
  std::vector<int> dims;
  double p = 1.2;
  std::uint64_t seed = 1;
  double tol = 1e-12;
  std::int64_t nmax = 0; // 0: per-command default
  std::size_t rotations = 0;
  std::string out;
  std::string format = "json";
  std::string function;

  int dim(int fallback) const { return dims.empty() ? fallback : dims.front(); }
};

void add_common(CLI::App* app, Common& c)
{
  app->add_option("--dim", c.dims, "Dimension(s)")->check(CLI::Range(1, 12));
  app->add_option("--p", c.p, "Lebesgue exponent")->check(CLI::Range(1.0, 1e9));
  app->add_option("--seed", c.seed, "Root random seed");
  app->add_option("--tol", c.tol, "Truncation tolerance")->check(CLI::PositiveNumber);
  app->add_option("--nmax", c.nmax, "Shell / table cutoff")->check(CLI::NonNegativeNumber);
  app->add_option("--rotations", c.rotations, "Number of Haar rotations");
  app->add_option("--out", c.out, "Output directory");
  app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
}

TestFunction function_or_default(Common const& c, int default_dim)
{
  if (!c.function.empty())
    return make_from_id(c.function);
  int const d = c.dim(default_dim);
  return make_gaussian(d, std::vector<double>(d, 1.0));
}

std::optional<fs::path> out_dir(Common const& c)
{
  if (c.out.empty())
    return std::nullopt;
  fs::create_directories(c.out);
  return fs::path{c.out};
}

void write_text(fs::path const& path, std::string const& text)
{
  std::ofstream os{path};
  if (!os)
    throw std::runtime_error{"cannot write " + path.string()};
  os << text;
}

// Prints the summary and, with --out, stores it as <name>.json.
void emit(Common const& c, std::string const& name, json const& summary)
{
  std::cout << summary.dump(2) << "\n";
  if (auto dir = out_dir(c))
    write_text(*dir / (name + ".json"), summary.dump(2) + "\n");
}

int cmd_periodize(Common const& c, int n_g, bool identity, bool binary)
{
  TestFunction const f = function_or_default(c, 2);
  Rotation const rho = identity ? Rotation::identity(f.dimension()) : sample_haar(f.dimension(), c.seed);
  PeriodizationGrid const grid = periodize(f, rho, n_g, c.tol);
  json summary = grid.header();
  double lo = INFINITY, hi = -INFINITY;
  for (auto const& v : grid.samples) {
    lo = std::min(lo, v.real());
    hi = std::max(hi, v.real());
  }
  summary["min_real"] = lo;
  summary["max_real"] = hi;
  summary["mean_square"] = grid.mean_square();
  if (auto dir = out_dir(c)) {
    if (c.format == "csv") {
      std::ofstream os{*dir / "grid.csv"};
      grid.write_csv(os);
    }
    else {
      json j = grid.header();
      std::vector<double> re, im;
      for (auto const& v : grid.samples) {
        re.push_back(v.real());
        im.push_back(v.imag());
      }
      j["re"] = re;
      j["im"] = im;
      write_text(*dir / "grid.json", j.dump() + "\n");
    }
    if (binary) {
      std::ofstream os{*dir / "grid.bin", std::ios::binary};
      grid.write_binary(os);
    }
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_parseval(Common const& c, int n_g, int m_max)
{
  TestFunction const f = function_or_default(c, 3);
  std::size_t const n_rot = c.rotations ? c.rotations : 5;
  SplitRng const root{c.seed};
  json reps = json::array();
  bool ok = true;
  for (std::size_t i = 0; i < n_rot; ++i) {
    SplitRng rng = root.split(i);
    Rotation const rho = sample_haar(f.dimension(), rng);
    ParsevalReport const r = parseval_check(f, rho, n_g, m_max, c.tol);
    ok = ok && r.within_contract;
    reps.push_back({{"rotation", rho.to_json()}, {"report", r}});
  }
  emit(c, "parseval", {{"function", f.id()}, {"seed", c.seed}, {"rotations", reps}, {"passed", ok}});
  return ok ? 0 : 1;
}

int cmd_rd_table(Common const& c)
{
  int const d = c.dim(4);
  std::int64_t const n_max = c.nmax ? c.nmax : 10000;
  RdTable const table = build_rd_table(d, n_max);
  json summary = {{"d", d}, {"n_max", n_max}, {"big_integers", table.is_big()},
                  {"bounds", {bound_statistics(table, ParityFilter::all), bound_statistics(table, ParityFilter::odd)}}};
  if (auto dir = out_dir(c)) {
    std::ofstream os{*dir / ("r" + std::to_string(d) + ".csv")};
    table.write_csv(os);
  }
  else if (c.format == "csv") {
    table.write_csv(std::cout);
    return 0;
  }
  emit(c, "rd_table", summary);
  return 0;
}

int cmd_shells(Common const& c, double scale, std::size_t pairs, bool exclude_dc)
{
  TestFunction const f = function_or_default(c, 4);
  double const peak = f.freq_majorant(0.0);
  double const abs_tol = c.tol * std::max(peak * peak, 1e-300);
  std::int64_t const n_max = c.nmax ? c.nmax : shell_cutoff_for(f, scale, abs_tol);
  auto quad = SphereQuadrature::monte_carlo(f.dimension(), pairs, c.seed);
  ShellDecomposition const s = g2_by_shells(f, scale, n_max, quad, abs_tol);
  json summary = s;
  summary["G_mod_sq"] = g2_modulo_constants(s);
  summary["reported"] = exclude_dc ? g2_modulo_constants(s) : s.total;
  if (auto dir = out_dir(c); dir && c.format == "csv") {
    std::ofstream os{*dir / "shells.csv"};
    s.write_csv(os);
  }
  emit(c, "shells", summary);
  return 0;
}

int cmd_mc_vs_shells(Common const& c)
{
  TestFunction const f = function_or_default(c, 4);
  std::size_t const n_rot = c.rotations ? c.rotations : 256;
  std::int64_t const n_max = c.nmax ? c.nmax : 64;
  McVsShellsOptions opt;
  opt.tol = c.tol;
  McVsShellsReport const r = mc_vs_shells(f, n_rot, n_max, c.seed, opt);
  bool const ok = std::abs(r.z) <= 3.0 && (!r.exact_paths || r.relative_difference <= 1e-10);
  json summary = r;
  summary["passed"] = ok;
  emit(c, "mc_vs_shells", summary);
  return ok ? 0 : 1;
}

int cmd_kernel_envelope(Common const& c)
{
  int const d = c.dim(4);
  EnvelopeReport const e = envelope_check(d);
  if (auto dir = out_dir(c); dir && c.format == "csv") {
    std::ofstream os{*dir / ("envelope_d" + std::to_string(d) + ".csv")};
    os << "N,x,branch,measured,envelope_shape,ratio\n";
    char buf[256];
    for (auto const& p : e.probes) {
      std::snprintf(buf, sizeof buf, "%lld,%.17g,%s,%.17g,%.17g,%.17g\n", static_cast<long long>(p.N), p.x_mag,
                    p.far ? "far" : "near", p.measured, p.shape, p.ratio);
      os << buf;
    }
  }
  emit(c, "kernel_envelope_d" + std::to_string(d), e);
  return e.passed ? 0 : 1;
}

int cmd_theorem_check(Common const& c, std::vector<std::string> const& variants, bool no_quotient)
{
  TestFunction const f = function_or_default(c, 5);
  TheoremOptions opt;
  opt.seed = c.seed;
  opt.tol = c.tol;
  opt.quotient = !no_quotient;
  std::vector<std::string> names = variants;
  if (names.empty())
    names = {"T1", "T2", "T1'", "T2'"};
  json records = json::array();
  json rejected = json::array();
  for (auto const& name : names) {
    try {
      records.push_back(check_inequality(f, c.p, parse_variant(name), opt));
    }
    catch (RangeError const& e) {
      rejected.push_back({{"variant", name}, {"diagnostic", e.what()}});
      std::cerr << "range error: " << e.what() << "\n";
    }
  }
  emit(c, "theorem_check", {{"function", f.id()}, {"records", records}, {"range_rejections", rejected}});
  // rejections of every requested variant are a usage error
  return records.empty() ? 2 : 0;
}

int cmd_sharpness(Common const& c, std::string const& kind, int eps_from, int eps_to, double slope_tol)
{
  int const d = c.dim(4);
  SweepResult const r = sharpness_sweep(parse_sweep_kind(kind), d, c.p, dyadic_eps(eps_from, eps_to), slope_tol);
  emit(c, "sharpness", r);
  return r.passed() ? 0 : 1;
}

int cmd_run_all(Common const& c)
{
  RunConfig cfg = RunConfig::defaults();
  cfg.dims = c.dims;
  cfg.seed = c.seed;
  cfg.tol = c.tol;
  cfg.p = c.p;
  cfg.format = c.format;
  if (c.nmax)
    cfg.n_max = c.nmax;
  if (c.rotations)
    cfg.rotations = c.rotations;
  ReportBundle const b = run_corpus(cfg);
  fs::path const dir = c.out.empty() ? fs::path{"lattice_lab_report"} : fs::path{c.out};
  b.write(dir, c.format);
  std::size_t failed = 0;
  for (auto const& ch : b.checks) {
    std::cout << (ch.passed ? "PASS " : "FAIL ") << ch.section << ": " << ch.name << "\n";
    failed += ch.passed ? 0 : 1;
  }
  std::cout << b.checks.size() - failed << "/" << b.checks.size() << " checks passed; report in " << dir.string()
            << "\n";
  return failed == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Numerical laboratory for periodizations over rotated lattices"};
  app.require_subcommand(1);
  Common c;

  auto* periodize_cmd = app.add_subcommand("periodize", "Sample a periodization on a grid");
  add_common(periodize_cmd, c);
  int n_g = 16;
  bool identity = false, binary = false;
  periodize_cmd->add_option("--function", c.function, "Catalog id, e.g. gaussian:d=2:a=1,1");
  periodize_cmd->add_option("--grid", n_g, "Grid points per axis")->check(CLI::Range(4, 4096));
  periodize_cmd->add_flag("--identity", identity, "Use the identity rotation instead of a Haar sample");
  periodize_cmd->add_flag("--binary", binary, "Also write grid.bin");

  auto* parseval_cmd = app.add_subcommand("parseval", "Compare grid DFT coefficients with fhat(rho m)");
  add_common(parseval_cmd, c);
  int pv_grid = 16, m_max = 3;
  parseval_cmd->add_option("--function", c.function, "Catalog id");
  parseval_cmd->add_option("--grid", pv_grid, "Grid points per axis")->check(CLI::Range(4, 4096));
  parseval_cmd->add_option("--mmax", m_max, "Largest |m|_inf compared")->check(CLI::NonNegativeNumber);

  auto* rd_cmd = app.add_subcommand("rd-table", "Tabulate r_d(n) and its normalized extremes");
  add_common(rd_cmd, c);

  auto* shells_cmd = app.add_subcommand("shells", "Shell decomposition of G^2");
  add_common(shells_cmd, c);
  double scale = 1.0;
  std::size_t pairs = 4096;
  bool exclude_dc = false;
  shells_cmd->add_option("--function", c.function, "Catalog id");
  shells_cmd->add_option("--scale", scale, "Lattice scale (1 or 0.70710678)")->check(CLI::PositiveNumber);
  shells_cmd->add_option("--pairs", pairs, "Antithetic sphere pairs for Monte Carlo shells");
  shells_cmd->add_flag("--exclude-dc", exclude_dc, "Report G_mod^2 instead of G^2");

  auto* mc_cmd = app.add_subcommand("mc-vs-shells", "Haar Monte Carlo G^2 against the shell sum");
  add_common(mc_cmd, c);
  mc_cmd->add_option("--function", c.function, "Catalog id");

  auto* kernel_cmd = app.add_subcommand("kernel-envelope", "Decay envelope of the oscillatory kernels");
  add_common(kernel_cmd, c);

  auto* theorem_cmd = app.add_subcommand("theorem-check", "Inequality ratios for one catalog member");
  add_common(theorem_cmd, c);
  std::vector<std::string> variants;
  bool no_quotient = false;
  theorem_cmd->add_option("--function", c.function, "Catalog id");
  theorem_cmd->add_option("--variant", variants, "T1, T2, T1' or T2' (default: all)");
  theorem_cmd->add_flag("--no-quotient", no_quotient, "Use G instead of G_mod in T2'");

  auto* sharp_cmd = app.add_subcommand("sharpness", "Dyadic eps sweep of the sharpness examples");
  add_common(sharp_cmd, c);
  std::string kind = "plate";
  int eps_from = 2, eps_to = 6;
  double slope_tol = 0.1;
  sharp_cmd->add_option("--kind", kind, "plate or band_limited")->check(CLI::IsMember({"plate", "band_limited", "band"}));
  sharp_cmd->add_option("--eps-from", eps_from, "Largest eps = 2^-from");
  sharp_cmd->add_option("--eps-to", eps_to, "Smallest eps = 2^-to");
  sharp_cmd->add_option("--slope-tol", slope_tol, "Allowed slope deviation");

  auto* all_cmd = app.add_subcommand("run-all", "Run the full corpus and write the report bundle");
  add_common(all_cmd, c);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*periodize_cmd)
      return cmd_periodize(c, n_g, identity, binary);
    if (*parseval_cmd)
      return cmd_parseval(c, pv_grid, m_max);
    if (*rd_cmd)
      return cmd_rd_table(c);
    if (*shells_cmd)
      return cmd_shells(c, scale, pairs, exclude_dc);
    if (*mc_cmd)
      return cmd_mc_vs_shells(c);
    if (*kernel_cmd)
      return cmd_kernel_envelope(c);
    if (*theorem_cmd)
      return cmd_theorem_check(c, variants, no_quotient);
    if (*sharp_cmd)
      return cmd_sharpness(c, kind, eps_from, eps_to, slope_tol);
    if (*all_cmd)
      return cmd_run_all(c);
  }
  catch (std::invalid_argument const& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  catch (std::exception const& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
