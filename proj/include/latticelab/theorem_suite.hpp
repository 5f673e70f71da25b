#ifndef LATTICELAB_THEOREM_SUITE_HPP
#define LATTICELAB_THEOREM_SUITE_HPP

// Empirical checks of the norm inequalities
//   T1   ||f||_2 <= C (G + ||f||_1)                 d >= 4
//   T2   ||f||_2 <= C (G + ||f||_p)                 d >= 4, 1 <= p < 2d/(d+2)
//   T1'  G       <= C (||f||_2 + ||f||_1)           d >= 5
//   T2'  G_mod   <= C (||f||_2 + ||f||_p)           d >= 5, 1 <= p < 2d/(d+2)
// the sharpness sweeps over the band-limited and plate families, and the
// corpus runner that writes the report bundle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "functions.hpp"
#include "haar_sphere.hpp"
#include "lattice_periodization.hpp"
#include "numerics.hpp"
#include "oscillatory_kernels.hpp"
#include "parallel.hpp"
#include "rotation.hpp"
#include "shell_analysis.hpp"
#include "sums_of_squares.hpp"

namespace latticelab {

/// Input outside the dimension / exponent range of an inequality.
class RangeError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

enum class Variant { T1, T2, T1p, T2p };

inline char const* to_string(Variant v)
{
  switch (v) {
  case Variant::T1:
    return "T1";
  case Variant::T2:
    return "T2";
  case Variant::T1p:
    return "T1'";
  default:
    return "T2'";
  }
}

inline Variant parse_variant(std::string const& s)
{
  if (s == "T1")
    return Variant::T1;
  if (s == "T2")
    return Variant::T2;
  if (s == "T1'" || s == "T1p")
    return Variant::T1p;
  if (s == "T2'" || s == "T2p")
    return Variant::T2p;
  throw std::invalid_argument{"latticelab::parse_variant: unknown variant '" + s + "'"};
}

inline bool is_direct(Variant v) { return v == Variant::T1 || v == Variant::T2; }

/// Upper end 2d/(d+2) of the admissible exponent range.
inline double critical_exponent(int d) { return 2.0 * d / (d + 2.0); }

/// Throws RangeError unless (d, p) lies in the stated range of the variant.
inline void check_range(int d, double p, Variant v)
{
  int const min_d = is_direct(v) ? 4 : 5;
  if (d < min_d)
    throw RangeError{std::string{to_string(v)} + " requires d >= " + std::to_string(min_d) + ", got d = " +
                     std::to_string(d)};
  if (v == Variant::T2 || v == Variant::T2p) {
    double const hi = critical_exponent(d);
    if (!(p >= 1.0 && p < hi)) {
      std::ostringstream os;
      os << to_string(v) << " requires 1 <= p < 2d/(d+2) = " << hi << " for d = " << d << ", got p = " << p;
      throw RangeError{os.str()};
    }
  }
}

struct TheoremOptions {
  double tol = 1e-12;             // shell tail, relative to sup |fhat|^2
  std::size_t sphere_pairs = 4096;
  std::uint64_t seed = 1;
  bool quotient = true;           // T2' uses G_mod; false swaps in the full G
};

/// G and G_mod from the shell decomposition over Z^d.
struct GNorms {
  ShellDecomposition decomposition;
  double g = 0.0;
  double g_mod = 0.0;
};

inline GNorms g_norms(TestFunction const& f, TheoremOptions const& opt)
{
  double const peak = f.freq_majorant(0.0);
  double const abs_tol = opt.tol * std::max(peak * peak, 1e-300);
  std::int64_t const n_max = shell_cutoff_for(f, 1.0, abs_tol);
  auto quad = SphereQuadrature::monte_carlo(f.dimension(), opt.sphere_pairs, opt.seed);
  GNorms out;
  out.decomposition = g2_by_shells(f, 1.0, n_max, quad, abs_tol);
  out.g = std::sqrt(out.decomposition.total);
  out.g_mod = std::sqrt(g2_modulo_constants(out.decomposition));
  return out;
}

struct InequalityRecord {
  std::string function_id;
  int dimension = 0;
  double p = 1.0;
  Variant variant = Variant::T1;
  bool quotient = true;
  double lhs = 0.0;
  double g = 0.0;
  double g_mod = 0.0;
  double norm_p = 0.0;
  double norm_2 = 0.0;
  double norm_1 = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double g_stderr = 0.0;
  std::uint64_t seed = 0;
  double tol = 0.0;
};

inline void to_json(nlohmann::json& j, InequalityRecord const& r)
{
  j = {{"function", r.function_id},
       {"d", r.dimension},
       {"p", r.p},
       {"variant", to_string(r.variant)},
       {"quotient", r.quotient},
       {"lhs", r.lhs},
       {"G", r.g},
       {"G_mod", r.g_mod},
       {"norm_p", r.norm_p},
       {"norm_2", r.norm_2},
       {"norm_1", r.norm_1},
       {"rhs", r.rhs},
       {"ratio", r.ratio},
       {"G_stderr", r.g_stderr},
       {"seed", r.seed},
       {"tol", r.tol}};
}

namespace detail {

  inline InequalityRecord inequality(TestFunction const& f, double p, Variant v, TheoremOptions const& opt)
  {
    if (v == Variant::T1 || v == Variant::T1p)
      p = 1.0;
    check_range(f.dimension(), p, v);
    GNorms const g = g_norms(f, opt);
    InequalityRecord r;
    r.function_id = f.id();
    r.dimension = f.dimension();
    r.p = p;
    r.variant = v;
    r.quotient = v == Variant::T2p ? opt.quotient : v != Variant::T1p;
    r.g = g.g;
    r.g_mod = g.g_mod;
    r.norm_p = f.lp_norm(p);
    r.norm_2 = f.lp_norm(2.0);
    r.norm_1 = f.lp_norm(1.0);
    // G^2 stderr -> G stderr by the delta method
    r.g_stderr = g.g > 0.0 ? g.decomposition.stderr_ / (2.0 * g.g) : 0.0;
    r.seed = opt.seed;
    r.tol = opt.tol;
    switch (v) {
    case Variant::T1:
    case Variant::T2:
      r.lhs = r.norm_2;
      r.rhs = r.g + r.norm_p;
      break;
    case Variant::T1p:
      r.lhs = r.g;
      r.rhs = r.norm_2 + r.norm_p;
      break;
    case Variant::T2p:
      r.lhs = opt.quotient ? r.g_mod : r.g;
      r.rhs = r.norm_2 + r.norm_p;
      break;
    }
    r.ratio = r.lhs / r.rhs;
    return r;
  }

} // namespace detail

/// T1 (p forced to 1) or T2: lhs = ||f||_2, rhs = G + ||f||_p.
inline InequalityRecord check_direct(TestFunction const& f, double p, Variant v, TheoremOptions const& opt = {})
{
  if (!is_direct(v))
    throw std::invalid_argument{"latticelab::check_direct: variant must be T1 or T2"};
  return detail::inequality(f, p, v, opt);
}

/// T1' (p forced to 1, lhs = G) or T2' (lhs = G_mod); rhs = ||f||_2 + ||f||_p.
inline InequalityRecord check_inverse(TestFunction const& f, double p, Variant v, TheoremOptions const& opt = {})
{
  if (is_direct(v))
    throw std::invalid_argument{"latticelab::check_inverse: variant must be T1' or T2'"};
  return detail::inequality(f, p, v, opt);
}

inline InequalityRecord check_inequality(TestFunction const& f, double p, Variant v, TheoremOptions const& opt = {})
{
  return is_direct(v) ? check_direct(f, p, v, opt) : check_inverse(f, p, v, opt);
}

// ---------------------------------------------------------------------------
// Sharpness sweeps
// ---------------------------------------------------------------------------

enum class SweepKind { band_limited, plate };

inline char const* to_string(SweepKind k) { return k == SweepKind::plate ? "plate" : "band_limited"; }

inline SweepKind parse_sweep_kind(std::string const& s)
{
  if (s == "plate")
    return SweepKind::plate;
  if (s == "band_limited" || s == "band")
    return SweepKind::band_limited;
  throw std::invalid_argument{"latticelab::parse_sweep_kind: unknown kind '" + s + "'"};
}

struct SweepSeries {
  std::string name;
  std::vector<double> values;
  double expected_slope = 0.0;
  SlopeFit fit;
  bool accepted = false; // fit R^2 >= 0.99
  bool within = false;   // |slope - expected| <= tolerance
};

struct SweepResult {
  SweepKind kind = SweepKind::band_limited;
  int dimension = 0;
  double p = 1.0;
  std::vector<double> eps;
  std::vector<SweepSeries> series;
  double slope_tolerance = 0.1;

  SweepSeries const& get(std::string const& name) const
  {
    for (auto const& s : series)
      if (s.name == name)
        return s;
    throw std::out_of_range{"latticelab::SweepResult: no series named " + name};
  }

  bool passed() const
  {
    return std::all_of(series.begin(), series.end(), [](auto const& s) { return s.accepted && s.within; });
  }
};

inline void to_json(nlohmann::json& j, SweepResult const& r)
{
  nlohmann::json series = nlohmann::json::array();
  for (auto const& s : r.series)
    series.push_back({{"name", s.name},
                      {"values", s.values},
                      {"expected_slope", s.expected_slope},
                      {"slope", s.fit.slope},
                      {"half_width", s.fit.half_width},
                      {"r_squared", s.fit.r_squared},
                      {"accepted", s.accepted},
                      {"within", s.within}});
  j = {{"kind", to_string(r.kind)}, {"d", r.dimension},         {"p", r.p}, {"eps", r.eps},
       {"series", series},          {"slope_tolerance", r.slope_tolerance}, {"passed", r.passed()}};
}

/// Default dyadic range 2^-2 .. 2^-6.
inline std::vector<double> dyadic_eps(int from = 2, int to = 6)
{
  std::vector<double> out;
  for (int k = from; k <= to; ++k)
    out.push_back(std::ldexp(1.0, -k));
  return out;
}

inline void check_dyadic(std::vector<double> const& eps)
{
  if (eps.size() < 4)
    throw std::invalid_argument{"latticelab::sharpness_sweep: need at least four eps values"};
  for (double e : eps) {
    int ex = 0;
    if (!(e > 0.0) || std::frexp(e, &ex) != 0.5)
      throw std::invalid_argument{"latticelab::sharpness_sweep: eps values must be powers of two"};
  }
}

/// Log-log slopes against eps:
///   band_limited: ||f||_p, expected d/p'
///   plate:        G_mod^2, expected d-1; ||f||_p^2, expected (2d+2)/p'
/// A fit with R^2 < 0.99 is marked as not accepted.
inline SweepResult sharpness_sweep(SweepKind kind, int d, double p, std::vector<double> eps_list,
                                   double slope_tolerance = 0.1, TheoremOptions const& opt = {})
{
  check_dyadic(eps_list);
  if (!(p >= 1.0))
    throw std::invalid_argument{"latticelab::sharpness_sweep: p must be at least 1"};
  SweepResult r;
  r.kind = kind;
  r.dimension = d;
  r.p = p;
  r.eps = eps_list;
  r.slope_tolerance = slope_tolerance;
  double const inv_pc = 1.0 / conjugate_exponent(p);
  auto finish = [&](SweepSeries s) {
    s.fit = fit_loglog(r.eps, s.values);
    s.accepted = s.fit.r_squared >= 0.99;
    s.within = std::abs(s.fit.slope - s.expected_slope) <= slope_tolerance;
    r.series.push_back(std::move(s));
  };
  if (kind == SweepKind::band_limited) {
    SweepSeries norm;
    norm.name = "norm_p";
    norm.expected_slope = d * inv_pc;
    for (double e : eps_list)
      norm.values.push_back(make_band_limited(d, e).lp_norm(p));
    finish(std::move(norm));
    return r;
  }
  SweepSeries gmod, norm;
  gmod.name = "g_mod_sq";
  norm.name = "norm_p_sq";
  gmod.expected_slope = d - 1.0;
  norm.expected_slope = (2.0 * d + 2.0) * inv_pc;
  std::vector<double> g = parallel_map(eps_list.size(), [&](std::size_t i) {
    return g2_modulo_constants(g_norms(make_plate(d, eps_list[i]), opt).decomposition);
  });
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    gmod.values.push_back(g[i]);
    double const n = make_plate(d, eps_list[i]).lp_norm(p);
    norm.values.push_back(n * n);
  }
  finish(std::move(gmod));
  finish(std::move(norm));
  return r;
}

/// Plate ratio G_mod / (||f||_2 + ||f||_p) over eps with no range gate, for
/// exponents between 2d/(d+2) and (2d+2)/(d+3) where the inequality is open.
/// Reported without pass/fail.
inline nlohmann::json exploratory_sweep(int d, double p, std::vector<double> const& eps_list,
                                        TheoremOptions const& opt = {})
{
  check_dyadic(eps_list);
  std::vector<double> ratios;
  for (double e : eps_list) {
    TestFunction const f = make_plate(d, e);
    GNorms const g = g_norms(f, opt);
    ratios.push_back(g.g_mod / (f.lp_norm(2.0) + f.lp_norm(p)));
  }
  double slope = std::numeric_limits<double>::quiet_NaN();
  if (eps_list.size() >= 3 && std::all_of(ratios.begin(), ratios.end(), [](double v) { return v > 0.0; }))
    slope = fit_loglog(eps_list, ratios).slope;
  return {{"kind", "plate"},         {"d", d},
          {"p", p},                  {"range", {critical_exponent(d), (2.0 * d + 2.0) / (d + 3.0)}},
          {"eps", eps_list},         {"ratio", ratios},
          {"ratio_slope", slope},    {"exploratory", true}};
}

// ---------------------------------------------------------------------------
// Ratio stability
// ---------------------------------------------------------------------------

/// One family of inequality ratios that should stay bounded (or, for the
/// counter family, should diverge).
struct StabilityFamily {
  std::string name;
  std::string rule; // "seeds": max/min; "eps": max / ratio at coarsest eps; "counter": same, must exceed
  std::vector<double> ratios;
  double spread = 0.0;
  double limit = 10.0;
  bool finite = false;
  bool passed = false;
};

inline void to_json(nlohmann::json& j, StabilityFamily const& s)
{
  j = {{"name", s.name},     {"rule", s.rule},     {"ratios", s.ratios}, {"spread", s.spread},
       {"limit", s.limit},   {"finite", s.finite}, {"passed", s.passed}};
}

inline StabilityFamily evaluate_family(std::string name, std::string rule, std::vector<double> ratios,
                                       double limit = 10.0)
{
  StabilityFamily s;
  s.name = std::move(name);
  s.rule = std::move(rule);
  s.ratios = std::move(ratios);
  s.limit = limit;
  s.finite = !s.ratios.empty() && std::all_of(s.ratios.begin(), s.ratios.end(),
                                              [](double v) { return std::isfinite(v) && v >= 0.0; });
  double const mx = s.ratios.empty() ? 0.0 : *std::max_element(s.ratios.begin(), s.ratios.end());
  if (s.rule == "seeds") {
    double const mn = s.ratios.empty() ? 0.0 : *std::min_element(s.ratios.begin(), s.ratios.end());
    s.spread = mx == 0.0 ? 1.0 : (mn > 0.0 ? mx / mn : std::numeric_limits<double>::infinity());
  }
  else {
    // eps decreasing along the list; growth relative to the coarsest eps
    double const first = s.ratios.empty() ? 0.0 : s.ratios.front();
    s.spread = mx == 0.0 ? 1.0 : (first > 0.0 ? mx / first : std::numeric_limits<double>::infinity());
  }
  s.passed = s.rule == "counter" ? s.finite && s.spread > limit : s.finite && s.spread < limit;
  return s;
}

struct StabilityConfig {
  std::vector<std::string> seed_corpus{"gaussian:d=4:a=1,1,1,1", "gaussian:d=4:a=4,1,1,1",
                                       "gaussian:d=5:a=1,1,1,1,1", "gaussian:d=5:a=1,2,1,1,3",
                                       "plate:d=5:eps=0.2"};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::vector<double> eps{dyadic_eps(2, 6)};
  std::vector<double> counter_eps{dyadic_eps(2, 7)};
  double p = 1.2;
  TheoremOptions options;
};

/// Ratio families for T1/T2 (d >= 4) and T1'/T2' (d >= 5): repeated seeds on
/// the seed corpus, dyadic eps sweeps of the band-limited and plate members,
/// and the counter family T2' with G in place of G_mod on band-limited d = 5.
inline std::vector<StabilityFamily> ratio_stability(StabilityConfig const& cfg)
{
  std::vector<StabilityFamily> out;
  std::vector<Variant> const all{Variant::T1, Variant::T2, Variant::T1p, Variant::T2p};
  auto applicable = [&](int d, Variant v) {
    try {
      check_range(d, cfg.p, v);
      return true;
    }
    catch (RangeError const&) {
      return false;
    }
  };
  for (auto const& id : cfg.seed_corpus) {
    TestFunction const f = make_from_id(id);
    for (Variant v : all) {
      if (!applicable(f.dimension(), v))
        continue;
      std::vector<double> ratios = parallel_map(cfg.seeds.size(), [&](std::size_t i) {
        TheoremOptions o = cfg.options;
        o.seed = cfg.seeds[i];
        return check_inequality(f, cfg.p, v, o).ratio;
      });
      out.push_back(evaluate_family(id + " " + to_string(v) + " seeds", "seeds", std::move(ratios)));
    }
  }
  for (SweepKind kind : {SweepKind::band_limited, SweepKind::plate})
    for (int d : {4, 5})
      for (Variant v : all) {
        if (!applicable(d, v))
          continue;
        std::vector<double> ratios = parallel_map(cfg.eps.size(), [&](std::size_t i) {
          TestFunction const f = kind == SweepKind::plate ? make_plate(d, cfg.eps[i]) : make_band_limited(d, cfg.eps[i]);
          return check_inequality(f, cfg.p, v, cfg.options).ratio;
        });
        out.push_back(evaluate_family(std::string{to_string(kind)} + " d=" + std::to_string(d) + " " + to_string(v) +
                                        " eps",
                                      "eps", std::move(ratios)));
      }
  {
    TheoremOptions o = cfg.options;
    o.quotient = false;
    std::vector<double> ratios;
    for (double e : cfg.counter_eps)
      ratios.push_back(check_inverse(make_band_limited(5, e), cfg.p, Variant::T2p, o).ratio);
    out.push_back(evaluate_family("band_limited d=5 T2' without quotient eps", "counter", std::move(ratios)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corpus runner
// ---------------------------------------------------------------------------

inline std::vector<std::string> default_corpus()
{
  return {"gaussian:d=2:a=1,1",       "gaussian:d=3:a=1,1,1",      "gaussian:d=4:a=1,1,1,1",
          "gaussian:d=4:a=4,1,1,1",   "gaussian:d=5:a=1,1,1,1,1",  "gaussian:d=5:a=1,2,1,1,3",
          "band_limited:d=4:eps=0.5", "band_limited:d=5:eps=0.5",  "plate:d=4:eps=0.2",
          "plate:d=5:eps=0.2"};
}

struct RunConfig {
  std::vector<std::string> corpus;
  std::vector<int> dims;          // empty: no filter
  std::uint64_t seed = 1;
  double tol = 1e-12;
  std::int64_t n_max = 64;        // shell cutoff for mc-vs-shells
  std::size_t rotations = 256;
  double p = 1.2;
  bool parseval = false;
  bool shells = false;
  bool rd_tables = false;
  bool remark1 = false;
  bool sharpness = false;
  bool kernels = false;
  bool theorems = false;
  bool stability = false;
  std::string format = "json";

  /// The shipped corpus with every section enabled.
  static RunConfig defaults()
  {
    RunConfig c;
    c.corpus = default_corpus();
    c.parseval = c.shells = c.rd_tables = c.remark1 = c.sharpness = c.kernels = c.theorems = c.stability = true;
    return c;
  }

  nlohmann::json to_json() const
  {
    return {{"corpus", corpus}, {"dims", dims},         {"seed", seed},           {"tol", tol},
            {"n_max", n_max},   {"rotations", rotations}, {"p", p},               {"format", format},
            {"sections",
             {{"parseval", parseval},
              {"shells", shells},
              {"rd_tables", rd_tables},
              {"remark1", remark1},
              {"sharpness", sharpness},
              {"kernels", kernels},
              {"theorems", theorems},
              {"stability", stability}}}};
  }
};

struct CheckResult {
  std::string name;
  std::string section;
  bool passed = false;
  nlohmann::json detail;
};

inline void to_json(nlohmann::json& j, CheckResult const& c)
{
  j = {{"name", c.name}, {"section", c.section}, {"passed", c.passed}, {"detail", c.detail}};
}

struct ReportBundle {
  nlohmann::json report;
  std::vector<CheckResult> checks;
  std::vector<InequalityRecord> inequalities;
  std::vector<SweepResult> sweeps;
  std::vector<McVsShellsReport> mc_vs_shells;
  std::vector<std::pair<std::string, std::string>> rejections; // (what, diagnostic)

  bool all_passed() const
  {
    return std::all_of(checks.begin(), checks.end(), [](auto const& c) { return c.passed; });
  }

  /// Writes report.json, plus flat CSV tables when format is "csv".
  void write(std::filesystem::path const& dir, std::string const& format) const
  {
    std::filesystem::create_directories(dir);
    {
      std::ofstream os{dir / "report.json"};
      if (!os)
        throw std::runtime_error{"latticelab::ReportBundle: cannot write " + (dir / "report.json").string()};
      os << report.dump(2) << "\n";
    }
    if (format != "csv")
      return;
    char buf[512];
    {
      std::ofstream os{dir / "checks.csv"};
      os << "section,name,passed\n";
      for (auto const& c : checks)
        os << c.section << ",\"" << c.name << "\"," << (c.passed ? 1 : 0) << "\n";
    }
    {
      std::ofstream os{dir / "inequalities.csv"};
      os << "function,d,p,variant,quotient,lhs,rhs,ratio,G,G_mod,norm_p,norm_2,norm_1,seed\n";
      for (auto const& r : inequalities) {
        std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%s,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%llu\n",
                      r.function_id.c_str(), r.dimension, r.p, to_string(r.variant), r.quotient ? 1 : 0, r.lhs, r.rhs,
                      r.ratio, r.g, r.g_mod, r.norm_p, r.norm_2, r.norm_1, static_cast<unsigned long long>(r.seed));
        os << buf;
      }
    }
    {
      std::ofstream os{dir / "sweeps.csv"};
      os << "kind,d,p,series,eps,value\n";
      for (auto const& s : sweeps)
        for (auto const& ser : s.series)
          for (std::size_t i = 0; i < s.eps.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%s,%.17g,%.17g\n", to_string(s.kind), s.dimension, s.p,
                          ser.name.c_str(), s.eps[i], ser.values[i]);
            os << buf;
          }
    }
    {
      std::ofstream os{dir / "mc_vs_shells.csv"};
      os << "function,mc,mc_stderr,shells,shells_stderr,tail_bound,z\n";
      for (auto const& m : mc_vs_shells) {
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", m.function_id.c_str(),
                      m.mc.estimate, m.mc.stderr_, m.shells.total, m.shells.stderr_, m.shells.tail_bound, m.z);
        os << buf;
      }
    }
  }
};

namespace detail {

  inline int parseval_grid_size(int d)
  {
    switch (d) {
    case 2:
      return 32;
    case 3:
      return 16;
    case 4:
      return 12;
    default:
      return 8;
    }
  }

  inline bool in_dims(RunConfig const& cfg, int d)
  {
    return cfg.dims.empty() || std::find(cfg.dims.begin(), cfg.dims.end(), d) != cfg.dims.end();
  }

} // namespace detail

/// Runs every enabled section over the corpus and assembles a deterministic
/// report: no timestamps, fixed iteration order, seeds recorded.
inline ReportBundle run_corpus(RunConfig const& cfg)
{
  ReportBundle b;
  nlohmann::json& rep = b.report;
  rep["config"] = cfg.to_json();
  std::vector<TestFunction> corpus;
  for (auto const& id : cfg.corpus) {
    TestFunction f = make_from_id(id);
    if (detail::in_dims(cfg, f.dimension()))
      corpus.push_back(std::move(f));
  }
  auto add_check = [&](std::string section, std::string name, bool passed, nlohmann::json detail) {
    b.checks.push_back({std::move(name), std::move(section), passed, std::move(detail)});
  };

  if (cfg.parseval) {
    nlohmann::json arr = nlohmann::json::array();
    for (auto const& f : corpus) {
      int const d = f.dimension();
      // the spatial route in d = 5 costs minutes; only the spectral members run there
      if (d > 4 && !f.freq_support_radius())
        continue;
      int const n_g = detail::parseval_grid_size(d);
      int const m_max = std::min(3, (n_g - 1) / 2);
      SplitRng const root{cfg.seed};
      std::vector<ParsevalReport> reps = parallel_map(5, [&](std::size_t i) {
        SplitRng rng = root.split(1000 + i);
        return parseval_check(f, sample_haar(d, rng), n_g, m_max, cfg.tol);
      });
      bool ok = true;
      double worst = 0.0;
      for (auto const& r : reps) {
        ok = ok && r.within_contract && r.discrepancy <= 1e-6;
        worst = std::max(worst, r.discrepancy);
        arr.push_back({{"function", f.id()}, {"report", r}});
      }
      add_check("parseval", f.id(), ok, {{"worst_discrepancy", worst}, {"rotations", 5}});
    }
    rep["parseval"] = arr;
  }

  if (cfg.shells) {
    nlohmann::json arr = nlohmann::json::array();
    for (auto const& f : corpus) {
      McVsShellsReport const r = mc_vs_shells(f, cfg.rotations, cfg.n_max, cfg.seed);
      bool const ok = std::abs(r.z) <= 3.0 && (!r.exact_paths || r.relative_difference <= 1e-10);
      add_check("mc_vs_shells", f.id(), ok, {{"z", r.z}, {"relative_difference", r.relative_difference}});
      arr.push_back(r);
      b.mc_vs_shells.push_back(r);
    }
    rep["mc_vs_shells"] = arr;
  }

  if (cfg.rd_tables) {
    nlohmann::json arr = nlohmann::json::array();
    for (int d : {3, 4, 5}) {
      if (!detail::in_dims(cfg, d))
        continue;
      RdTable const exact = build_rd_table(d, 10000);
      for (auto parity : {ParityFilter::all, ParityFilter::odd}) {
        BoundSummary const s = bound_statistics(exact, parity);
        arr.push_back(s);
        if (d == 5 && parity == ParityFilter::all)
          add_check("rd_bounds", "r_5(n)/n^{3/2} bounded below", s.get("power").min > 0.0, s.get("power"));
        if (d == 4 && parity == ParityFilter::odd) {
          auto const& pw = s.get("power");
          add_check("rd_bounds", "r_4(n)/n in [8, 24] over odd n", pw.min >= 8.0 && pw.max <= 24.0, pw);
        }
        if (d == 4 && parity == ParityFilter::all) {
          bool ok = true;
          for (std::int64_t n = 2; n <= 10000; n *= 2)
            ok = ok && exact.at(n) == 24;
          add_check("rd_bounds", "r_4(2^k) = 24", ok, s.get("pow2"));
        }
      }
    }
    rep["rd_bounds"] = arr;
  }

  if (cfg.remark1 && detail::in_dims(cfg, 4)) {
    TestFunction const f = make_band_limited(4, 0.5);
    SplitRng const root{cfg.seed};
    double worst = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
      SplitRng rng = root.split(2000 + i);
      PeriodizationGrid const g = periodize(f, sample_haar(4, rng), 8, cfg.tol);
      for (auto const& v : g.samples)
        worst = std::max(worst, std::abs(v - 1.0));
    }
    auto quad = SphereQuadrature::monte_carlo(4, 64, cfg.seed);
    ShellDecomposition const s = g2_by_shells(f, 1.0, 16, quad, cfg.tol);
    double const gmod = g2_modulo_constants(s);
    SweepResult const sw = sharpness_sweep(SweepKind::band_limited, 4, 1.0, dyadic_eps(1, 6), 0.05);
    rep["remark1"] = {{"max_grid_deviation", worst}, {"G_mod_sq", gmod}, {"shells", s}, {"sweep", sw}};
    add_check("remark1", "band-limited periodizations constant", worst <= 1e-9, {{"max_deviation", worst}});
    add_check("remark1", "band-limited G_mod = 0", gmod == 0.0, {{"G_mod_sq", gmod}});
    add_check("remark1", "||f||_1 slope 0", sw.passed(), sw);
    b.sweeps.push_back(sw);
  }

  if (cfg.sharpness) {
    nlohmann::json arr = nlohmann::json::array();
    if (detail::in_dims(cfg, 4)) {
      SweepResult const plate = sharpness_sweep(SweepKind::plate, 4, 4.0 / 3.0, dyadic_eps(2, 6), 0.1);
      add_check("sharpness", "plate d=4 exponents", plate.passed(), plate);
      arr.push_back(plate);
      b.sweeps.push_back(plate);
    }
    if (detail::in_dims(cfg, 5)) {
      SweepResult const band = sharpness_sweep(SweepKind::band_limited, 5, cfg.p, dyadic_eps(2, 6), 0.05);
      add_check("sharpness", "band_limited d=5 dilation exponent", band.passed(), band);
      arr.push_back(band);
      b.sweeps.push_back(band);
      double const p_open = 0.5 * (critical_exponent(5) + 12.0 / 8.0);
      rep["exploratory"] = exploratory_sweep(5, p_open, dyadic_eps(2, 6));
    }
    rep["sharpness"] = arr;
  }

  if (cfg.kernels) {
    nlohmann::json arr = nlohmann::json::array();
    for (int d : {4, 5}) {
      if (!detail::in_dims(cfg, d))
        continue;
      EnvelopeReport const e = envelope_check(d);
      add_check("kernels", "envelope d=" + std::to_string(d), e.passed,
                {{"fitted_C", e.fitted_C}, {"stability", e.stability}, {"far_exponent", e.far_fit.slope},
                 {"failures", e.failures}});
      arr.push_back(e);
    }
    rep["kernels"] = arr;
  }

  if (cfg.theorems) {
    nlohmann::json arr = nlohmann::json::array();
    nlohmann::json rejected = nlohmann::json::array();
    TheoremOptions opt;
    opt.seed = cfg.seed;
    opt.tol = cfg.tol;
    for (auto const& f : corpus)
      for (Variant v : {Variant::T1, Variant::T2, Variant::T1p, Variant::T2p}) {
        try {
          InequalityRecord const r = check_inequality(f, cfg.p, v, opt);
          bool const ok = std::isfinite(r.ratio) && r.ratio >= 0.0;
          add_check("theorems", f.id() + " " + to_string(v), ok, {{"ratio", r.ratio}});
          arr.push_back(r);
          b.inequalities.push_back(r);
        }
        catch (RangeError const& e) {
          rejected.push_back({{"function", f.id()}, {"variant", to_string(v)}, {"diagnostic", e.what()}});
          b.rejections.emplace_back(f.id() + " " + to_string(v), e.what());
        }
      }
    rep["inequalities"] = arr;
    rep["range_rejections"] = rejected;
  }

  if (cfg.stability) {
    StabilityConfig sc;
    sc.p = cfg.p;
    sc.options.tol = cfg.tol;
    sc.options.seed = cfg.seed;
    std::vector<std::string> seed_corpus;
    for (auto const& id : sc.seed_corpus)
      if (detail::in_dims(cfg, make_from_id(id).dimension()))
        seed_corpus.push_back(id);
    sc.seed_corpus = seed_corpus;
    std::vector<StabilityFamily> const fams = ratio_stability(sc);
    nlohmann::json arr = nlohmann::json::array();
    for (auto const& s : fams) {
      add_check("stability", s.name, s.passed, {{"spread", s.spread}, {"rule", s.rule}});
      arr.push_back(s);
    }
    rep["stability"] = arr;
  }

  rep["checks"] = b.checks;
  rep["all_passed"] = b.all_passed();
  return b;
}

} // namespace latticelab

#endif
