#ifndef LATTICELAB_SHELL_ANALYSIS_HPP
#define LATTICELAB_SHELL_ANALYSIS_HPP

// G^2 = |fhat(0)|^2 + sum_{n >= 1} r_d(n) A(scale sqrt n), assembled shell by
// shell, and its comparison with the Haar Monte Carlo estimate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "functions.hpp"
#include "haar_sphere.hpp"
#include "lattice_periodization.hpp"
#include "parallel.hpp"
#include "sums_of_squares.hpp"

namespace latticelab {

struct ShellTerm {
  std::int64_t n = 0;
  double count = 0.0; // r_d(n)
  double average = 0.0;
  double average_stderr = 0.0;
  double contribution = 0.0;
};

struct ShellDecomposition {
  std::string function_id;
  int dimension = 0;
  double scale = 1.0;
  std::int64_t n_max = 0;
  std::vector<ShellTerm> terms;
  double dc_term = 0.0;
  double tail_bound = 0.0;
  double total = 0.0;
  double stderr_ = 0.0;
  AverageMethod method = AverageMethod::radial;
  std::uint64_t seed = 0;
  std::size_t quadrature_pairs = 0;

  /// Sum of the shell contributions, excluding the constant mode.
  double shells_sum() const
  {
    double s = 0.0;
    for (auto const& t : terms)
      s += t.contribution;
    return s;
  }

  void write_csv(std::ostream& os) const
  {
    os << "n,r_d,A,contribution\n";
    char buf[160];
    for (auto const& t : terms) {
      std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g\n", static_cast<long long>(t.n), t.count, t.average,
                    t.contribution);
      os << buf;
    }
  }
};

inline void to_json(nlohmann::json& j, ShellDecomposition const& s)
{
  std::int64_t nonzero = 0;
  for (auto const& t : s.terms)
    nonzero += t.contribution > 0.0 ? 1 : 0;
  j = {{"function", s.function_id},
       {"d", s.dimension},
       {"scale", s.scale},
       {"n_max", s.n_max},
       {"dc_term", s.dc_term},
       {"shells_sum", s.shells_sum()},
       {"total", s.total},
       {"stderr", s.stderr_},
       {"tail_bound", s.tail_bound},
       {"nonzero_shells", nonzero},
       {"method", to_string(s.method)},
       {"seed", s.seed},
       {"quadrature_pairs", s.quadrature_pairs}};
}

/// Certified bound on sum_{n > n_max} r_d(n) A(scale sqrt n), from the
/// frequency majorant and exact or cube-bounded shell counts, times 10.
inline double shell_tail_bound(TestFunction const& f, double scale, std::int64_t n_max)
{
  int const d = f.dimension();
  auto table = rd_table(d, 4096);
  double total = 0.0;
  int small_run = 0;
  for (std::int64_t n = n_max + 1; n < n_max + 10'000'000; ++n) {
    double const m = f.freq_majorant(scale * std::sqrt(static_cast<double>(n)));
    if (m <= 0.0)
      return 10.0 * total;
    double const count = n <= table->n_max() ? table->as_double(n)
                                             : std::pow(2.0 * std::floor(std::sqrt(static_cast<double>(n))) + 1.0, d);
    double const term = count * m * m;
    total += term;
    small_run = (term <= 1e-30 * total || term < 1e-300) ? small_run + 1 : 0;
    if (small_run >= 16)
      return 10.0 * total;
  }
  return std::numeric_limits<double>::infinity();
}

/// Smallest shell cutoff whose certified tail is below tol.
inline std::int64_t shell_cutoff_for(TestFunction const& f, double scale, double tol)
{
  ShellCutoff const c = choose_shell_cutoff(
    f.dimension(), [&f, scale](double t) { double const m = f.freq_majorant(scale * t); return 10.0 * m * m; }, tol);
  if (!std::isfinite(c.tail))
    throw std::runtime_error{"latticelab::shell_cutoff_for: decay of " + f.id() + " is too slow to certify the tail"};
  return std::max<std::int64_t>(c.n_cut, 1);
}

/// Shell decomposition of G^2 over the lattice scaled by `scale` (1 for Z^d,
/// 1/sqrt 2 for the rescaled lattice). Monte Carlo shells share the nodes of
/// `quad`, so the reported standard error accounts for their correlation.
inline ShellDecomposition g2_by_shells(TestFunction const& f, double scale, std::int64_t n_max,
                                       SphereQuadrature const& quad, double tol = 1e-10)
{
  if (n_max < 1)
    throw std::invalid_argument{"latticelab::g2_by_shells: n_max must be at least 1"};
  if (!(scale > 0.0))
    throw std::invalid_argument{"latticelab::g2_by_shells: scale must be positive"};
  int const d = f.dimension();
  ShellDecomposition out;
  out.function_id = f.id();
  out.dimension = d;
  out.scale = scale;
  out.n_max = n_max;
  out.seed = quad.seed();
  out.tail_bound = shell_tail_bound(f, scale, n_max);
  if (!(out.tail_bound <= tol))
    throw std::runtime_error{"latticelab::g2_by_shells: tail beyond n_max = " + std::to_string(n_max) + " for " +
                             f.id() + " is not certifiably below the tolerance"};
  auto table = rd_table(d, n_max);
  out.dc_term = f.freq_abs_sq(std::vector<double>(d, 0.0));

  std::vector<ShellAverage> averages = parallel_map(static_cast<std::size_t>(n_max), [&](std::size_t i) {
    std::int64_t const n = static_cast<std::int64_t>(i) + 1;
    if (table->as_double(n) == 0.0)
      return ShellAverage{};
    return spherical_average(f, scale * std::sqrt(static_cast<double>(n)), quad);
  });

  bool mc = false;
  std::vector<double> combined; // per-pair estimates of the shell sum
  out.method = f.symmetry() == Symmetry::radial  ? AverageMethod::radial
               : f.symmetry() == Symmetry::axial ? AverageMethod::axial
                                                 : AverageMethod::monte_carlo;
  out.terms.reserve(n_max);
  for (std::int64_t n = 1; n <= n_max; ++n) {
    ShellAverage const& a = averages[n - 1];
    ShellTerm term;
    term.n = n;
    term.count = table->as_double(n);
    term.average = a.value;
    term.average_stderr = a.stderr_;
    term.contribution = term.count * a.value;
    if (!a.pair_values.empty()) {
      mc = true;
      if (combined.empty())
        combined.assign(a.pair_values.size(), 0.0);
      for (std::size_t k = 0; k < combined.size(); ++k)
        combined[k] += term.count * a.pair_values[k];
    }
    out.terms.push_back(term);
  }
  if (mc) {
    out.quadrature_pairs = quad.pairs();
    out.stderr_ = SphereQuadrature::summarize(combined).stderr_;
  }
  out.total = out.dc_term + out.shells_sum();
  return out;
}

/// The quotient norm int ||g_rho - ghat_rho(0)||_2^2 d rho: total minus the
/// constant mode, summed from the shells to avoid cancellation.
inline double g2_modulo_constants(ShellDecomposition const& decomp)
{
  return decomp.shells_sum();
}

struct McVsShellsReport {
  std::string function_id;
  HaarAverage mc;
  ShellDecomposition shells;
  double difference = 0.0;
  double sigma = 0.0; // combined standard error including a roundoff floor
  double z = 0.0;
  double relative_difference = 0.0;
  bool exact_paths = false; // both estimators deterministic
};

inline void to_json(nlohmann::json& j, McVsShellsReport const& r)
{
  j = {{"function", r.function_id},
       {"mc", r.mc},
       {"shells", r.shells},
       {"difference", r.difference},
       {"sigma", r.sigma},
       {"z", r.z},
       {"relative_difference", r.relative_difference},
       {"exact_paths", r.exact_paths}};
}

struct McVsShellsOptions {
  int n_g = 64;                     // Nyquist cap for the Parseval norms
  double tol = 1e-12;               // tail tolerance, relative to |fhat(0)|^2
  std::size_t sphere_pairs = 4096;  // Monte Carlo shells only
};

/// Haar Monte Carlo G^2 against the shell sum; z is their difference over
/// the combined standard error, floored at 1e-13 max(|a|, |b|) plus both
/// certified truncation tails.
inline McVsShellsReport mc_vs_shells(TestFunction const& f, std::size_t n_rot, std::int64_t n_max, std::uint64_t seed,
                                     McVsShellsOptions const& opt = {})
{
  double const dc = f.freq_abs_sq(std::vector<double>(f.dimension(), 0.0));
  double const abs_tol = opt.tol * std::max(dc, 1e-300);
  McVsShellsReport r;
  r.function_id = f.id();
  r.mc = so_d_average_g2(f, n_rot, opt.n_g, seed, true, abs_tol);
  auto quad = SphereQuadrature::monte_carlo(f.dimension(), opt.sphere_pairs, splitmix64(seed ^ 0x5be11));
  r.shells = g2_by_shells(f, 1.0, n_max, quad, abs_tol);
  double const a = r.mc.estimate;
  double const b = r.shells.total;
  r.difference = a - b;
  // certified truncation tails enter as a deterministic error budget
  double const floor = 1e-13 * std::max(std::abs(a), std::abs(b)) + r.mc.tail_bound + r.shells.tail_bound;
  r.sigma = std::sqrt(r.mc.stderr_ * r.mc.stderr_ + r.shells.stderr_ * r.shells.stderr_ + floor * floor);
  r.z = r.sigma > 0.0 ? r.difference / r.sigma : 0.0;
  r.relative_difference = std::abs(r.difference) / std::max({std::abs(a), std::abs(b), 1e-300});
  r.exact_paths = f.symmetry() == Symmetry::radial;
  return r;
}

} // namespace latticelab

#endif
