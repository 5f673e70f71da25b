#ifndef LATTICELAB_OSCILLATORY_KERNELS_HPP
#define LATTICELAB_OSCILLATORY_KERNELS_HPP

// The kernels
//   D_{N,nu}(x) = chi_{|x|>1} e^{2 pi i nu b}
//                 int_{1/2}^{2} N q(t) e^{-2 pi i nu (N t)^2} (N t)^{d-1} sigmahat(N t |x|) dt
// and their decay envelopes in |x| and N.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "functions.hpp"
#include "numerics.hpp"
#include "parallel.hpp"

namespace latticelab {

/// Dyadic partition bump supported in [1/2, 2] with q(x) + q(x/2) = 1 on [1, 2],
/// hence sum_{j >= 0} q(x / 2^j) = 1 for x >= 1.
inline double partition_bump(double x)
{
  if (!(x > 0.5 && x < 2.0))
    return 0.0;
  double const u = std::log2(x);
  return u <= 0.0 ? smooth_step(u + 1.0) : 1.0 - smooth_step(u);
}

/// Fourier transform of the normalized surface measure on S^{d-1} at radius r.
inline double surface_measure_ft(int d, double r)
{
  if (d < 2)
    throw std::invalid_argument{"latticelab::surface_measure_ft: dimension must be at least 2"};
  if (!(r >= 0.0))
    throw std::invalid_argument{"latticelab::surface_measure_ft: radius must be nonnegative"};
  return sphere_ft(d, r);
}

struct KernelProbe {
  int dimension = 4;
  std::int64_t N = 8;
  std::int64_t nu = 1;
  double b = 0.0;
  double x_mag = 2.0;
};

struct KernelOptions {
  double rel_tol = 1e-6;
  double abs_floor = 1e-11;      // relative to int |integrand|; the K15 - G7 roundoff sits near 1e-13
  double panels_per_phase = 1.0; // initial Gauss-Kronrod panels per cycle of total phase
  std::int64_t max_panels = 1 << 22;
};

struct KernelValue {
  cplx value;
  double error = 0.0;
  double abs_integral = 0.0;
  std::int64_t panels = 0;
};

/// Total phase variation, in cycles, of the integrand over [1/2, 2].
inline double kernel_phase(KernelProbe const& p)
{
  double const n = static_cast<double>(p.N);
  return 3.75 * std::abs(static_cast<double>(p.nu)) * n * n + 1.5 * n * p.x_mag;
}

/// D_{N,nu}(x) by composite Gauss-Kronrod quadrature with the panel count
/// proportional to the total phase, doubled until the K15 - G7 error estimate
/// meets rel_tol |value| + abs_floor int |integrand|.
inline KernelValue kernel_d_n_nu(KernelProbe const& p, KernelOptions const& opt = {})
{
  if (p.dimension < 2)
    throw std::invalid_argument{"latticelab::kernel_d_n_nu: dimension must be at least 2"};
  if (p.N < 2)
    throw std::invalid_argument{"latticelab::kernel_d_n_nu: N must be at least 2"};
  if (p.nu == 0)
    throw std::invalid_argument{"latticelab::kernel_d_n_nu: nu must be nonzero"};
  if (!(p.x_mag >= 0.0))
    throw std::invalid_argument{"latticelab::kernel_d_n_nu: |x| must be nonnegative"};
  if (p.x_mag <= 1.0)
    return {};
  int const d = p.dimension;
  double const n = static_cast<double>(p.N);
  double const nu = static_cast<double>(p.nu);
  auto integrand = [&](double t) {
    double const q = partition_bump(t);
    if (q == 0.0)
      return cplx{};
    double const nt = n * t;
    // reduce the phase nu (N t)^2 mod 1 before scaling by 2 pi
    double const cycles = nu * nt * nt;
    double const frac = cycles - std::floor(cycles);
    double w = n * q;
    for (int k = 1; k < d; ++k)
      w *= nt;
    double const amp = w * sphere_ft(d, nt * p.x_mag);
    return amp * cplx{std::cos(2.0 * pi * frac), -std::sin(2.0 * pi * frac)};
  };
  auto panels = static_cast<std::int64_t>(std::ceil(opt.panels_per_phase * kernel_phase(p)));
  panels = std::max<std::int64_t>(panels, 16);
  for (;;) {
    if (panels > opt.max_panels)
      throw std::runtime_error{"latticelab::kernel_d_n_nu: phase " + std::to_string(kernel_phase(p)) +
                               " exceeds the quadrature budget"};
    QuadratureResult const r = kronrod_panels(integrand, 0.5, 2.0, static_cast<int>(panels));
    double const allowed = opt.rel_tol * std::abs(r.value) + opt.abs_floor * r.abs_integral;
    if (r.error <= allowed) {
      double const bphase = 2.0 * pi * (nu * p.b - std::floor(nu * p.b));
      return {r.value * cplx{std::cos(bphase), std::sin(bphase)}, r.error, r.abs_integral, panels};
    }
    panels *= 2;
  }
}

/// D_{N,nu}(x) at b = 0 for nu = 1..nu_hi on shared nodes.
///
/// The amplitude N q(t) (N t)^{d-1} sigmahat(N t |x|) is evaluated once per
/// node and the phase e^{-2 pi i nu (N t)^2} advanced by multiplication in nu.
/// The panel count is sized for nu_hi and doubled until every nu meets the
/// same error criterion as kernel_d_n_nu.
inline std::vector<KernelValue> kernel_nu_batch(int d, std::int64_t N, double x_mag, std::int64_t nu_hi,
                                                KernelOptions const& opt = {})
{
  if (d < 2 || N < 2 || nu_hi < 1)
    throw std::invalid_argument{"latticelab::kernel_nu_batch: need d >= 2, N >= 2, nu_hi >= 1"};
  std::size_t const count = static_cast<std::size_t>(nu_hi);
  if (x_mag <= 1.0)
    return std::vector<KernelValue>(count);
  double const n = static_cast<double>(N);
  auto panels = static_cast<std::int64_t>(std::ceil(opt.panels_per_phase * kernel_phase({d, N, nu_hi, 0.0, x_mag})));
  panels = std::max<std::int64_t>(panels, 16);
  std::vector<cplx> kron(count), gauss(count), zpow(count);
  for (;;) {
    if (panels > opt.max_panels)
      throw std::runtime_error{"latticelab::kernel_nu_batch: phase exceeds the quadrature budget"};
    std::vector<KernelValue> out(count);
    double const h = 1.5 / static_cast<double>(panels);
    for (std::int64_t p = 0; p < panels; ++p) {
      double const mid = 0.5 + (static_cast<double>(p) + 0.5) * h;
      std::fill(kron.begin(), kron.end(), cplx{});
      std::fill(gauss.begin(), gauss.end(), cplx{});
      double abs_panel = 0.0;
      for (int node = 0; node < 15; ++node) {
        // node 7 is the center; 0..6 left of it, 8..14 mirrored to the right
        int const j = node < 7 ? node : (node == 7 ? 7 : 14 - node);
        double const offset = j == 7 ? 0.0 : (node < 7 ? -1.0 : 1.0) * detail::xgk[j];
        double const t = mid + 0.5 * h * offset;
        double const q = partition_bump(t);
        if (q == 0.0)
          continue;
        double const nt = n * t;
        double w = n * q;
        for (int k = 1; k < d; ++k)
          w *= nt;
        double const amp = w * sphere_ft(d, nt * x_mag);
        double const wk = detail::wgk[j];
        double const wg = j == 7 ? detail::wg[3] : (j % 2 == 1 ? detail::wg[j / 2] : 0.0);
        abs_panel += wk * std::abs(amp);
        double const cycles = nt * nt;
        double const frac = cycles - std::floor(cycles);
        cplx const z{std::cos(2.0 * pi * frac), -std::sin(2.0 * pi * frac)};
        cplx zk = z;
        for (std::size_t k = 0; k < count; ++k) {
          cplx const term = amp * zk;
          kron[k] += wk * term;
          if (wg != 0.0)
            gauss[k] += wg * term;
          zk *= z;
        }
      }
      double const half = 0.5 * h;
      for (std::size_t k = 0; k < count; ++k) {
        out[k].value += half * kron[k];
        out[k].error += half * std::abs(kron[k] - gauss[k]);
        out[k].abs_integral += half * abs_panel;
      }
    }
    bool ok = true;
    for (auto& v : out) {
      v.panels = panels;
      ok = ok && v.error <= opt.rel_tol * std::abs(v.value) + opt.abs_floor * v.abs_integral;
    }
    if (ok)
      return out;
    panels *= 2;
  }
}

/// sum_{nu != 0} |D_{N,nu}(x)|. Terms for -nu are conjugates of those for nu,
/// so the sum is twice the sum over nu >= 1.
struct NuSum {
  double value = 0.0;
  std::int64_t terms = 0;    // nu = 1..terms evaluated
  double last_term = 0.0;    // |D_{N,terms}|, the empirical tail scale
  bool truncated = false;    // nu_max reached before the tail criterion
};

/// Sums nu = 1, 2, ... past the stationary window nu <= |x| / N until a term
/// falls below 1e-10 of the running sum or below its own quadrature
/// resolution, for three consecutive nu.
inline NuSum kernel_nu_sum(int d, std::int64_t N, double x_mag, std::int64_t nu_max, KernelOptions const& opt = {})
{
  NuSum out;
  if (x_mag <= 1.0)
    return out;
  double const stationary_hi = x_mag / static_cast<double>(N);
  std::int64_t nu_hi = std::min<std::int64_t>(nu_max, static_cast<std::int64_t>(std::ceil(stationary_hi)) + 8);
  for (;;) {
    std::vector<KernelValue> const batch = kernel_nu_batch(d, N, x_mag, nu_hi, opt);
    double sum = 0.0;
    int quiet = 0;
    for (std::int64_t nu = 1; nu <= nu_hi; ++nu) {
      KernelValue const& k = batch[nu - 1];
      double const term = std::abs(k.value);
      sum += term;
      out.terms = nu;
      out.last_term = term;
      if (static_cast<double>(nu) > stationary_hi + 1.0) {
        bool const small = term <= 1e-10 * sum || term <= 1e-12 * k.abs_integral;
        quiet = small ? quiet + 1 : 0;
        if (quiet >= 3) {
          out.value = 2.0 * sum;
          return out;
        }
      }
    }
    if (nu_hi >= nu_max) {
      out.truncated = true;
      out.value = 2.0 * sum;
      return out;
    }
    nu_hi = std::min(nu_max, 2 * nu_hi);
  }
}

struct EnvelopeProbe {
  std::int64_t N = 0;
  double x_mag = 0.0;
  bool far = false; // |x| >= N/2
  double measured = 0.0;
  double shape = 0.0; // (N/|x|)^{(d-2)/2} or 1/N
  double ratio = 0.0; // measured / shape
  std::int64_t nu_terms = 0;
  double nu_tail = 0.0;
  bool truncated = false;
};

struct DyadicSumProbe {
  double x_mag = 0.0;
  double sum = 0.0; // sum_j sum_nu |D_{2^j, nu}(x)|
};

struct EnvelopeReport {
  int dimension = 0;
  std::vector<std::int64_t> N_list;
  std::vector<EnvelopeProbe> probes;
  std::vector<double> fitted_C_per_N; // max ratio over all probes at that N
  double fitted_C = 0.0;              // max over N
  double stability = 0.0;             // max / min of fitted_C_per_N
  bool stable = false;
  double near_C = 0.0;                // max over near probes of measured * N
  bool near_within = false;           // near probes below fitted_C_N / N
  SlopeFit far_fit;                   // log measured against log(N/|x|)
  double expected_exponent = 0.0;
  std::vector<DyadicSumProbe> dyadic;
  double dyadic_max = 0.0;
  bool dyadic_bounded = false;
  bool passed = false;
  std::vector<std::string> failures;
};

inline void to_json(nlohmann::json& j, EnvelopeReport const& r)
{
  nlohmann::json probes = nlohmann::json::array();
  for (auto const& p : r.probes)
    probes.push_back({{"N", p.N},
                      {"x", p.x_mag},
                      {"branch", p.far ? "far" : "near"},
                      {"measured", p.measured},
                      {"envelope_shape", p.shape},
                      {"ratio", p.ratio},
                      {"nu_terms", p.nu_terms},
                      {"nu_tail", p.nu_tail},
                      {"truncated", p.truncated}});
  nlohmann::json dyadic = nlohmann::json::array();
  for (auto const& p : r.dyadic)
    dyadic.push_back({{"x", p.x_mag}, {"sum", p.sum}});
  j = {{"d", r.dimension},
       {"N", r.N_list},
       {"probes", probes},
       {"fitted_C_per_N", r.fitted_C_per_N},
       {"fitted_C", r.fitted_C},
       {"stability", r.stability},
       {"stable", r.stable},
       {"near_C", r.near_C},
       {"near_within", r.near_within},
       {"far_exponent", r.far_fit.slope},
       {"far_exponent_half_width", r.far_fit.half_width},
       {"far_r_squared", r.far_fit.r_squared},
       {"far_fit_points", r.far_fit.points},
       {"expected_exponent", r.expected_exponent},
       {"dyadic", dyadic},
       {"dyadic_max", r.dyadic_max},
       {"dyadic_bounded", r.dyadic_bounded},
       {"passed", r.passed},
       {"failures", r.failures}};
}

struct EnvelopeConfig {
  std::vector<std::int64_t> N_list{8, 16, 32};
  std::vector<double> x_over_N{0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0}; // far branch
  // The exponent is fitted where stationary nu lie inside the window
  // [|x|/4N, |x|/N]; below |x| = 2N the envelope is a bound but not attained.
  double fit_min_x_over_N = 2.0;
  std::vector<double> near_x{2.0, 4.0};                          // |x| <= N/2
  std::int64_t dyadic_max_N = 64;
  std::vector<double> dyadic_x{2.0, 8.0, 32.0, 128.0, 512.0};
  std::int64_t nu_max = 4096;
  double exponent_tolerance = 0.2;
  double stability_factor = 2.0;
  KernelOptions kernel;
};

/// Measures sum_{nu != 0} |D_{N,nu}(x)| on the probe grid and compares with
/// C (N/|x|)^{(d-2)/2} for |x| >= N/2 and C/N for 1 < |x| <= N/2. Also checks
/// that sum_j |D_{2^j}(x)| stays bounded over dyadic_x. Failed checks are
/// recorded in the report, not thrown.
inline EnvelopeReport envelope_check(int d, EnvelopeConfig const& cfg = {})
{
  if (d < 3)
    throw std::invalid_argument{"latticelab::envelope_check: dimension must be at least 3"};
  if (cfg.N_list.empty())
    throw std::invalid_argument{"latticelab::envelope_check: empty N list"};
  EnvelopeReport rep;
  rep.dimension = d;
  rep.N_list = cfg.N_list;
  rep.expected_exponent = 0.5 * (d - 2);

  std::vector<EnvelopeProbe> grid;
  for (std::int64_t N : cfg.N_list) {
    for (double x : cfg.near_x)
      if (x > 1.0 && x < 0.5 * static_cast<double>(N))
        grid.push_back({N, x, false});
    for (double r : cfg.x_over_N)
      grid.push_back({N, r * static_cast<double>(N), true});
  }
  rep.probes = parallel_map(grid.size(), [&](std::size_t i) {
    EnvelopeProbe p = grid[i];
    NuSum const s = kernel_nu_sum(d, p.N, p.x_mag, cfg.nu_max, cfg.kernel);
    p.measured = s.value;
    p.nu_terms = s.terms;
    p.nu_tail = s.last_term;
    p.truncated = s.truncated;
    double const n = static_cast<double>(p.N);
    p.shape = p.far ? std::pow(n / p.x_mag, rep.expected_exponent) : 1.0 / n;
    p.ratio = p.measured / p.shape;
    return p;
  });

  rep.near_within = true;
  for (std::int64_t N : cfg.N_list) {
    double c = 0.0;
    for (auto const& p : rep.probes)
      if (p.N == N)
        c = std::max(c, p.ratio);
    rep.fitted_C_per_N.push_back(c);
  }
  auto [lo, hi] = std::minmax_element(rep.fitted_C_per_N.begin(), rep.fitted_C_per_N.end());
  rep.fitted_C = *hi;
  rep.stability = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
  rep.stable = std::isfinite(rep.fitted_C) && rep.stability <= cfg.stability_factor;
  for (std::size_t k = 0; k < cfg.N_list.size(); ++k)
    for (auto const& p : rep.probes)
      if (p.N == cfg.N_list[k] && !p.far) {
        rep.near_C = std::max(rep.near_C, p.ratio);
        if (p.measured > rep.fitted_C_per_N[k] / static_cast<double>(p.N))
          rep.near_within = false;
      }

  std::vector<double> xs, ys;
  for (auto const& p : rep.probes)
    if (p.far && p.measured > 0.0 && p.x_mag >= cfg.fit_min_x_over_N * static_cast<double>(p.N)) {
      xs.push_back(static_cast<double>(p.N) / p.x_mag);
      ys.push_back(p.measured);
    }
  if (xs.size() >= 3)
    rep.far_fit = fit_loglog(xs, ys);

  // sum over dyadic N = 2^j <= dyadic_max_N
  std::vector<std::pair<std::size_t, std::int64_t>> jobs;
  for (std::size_t i = 0; i < cfg.dyadic_x.size(); ++i)
    for (std::int64_t N = 2; N <= cfg.dyadic_max_N; N *= 2)
      jobs.emplace_back(i, N);
  std::vector<double> parts = parallel_map(jobs.size(), [&](std::size_t k) {
    return kernel_nu_sum(d, jobs[k].second, cfg.dyadic_x[jobs[k].first], cfg.nu_max, cfg.kernel).value;
  });
  rep.dyadic.resize(cfg.dyadic_x.size());
  for (std::size_t i = 0; i < cfg.dyadic_x.size(); ++i)
    rep.dyadic[i].x_mag = cfg.dyadic_x[i];
  for (std::size_t k = 0; k < jobs.size(); ++k)
    rep.dyadic[jobs[k].first].sum += parts[k];
  // Bounded: finite everywhere, and the outer half of the grid does not
  // exceed twice the maximum over the inner half.
  double inner = 0.0, outer = 0.0;
  bool finite = true;
  std::size_t const half = rep.dyadic.size() / 2;
  for (std::size_t i = 0; i < rep.dyadic.size(); ++i) {
    finite = finite && std::isfinite(rep.dyadic[i].sum);
    (i < half ? inner : outer) = std::max(i < half ? inner : outer, rep.dyadic[i].sum);
    rep.dyadic_max = std::max(rep.dyadic_max, rep.dyadic[i].sum);
  }
  rep.dyadic_bounded = finite && (half == 0 || outer <= 2.0 * inner);

  bool truncated = false;
  for (auto const& p : rep.probes)
    truncated = truncated || p.truncated;
  if (!rep.stable)
    rep.failures.push_back("fitted_C varies by more than a factor " + std::to_string(cfg.stability_factor) +
                           " across N");
  if (!rep.near_within)
    rep.failures.push_back("near-branch probe exceeds fitted_C / N");
  if (std::abs(rep.far_fit.slope - rep.expected_exponent) > cfg.exponent_tolerance)
    rep.failures.push_back("far-branch exponent outside tolerance");
  if (!rep.dyadic_bounded)
    rep.failures.push_back("dyadic sum grows over the probe grid");
  if (truncated)
    rep.failures.push_back("nu sum truncated at nu_max");
  rep.passed = rep.failures.empty();
  return rep;
}

} // namespace latticelab

#endif
