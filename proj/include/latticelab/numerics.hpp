#ifndef LATTICELAB_NUMERICS_HPP
#define LATTICELAB_NUMERICS_HPP

// Shared numerical kernels: sphere constants, the normalized Bessel function,
// Gauss-Legendre / Gauss-Kronrod rules and a log-log slope fit.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace latticelab {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

/// Surface area of the unit sphere S^{d-1} in R^d, 2 pi^{d/2} / Gamma(d/2).
inline double sphere_area(int d)
{
  return 2.0 * std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d);
}

/// Volume of the unit ball in R^d.
inline double ball_volume(int d)
{
  return std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

namespace detail {

  // Spherical Bessel j_n(z) by upward recurrence; stable for z > n.
  inline double spherical_bessel_upward(int n, double z)
  {
    double const s = std::sin(z);
    double const c = std::cos(z);
    double j0 = s / z;
    if (n == 0)
      return j0;
    double j1 = s / (z * z) - c / z;
    for (int k = 1; k < n; ++k) {
      double const j2 = (2.0 * k + 1.0) / z * j1 - j0;
      j0 = j1;
      j1 = j2;
    }
    return j1;
  }

} // namespace detail

/// Normalized Bessel function Gamma(nu+1) (z/2)^{-nu} J_nu(z); equals 1 at z = 0.
///
/// Integer orders go through glibc's jn, half-integer orders through the
/// elementary spherical Bessel functions, small arguments through the power
/// series. std::cyl_bessel_j is the fallback for any other order.
inline double normalized_bessel(double nu, double z)
{
  z = std::abs(z);
  if (z == 0.0)
    return 1.0;
  if (z <= 4.0 + nu) {
    double const q = -0.25 * z * z;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
      term *= q / (k * (nu + k));
      sum += term;
      if (std::abs(term) < 1e-17 * std::abs(sum))
        break;
    }
    return sum;
  }
  double const prefactor = std::tgamma(nu + 1.0) * std::pow(2.0 / z, nu);
  double const twice = 2.0 * nu;
  if (nu == 0.0)
    return ::j0(z);
  if (nu == 1.0)
    return prefactor * ::j1(z);
  if (nu == std::floor(nu))
    return prefactor * ::jn(static_cast<int>(nu), z);
  if (twice == std::floor(twice) && nu > 0.0) {
    int const n = static_cast<int>(nu - 0.5);
    return prefactor * std::sqrt(2.0 * z / pi) * detail::spherical_bessel_upward(n, z);
  }
  return prefactor * std::cyl_bessel_j(nu, z);
}

/// Fourier transform of the normalized surface measure on S^{d-1}, at radius r.
inline double sphere_ft(int d, double r)
{
  double const z = 2.0 * pi * std::abs(r);
  // closed forms away from the origin, where the power series takes over
  if (z > 6.0) {
    switch (d) {
    case 3:
      return std::sin(z) / z;
    case 4:
      return 2.0 * ::j1(z) / z;
    case 5:
      return 3.0 * (std::sin(z) - z * std::cos(z)) / (z * z * z);
    default:
      break;
    }
  }
  return normalized_bessel(0.5 * d - 1.0, z);
}

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule make_gauss_legendre(int n)
{
  if (n < 1)
    throw std::invalid_argument{"latticelab::make_gauss_legendre: need n >= 1"};
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        double const p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double const dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    double const w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = 2.0;
  }
  return rule;
}

/// Cached Gauss-Legendre rule; thread safe.
inline GaussRule const& gauss_legendre(int n)
{
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock{mutex};
  auto it = cache.find(n);
  if (it == cache.end())
    it = cache.emplace(n, make_gauss_legendre(n)).first;
  return it->second;
}

/// Composite Gauss-Legendre quadrature of f over [a, b] with equal panels.
template <typename F>
auto integrate_panels(F&& f, double a, double b, int panels, int order = 12)
{
  GaussRule const& rule = gauss_legendre(order);
  using R = decltype(f(a));
  R total{};
  double const h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    double const lo = a + p * h;
    double const mid = lo + 0.5 * h;
    R panel{};
    for (int i = 0; i < order; ++i)
      panel += rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]);
    total += 0.5 * h * panel;
  }
  return total;
}

/// 7-point Gauss / 15-point Kronrod pair (QUADPACK qk15 constants).
struct KronrodPanel {
  cplx kronrod;
  cplx gauss;
  double abs_integral;
};

namespace detail {
  inline constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  inline constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  inline constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
} // namespace detail

template <typename F>
KronrodPanel kronrod15(F&& f, double a, double b)
{
  double const half = 0.5 * (b - a);
  double const mid = 0.5 * (a + b);
  cplx const fc = f(mid);
  cplx resk = fc * detail::wgk[7];
  cplx resg = fc * detail::wg[3];
  double resabs = std::abs(fc) * detail::wgk[7];
  for (int j = 0; j < 7; ++j) {
    double const dx = half * detail::xgk[j];
    cplx const f1 = f(mid - dx);
    cplx const f2 = f(mid + dx);
    resk += detail::wgk[j] * (f1 + f2);
    resabs += detail::wgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1)
      resg += detail::wg[j / 2] * (f1 + f2);
  }
  return {resk * half, resg * half, resabs * std::abs(half)};
}

struct QuadratureResult {
  cplx value;
  double error;
  double abs_integral;
  int panels;
};

/// Fixed-panel Gauss-Kronrod sum; error is the summed |K15 - G7| per panel.
template <typename F>
QuadratureResult kronrod_panels(F&& f, double a, double b, int panels)
{
  QuadratureResult out{cplx{}, 0.0, 0.0, panels};
  double const h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    KronrodPanel const k = kronrod15(f, a + p * h, a + (p + 1) * h);
    out.value += k.kronrod;
    out.error += std::abs(k.kronrod - k.gauss);
    out.abs_integral += k.abs_integral;
  }
  return out;
}

/// Globally adaptive Gauss-Kronrod integration of a real integrand.
///
/// The interval is first cut into `initial_panels` pieces so that narrowly
/// supported integrands are not missed; panels whose error estimate exceeds
/// their share of the tolerance are bisected.
template <typename F>
double adaptive_integrate(F&& f, double a, double b, double abs_tol, int initial_panels = 64,
                          int max_depth = 40)
{
  auto real_f = [&](double x) { return cplx{f(x), 0.0}; };
  struct Segment {
    double lo, hi;
    int depth;
    double parent_err;
  };
  std::vector<Segment> stack;
  double const h = (b - a) / initial_panels;
  for (int p = initial_panels - 1; p >= 0; --p)
    stack.push_back({a + p * h, a + (p + 1) * h, 0, 0.0});
  double total = 0.0;
  double const width = b - a;
  while (!stack.empty()) {
    Segment const s = stack.back();
    stack.pop_back();
    KronrodPanel const k = kronrod15(real_f, s.lo, s.hi);
    double const err = std::abs(k.kronrod.real() - k.gauss.real());
    // a panel whose share of abs_tol is below its own roundoff cannot improve by bisection
    double const allowed = std::max(abs_tol * (s.hi - s.lo) / width, 50.0 * std::numeric_limits<double>::epsilon() * k.abs_integral);
    // for a resolved smooth integrand halving cuts the estimate by orders of
    // magnitude; an estimate that merely halves is integrand noise
    bool const stalled = s.depth >= 3 && err > 0.25 * s.parent_err;
    if (err <= allowed || stalled || s.depth >= max_depth) {
      total += k.kronrod.real();
    } else {
      double const m = 0.5 * (s.lo + s.hi);
      stack.push_back({m, s.hi, s.depth + 1, err});
      stack.push_back({s.lo, m, s.depth + 1, err});
    }
  }
  return total;
}

/// Least-squares line through (log x, log y).
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double half_width = 0.0; // 95% confidence half-width of the slope
  std::size_t points = 0;
};

inline SlopeFit fit_loglog(std::span<double const> x, std::span<double const> y)
{
  if (x.size() != y.size() || x.size() < 3)
    throw std::invalid_argument{"latticelab::fit_loglog: need at least three (x, y) pairs"};
  std::size_t const n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw std::domain_error{"latticelab::fit_loglog: nonpositive value in log-log fit"};
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  SlopeFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double const r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    sse += r * r;
  }
  // A constant response is fitted exactly by a flat line.
  fit.r_squared = syy <= 1e-24 * std::max(1.0, my * my) ? 1.0 : 1.0 - sse / syy;
  boost::math::students_t dist(static_cast<double>(n - 2));
  double const t = boost::math::quantile(boost::math::complement(dist, 0.025));
  fit.half_width = t * std::sqrt(sse / (n - 2) / sxx);
  return fit;
}

} // namespace latticelab

#endif
