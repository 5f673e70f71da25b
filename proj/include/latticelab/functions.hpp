#ifndef LATTICELAB_FUNCTIONS_HPP
#define LATTICELAB_FUNCTIONS_HPP

// Catalog of test functions with known Fourier transforms.
//
// Fourier convention throughout: fhat(xi) = int f(x) exp(-2 pi i x.xi) dx.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <json.hpp>

#include "numerics.hpp"

namespace latticelab {

// ---------------------------------------------------------------------------
// Smooth profiles
// ---------------------------------------------------------------------------

/// C-infinity step: 0 for s <= 0, 1 for s >= 1, built from exp(-1/s).
inline double smooth_step(double s)
{
  if (s <= 0.0)
    return 0.0;
  if (s >= 1.0)
    return 1.0;
  double const a = std::exp(-1.0 / s);
  double const b = std::exp(-1.0 / (1.0 - s));
  return a / (a + b);
}

/// exp(1 - 1/(1 - r^2)) on r < 1: equals 1 at the origin, supported in the unit ball.
inline double compact_bump(double r)
{
  if (r >= 1.0)
    return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

/// Equals 1 on r <= 1 and 0 on r >= 2, smooth in between.
inline double plateau_bump(double r)
{
  return 1.0 - smooth_step(r - 1.0);
}

struct RadialProfile {
  std::string name;
  double (*value)(double);
  double support; // value(r) = 0 for r >= support
  double transition_start; // value is smooth-but-varying only on [transition_start, support]
};

inline RadialProfile const& compact_bump_profile()
{
  static RadialProfile const p{"compact_bump", &compact_bump, 1.0, 0.0};
  return p;
}

inline RadialProfile const& plateau_profile()
{
  static RadialProfile const p{"plateau", &plateau_bump, 2.0, 1.0};
  return p;
}

// ---------------------------------------------------------------------------
// Radial Fourier transform of a compactly supported radial profile
// ---------------------------------------------------------------------------

/// Fourier transform of x -> profile(|x|) on R^d, evaluated by 1-d quadrature
///
///   F(rho) = omega_{d-1} int_0^R profile(s) s^{d-1} sphere_ft(d, rho s) ds.
///
/// A table of |F| on a radial Gauss grid is built on first use and backs the
/// L^p norms, tail integrals and majorants.
class RadialTransform {
public:
  RadialTransform(RadialProfile profile, int d)
    : profile_{std::move(profile)}, d_{d}
  {}

  int dimension() const { return d_; }
  RadialProfile const& profile() const { return profile_; }

  /// Transform at radius rho (real because the profile is real and radial).
  double operator()(double rho) const
  {
    rho = std::abs(rho);
    double const R = profile_.support;
    // About one 16-point panel per oscillation of the Bessel factor.
    int const panels = 16 + static_cast<int>(std::ceil(rho * R));
    int const d = d_;
    auto const& prof = profile_;
    auto integrand = [&](double s) {
      return prof.value(s) * std::pow(s, d - 1) * sphere_ft(d, rho * s);
    };
    double const a = profile_.transition_start;
    double core = 0.0;
    if (a > 0.0) {
      int const pa = std::max(8, static_cast<int>(std::ceil(panels * a / R)));
      core = integrate_panels(integrand, 0.0, a, pa, 16);
    }
    int const pb = std::max(16, static_cast<int>(std::ceil(panels * (R - a) / R)) * 2);
    double const edge = integrate_panels(integrand, a, R, pb, 16);
    return sphere_area(d) * (core + edge);
  }

  /// ||F||_p over R^d, p in [1, inf]. The profile is nonnegative, so the
  /// sup norm is F(0).
  double lp_norm(double p) const
  {
    if (std::isinf(p))
      return (*this)(0.0);
    std::lock_guard lock{norm_mutex_};
    auto it = norms_.find(p);
    if (it != norms_.end())
      return it->second;
    Table const& t = table();
    double sum = 0.0;
    for (std::size_t i = 0; i < t.radius.size(); ++i)
      sum += t.weight[i] * std::pow(t.abs_value[i], p);
    double const norm = std::pow(sum, 1.0 / p);
    norms_.emplace(p, norm);
    return norm;
  }

  /// Upper bound for int_{|y| > r} |F(y)| dy.
  double tail_l1(double r) const
  {
    Table const& t = table();
    auto it = std::lower_bound(t.panel_hi.begin(), t.panel_hi.end(), r);
    std::size_t const first = static_cast<std::size_t>(it - t.panel_hi.begin());
    if (first >= t.panel_hi.size())
      return t.beyond;
    return t.panel_tail[first] + t.beyond;
  }

  /// Smallest tabulated radius R with tail_l1(R) < delta.
  double decay_radius(double delta) const
  {
    Table const& t = table();
    for (std::size_t i = 0; i < t.panel_hi.size(); ++i) {
      double const lo = i == 0 ? 0.0 : t.panel_hi[i - 1];
      if (t.panel_tail[i] + t.beyond < delta)
        return lo;
    }
    if (t.beyond < delta)
      return t.panel_hi.back();
    return std::numeric_limits<double>::infinity();
  }

  /// sup_{|y| >= r} |F(y)|, read off the table with a 10% margin for
  /// inter-node variation.
  double majorant(double r) const
  {
    Table const& t = table();
    auto it = std::lower_bound(t.radius.begin(), t.radius.end(), r);
    std::size_t i = static_cast<std::size_t>(it - t.radius.begin());
    if (i > 0)
      --i;
    if (i >= t.suffix_max.size())
      return t.beyond_max;
    return 1.1 * t.suffix_max[i] + t.beyond_max;
  }

  /// Radius beyond which the table stopped; F is negligible there.
  double table_radius() const { return table().panel_hi.back(); }

private:
  struct Table {
    std::vector<double> radius, weight, abs_value;
    std::vector<double> panel_hi, panel_tail;
    std::vector<double> suffix_max;
    double beyond = 0.0;
    double beyond_max = 0.0;
  };

  Table const& table() const
  {
    std::call_once(table_once_, [this] { build_table(); });
    return table_;
  }

  void build_table() const
  {
    // Panels of width 1/(2R) resolve the oscillation period 1/R of F.
    double const width = 0.5 / profile_.support;
    int const order = 12;
    GaussRule const& rule = gauss_legendre(order);
    double const omega = sphere_area(d_);
    double const peak = (*this)(0.0);
    std::vector<double> panel_l1;
    int quiet_blocks = 0;
    double const max_radius = 200.0;
    int const panels_per_block = static_cast<int>(std::ceil(2.0 / width));
    for (int block = 0;; ++block) {
      double block_l1 = 0.0;
      double block_max = 0.0;
      for (int q = 0; q < panels_per_block; ++q) {
        double const lo = (block * panels_per_block + q) * width;
        double const mid = lo + 0.5 * width;
        double l1 = 0.0;
        for (int i = 0; i < order; ++i) {
          double const r = mid + 0.5 * width * rule.nodes[i];
          double const v = std::abs((*this)(r));
          double const w = 0.5 * width * rule.weights[i] * omega * std::pow(r, d_ - 1);
          table_.radius.push_back(r);
          table_.weight.push_back(w);
          table_.abs_value.push_back(v);
          l1 += w * v;
          block_max = std::max(block_max, v);
        }
        table_.panel_hi.push_back(lo + width);
        panel_l1.push_back(l1);
        block_l1 += l1;
      }
      // Past 1e-14 of the peak the values are quadrature roundoff, which the
      // r^{d-1} weight would otherwise amplify; the remainder is bounded by a
      // multiple of the last block.
      quiet_blocks = block_max < 1e-14 * peak ? quiet_blocks + 1 : 0;
      if (quiet_blocks >= 2 || table_.panel_hi.back() >= max_radius) {
        table_.beyond = 10.0 * block_l1;
        table_.beyond_max = block_max;
        break;
      }
    }
    table_.panel_tail.assign(panel_l1.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = panel_l1.size(); i-- > 0;) {
      acc += panel_l1[i];
      table_.panel_tail[i] = acc;
    }
    table_.suffix_max.assign(table_.abs_value.size(), 0.0);
    double m = 0.0;
    for (std::size_t i = table_.abs_value.size(); i-- > 0;) {
      m = std::max(m, table_.abs_value[i]);
      table_.suffix_max[i] = m;
    }
  }

  RadialProfile profile_;
  int d_;
  mutable std::once_flag table_once_;
  mutable Table table_;
  mutable std::mutex norm_mutex_;
  mutable std::map<double, double> norms_;
};

/// Shared transform per (profile, dimension); the tables are expensive.
inline std::shared_ptr<RadialTransform const> radial_transform(RadialProfile const& profile, int d)
{
  static std::mutex mutex;
  static std::map<std::pair<std::string, int>, std::shared_ptr<RadialTransform const>> cache;
  std::lock_guard lock{mutex};
  auto key = std::make_pair(profile.name, d);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::make_shared<RadialTransform const>(profile, d)).first;
  return it->second;
}

// ---------------------------------------------------------------------------
// TestFunction
// ---------------------------------------------------------------------------

/// Symmetry of |fhat| used by the spherical averages: `radial` means |fhat|
/// depends on |xi| only, `axial` that it is invariant under rotations fixing e1.
enum class Symmetry { none, radial, axial };

inline char const* to_string(Symmetry s)
{
  switch (s) {
  case Symmetry::radial:
    return "radial";
  case Symmetry::axial:
    return "axial";
  default:
    return "none";
  }
}

using PointFn = std::function<cplx(std::span<double const>)>;
using RadialFn = std::function<double(double)>;

/// A function / Fourier-transform pair with decay metadata. Immutable and
/// cheap to copy; safe to evaluate from several threads.
class TestFunction {
public:
  struct Parts {
    std::string id;
    int dimension = 0;
    Symmetry symmetry = Symmetry::none;
    PointFn space;
    PointFn freq;
    RadialFn space_decay;    // R(delta): int_{|x|>R} |f| < delta
    RadialFn space_majorant; // sup_{|x| >= r} |f(x)|
    RadialFn freq_majorant;  // sup_{|xi| >= t} |fhat(xi)|, nonincreasing
    std::optional<double> freq_support_radius;
    RadialFn lp_norm;
    nlohmann::json parameters;
  };

  explicit TestFunction(Parts parts)
    : parts_{std::make_shared<Parts const>(std::move(parts))}
  {
    if (parts_->dimension < 1)
      throw std::invalid_argument{"latticelab::TestFunction: dimension must be positive"};
    if (!parts_->space || !parts_->freq || !parts_->lp_norm || !parts_->freq_majorant)
      throw std::invalid_argument{"latticelab::TestFunction: missing evaluator for " + parts_->id};
  }

  std::string const& id() const { return parts_->id; }
  int dimension() const { return parts_->dimension; }
  Symmetry symmetry() const { return parts_->symmetry; }
  nlohmann::json const& parameters() const { return parts_->parameters; }
  std::optional<double> freq_support_radius() const { return parts_->freq_support_radius; }

  cplx eval_space(std::span<double const> x) const
  {
    check_dim(x.size());
    return parts_->space(x);
  }

  cplx eval_freq(std::span<double const> xi) const
  {
    check_dim(xi.size());
    return parts_->freq(xi);
  }

  double freq_abs_sq(std::span<double const> xi) const { return std::norm(eval_freq(xi)); }

  bool has_space_decay() const { return static_cast<bool>(parts_->space_decay); }
  double space_decay(double delta) const
  {
    if (!parts_->space_decay)
      throw std::logic_error{"latticelab::TestFunction: no spatial decay data for " + id()};
    return parts_->space_decay(delta);
  }

  bool has_space_majorant() const { return static_cast<bool>(parts_->space_majorant); }
  double space_majorant(double r) const
  {
    if (!parts_->space_majorant)
      throw std::logic_error{"latticelab::TestFunction: no spatial majorant for " + id()};
    return parts_->space_majorant(r);
  }

  double freq_majorant(double t) const { return parts_->freq_majorant(t); }

  double lp_norm(double p) const
  {
    if (!(p >= 1.0))
      throw std::domain_error{"latticelab::TestFunction::lp_norm: p must lie in [1, inf]"};
    return parts_->lp_norm(p);
  }

private:
  void check_dim(std::size_t n) const
  {
    if (static_cast<int>(n) != parts_->dimension)
      throw std::invalid_argument{"latticelab::TestFunction: point dimension mismatch for " + id()};
  }

  std::shared_ptr<Parts const> parts_;
};

/// Hoelder conjugate p/(p-1); infinity for p = 1.
inline double conjugate_exponent(double p)
{
  if (p == 1.0)
    return std::numeric_limits<double>::infinity();
  if (std::isinf(p))
    return 1.0;
  return p / (p - 1.0);
}

namespace detail {

  inline std::string format_number(double v)
  {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
  }

  inline double norm_sq(std::span<double const> x)
  {
    double s = 0.0;
    for (double v : x)
      s += v * v;
    return s;
  }

} // namespace detail

// ---------------------------------------------------------------------------
// Catalog members
// ---------------------------------------------------------------------------

/// f(x) = amplitude * exp(-pi sum a_i x_i^2).
inline TestFunction make_gaussian(int d, std::vector<double> anisotropy, double amplitude = 1.0)
{
  if (d < 2)
    throw std::invalid_argument{"latticelab::make_gaussian: dimension must be at least 2"};
  if (static_cast<int>(anisotropy.size()) != d)
    throw std::invalid_argument{"latticelab::make_gaussian: need one anisotropy entry per axis"};
  for (double a : anisotropy)
    if (!(a > 0.0) || !std::isfinite(a))
      throw std::invalid_argument{"latticelab::make_gaussian: anisotropy entries must be positive"};
  if (!(amplitude > 0.0))
    throw std::invalid_argument{"latticelab::make_gaussian: amplitude must be positive"};

  double const prod = std::accumulate(anisotropy.begin(), anisotropy.end(), 1.0, std::multiplies<>{});
  double const a_min = *std::min_element(anisotropy.begin(), anisotropy.end());
  double const a_max = *std::max_element(anisotropy.begin(), anisotropy.end());
  double const fhat0 = amplitude / std::sqrt(prod);

  Symmetry sym = Symmetry::none;
  if (a_min == a_max)
    sym = Symmetry::radial;
  else if (std::all_of(anisotropy.begin() + 1, anisotropy.end(), [&](double a) { return a == anisotropy[1]; }))
    sym = Symmetry::axial;

  TestFunction::Parts parts;
  std::string id = "gaussian:d=" + std::to_string(d) + ":a=";
  for (int i = 0; i < d; ++i)
    id += (i ? "," : "") + detail::format_number(anisotropy[i]);
  if (amplitude != 1.0)
    id += ":amp=" + detail::format_number(amplitude);
  parts.id = id;
  parts.dimension = d;
  parts.symmetry = sym;
  parts.space = [a = anisotropy, amplitude](std::span<double const> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      s += a[i] * x[i] * x[i];
    return cplx{amplitude * std::exp(-pi * s), 0.0};
  };
  parts.freq = [a = anisotropy, fhat0](std::span<double const> xi) {
    double s = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i)
      s += xi[i] * xi[i] / a[i];
    return cplx{fhat0 * std::exp(-pi * s), 0.0};
  };
  // int_{|x|>R} exp(-pi a |x|^2) dx = a^{-d/2} Q(d/2, pi a R^2)
  parts.space_decay = [d, a_min, amplitude](double delta) {
    double const target = delta * std::pow(a_min, 0.5 * d) / amplitude;
    if (target >= 1.0)
      return 0.0;
    double const x = boost::math::gamma_q_inv(0.5 * d, target);
    return std::sqrt(x / (pi * a_min));
  };
  parts.space_majorant = [a_min, amplitude](double r) { return amplitude * std::exp(-pi * a_min * r * r); };
  parts.freq_majorant = [a_max, fhat0](double t) { return fhat0 * std::exp(-pi * t * t / a_max); };
  // ||f||_p^p = amplitude^p prod_i (p a_i)^{-1/2}
  parts.lp_norm = [d, prod, amplitude](double p) {
    if (std::isinf(p))
      return amplitude;
    return amplitude * std::pow(prod, -0.5 / p) * std::pow(p, -0.5 * d / p);
  };
  parts.parameters = {{"family", "gaussian"}, {"d", d}, {"anisotropy", anisotropy}, {"amplitude", amplitude}};
  return TestFunction{std::move(parts)};
}

/// fhat(xi) = compact_bump(|xi| / eps): band limited to the ball of radius eps,
/// fhat(0) = 1, and f(x) = eps^d check_phi(eps x).
inline TestFunction make_band_limited(int d, double eps)
{
  if (d < 2)
    throw std::invalid_argument{"latticelab::make_band_limited: dimension must be at least 2"};
  if (!(eps > 0.0 && eps <= 1.0))
    throw std::invalid_argument{"latticelab::make_band_limited: eps must lie in (0, 1]"};
  auto transform = radial_transform(compact_bump_profile(), d);
  double const scale = std::pow(eps, d);

  TestFunction::Parts parts;
  parts.id = "band_limited:d=" + std::to_string(d) + ":eps=" + detail::format_number(eps);
  parts.dimension = d;
  parts.symmetry = Symmetry::radial;
  parts.space = [transform, eps, scale](std::span<double const> x) {
    return cplx{scale * (*transform)(eps * std::sqrt(detail::norm_sq(x))), 0.0};
  };
  parts.freq = [eps](std::span<double const> xi) {
    return cplx{compact_bump(std::sqrt(detail::norm_sq(xi)) / eps), 0.0};
  };
  parts.space_decay = [transform, eps](double delta) { return transform->decay_radius(delta) / eps; };
  parts.space_majorant = [transform, eps, scale](double r) { return scale * transform->majorant(eps * r); };
  parts.freq_majorant = [eps](double t) { return compact_bump(t / eps); };
  parts.freq_support_radius = eps;
  // ||f_eps||_p = eps^{d/p'} ||check_phi||_p
  parts.lp_norm = [transform, eps, d](double p) {
    return std::pow(eps, d / conjugate_exponent(p)) * transform->lp_norm(p);
  };
  parts.parameters = {{"family", "band_limited"}, {"d", d}, {"eps", eps}, {"profile", "compact_bump"}};
  return TestFunction{std::move(parts)};
}

/// fhat(x) = plateau((x_1 - 1)/eps^2, x_2/eps, ..., x_d/eps): a plate of
/// thickness eps^2 normal to the unit sphere and width eps along it, centered at e1.
inline TestFunction make_plate(int d, double eps)
{
  if (d < 2)
    throw std::invalid_argument{"latticelab::make_plate: dimension must be at least 2"};
  if (!(eps > 0.0 && eps <= 0.25))
    throw std::invalid_argument{"latticelab::make_plate: eps must lie in (0, 1/4] to isolate the unit shell"};
  auto transform = radial_transform(plateau_profile(), d);
  double const e2 = eps * eps;
  double const amp = std::pow(eps, d + 1);

  TestFunction::Parts parts;
  parts.id = "plate:d=" + std::to_string(d) + ":eps=" + detail::format_number(eps);
  parts.dimension = d;
  parts.symmetry = Symmetry::axial;
  // f(x) = eps^{d+1} e^{2 pi i x_1} check_phi(eps^2 x_1, eps x_2, ..., eps x_d)
  parts.space = [transform, eps, e2, amp](std::span<double const> x) {
    double s = (e2 * x[0]) * (e2 * x[0]);
    for (std::size_t i = 1; i < x.size(); ++i)
      s += (eps * x[i]) * (eps * x[i]);
    double const phase = 2.0 * pi * x[0];
    return amp * (*transform)(std::sqrt(s)) * cplx{std::cos(phase), std::sin(phase)};
  };
  parts.freq = [eps, e2](std::span<double const> xi) {
    double const u = (xi[0] - 1.0) / e2;
    double s = u * u;
    for (std::size_t i = 1; i < xi.size(); ++i)
      s += (xi[i] / eps) * (xi[i] / eps);
    return cplx{plateau_bump(std::sqrt(s)), 0.0};
  };
  // |x| > R forces the scaled argument beyond eps^2 R; the Jacobian cancels amp.
  parts.space_decay = [transform, e2](double delta) { return transform->decay_radius(delta) / e2; };
  parts.space_majorant = [transform, e2, amp](double r) { return amp * transform->majorant(e2 * r); };
  double const support = std::hypot(1.0 + 2.0 * e2, 2.0 * eps);
  parts.freq_majorant = [support](double t) { return t < support ? 1.0 : 0.0; };
  parts.freq_support_radius = support;
  // ||f||_p = eps^{(d+1)/p'} ||check_phi||_p
  parts.lp_norm = [transform, eps, d](double p) {
    return std::pow(eps, (d + 1) / conjugate_exponent(p)) * transform->lp_norm(p);
  };
  parts.parameters = {{"family", "plate"}, {"d", d}, {"eps", eps}, {"profile", "plateau"}};
  return TestFunction{std::move(parts)};
}

/// Builds a catalog member from its string id, e.g. "gaussian:d=4:a=4,1,1,1",
/// "band_limited:d=4:eps=0.5" or "plate:d=4:eps=0.1". Gaussians default to
/// the isotropic a = 1.
inline TestFunction make_from_id(std::string const& id)
{
  std::vector<std::string> fields;
  {
    std::stringstream ss{id};
    std::string item;
    while (std::getline(ss, item, ':'))
      fields.push_back(item);
  }
  if (fields.empty())
    throw std::invalid_argument{"latticelab::make_from_id: empty id"};
  std::map<std::string, std::string> kv;
  for (std::size_t i = 1; i < fields.size(); ++i) {
    auto const eq = fields[i].find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument{"latticelab::make_from_id: malformed field '" + fields[i] + "' in " + id};
    kv[fields[i].substr(0, eq)] = fields[i].substr(eq + 1);
  }
  auto number = [&](std::string const& key) -> double {
    auto it = kv.find(key);
    if (it == kv.end())
      throw std::invalid_argument{"latticelab::make_from_id: missing '" + key + "' in " + id};
    std::size_t pos = 0;
    double const v = std::stod(it->second, &pos);
    if (pos != it->second.size())
      throw std::invalid_argument{"latticelab::make_from_id: bad number for '" + key + "' in " + id};
    return v;
  };
  int const d = static_cast<int>(number("d"));
  std::string const& family = fields[0];
  if (family == "gaussian") {
    std::vector<double> a(d, 1.0);
    if (auto it = kv.find("a"); it != kv.end()) {
      a.clear();
      std::stringstream ss{it->second};
      std::string item;
      while (std::getline(ss, item, ','))
        a.push_back(std::stod(item));
    }
    double const amp = kv.count("amp") ? number("amp") : 1.0;
    return make_gaussian(d, std::move(a), amp);
  }
  if (family == "band_limited" || family == "band")
    return make_band_limited(d, number("eps"));
  if (family == "plate")
    return make_plate(d, number("eps"));
  throw std::invalid_argument{"latticelab::make_from_id: unknown family '" + family + "'"};
}

} // namespace latticelab

#endif
