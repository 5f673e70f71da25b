#ifndef LATTICELAB_LATTICE_PERIODIZATION_HPP
#define LATTICELAB_LATTICE_PERIODIZATION_HPP

// Periodizations g_rho(x) = sum_{nu in Z^d} f(rho(x - nu)) over rotated integer
// lattices, their Fourier coefficients ghat_rho(m) = fhat(rho m), and the
// lattice Parseval identity ||g_rho||_2^2 = sum_m |fhat(rho m)|^2.

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fft.hpp"
#include "functions.hpp"
#include "parallel.hpp"
#include "rotation.hpp"
#include "sums_of_squares.hpp"

namespace latticelab {

/// Integer lattice vector (the nu and m of the periodization sums).
struct LatticePoint {
  std::vector<int> coords;

  std::int64_t norm_sq() const
  {
    std::int64_t s = 0;
    for (int c : coords)
      s += static_cast<std::int64_t>(c) * c;
    return s;
  }

  std::vector<double> as_double() const { return {coords.begin(), coords.end()}; }
};

/// All m in Z^d with |m|^2 <= n_cut, flat storage, sorted by |m|^2.
class LatticeBall {
public:
  LatticeBall(int d, std::int64_t n_cut) : d_{d}, n_cut_{n_cut}
  {
    if (d < 1 || n_cut < 0)
      throw std::invalid_argument{"latticelab::LatticeBall: bad dimension or radius"};
    int const r = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n_cut))));
    std::vector<int> cur(d, -r);
    std::vector<std::pair<std::int64_t, std::size_t>> order;
    std::vector<int> flat;
    // odometer over the cube [-r, r]^d with pruning on the partial norm
    std::vector<std::int64_t> partial(d + 1, 0);
    std::function<void(int)> rec = [&](int axis) {
      if (axis == d) {
        order.emplace_back(partial[d], flat.size() / d);
        flat.insert(flat.end(), cur.begin(), cur.end());
        return;
      }
      for (int c = -r; c <= r; ++c) {
        std::int64_t const s = partial[axis] + static_cast<std::int64_t>(c) * c;
        if (s > n_cut)
          continue;
        cur[axis] = c;
        partial[axis + 1] = s;
        rec(axis + 1);
      }
    };
    rec(0);
    std::stable_sort(order.begin(), order.end(), [](auto const& a, auto const& b) { return a.first < b.first; });
    coords_.reserve(flat.size());
    norms_.reserve(order.size());
    for (auto const& [n, idx] : order) {
      norms_.push_back(n);
      coords_.insert(coords_.end(), flat.begin() + idx * d, flat.begin() + (idx + 1) * d);
    }
  }

  int dimension() const { return d_; }
  std::int64_t n_cut() const { return n_cut_; }
  std::size_t size() const { return norms_.size(); }
  std::span<int const> point(std::size_t i) const { return {coords_.data() + i * d_, static_cast<std::size_t>(d_)}; }
  std::int64_t norm_sq(std::size_t i) const { return norms_[i]; }

private:
  int d_;
  std::int64_t n_cut_;
  std::vector<int> coords_;
  std::vector<std::int64_t> norms_;
};

inline std::shared_ptr<LatticeBall const> lattice_ball(int d, std::int64_t n_cut)
{
  static std::mutex mutex;
  static std::map<std::pair<int, std::int64_t>, std::shared_ptr<LatticeBall const>> cache;
  std::lock_guard lock{mutex};
  auto key = std::make_pair(d, n_cut);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::make_shared<LatticeBall const>(d, n_cut)).first;
  return it->second;
}

// ---------------------------------------------------------------------------
// Certified tails
// ---------------------------------------------------------------------------

/// Bound on a sum over lattice shells beyond a cutoff.
struct ShellCutoff {
  std::int64_t n_cut = 0; // keep shells |m|^2 <= n_cut
  double tail = 0.0;      // >= sum over |m|^2 > n_cut of weight(|m|)
};

/// Smallest n_cut with sum_{|m|^2 > n_cut} weight(|m|) <= tol.
///
/// `weight` must be nonnegative and nonincreasing in the radius. Shell counts
/// are exact up to the cached r_d table and bounded by the enclosing cube
/// (2 floor(sqrt n) + 1)^d beyond it. Summation stops once the weight vanishes
/// or the bounded terms fall below 1e-30 of the running total.
inline ShellCutoff choose_shell_cutoff(int d, std::function<double(double)> const& weight, double tol,
                                       std::int64_t n_limit = 2'000'000)
{
  std::int64_t const exact_upto = 4096;
  auto table = rd_table(d, exact_upto);
  std::vector<double> terms{0.0};
  double total = 0.0;
  int small_run = 0;
  for (std::int64_t n = 1;; ++n) {
    if (n > n_limit)
      return {n_limit, std::numeric_limits<double>::infinity()};
    double const w = weight(std::sqrt(static_cast<double>(n)));
    if (w <= 0.0)
      break;
    double count;
    if (n <= table->n_max())
      count = table->as_double(n);
    else
      count = std::pow(2.0 * std::floor(std::sqrt(static_cast<double>(n))) + 1.0, d);
    double const term = count * w;
    terms.push_back(term);
    total += term;
    small_run = (term <= 1e-30 * total || term < 1e-300) ? small_run + 1 : 0;
    if (small_run >= 16)
      break;
  }
  // tails[n] = sum_{k > n} terms[k]
  std::vector<double> tails(terms.size(), 0.0);
  double acc = 0.0;
  for (std::size_t k = terms.size(); k-- > 0;) {
    tails[k] = acc;
    acc += terms[k];
  }
  for (std::size_t n = 0; n < tails.size(); ++n)
    if (tails[n] <= tol)
      return {static_cast<std::int64_t>(n), tails[n]};
  return {static_cast<std::int64_t>(tails.size()), 0.0};
}

/// Bound on sum over nu with |y - nu| >= R of sup_{|z| >= |y-nu|} |f(z)|, uniform
/// in y, from unit-width annuli: the annulus k <= |y - nu| < k+1 holds at most
/// vol B(k + 1 + sqrt(d)/2) - vol B(k - sqrt(d)/2) lattice points.
inline double spatial_tail_bound(int d, std::function<double(double)> const& majorant, double R)
{
  double const h = 0.5 * std::sqrt(static_cast<double>(d));
  double const vol = ball_volume(d);
  double total = 0.0;
  for (double k = R; k < R + 1e6; k += 1.0) {
    double const outer = std::pow(k + 1.0 + h, d);
    double const inner = k > h ? std::pow(k - h, d) : 0.0;
    double const term = vol * (outer - inner) * majorant(k);
    total += term;
    if (term <= 1e-30 * total || term < 1e-300)
      return total;
  }
  return std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// Periodization grids
// ---------------------------------------------------------------------------

enum class PeriodizationRoute {
  automatic, // spectral when fhat has compact support, spatial otherwise
  spatial,   // direct lattice sum of f
  spectral   // finite Fourier series sum_m fhat(rho m) e^{2 pi i m.x}
};

inline char const* to_string(PeriodizationRoute r)
{
  switch (r) {
  case PeriodizationRoute::spatial:
    return "spatial";
  case PeriodizationRoute::spectral:
    return "spectral";
  default:
    return "automatic";
  }
}

/// Samples of g_rho on the grid (k / n_g), k in {0..n_g-1}^d, row major with
/// the last axis fastest.
struct PeriodizationGrid {
  int dimension = 0;
  int grid_size = 0;
  std::vector<cplx> samples;
  Rotation rotation = Rotation::identity(2);
  double truncation_radius = 0.0; // spatial: |y - nu| < R; spectral: |m| <= R
  double truncation_error = 0.0;  // sup-norm bound on the omitted terms
  PeriodizationRoute route = PeriodizationRoute::spatial;
  std::string function_id;

  std::size_t size() const { return samples.size(); }

  std::size_t index(std::span<int const> k) const
  {
    std::size_t idx = 0;
    for (int i = 0; i < dimension; ++i) {
      int const w = ((k[i] % grid_size) + grid_size) % grid_size;
      idx = idx * grid_size + static_cast<std::size_t>(w);
    }
    return idx;
  }

  cplx at(std::span<int const> k) const { return samples[index(k)]; }

  /// Grid point k / n_g for flat index idx.
  std::vector<double> point(std::size_t idx) const
  {
    std::vector<double> x(dimension);
    for (int i = dimension - 1; i >= 0; --i) {
      x[i] = static_cast<double>(idx % grid_size) / grid_size;
      idx /= grid_size;
    }
    return x;
  }

  /// mean |g|^2 over the grid; equals sum of |DFT coefficients|^2.
  double mean_square() const
  {
    double s = 0.0;
    for (auto const& v : samples)
      s += std::norm(v);
    return s / static_cast<double>(samples.size());
  }

  nlohmann::json header() const
  {
    return {{"function", function_id},       {"d", dimension},
            {"n_g", grid_size},              {"route", to_string(route)},
            {"rotation", rotation.to_json()}, {"truncation_radius", truncation_radius},
            {"truncation_error", truncation_error}};
  }

  /// CSV dump: '#'-prefixed JSON header line, then "index,re,im" rows.
  void write_csv(std::ostream& os) const
  {
    os << "# " << header().dump() << "\n";
    os << "index,re,im\n";
    char buf[96];
    for (std::size_t i = 0; i < samples.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i, samples[i].real(), samples[i].imag());
      os << buf;
    }
  }

  /// Binary dump: magic "LLPG", u32 d, u32 n_g, d*d f64 rotation, f64
  /// truncation_error, then interleaved (re, im) f64 samples; little endian.
  void write_binary(std::ostream& os) const
  {
    auto put = [&os](auto v) { os.write(reinterpret_cast<char const*>(&v), sizeof v); };
    os.write("LLPG", 4);
    put(static_cast<std::uint32_t>(dimension));
    put(static_cast<std::uint32_t>(grid_size));
    for (double v : rotation.data())
      put(v);
    put(truncation_error);
    for (auto const& s : samples) {
      put(s.real());
      put(s.imag());
    }
  }
};

namespace detail {

  inline std::size_t grid_points(int d, int n_g)
  {
    std::size_t total = 1;
    for (int i = 0; i < d; ++i)
      total *= static_cast<std::size_t>(n_g);
    return total;
  }

  inline PeriodizationGrid periodize_spatial(TestFunction const& f, Rotation const& rho, int n_g, double tol)
  {
    int const d = f.dimension();
    if (!f.has_space_majorant())
      throw std::runtime_error{"latticelab::periodize: " + f.id() + " has no spatial decay data"};
    auto majorant = [&f](double r) { return f.space_majorant(r); };
    // Error budget tol / 2.
    double R = 1.0;
    double tail = spatial_tail_bound(d, majorant, R);
    while (tail > 0.5 * tol) {
      R += 0.5;
      if (R > 256.0)
        throw std::runtime_error{"latticelab::periodize: " + f.id() + " decays too slowly to certify the tolerance"};
      tail = spatial_tail_bound(d, majorant, R);
    }
    // Every nu within distance R of a point of [0,1]^d has |nu| < R + sqrt(d).
    double const reach = R + std::sqrt(static_cast<double>(d));
    auto ball = lattice_ball(d, static_cast<std::int64_t>(std::floor(reach * reach)));
    std::size_t const npts = grid_points(d, n_g);
    if (static_cast<double>(ball->size()) * static_cast<double>(npts) > 4e9)
      throw std::runtime_error{"latticelab::periodize: lattice sum for " + f.id() + " exceeds the work budget"};

    PeriodizationGrid grid;
    grid.dimension = d;
    grid.grid_size = n_g;
    grid.rotation = rho;
    grid.truncation_radius = R;
    grid.truncation_error = tail;
    grid.route = PeriodizationRoute::spatial;
    grid.function_id = f.id();
    double const R2 = R * R;
    grid.samples = parallel_map(npts, [&](std::size_t idx) {
      std::vector<double> y = grid.point(idx);
      std::vector<double> z(d), w(d);
      cplx sum{};
      for (std::size_t j = 0; j < ball->size(); ++j) {
        auto const nu = ball->point(j);
        double r2 = 0.0;
        for (int i = 0; i < d; ++i) {
          z[i] = y[i] - nu[i];
          r2 += z[i] * z[i];
        }
        if (r2 >= R2)
          continue;
        rho.apply(z, w);
        sum += f.eval_space(w);
      }
      return sum;
    });
    return grid;
  }

  inline PeriodizationGrid periodize_spectral(TestFunction const& f, Rotation const& rho, int n_g, double tol)
  {
    int const d = f.dimension();
    auto cutoff = choose_shell_cutoff(d, [&f](double t) { return f.freq_majorant(t); }, 0.5 * tol);
    if (!std::isfinite(cutoff.tail))
      throw std::runtime_error{"latticelab::periodize: cannot certify the Fourier tail of " + f.id()};
    auto ball = lattice_ball(d, cutoff.n_cut);
    std::vector<cplx> cube(grid_points(d, n_g), cplx{});
    PeriodizationGrid grid;
    grid.dimension = d;
    grid.grid_size = n_g;
    std::vector<double> m(d), w(d);
    for (std::size_t j = 0; j < ball->size(); ++j) {
      auto const p = ball->point(j);
      for (int i = 0; i < d; ++i) {
        if (2 * std::abs(p[i]) >= n_g)
          throw std::runtime_error{"latticelab::periodize: Fourier support of " + f.id() + " exceeds the grid Nyquist box"};
        m[i] = p[i];
      }
      rho.apply(m, w);
      cube[grid.index(p)] += f.eval_freq(w);
    }
    fft_cube(cube, d, n_g, +1);
    grid.samples = std::move(cube);
    grid.rotation = rho;
    grid.truncation_radius = std::sqrt(static_cast<double>(cutoff.n_cut));
    grid.truncation_error = cutoff.tail;
    grid.route = PeriodizationRoute::spectral;
    grid.function_id = f.id();
    return grid;
  }

} // namespace detail

/// Samples g_rho on the n_g^d grid with a certified sup-norm truncation error <= tol.
inline PeriodizationGrid periodize(TestFunction const& f, Rotation const& rho, int n_g, double tol,
                                   PeriodizationRoute route = PeriodizationRoute::automatic)
{
  if (n_g < 4)
    throw std::invalid_argument{"latticelab::periodize: grid size must be at least 4"};
  if (!(tol > 0.0))
    throw std::invalid_argument{"latticelab::periodize: tolerance must be positive"};
  if (rho.dimension() != f.dimension())
    throw std::invalid_argument{"latticelab::periodize: rotation dimension mismatch"};
  if (route == PeriodizationRoute::automatic)
    route = f.freq_support_radius() ? PeriodizationRoute::spectral : PeriodizationRoute::spatial;
  return route == PeriodizationRoute::spectral ? detail::periodize_spectral(f, rho, n_g, tol)
                                               : detail::periodize_spatial(f, rho, n_g, tol);
}

/// g_rho(x) by the defining lattice sum at an arbitrary point, truncated at
/// the radius that certifies `tol`. Used to spot-check periodicity.
inline cplx periodization_at(TestFunction const& f, Rotation const& rho, std::span<double const> x, double tol)
{
  int const d = f.dimension();
  auto majorant = [&f](double r) { return f.space_majorant(r); };
  double R = 1.0;
  while (spatial_tail_bound(d, majorant, R) > tol) {
    R += 0.5;
    if (R > 256.0)
      throw std::runtime_error{"latticelab::periodization_at: decay too slow for " + f.id()};
  }
  double norm_x = 0.0;
  for (double v : x)
    norm_x += v * v;
  double const reach = R + std::sqrt(norm_x);
  auto ball = lattice_ball(d, static_cast<std::int64_t>(std::floor(reach * reach)) + 1);
  std::vector<double> z(d), w(d);
  cplx sum{};
  for (std::size_t j = 0; j < ball->size(); ++j) {
    auto const nu = ball->point(j);
    double r2 = 0.0;
    for (int i = 0; i < d; ++i) {
      z[i] = x[i] - nu[i];
      r2 += z[i] * z[i];
    }
    if (r2 >= R * R)
      continue;
    rho.apply(z, w);
    sum += f.eval_space(w);
  }
  return sum;
}

/// fhat(scale * rho m): the m-th Fourier coefficient of the periodization
/// over the lattice scale^{-1} Z^d rotated by rho^{-1}.
inline cplx fourier_coefficient(TestFunction const& f, Rotation const& rho, LatticePoint const& m, double scale = 1.0)
{
  if (!(scale > 0.0))
    throw std::invalid_argument{"latticelab::fourier_coefficient: scale must be positive"};
  if (static_cast<int>(m.coords.size()) != f.dimension())
    throw std::invalid_argument{"latticelab::fourier_coefficient: lattice point dimension mismatch"};
  std::vector<double> v = m.as_double();
  for (double& c : v)
    c *= scale;
  return f.eval_freq(rho.apply(v));
}

/// DFT of the grid samples normalized by n_g^d, approximating ghat_rho(m)
/// for |m|_inf < n_g / 2 (index m mod n_g).
inline std::vector<cplx> grid_fourier_coefficients(PeriodizationGrid const& grid)
{
  std::vector<cplx> c = grid.samples;
  fft_cube(c, grid.dimension, grid.grid_size, -1);
  double const inv = 1.0 / static_cast<double>(c.size());
  for (auto& v : c)
    v *= inv;
  return c;
}

struct ParsevalReport {
  double discrepancy = 0.0;      // max_m |c_m - fhat(rho m)| / max_m |fhat(rho m)|
  double max_abs_error = 0.0;
  double reference_scale = 0.0;  // max_m |fhat(rho m)|
  double truncation_error = 0.0;
  double aliasing_bound = 0.0;
  double contract = 0.0;         // allowed discrepancy
  bool aliased = false;
  bool within_contract = false;
  int grid_size = 0;
  int m_max = 0;
  PeriodizationRoute route = PeriodizationRoute::spatial;
};

inline void to_json(nlohmann::json& j, ParsevalReport const& r)
{
  j = {{"discrepancy", r.discrepancy},
       {"max_abs_error", r.max_abs_error},
       {"reference_scale", r.reference_scale},
       {"truncation_error", r.truncation_error},
       {"aliasing_bound", r.aliasing_bound},
       {"contract", r.contract},
       {"aliased", r.aliased},
       {"within_contract", r.within_contract},
       {"n_g", r.grid_size},
       {"m_max", r.m_max},
       {"route", to_string(r.route)}};
}

/// Compares the DFT of a periodization grid with fhat(rho m) for |m|_inf <= m_max.
///
/// The contract is max(10 truncation_error, aliasing_bound) relative to the
/// reference scale, floored at the DFT roundoff 64 eps max|g|.
inline ParsevalReport parseval_check(TestFunction const& f, Rotation const& rho, int n_g, int m_max,
                                     double tol = 1e-12,
                                     PeriodizationRoute route = PeriodizationRoute::automatic)
{
  if (m_max < 0 || 2 * m_max >= n_g)
    throw std::invalid_argument{"latticelab::parseval_check: need n_g > 2 m_max"};
  int const d = f.dimension();
  PeriodizationGrid const grid = periodize(f, rho, n_g, tol, route);
  std::vector<cplx> const coeffs = grid_fourier_coefficients(grid);

  ParsevalReport rep;
  rep.grid_size = n_g;
  rep.m_max = m_max;
  rep.route = grid.route;
  rep.truncation_error = grid.truncation_error;
  std::int64_t const gap = n_g - m_max;
  ShellCutoff const alias =
    choose_shell_cutoff(d, [&f](double t) { return f.freq_majorant(t); }, 0.0, gap * gap + 1'000'000);
  // Partners m + n_g k (k != 0) satisfy |.|^2 >= gap^2.
  {
    auto table = rd_table(d, 4096);
    double bound = 0.0;
    std::int64_t const last = std::max<std::int64_t>(alias.n_cut, gap * gap);
    for (std::int64_t n = gap * gap; n <= last; ++n) {
      double const w = f.freq_majorant(std::sqrt(static_cast<double>(n)));
      if (w <= 0.0)
        break;
      double const count = n <= table->n_max()
                             ? table->as_double(n)
                             : std::pow(2.0 * std::floor(std::sqrt(static_cast<double>(n))) + 1.0, d);
      bound += count * w;
    }
    rep.aliasing_bound = bound;
  }
  rep.aliased = rep.aliasing_bound > tol;

  std::vector<int> k(d, -m_max);
  std::vector<double> m(d), w(d);
  double max_err = 0.0, scale = 0.0;
  bool done = false;
  while (!done) {
    for (int i = 0; i < d; ++i)
      m[i] = k[i];
    rho.apply(m, w);
    cplx const exact = f.eval_freq(w);
    cplx const approx = coeffs[grid.index(k)];
    max_err = std::max(max_err, std::abs(approx - exact));
    scale = std::max(scale, std::abs(exact));
    int axis = d - 1;
    while (axis >= 0 && ++k[axis] > m_max) {
      k[axis] = -m_max;
      --axis;
    }
    done = axis < 0;
  }
  double max_sample = 0.0;
  for (auto const& v : grid.samples)
    max_sample = std::max(max_sample, std::abs(v));
  rep.max_abs_error = max_err;
  rep.reference_scale = scale;
  double const denom = scale > 0.0 ? scale : 1.0;
  rep.discrepancy = max_err / denom;
  double const floor = 64.0 * DBL_EPSILON * max_sample / denom;
  rep.contract = std::max({10.0 * rep.truncation_error / denom, rep.aliasing_bound / denom, floor});
  rep.within_contract = !rep.aliased && rep.discrepancy <= rep.contract;
  return rep;
}

/// ||g_rho||_2^2 through the lattice Parseval identity.
struct NormEstimate {
  double value = 0.0;
  double tail_bound = 0.0;
  std::int64_t n_cut = 0;
};

/// sum over m in Z^d (m != 0 unless include_dc) of |fhat(scale rho m)|^2 with a
/// certified tail <= tol. Throws when the needed frequencies exceed the
/// Nyquist box of an n_g grid.
inline NormEstimate periodization_norm_sq(TestFunction const& f, Rotation const& rho, double scale, double tol,
                                          int n_g, bool include_dc = true)
{
  int const d = f.dimension();
  ShellCutoff const cut = choose_shell_cutoff(
    d, [&f, scale](double t) { double const v = f.freq_majorant(scale * t); return v * v; }, tol);
  if (!std::isfinite(cut.tail))
    throw std::runtime_error{"latticelab::periodization_norm_sq: cannot certify the tail for " + f.id()};
  if (2.0 * std::sqrt(static_cast<double>(cut.n_cut)) >= n_g)
    throw std::runtime_error{"latticelab::periodization_norm_sq: spectrum of " + f.id() +
                             " is not negligible beyond the Nyquist box of the grid (aliasing)"};
  auto ball = lattice_ball(d, cut.n_cut);
  std::vector<double> m(d), w(d);
  double sum = 0.0;
  for (std::size_t j = include_dc ? 0 : 1; j < ball->size(); ++j) {
    auto const p = ball->point(j);
    for (int i = 0; i < d; ++i)
      m[i] = scale * p[i];
    rho.apply(m, w);
    sum += f.freq_abs_sq(w);
  }
  return {sum, cut.tail, cut.n_cut};
}

} // namespace latticelab

#endif
