#ifndef LATTICELAB_HAAR_SPHERE_HPP
#define LATTICELAB_HAAR_SPHERE_HPP

// Uniform sphere quadrature, spherical averages A(t) of |fhat|^2 and the
// Haar average G^2 = int ||g_rho||_2^2 d rho.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "functions.hpp"
#include "lattice_periodization.hpp"
#include "numerics.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "rotation.hpp"

namespace latticelab {

/// Monte Carlo nodes on S^{d-1} in antithetic pairs (xi, -xi), equal weights.
///
/// Node 2k and 2k+1 form a pair; standard errors are computed from the pair
/// means, which are independent.
class SphereQuadrature {
public:
  static SphereQuadrature monte_carlo(int d, std::size_t pairs, std::uint64_t seed)
  {
    if (d < 2)
      throw std::invalid_argument{"latticelab::SphereQuadrature: dimension must be at least 2"};
    if (pairs < 2)
      throw std::invalid_argument{"latticelab::SphereQuadrature: need at least two antithetic pairs"};
    SphereQuadrature q;
    q.d_ = d;
    q.seed_ = seed;
    q.nodes_.resize(2 * pairs * d);
    SplitRng rng = SplitRng{seed}.split(0x5e0e);
    for (std::size_t k = 0; k < pairs; ++k) {
      double* a = &q.nodes_[(2 * k) * d];
      double* b = &q.nodes_[(2 * k + 1) * d];
      double norm = 0.0;
      do {
        norm = 0.0;
        for (int i = 0; i < d; ++i) {
          a[i] = rng.normal();
          norm += a[i] * a[i];
        }
      } while (norm < 1e-300);
      norm = std::sqrt(norm);
      for (int i = 0; i < d; ++i) {
        a[i] /= norm;
        b[i] = -a[i];
      }
    }
    q.weights_.assign(2 * pairs, 1.0 / static_cast<double>(2 * pairs));
    return q;
  }

  int dimension() const { return d_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return weights_.size(); }
  std::size_t pairs() const { return weights_.size() / 2; }
  std::span<double const> node(std::size_t i) const { return {nodes_.data() + i * d_, static_cast<std::size_t>(d_)}; }
  std::span<double const> weights() const { return weights_; }

  struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    double variance = 0.0; // sample variance of the pair means
  };

  /// Integral of fn over the sphere under normalized measure.
  template <typename Fn>
  Estimate integrate(Fn&& fn) const
  {
    std::vector<double> means(pairs());
    for (std::size_t k = 0; k < pairs(); ++k)
      means[k] = 0.5 * (fn(node(2 * k)) + fn(node(2 * k + 1)));
    return summarize(means);
  }

  static Estimate summarize(std::span<double const> pair_means)
  {
    Estimate e;
    std::size_t const n = pair_means.size();
    for (double v : pair_means)
      e.mean += v;
    e.mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : pair_means)
      ss += (v - e.mean) * (v - e.mean);
    e.variance = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
    e.stderr_ = std::sqrt(e.variance / static_cast<double>(n));
    return e;
  }

private:
  SphereQuadrature() = default;

  int d_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

enum class AverageMethod { exact_origin, radial, axial, monte_carlo };

inline char const* to_string(AverageMethod m)
{
  switch (m) {
  case AverageMethod::exact_origin:
    return "origin";
  case AverageMethod::radial:
    return "radial";
  case AverageMethod::axial:
    return "axial";
  default:
    return "monte_carlo";
  }
}

/// A(t) = int_{|xi|=1} |fhat(t xi)|^2 d sigma(xi), normalized sigma.
struct ShellAverage {
  double radius = 0.0;
  double value = 0.0;
  double stderr_ = 0.0;
  AverageMethod method = AverageMethod::monte_carlo;
  std::vector<double> pair_values; // Monte Carlo only, for common random numbers

  /// h(t) = omega_{d-1} t^{d-1} A(t), the average on the sphere of radius t
  /// with unnormalized surface measure.
  double h(int d) const { return sphere_area(d) * std::pow(radius, d - 1) * value; }
};

namespace detail {

  // Gamma(d/2) / (sqrt(pi) Gamma((d-1)/2)): density normalizer of the polar
  // angle on S^{d-1}.
  inline double polar_angle_normalizer(int d)
  {
    return std::exp(std::lgamma(0.5 * d) - std::lgamma(0.5 * (d - 1))) / std::sqrt(pi);
  }

  inline double axial_average(TestFunction const& f, double t)
  {
    int const d = f.dimension();
    std::vector<double> xi(d, 0.0);
    auto integrand = [&](double theta) {
      xi[0] = t * std::cos(theta);
      xi[1] = t * std::sin(theta);
      double const s = std::sin(theta);
      return f.freq_abs_sq(xi) * (d == 2 ? 1.0 : std::pow(s, d - 2));
    };
    int const panels = 2048;
    double const rough = kronrod_panels(integrand, 0.0, pi, panels).value.real();
    double const tol = std::max(1e-12 * std::abs(rough), 1e-300);
    return polar_angle_normalizer(d) * adaptive_integrate(integrand, 0.0, pi, tol, panels);
  }

} // namespace detail

/// A(t) with the cheapest exact path available: |fhat(t e1)|^2 for radial f,
/// a one-dimensional polar-angle integral for f invariant under rotations
/// fixing e1, and the Monte Carlo nodes of `quad` otherwise.
inline ShellAverage spherical_average(TestFunction const& f, double t, SphereQuadrature const& quad)
{
  if (!(t >= 0.0))
    throw std::invalid_argument{"latticelab::spherical_average: radius must be nonnegative"};
  int const d = f.dimension();
  if (quad.dimension() != d)
    throw std::invalid_argument{"latticelab::spherical_average: quadrature dimension mismatch"};
  ShellAverage out;
  out.radius = t;
  if (t == 0.0) {
    out.value = f.freq_abs_sq(std::vector<double>(d, 0.0));
    out.method = AverageMethod::exact_origin;
    return out;
  }
  if (f.freq_majorant(t) == 0.0) {
    out.method = f.symmetry() == Symmetry::none ? AverageMethod::monte_carlo
                 : f.symmetry() == Symmetry::radial ? AverageMethod::radial
                                                    : AverageMethod::axial;
    if (out.method == AverageMethod::monte_carlo)
      out.pair_values.assign(quad.pairs(), 0.0);
    return out;
  }
  switch (f.symmetry()) {
  case Symmetry::radial: {
    std::vector<double> xi(d, 0.0);
    xi[0] = t;
    out.value = f.freq_abs_sq(xi);
    out.method = AverageMethod::radial;
    return out;
  }
  case Symmetry::axial:
    out.value = detail::axial_average(f, t);
    out.method = AverageMethod::axial;
    return out;
  default:
    break;
  }
  std::vector<double> xi(d);
  out.pair_values.resize(quad.pairs());
  auto sample = [&](std::span<double const> u) {
    for (int i = 0; i < d; ++i)
      xi[i] = t * u[i];
    return f.freq_abs_sq(xi);
  };
  for (std::size_t k = 0; k < quad.pairs(); ++k)
    out.pair_values[k] = 0.5 * (sample(quad.node(2 * k)) + sample(quad.node(2 * k + 1)));
  auto const est = SphereQuadrature::summarize(out.pair_values);
  out.value = est.mean;
  out.stderr_ = est.stderr_;
  out.method = AverageMethod::monte_carlo;
  return out;
}

/// Haar Monte Carlo estimate of G^2 = int ||g_rho||_2^2 d rho.
struct HaarAverage {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::size_t rotations = 0;
  std::uint64_t seed = 0;
  double tail_bound = 0.0; // per-rotation Parseval tail
  std::vector<double> samples;
};

inline void to_json(nlohmann::json& j, HaarAverage const& h)
{
  j = {{"estimate", h.estimate}, {"stderr", h.stderr_}, {"rotations", h.rotations},
       {"seed", h.seed},         {"tail_bound", h.tail_bound}};
}

/// Mean of ||g_rho||_2^2 over n_rot Haar rotations, each norm by the lattice
/// Parseval sum. With include_dc = false the constant mode m = 0 is dropped.
inline HaarAverage so_d_average_g2(TestFunction const& f, std::size_t n_rot, int n_g, std::uint64_t seed,
                                   bool include_dc = true, double tol = 1e-13)
{
  if (n_rot < 2)
    throw std::invalid_argument{"latticelab::so_d_average_g2: need at least two rotations"};
  int const d = f.dimension();
  SplitRng const root{seed};
  std::vector<NormEstimate> norms = parallel_map(n_rot, [&](std::size_t i) {
    SplitRng rng = root.split(i);
    Rotation const rho = sample_haar(d, rng);
    return periodization_norm_sq(f, rho, 1.0, tol, n_g, include_dc);
  });
  HaarAverage out;
  out.rotations = n_rot;
  out.seed = seed;
  out.samples.reserve(n_rot);
  for (auto const& n : norms) {
    out.samples.push_back(n.value);
    out.tail_bound = std::max(out.tail_bound, n.tail_bound);
  }
  auto const est = SphereQuadrature::summarize(out.samples);
  out.estimate = est.mean;
  out.stderr_ = est.stderr_;
  return out;
}

} // namespace latticelab

#endif
