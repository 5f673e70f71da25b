#ifndef LATTICELAB_ROTATION_HPP
#define LATTICELAB_ROTATION_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rng.hpp"

namespace latticelab {

/// Element of SO(d), stored row major.
class Rotation {
public:
  static Rotation identity(int d)
  {
    std::vector<double> m(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i)
      m[static_cast<std::size_t>(i) * d + i] = 1.0;
    return Rotation{d, std::move(m)};
  }

  /// Validates orthogonality and det = +1 to `tol`.
  static Rotation from_matrix(int d, std::vector<double> m, double tol = 1e-12)
  {
    if (d < 1 || m.size() != static_cast<std::size_t>(d) * d)
      throw std::invalid_argument{"latticelab::Rotation: matrix size does not match dimension"};
    Rotation r{d, std::move(m)};
    if (r.orthogonality_defect() > tol)
      throw std::invalid_argument{"latticelab::Rotation: matrix is not orthogonal"};
    if (std::abs(r.determinant() - 1.0) > tol)
      throw std::invalid_argument{"latticelab::Rotation: determinant is not +1"};
    return r;
  }

  /// Rotation by `angle` in the (i, j) coordinate plane.
  static Rotation plane(int d, int i, int j, double angle)
  {
    Rotation r = identity(d);
    double const c = std::cos(angle);
    double const s = std::sin(angle);
    r.at(i, i) = c;
    r.at(j, j) = c;
    r.at(i, j) = -s;
    r.at(j, i) = s;
    return r;
  }

  int dimension() const { return d_; }
  double operator()(int i, int j) const { return m_[static_cast<std::size_t>(i) * d_ + j]; }
  std::span<double const> data() const { return m_; }

  /// out = rho * v
  void apply(std::span<double const> v, std::span<double> out) const
  {
    for (int i = 0; i < d_; ++i) {
      double s = 0.0;
      double const* row = &m_[static_cast<std::size_t>(i) * d_];
      for (int j = 0; j < d_; ++j)
        s += row[j] * v[j];
      out[i] = s;
    }
  }

  std::vector<double> apply(std::span<double const> v) const
  {
    std::vector<double> out(d_);
    apply(v, out);
    return out;
  }

  /// max |rho^T rho - I|
  double orthogonality_defect() const
  {
    double worst = 0.0;
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) {
        double s = 0.0;
        for (int k = 0; k < d_; ++k)
          s += (*this)(k, i) * (*this)(k, j);
        worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
      }
    return worst;
  }

  double determinant() const
  {
    std::vector<double> a = m_;
    double det = 1.0;
    for (int c = 0; c < d_; ++c) {
      int piv = c;
      for (int r = c + 1; r < d_; ++r)
        if (std::abs(a[r * d_ + c]) > std::abs(a[piv * d_ + c]))
          piv = r;
      if (a[piv * d_ + c] == 0.0)
        return 0.0;
      if (piv != c) {
        for (int k = 0; k < d_; ++k)
          std::swap(a[c * d_ + k], a[piv * d_ + k]);
        det = -det;
      }
      det *= a[c * d_ + c];
      for (int r = c + 1; r < d_; ++r) {
        double const f = a[r * d_ + c] / a[c * d_ + c];
        for (int k = c; k < d_; ++k)
          a[r * d_ + k] -= f * a[c * d_ + k];
      }
    }
    return det;
  }

  nlohmann::json to_json() const
  {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < d_; ++i)
      rows.push_back(std::vector<double>(m_.begin() + i * d_, m_.begin() + (i + 1) * d_));
    return rows;
  }

private:
  Rotation(int d, std::vector<double> m) : d_{d}, m_{std::move(m)} {}

  double& at(int i, int j) { return m_[static_cast<std::size_t>(i) * d_ + j]; }

  friend Rotation sample_haar(int d, SplitRng& rng);

  int d_;
  std::vector<double> m_;
};

/// Haar-distributed element of SO(d).
///
/// QR of a matrix of independent standard normals by twice-iterated
/// Gram-Schmidt, which leaves the triangular factor with a positive diagonal;
/// the first column is negated when the determinant comes out -1.
inline Rotation sample_haar(int d, SplitRng& rng)
{
  if (d < 2)
    throw std::invalid_argument{"latticelab::sample_haar: dimension must be at least 2"};
  std::size_t const n = static_cast<std::size_t>(d);
  // cols[j] is column j
  std::vector<std::vector<double>> cols(n, std::vector<double>(n));
  for (auto& c : cols)
    for (auto& v : c)
      v = rng.normal();
  for (std::size_t j = 0; j < n; ++j) {
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t k = 0; k < j; ++k) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          dot += cols[k][i] * cols[j][i];
        for (std::size_t i = 0; i < n; ++i)
          cols[j][i] -= dot * cols[k][i];
      }
    double norm = 0.0;
    for (double v : cols[j])
      norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : cols[j])
      v /= norm;
  }
  std::vector<double> m(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      m[i * n + j] = cols[j][i];
  Rotation r{d, std::move(m)};
  if (r.determinant() < 0.0)
    for (int i = 0; i < d; ++i)
      r.at(i, 0) = -r.at(i, 0);
  return r;
}

/// Deterministic given the seed.
inline Rotation sample_haar(int d, std::uint64_t seed)
{
  SplitRng rng{seed};
  return sample_haar(d, rng);
}

} // namespace latticelab

#endif
