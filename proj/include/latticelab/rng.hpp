#ifndef LATTICELAB_RNG_HPP
#define LATTICELAB_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace latticelab {

inline std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seedable, splittable generator.
///
/// Streams derived with split() are independent of the order in which they
/// are created, so parallel work can be keyed by index. Uniform and normal
/// variates are produced here rather than by <random> distributions, whose
/// algorithms are implementation defined.
class SplitRng {
public:
  explicit SplitRng(std::uint64_t seed, std::uint64_t stream = 0)
    : seed_{seed}, stream_{stream}, engine_{splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL))}
  {}

  SplitRng split(std::uint64_t child) const
  {
    return SplitRng{seed_, splitmix64(stream_ * 0x9e3779b97f4a7c15ULL + child + 1)};
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal by the Marsaglia polar method.
  double normal()
  {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double const m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace latticelab

#endif
