#ifndef LATTICELAB_SUMS_OF_SQUARES_HPP
#define LATTICELAB_SUMS_OF_SQUARES_HPP

// r_d(n): the number of m in Z^d with |m|^2 = n.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

namespace latticelab {

using BigInt = boost::multiprecision::cpp_int;

/// Exact table of r_d(n) for 0 <= n <= n_max.
///
/// Counts live in 64-bit integers unless some count overflows, in which case
/// the whole table is kept as arbitrary-precision integers.
class RdTable {
public:
  RdTable(int d, std::int64_t n_max, std::vector<std::uint64_t> counts)
    : d_{d}, n_max_{n_max}, counts_{std::move(counts)}
  {}
  RdTable(int d, std::int64_t n_max, std::vector<BigInt> counts)
    : d_{d}, n_max_{n_max}, counts_{std::move(counts)}
  {}

  int dimension() const { return d_; }
  std::int64_t n_max() const { return n_max_; }
  bool is_big() const { return std::holds_alternative<std::vector<BigInt>>(counts_); }

  /// r_d(n); throws std::overflow_error if the table holds big integers
  /// that do not fit.
  std::uint64_t at(std::int64_t n) const
  {
    check(n);
    if (auto const* v = std::get_if<std::vector<std::uint64_t>>(&counts_))
      return (*v)[n];
    BigInt const& b = std::get<std::vector<BigInt>>(counts_)[n];
    if (b > std::numeric_limits<std::uint64_t>::max())
      throw std::overflow_error{"latticelab::RdTable::at: count exceeds 64 bits, use exact()"};
    return static_cast<std::uint64_t>(b);
  }

  BigInt exact(std::int64_t n) const
  {
    check(n);
    if (auto const* v = std::get_if<std::vector<std::uint64_t>>(&counts_))
      return BigInt{(*v)[n]};
    return std::get<std::vector<BigInt>>(counts_)[n];
  }

  double as_double(std::int64_t n) const
  {
    check(n);
    if (auto const* v = std::get_if<std::vector<std::uint64_t>>(&counts_))
      return static_cast<double>((*v)[n]);
    return std::get<std::vector<BigInt>>(counts_)[n].convert_to<double>();
  }

  /// CSV with header "n,r_d".
  void write_csv(std::ostream& os) const
  {
    os << "n,r_" << d_ << "\n";
    for (std::int64_t n = 0; n <= n_max_; ++n)
      os << n << "," << exact(n).str() << "\n";
  }

private:
  void check(std::int64_t n) const
  {
    if (n < 0 || n > n_max_)
      throw std::out_of_range{"latticelab::RdTable: n outside [0, n_max]"};
  }

  int d_;
  std::int64_t n_max_;
  std::variant<std::vector<std::uint64_t>, std::vector<BigInt>> counts_;
};

namespace detail {

  // One convolution step with r_1: out[n] = sum_k w_k in[n - k^2], w_0 = 1, w_k = 2.
  template <typename T>
  bool convolve_r1(std::vector<T> const& in, std::vector<T>& out)
  {
    std::size_t const size = in.size();
    out.assign(size, T{0});
    for (std::size_t n = 0; n < size; ++n) {
      T acc = in[n];
      for (std::size_t k = 1; k * k <= n; ++k) {
        T const term = in[n - k * k];
        if constexpr (std::is_same_v<T, std::uint64_t>) {
          std::uint64_t twice;
          if (__builtin_mul_overflow(term, std::uint64_t{2}, &twice) ||
              __builtin_add_overflow(acc, twice, &acc))
            return false;
        }
        else {
          acc += 2 * term;
        }
      }
      out[n] = acc;
    }
    return true;
  }

} // namespace detail

/// r_d(n) for n <= n_max by d - 1 convolutions of the one-dimensional table.
inline RdTable build_rd_table(int d, std::int64_t n_max)
{
  if (d < 1)
    throw std::invalid_argument{"latticelab::build_rd_table: dimension must be positive"};
  if (n_max < 0)
    throw std::invalid_argument{"latticelab::build_rd_table: n_max must be nonnegative"};
  std::size_t const size = static_cast<std::size_t>(n_max) + 1;
  auto one_dim = [size]<typename T>(T) {
    std::vector<T> r1(size, T{0});
    r1[0] = 1;
    for (std::size_t k = 1; k * k < size; ++k)
      r1[k * k] = 2;
    return r1;
  };
  std::vector<std::uint64_t> cur = one_dim(std::uint64_t{});
  std::vector<std::uint64_t> next;
  bool fits = true;
  for (int step = 1; step < d && fits; ++step) {
    fits = detail::convolve_r1(cur, next);
    cur.swap(next);
  }
  if (fits)
    return RdTable{d, n_max, std::move(cur)};

  std::vector<BigInt> big = one_dim(BigInt{});
  std::vector<BigInt> big_next;
  for (int step = 1; step < d; ++step) {
    detail::convolve_r1(big, big_next);
    big.swap(big_next);
  }
  return RdTable{d, n_max, std::move(big)};
}

/// Shared, growing cache of tables; returns a table covering at least n_max.
inline std::shared_ptr<RdTable const> rd_table(int d, std::int64_t n_max)
{
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<RdTable const>> cache;
  std::lock_guard lock{mutex};
  auto& slot = cache[d];
  if (!slot || slot->n_max() < n_max) {
    std::int64_t const size = std::max<std::int64_t>(n_max, slot ? 2 * slot->n_max() : 256);
    slot = std::make_shared<RdTable const>(build_rd_table(d, size));
  }
  return slot;
}

enum class ParityFilter { all, odd };

/// Extremes of one normalized ratio r_d(n) / w(n) over the scanned range.
struct RatioExtremes {
  std::string name;
  double min = std::numeric_limits<double>::infinity();
  std::int64_t argmin = -1;
  double max = -std::numeric_limits<double>::infinity();
  std::int64_t argmax = -1;
  std::int64_t count = 0;

  void add(std::int64_t n, double ratio)
  {
    ++count;
    if (ratio < min) {
      min = ratio;
      argmin = n;
    }
    if (ratio > max) {
      max = ratio;
      argmax = n;
    }
  }
};

inline void to_json(nlohmann::json& j, RatioExtremes const& r)
{
  j = {{"name", r.name}, {"min", r.min}, {"argmin", r.argmin}, {"max", r.max},
       {"argmax", r.argmax}, {"count", r.count}};
}

struct BoundSummary {
  int dimension = 0;
  std::int64_t n_max = 0;
  ParityFilter parity = ParityFilter::all;
  std::vector<RatioExtremes> ratios;

  RatioExtremes const& get(std::string const& name) const
  {
    for (auto const& r : ratios)
      if (r.name == name)
        return r;
    throw std::out_of_range{"latticelab::BoundSummary: no ratio named " + name};
  }
};

inline void to_json(nlohmann::json& j, BoundSummary const& s)
{
  j = {{"d", s.dimension}, {"n_max", s.n_max}, {"parity", s.parity == ParityFilter::odd ? "odd" : "all"},
       {"ratios", s.ratios}};
}

/// Extremal normalized counts over 1 <= n <= n_max (restricted to odd n when
/// asked):
///   "power"       r_d(n) / n^{(d-2)/2}          (lower/upper growth for d >= 5, r_4(n)/n for d = 4)
///   "pow2"        r_d(2^k) / 2^{k(d-2)/2}       (d = 4 even-shell degeneration)
///   "r3_upper"    r_3(n) / (sqrt(n) ln n ln ln n), n > 3
///   "r4_upper"    r_4(n) / (n ln ln n), n > 3
inline BoundSummary bound_statistics(RdTable const& table, ParityFilter parity)
{
  BoundSummary out;
  out.dimension = table.dimension();
  out.n_max = table.n_max();
  out.parity = parity;
  int const d = table.dimension();
  double const expo = 0.5 * (d - 2);

  RatioExtremes power{"power"};
  RatioExtremes pow2{"pow2"};
  RatioExtremes r3{"r3_upper"};
  RatioExtremes r4{"r4_upper"};
  for (std::int64_t n = 1; n <= table.n_max(); ++n) {
    if (parity == ParityFilter::odd && n % 2 == 0)
      continue;
    double const r = table.as_double(n);
    double const x = static_cast<double>(n);
    power.add(n, r / std::pow(x, expo));
    if ((n & (n - 1)) == 0)
      pow2.add(n, r / std::pow(x, expo));
    if (n > 3) {
      double const lnln = std::log(std::log(x));
      if (d == 3)
        r3.add(n, r / (std::sqrt(x) * std::log(x) * lnln));
      if (d == 4)
        r4.add(n, r / (x * lnln));
    }
  }
  out.ratios.push_back(power);
  if (pow2.count > 0)
    out.ratios.push_back(pow2);
  if (d == 3)
    out.ratios.push_back(r3);
  if (d == 4)
    out.ratios.push_back(r4);
  return out;
}

} // namespace latticelab

#endif
