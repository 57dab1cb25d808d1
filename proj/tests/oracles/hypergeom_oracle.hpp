#pragma once

// Exact upper-tail hypergeometric probabilities in rational arithmetic.

#include <algorithm>
#include <cstdint>

#include <boost/multiprecision/cpp_int.hpp>

namespace dgl::oracle {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

inline cpp_int binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  cpp_int c = 1;
  for (std::uint64_t i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

/// P(X = i) for i successes in n draws from m items, k of them marked.
inline cpp_rational hypergeom_mass(std::uint64_t i, std::uint64_t n, std::uint64_t k, std::uint64_t m) {
  if (i > k || i > n || n - i > m - k) return 0;
  return cpp_rational(binomial(k, i) * binomial(m - k, n - i), binomial(m, n));
}

/// Every mass term shares the denominator C(m, n), so the tail is summed as
/// an integer numerator and reduced once.
inline cpp_rational hypergeom_upper_tail(std::uint64_t x, std::uint64_t n, std::uint64_t k, std::uint64_t m) {
  cpp_int numerator = 0;
  for (std::uint64_t i = x; i <= std::min(n, k); ++i)
    if (n - i <= m - k) numerator += binomial(k, i) * binomial(m - k, n - i);
  return cpp_rational(numerator, binomial(m, n));
}

}  // namespace dgl::oracle
