#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>

namespace bosegas::numeric {

inline constexpr double zeta2 = std::numbers::pi * std::numbers::pi / 6.0;
inline constexpr double zeta3 = 1.2020569031595942853997381615114;

/// Riemann zeta at the integer arguments the trap formulas need.
inline double zeta(int s) {
  switch (s) {
    case 2: return zeta2;
    case 3: return zeta3;
    default: return std::numeric_limits<double>::quiet_NaN();
  }
}

/// ln(1 - e^{-x}) for x > 0, accurate at both small and large x.
inline double log1mexp(double x) {
  return x < std::numbers::ln2 ? std::log(-std::expm1(-x)) : std::log1p(-std::exp(-x));
}

/// ln(sum exp(v)) over a span; -inf for an empty span. The largest term is
/// factored out and the rest go through log1p, so small contributions keep
/// their relative precision.
inline double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const auto top = std::max_element(v.begin(), v.end());
  const double m = *top;
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (auto it = v.begin(); it != v.end(); ++it) {
    if (it != top) s += std::exp(*it - m);
  }
  return m + std::log1p(s);
}

/// Streaming log-sum-exp accumulator, one pass with a running maximum.
class LogSumExp {
public:
  void add(double x) {
    if (x == -std::numeric_limits<double>::infinity()) return;
    if (x <= max_) {
      rest_ += std::exp(x - max_);
    } else {
      rest_ = max_ == -std::numeric_limits<double>::infinity() ? 0.0 : (rest_ + 1.0) * std::exp(max_ - x);
      max_ = x;
    }
  }
  double value() const { return max_ + std::log1p(rest_); }

private:
  double max_ = -std::numeric_limits<double>::infinity();
  double rest_ = 0.0;  // sum of exp(x - max) over all terms but the largest
};

}  // namespace bosegas::numeric
