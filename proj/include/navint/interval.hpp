#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace navint {

/// Closed scalar range [lo, hi]. Building block for dynamic-model thresholds
/// and for the axis-aligned hull boxes of zonotopes.
struct Interval {
  double lo{0.0};
  double hi{0.0};

  Interval() = default;
  Interval(double lo_in, double hi_in) : lo(lo_in), hi(hi_in) {
    if (!(lo <= hi)) {
      throw std::invalid_argument("Interval: lo must not exceed hi");
    }
  }

  static Interval point(double v) { return Interval(v, v); }
  static Interval symmetric(double half_width) {
    return Interval(-std::abs(half_width), std::abs(half_width));
  }
  static Interval about(double center, double half_width) {
    return Interval(center - std::abs(half_width), center + std::abs(half_width));
  }

  double width() const { return hi - lo; }
  double center() const { return 0.5 * (lo + hi); }
  bool contains(double v) const { return lo <= v && v <= hi; }
  bool contains(const Interval& other) const { return lo <= other.lo && other.hi <= hi; }
};

inline Interval interval_add(const Interval& a, const Interval& b) {
  return {a.lo + b.lo, a.hi + b.hi};
}

inline Interval interval_sub(const Interval& a, const Interval& b) {
  return {a.lo - b.hi, a.hi - b.lo};
}

// Endpoint products; min/max realizes the inclusion-isotone extension.
inline Interval interval_mul(const Interval& a, const Interval& b) {
  const double p1 = a.lo * b.lo;
  const double p2 = a.lo * b.hi;
  const double p3 = a.hi * b.lo;
  const double p4 = a.hi * b.hi;
  return {std::min(std::min(p1, p2), std::min(p3, p4)),
          std::max(std::max(p1, p2), std::max(p3, p4))};
}

inline Interval interval_div(const Interval& a, const Interval& b) {
  if (b.contains(0.0)) {
    throw std::domain_error("interval_div: divisor contains zero");
  }
  const double q1 = a.lo / b.lo;
  const double q2 = a.lo / b.hi;
  const double q3 = a.hi / b.lo;
  const double q4 = a.hi / b.hi;
  return {std::min(std::min(q1, q2), std::min(q3, q4)),
          std::max(std::max(q1, q2), std::max(q3, q4))};
}

// tan is monotone on (-pi/2, pi/2); the whole interval must sit strictly inside.
inline Interval interval_tan(const Interval& a) {
  constexpr double kHalfPi = 1.5707963267948966;
  if (!(a.lo > -kHalfPi && a.hi < kHalfPi)) {
    throw std::domain_error("interval_tan: interval not inside (-pi/2, pi/2)");
  }
  return {std::tan(a.lo), std::tan(a.hi)};
}

inline Interval interval_scale(const Interval& a, double s) {
  return (s >= 0.0) ? Interval{a.lo * s, a.hi * s} : Interval{a.hi * s, a.lo * s};
}

inline Interval interval_neg(const Interval& a) { return {-a.hi, -a.lo}; }

/// True iff every coordinate of point lies in the matching interval.
inline bool hull_contains(const std::vector<Interval>& hull, const Eigen::VectorXd& point) {
  if (static_cast<int>(hull.size()) != point.size()) {
    throw std::invalid_argument("hull_contains: dimension mismatch");
  }
  for (int i = 0; i < point.size(); ++i) {
    if (!hull[static_cast<size_t>(i)].contains(point(i))) {
      return false;
    }
  }
  return true;
}

}  // namespace navint
