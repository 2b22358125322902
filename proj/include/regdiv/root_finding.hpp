#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "regdiv/core_math.hpp"

namespace regdiv {

struct BracketOptions {
  double initial_width = 1.0;
  double max_width = 0x1p60;  // hard cap on bracket expansion
  double abs_tol = 1e-13;     // upper bound on the final bracket width
};

/// Root of a nondecreasing function f on [lo, inf).
///
/// The bracket [lo, lo + w] is doubled until f changes sign, then bisected
/// until its width is below abs_tol or no representable midpoint remains.
/// Returns lo when f(lo) >= 0. Throws RootFindingError when the bracket
/// cannot be closed within max_width or f produces NaN.
template <typename F>
double increasing_root(F&& f, double lo, const BracketOptions& opts = {}) {
  double f_lo = f(lo);
  if (std::isnan(f_lo)) throw RootFindingError("objective is NaN at bracket start");
  if (f_lo >= 0.0) return lo;

  double width = opts.initial_width;
  double hi = lo + width;
  double f_hi = f(hi);
  while (!(f_hi >= 0.0)) {
    if (std::isnan(f_hi)) throw RootFindingError("objective is NaN during bracket expansion");
    width *= 2.0;
    if (width > opts.max_width) {
      throw RootFindingError("bracket expansion exceeded cap of " +
                             std::to_string(opts.max_width));
    }
    lo = hi;
    f_lo = f_hi;
    hi = lo + width;
    f_hi = f(hi);
  }

  while (hi - lo > 0.0) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f(mid);
    if (std::isnan(f_mid)) throw RootFindingError("objective is NaN during bisection");
    if (f_mid < 0.0) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }
  if (hi - lo > opts.abs_tol) throw RootFindingError("bisection stalled above tolerance");
  return std::abs(f_lo) <= std::abs(f_hi) ? lo : hi;
}

}  // namespace regdiv
