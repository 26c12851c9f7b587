#pragma once

#include <functional>

namespace kinklab {

struct RootResult {
  double root = 0.0;
  double lo = 0.0;  // final bracket
  double hi = 0.0;
  int iterations = 0;
};

/// Bracketed root of a continuous scalar function.
///
/// Requires f(lo) and f(hi) of opposite sign (or one of them zero); iterates
/// until the bracket width is below abs_tol. Throws BracketFailure when the
/// endpoint values do not bracket a root or the iteration budget runs out.
RootResult find_root_bracketed(const std::function<double(double)>& f, double lo, double hi,
                               double f_lo, double f_hi, double abs_tol, int max_iter = 200);

}  // namespace kinklab
