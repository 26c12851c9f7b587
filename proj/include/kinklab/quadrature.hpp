#pragma once

#include <functional>
#include <span>

namespace kinklab {

struct QuadratureOptions {
  double abs_tol = 1e-9;
  int max_panels = 20000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int panels = 0;
};

/// Globally adaptive Gauss-Kronrod (7/15) quadrature.
///
/// `breakpoints` (strictly increasing, at least two entries) define the
/// initial panels; the panel with the largest embedded error estimate is
/// halved until the summed estimate drops below abs_tol. Throws
/// QuadratureFailure when the panel budget is exhausted or the integrand is
/// not finite.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    std::span<const double> breakpoints,
                                    const QuadratureOptions& options = {});

}  // namespace kinklab
