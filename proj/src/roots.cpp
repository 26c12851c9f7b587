#include "kinklab/roots.hpp"

#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "kinklab/errors.hpp"

namespace kinklab {

RootResult find_root_bracketed(const std::function<double(double)>& f, double lo, double hi,
                               double f_lo, double f_hi, double abs_tol, int max_iter) {
  if (f_lo == 0.0) return {lo, lo, lo, 0};
  if (f_hi == 0.0) return {hi, hi, hi, 0};
  if (std::signbit(f_lo) == std::signbit(f_hi) || !std::isfinite(f_lo) || !std::isfinite(f_hi)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "no sign change on [" << lo << ", " << hi << "]: f=" << f_lo << ", " << f_hi;
    throw BracketFailure(msg.str());
  }
  std::uintmax_t iters = static_cast<std::uintmax_t>(max_iter);
  const auto tol = [abs_tol](double x, double y) { return std::abs(x - y) <= abs_tol; };
  const auto [r_lo, r_hi] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, tol, iters);
  if (!tol(r_lo, r_hi)) {
    std::ostringstream msg;
    msg << "root bracket did not shrink below " << abs_tol << " in " << max_iter << " iterations";
    throw BracketFailure(msg.str());
  }
  return {0.5 * (r_lo + r_hi), r_lo, r_hi, static_cast<int>(iters)};
}

}  // namespace kinklab
