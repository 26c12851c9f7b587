#include "kinklab/kinkcore.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "kinklab/errors.hpp"
#include "kinklab/quadrature.hpp"
#include "kinklab/roots.hpp"

namespace kinklab {

namespace {

// Width of the Taylor-model layer next to each minimum, relative to b - a.
constexpr double kLayerFraction = 5e-4;

/// V'''' by a Richardson-extrapolated second difference of V''.
double fourth_derivative(const DoubleWellPotential& pot, double u) {
  const double h = pot.fd_step_second();
  const double mid = pot.second_derivative(u);
  const auto central = [&](double s) {
    return (pot.second_derivative(u + s) - 2.0 * mid + pot.second_derivative(u - s)) / (s * s);
  };
  const double coarse = central(h);
  const double fine = central(h / 2.0);
  return fine + (fine - coarse) / 3.0;
}

// Range of log E for the energy bracket search. Levels far below the
// smallest double are handled in log form throughout.
constexpr double kLogEnergyMin = -1e5;
constexpr double kLogEnergyMax = 690.0;

constexpr double kLn2 = 0.69314718055994530942;

/// asinh(exp(log_x)) without overflow.
double asinh_exp(double log_x) {
  return log_x > 30.0 ? log_x + kLn2 : std::asinh(std::exp(log_x));
}

/// exp(log_w) sinh(s) without underflow of exp(log_w) for large s.
double scaled_sinh(double s, double log_w) {
  return s > 30.0 ? std::exp(s + log_w - kLn2) : std::exp(log_w) * std::sinh(s);
}

/// asinh(t / exp(log_w)) for t >= 0.
double scaled_asinh(double t, double log_w) {
  return t > 0.0 ? asinh_exp(std::log(t) - log_w) : 0.0;
}

/// Profile-time integrals for one potential, with the curvature data of
/// both minima cached.
class ProfileIntegrator {
 public:
  ProfileIntegrator(const DoubleWellPotential& pot, const KinkTolerances& tol)
      : pot_(pot), tol_(tol), a_(pot.min_a()), b_(pot.min_b()) {
    if (!(a_ < b_)) throw InvalidParams("profile_time: min_a must be below min_b");
    curv_a_ = pot.second_derivative(a_);
    curv_b_ = pot.second_derivative(b_);
    // Taylor coefficients in the offset t from each minimum, t >= 0 inward.
    cubic_a_ = pot.third_derivative(a_);
    cubic_b_ = -pot.third_derivative(b_);
    quartic_a_ = fourth_derivative(pot, a_);
    quartic_b_ = fourth_derivative(pot, b_);
    // The Taylor layer needs a nondegenerate well; without one the bulk rule
    // covers the whole interval.
    layer_a_ = curv_a_ > 0.0 ? kLayerFraction * (b_ - a_) : 0.0;
    layer_b_ = curv_b_ > 0.0 ? kLayerFraction * (b_ - a_) : 0.0;
  }

  double a() const { return a_; }
  double b() const { return b_; }
  double curvature_a() const { return curv_a_; }
  double curvature_b() const { return curv_b_; }

  /// e + V(u), using the Taylor model inside the layers. e may underflow to
  /// zero for extremely small levels; V dominates away from the minima.
  double energy_gap(double e, double u) const {
    const double ta = u - a_;
    const double tb = b_ - u;
    if (ta < layer_a_)
      return e + ta * ta * (0.5 * curv_a_ + ta * (cubic_a_ / 6.0 + quartic_a_ * ta / 24.0));
    if (tb < layer_b_)
      return e + tb * tb * (0.5 * curv_b_ + tb * (cubic_b_ / 6.0 + quartic_b_ * tb / 24.0));
    return e + pot_.value(u);
  }

  /// Profile time between lo and hi at the level E = exp(log_e).
  double time(double log_e, double lo, double hi, double abs_tol) const {
    if (!std::isfinite(log_e)) throw InvalidParams("profile_time: e must be positive");
    if (!(lo < hi) || lo < a_ || hi > b_) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "profile_time: need min_a <= u_lo < u_hi <= min_b, got [" << lo << ", " << hi
          << "]";
      throw InvalidParams(msg.str());
    }
    double total = 0.0;

    // Layer at a: offsets t in [lo - a, min(hi, a + layer) - a].
    if (lo - a_ < layer_a_) {
      const double t_hi = std::min(hi - a_, layer_a_);
      total += layer_time(log_e, lo - a_, t_hi, curv_a_, cubic_a_, quartic_a_, abs_tol / 4.0);
    }
    // Layer at b, mirrored.
    if (b_ - hi < layer_b_) {
      const double t_hi = std::min(b_ - lo, layer_b_);
      total += layer_time(log_e, b_ - hi, t_hi, curv_b_, cubic_b_, quartic_b_, abs_tol / 4.0);
    }
    // Bulk: [max(lo, a + layer), min(hi, b - layer)].
    const double bulk_lo = std::max(lo, a_ + layer_a_);
    const double bulk_hi = std::min(hi, b_ - layer_b_);
    if (bulk_lo < bulk_hi) total += bulk_time(std::exp(log_e), bulk_lo, bulk_hi, abs_tol / 2.0);
    return total;
  }

 private:
  // int_{t1}^{t2} dt / sqrt(2e + c2 t^2 + c3 t^3 / 3 + c4 t^4 / 12) with t = w sinh(s).
  double layer_time(double log_e, double t1, double t2, double c2, double c3, double c4,
                    double abs_tol) const {
    if (!(t1 < t2)) return 0.0;
    const double log_w = 0.5 * (log_e + kLn2 - std::log(c2));
    const double s1 = scaled_asinh(t1, log_w);
    const double s2 = scaled_asinh(t2, log_w);
    const double inv_sqrt_c2 = 1.0 / std::sqrt(c2);
    const double r3 = c3 / (3.0 * c2);
    const double r4 = c4 / (12.0 * c2);
    const auto integrand = [&](double s) {
      const double t = scaled_sinh(s, log_w);
      const double th = std::tanh(s);
      return inv_sqrt_c2 / std::sqrt(1.0 + t * (r3 + r4 * t) * th * th);
    };
    const int panels = std::max(1, static_cast<int>(std::ceil((s2 - s1) / 4.0)));
    std::vector<double> breaks(panels + 1);
    for (int i = 0; i <= panels; ++i) breaks[i] = s1 + (s2 - s1) * i / panels;
    breaks.back() = s2;
    return integrate_adaptive(integrand, breaks, {abs_tol, tol_.max_panels}).value;
  }

  double bulk_time(double e, double lo, double hi, double abs_tol) const {
    // Dyadic breakpoints growing away from both layers resolve the 1/t
    // growth of the integrand toward the minima.
    std::vector<double> breaks{lo, hi};
    const double mid = 0.5 * (a_ + b_);
    for (double d = kLayerFraction * (b_ - a_); a_ + d < mid; d *= 2.0) {
      const double p = a_ + d;
      if (p > lo && p < hi) breaks.push_back(p);
      const double q = b_ - d;
      if (q > lo && q < hi) breaks.push_back(q);
    }
    if (mid > lo && mid < hi) breaks.push_back(mid);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    const auto integrand = [&](double u) {
      const double gap = e + pot_.value(u);
      if (!(gap > 0.0)) return std::numeric_limits<double>::quiet_NaN();
      return 1.0 / std::sqrt(2.0 * gap);
    };
    return integrate_adaptive(integrand, breaks, {abs_tol, tol_.max_panels}).value;
  }

  const DoubleWellPotential& pot_;
  KinkTolerances tol_;
  double a_, b_;
  double curv_a_ = 0.0, curv_b_ = 0.0;
  double cubic_a_ = 0.0, cubic_b_ = 0.0;
  double quartic_a_ = 0.0, quartic_b_ = 0.0;
  double layer_a_ = 0.0, layer_b_ = 0.0;
};

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << what << " must be positive and finite";
    throw InvalidParams(msg.str());
  }
}

EnergySolution solve_level(const ProfileIntegrator& integ, double k, double ell,
                           const KinkTolerances& tol) {
  const double a = integ.a();
  const double b = integ.b();
  const auto defect = [&](double log_e) {
    return k * integ.time(log_e, a, b, tol.quad_tol) - ell;
  };

  // Start from half the sampled barrier height and expand geometrically,
  // doubling the step in log E each time.
  double v_max = 0.0;
  for (int i = 1; i < 256; ++i) {
    const double u = a + (b - a) * i / 256.0;
    v_max = std::max(v_max, integ.energy_gap(0.0, u));
  }
  const double y0 = std::log(v_max > 0.0 ? 0.5 * v_max : 1.0);

  double y_lo = y0;
  double f_lo = defect(y0);
  double y_hi = y0;
  double f_hi = f_lo;
  double step = 1.0;
  if (f_lo > 0.0) {
    while (f_hi > 0.0) {
      if (y_hi >= kLogEnergyMax)
        throw BracketFailure("energy level above 1e300: k too large for this interval");
      y_lo = y_hi;
      f_lo = f_hi;
      y_hi = std::min(y_hi + step, kLogEnergyMax);
      f_hi = defect(y_hi);
      step *= 2.0;
    }
  } else {
    while (f_lo < 0.0) {
      if (y_lo <= kLogEnergyMin)
        throw BracketFailure("energy level below exp(-1e5): k too small for this interval");
      y_hi = y_lo;
      f_hi = f_lo;
      y_lo = std::max(y_lo - step, kLogEnergyMin);
      f_lo = defect(y_lo);
      step *= 2.0;
    }
  }

  const RootResult r = find_root_bracketed(defect, y_lo, y_hi, f_lo, f_hi, tol.root_rel_tol);
  EnergySolution sol;
  sol.k = k;
  sol.ell = ell;
  sol.log_e_k = r.root;
  sol.e_k = std::exp(r.root);
  sol.residual = defect(r.root);
  sol.iterations = r.iterations;
  return sol;
}

}  // namespace

double profile_time(const DoubleWellPotential& pot, double e, double u_lo, double u_hi,
                    const KinkTolerances& tol) {
  if (!(e > 0.0) || !std::isfinite(e)) throw InvalidParams("profile_time: e must be positive");
  return ProfileIntegrator(pot, tol).time(std::log(e), u_lo, u_hi, tol.quad_tol);
}

EnergySolution solve_energy_level(const DoubleWellPotential& pot, double k, double ell,
                                  const KinkTolerances& tol) {
  require_positive(k, "k");
  require_positive(ell, "ell");
  curvature_at_minima(pot);
  return solve_level(ProfileIntegrator(pot, tol), k, ell, tol);
}

double crossing_position(const DoubleWellPotential& pot, const EnergySolution& level,
                         double u_level, const KinkTolerances& tol) {
  if (u_level == pot.min_a()) return 0.0;
  return level.k * ProfileIntegrator(pot, tol).time(level.log_e_k, pot.min_a(), u_level, tol.quad_tol);
}

double interface_position(const DoubleWellPotential& pot, const EnergySolution& level,
                          const KinkTolerances& tol) {
  return crossing_position(pot, level, 0.5 * (pot.min_a() + pot.min_b()), tol);
}

double interface_position(const DoubleWellPotential& pot, double k, double ell,
                          const KinkTolerances& tol) {
  return interface_position(pot, solve_energy_level(pot, k, ell, tol), tol);
}

KinkProfile compute_profile(const DoubleWellPotential& pot, double k, double ell, int n_points,
                            const KinkTolerances& tol) {
  if (n_points < 3) throw InvalidParams("compute_profile: n_points must be at least 3");
  require_positive(k, "k");
  require_positive(ell, "ell");
  curvature_at_minima(pot);
  const ProfileIntegrator integ(pot, tol);
  const EnergySolution level = solve_level(integ, k, ell, tol);
  const double a = integ.a();
  const double b = integ.b();
  const double mid = 0.5 * (a + b);
  const double e = level.e_k;
  const double log_e = level.log_e_k;

  // Equal steps in s = asinh((u - a) / w_a) up to the midpoint, then the
  // mirrored map from b; x(u) is then close to uniform.
  const int n_left = (n_points + 1) / 2;
  const int n_right = n_points - n_left + 1;
  const double log_w_a = 0.5 * (log_e + kLn2 - std::log(integ.curvature_a()));
  const double log_w_b = 0.5 * (log_e + kLn2 - std::log(integ.curvature_b()));
  const double s_max_a = scaled_asinh(mid - a, log_w_a);
  const double s_max_b = scaled_asinh(b - mid, log_w_b);

  std::vector<double> grid;
  grid.reserve(n_points);
  for (int i = 0; i < n_left; ++i) {
    const double s = s_max_a * i / (n_left - 1);
    grid.push_back(i == n_left - 1 ? mid : a + scaled_sinh(s, log_w_a));
  }
  for (int j = n_right - 2; j >= 0; --j) {
    const double s = s_max_b * j / (n_right - 1);
    grid.push_back(j == 0 ? b : b - scaled_sinh(s, log_w_b));
  }
  grid.front() = a;
  // Offsets below the resolution of the floating-point u collapse onto the
  // same value; keep one node per representable u.
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](double lhs, double rhs) { return !(rhs > lhs); }),
             grid.end());

  KinkProfile profile;
  profile.k = k;
  profile.ell = ell;
  profile.e_k = e;
  profile.log_e_k = log_e;
  profile.us = grid;
  profile.xs.resize(grid.size());
  profile.dudx.resize(grid.size());
  const double segment_tol = tol.quad_tol / static_cast<double>(grid.size());
  profile.xs[0] = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    profile.xs[i] = profile.xs[i - 1] + k * integ.time(log_e, grid[i - 1], grid[i], segment_tol);
  for (std::size_t i = 0; i < grid.size(); ++i)
    profile.dudx[i] = std::sqrt(2.0 * std::max(integ.energy_gap(e, grid[i]), 0.0)) / k;

  profile.interface_x = k * integ.time(log_e, a, mid, tol.quad_tol);
  return profile;
}

double barrier_top(const DoubleWellPotential& pot) {
  const double a = pot.min_a();
  const double b = pot.min_b();
  constexpr int kSamples = 512;
  int best = 1;
  double best_v = -std::numeric_limits<double>::infinity();
  for (int i = 1; i < kSamples; ++i) {
    const double v = pot.value(a + (b - a) * i / kSamples);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  const double lo = a + (b - a) * (best - 1) / kSamples;
  const double hi = a + (b - a) * (best + 1) / kSamples;
  const auto [x, neg_v] = boost::math::tools::brent_find_minima(
      [&](double u) { return -pot.value(u); }, lo, hi, std::numeric_limits<double>::digits / 2);
  (void)neg_v;
  return x;
}

double limit_position(const DoubleWellPotential& pot, double ell) {
  const auto [ca, cb] = curvature_at_minima(pot);
  return ell * std::sqrt(cb) / (std::sqrt(ca) + std::sqrt(cb));
}

LocalizationDiagnostics localization_diagnostics(const DoubleWellPotential& pot, double k,
                                                 double ell, double u1, double u2,
                                                 const KinkTolerances& tol) {
  const double a = pot.min_a();
  const double b = pot.min_b();
  if (!(a < u1 && u1 < u2 && u2 < b))
    throw InvalidParams("localization_diagnostics: need min_a < u1 < u2 < min_b");
  require_positive(k, "k");
  require_positive(ell, "ell");
  curvature_at_minima(pot);
  const ProfileIntegrator integ(pot, tol);
  const EnergySolution level = solve_level(integ, k, ell, tol);
  const double log_e = level.log_e_k;
  const double mid = 0.5 * (a + b);
  const double sqrt_ca = std::sqrt(integ.curvature_a());
  const double sqrt_cb = std::sqrt(integ.curvature_b());

  LocalizationDiagnostics d;
  d.k = k;
  d.ell = ell;
  d.e_k = level.e_k;
  d.log_e_k = log_e;
  const double time_left = integ.time(log_e, a, mid, tol.quad_tol);
  const double time_right = integ.time(log_e, mid, b, tol.quad_tol);
  d.interface_x = k * time_left;
  d.predicted_limit = ell * sqrt_cb / (sqrt_ca + sqrt_cb);
  d.weighted_residual = sqrt_ca * d.interface_x - sqrt_cb * (ell - d.interface_x);
  d.width_u1_u2 = k * integ.time(log_e, u1, u2, tol.quad_tol);

  // Harmonic-well parts, integrated in closed form.
  const double half = 0.5 * (b - a);
  const double log_half = std::log(half);
  const double harmonic_a =
      asinh_exp(0.5 * (std::log(integ.curvature_a()) - kLn2 - log_e) + log_half) / sqrt_ca;
  const double harmonic_b =
      asinh_exp(0.5 * (std::log(integ.curvature_b()) - kLn2 - log_e) + log_half) / sqrt_cb;
  d.remainder_a = time_left - harmonic_a;
  d.remainder_b = time_right - harmonic_b;
  return d;
}

double sample_profile(const KinkProfile& profile, double x) {
  const auto& xs = profile.xs;
  const auto& us = profile.us;
  if (xs.empty()) throw InvalidParams("sample_profile: empty profile");
  if (x <= xs.front()) return us.front();
  if (x >= xs.back()) return us.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
  const double h = xs[i + 1] - xs[i];
  if (!(h > 0.0)) return us[i];
  const double t = (x - xs[i]) / h;
  const double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
  const double h10 = t * (1.0 - t) * (1.0 - t);
  const double h01 = t * t * (3.0 - 2.0 * t);
  const double h11 = t * t * (t - 1.0);
  return h00 * us[i] + h10 * h * profile.dudx[i] + h01 * us[i + 1] + h11 * h * profile.dudx[i + 1];
}

}  // namespace kinklab
