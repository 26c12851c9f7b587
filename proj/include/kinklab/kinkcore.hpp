#pragma once

#include <vector>

#include "kinklab/potential.hpp"

namespace kinklab {

struct KinkTolerances {
  double quad_tol = 1e-9;       // absolute, per integral
  double root_rel_tol = 1e-10;  // relative, on E_k
  int max_panels = 20000;
};

/// Energy level E_k making the kink traverse [min_a, min_b] in length ell.
struct EnergySolution {
  double k = 0.0;
  double ell = 0.0;
  double e_k = 0.0;      // exp(log_e_k); underflows to 0 below ~1e-308
  double log_e_k = 0.0;
  double residual = 0.0;  // k * T(E_k) - ell
  int iterations = 0;
};

/// Monotone kink u(x) on [0, ell], sampled on a u-grid clustered at the minima.
struct KinkProfile {
  std::vector<double> xs;
  std::vector<double> us;
  std::vector<double> dudx;  // exact slope sqrt(2 (E_k + V(u))) / k at each node
  double k = 0.0;
  double ell = 0.0;
  double e_k = 0.0;
  double log_e_k = 0.0;
  double interface_x = 0.0;
};

struct LocalizationDiagnostics {
  double k = 0.0;
  double ell = 0.0;
  double e_k = 0.0;
  double log_e_k = 0.0;
  double interface_x = 0.0;
  double predicted_limit = 0.0;
  /// sqrt(V''(a)) x - sqrt(V''(b)) (ell - x); vanishes as k -> 0.
  double weighted_residual = 0.0;
  /// Distance between the points where the profile takes the values u1 and u2.
  double width_u1_u2 = 0.0;
  /// Bounded remainders left after subtracting the harmonic-well integrals
  /// from the two halves of the profile time.
  double remainder_a = 0.0;
  double remainder_b = 0.0;
};

/// T(e) = int_{u_lo}^{u_hi} du / sqrt(2 (e + V(u))), for min_a <= u_lo < u_hi <= min_b.
///
/// Within 5e-4 (b - a) of a minimum the potential is replaced by its quartic
/// Taylor expansion and the integral is taken in the variable s with
/// u - a = sqrt(2e / V''(a)) sinh(s), which flattens the peak of height
/// 1/sqrt(2e). Internally the level is carried as log e, so the solvers
/// below also handle levels under the smallest positive double.
double profile_time(const DoubleWellPotential& pot, double e, double u_lo, double u_hi,
                    const KinkTolerances& tol = {});

/// Solves k T(E) = ell for E > 0 by bracketed root finding in log E. Small k
/// drives E_k toward zero exponentially fast; log_e_k stays exact when e_k
/// underflows.
EnergySolution solve_energy_level(const DoubleWellPotential& pot, double k, double ell,
                                  const KinkTolerances& tol = {});

KinkProfile compute_profile(const DoubleWellPotential& pot, double k, double ell, int n_points,
                            const KinkTolerances& tol = {});

/// Point where the kink crosses (a + b) / 2.
double interface_position(const DoubleWellPotential& pot, double k, double ell,
                          const KinkTolerances& tol = {});
double interface_position(const DoubleWellPotential& pot, const EnergySolution& level,
                          const KinkTolerances& tol = {});

/// Point where the kink crosses an arbitrary level in (a, b).
double crossing_position(const DoubleWellPotential& pot, const EnergySolution& level,
                         double u_level, const KinkTolerances& tol = {});

/// Location of the interior maximum of V on (a, b); the alternative
/// interface level.
double barrier_top(const DoubleWellPotential& pot);

/// Sharp-interface limit ell sqrt(V''(b)) / (sqrt(V''(a)) + sqrt(V''(b))).
double limit_position(const DoubleWellPotential& pot, double ell);

LocalizationDiagnostics localization_diagnostics(const DoubleWellPotential& pot, double k,
                                                 double ell, double u1, double u2,
                                                 const KinkTolerances& tol = {});

/// Samples u(x) from a profile by cubic Hermite interpolation on the exact slopes.
double sample_profile(const KinkProfile& profile, double x);

}  // namespace kinklab
