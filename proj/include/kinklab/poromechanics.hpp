#pragma once

#include <optional>
#include <vector>

#include "kinklab/potential.hpp"

namespace kinklab {

/// Material constants of the two-field poromechanics model plus the
/// second-gradient coefficients weighting (eps')^2, eps' m' and (m')^2.
struct PoroParams {
  double alpha = 100.0;    // strength of the non-Biot quartic term
  double a_ratio = 0.5;    // fluid / solid rigidity ratio
  double b_couple = 1.0;   // fluid-solid coupling
  double p = 0.0;          // external pressure
  double k1 = 0.1;
  double k2 = 0.1;
  double k3 = 0.1;
};

/// Throws InvalidParams unless alpha, a_ratio, b_couple > 0 and p >= 0.
void check_material(const PoroParams& params);

/// Throws ConvexityViolation unless k1 > 0, k3 > 0 and k1 k3 - k2^2 >= 0.
void check_convexity(const PoroParams& params);

/// Second-gradient coefficients multiplied by a common scale.
PoroParams with_gradient_scale(const PoroParams& params, double scale);

// First-gradient energy -----------------------------------------------------

double psi(const PoroParams& params, double m, double eps);

struct PsiGradient {
  double dm;
  double deps;
};
PsiGradient psi_gradient(const PoroParams& params, double m, double eps);

struct PsiHessian {
  double mm;
  double meps;
  double epseps;
  double det() const { return mm * epseps - meps * meps; }
};
PsiHessian psi_hessian(const PoroParams& params, double m, double eps);

// Phases ---------------------------------------------------------------------

enum class CriticalKind { minimum, saddle, maximum, degenerate };

struct CriticalPoint {
  double m;
  double eps;
  double psi;
  CriticalKind kind;
  double hessian_det;
};

/// All critical points of psi reached by Newton from the 21 x 21 grid of
/// starts on m in [-0.5, 3 b], eps in [-3, 1]; duplicates within 1e-6 merged.
std::vector<CriticalPoint> find_critical_points(const PoroParams& params);

enum class PhaseKind { standard, fluid_rich };

struct PhasePoint {
  double m;
  double eps;
  double psi;
  PhaseKind kind;
};

/// Local minima of psi: the standard phase (smallest m) and, when a second
/// minimum exists, the fluid-rich phase (largest m). Throws NoPhaseFound.
std::vector<PhasePoint> find_phases(const PoroParams& params);

/// Pressure above which the fluid-rich minimum exists (p is ignored).
double find_critical_pressure(const PoroParams& params, double p_tol = 1e-10);

struct Coexistence {
  double p_c;
  double p_co;
  PhasePoint standard;
  PhasePoint fluid_rich;
};

/// Pressure at which the two phases have equal psi (p is ignored).
Coexistence find_coexistence(const PoroParams& params, double p_tol = 1e-10);
double find_coexistence_pressure(const PoroParams& params, double p_tol = 1e-10);

/// Copy of params with p set to the coexistence pressure.
PoroParams at_coexistence(const PoroParams& params);

// Degenerate reduction -------------------------------------------------------

/// Rotation (m, eps) -> (xi, eta) that diagonalises a degenerate gradient
/// energy: xi = (m + lambda eps) / r, eta = (-lambda m + eps) / r with
/// r = sqrt(1 + lambda^2).
struct Rotation {
  double lambda;
  double xi(double m, double eps) const;
  double eta(double m, double eps) const;
  double m(double xi, double eta) const;
  double eps(double xi, double eta) const;
};

/// The effective one-field problem obtained when k1 k3 = k2^2: U(xi, eta(xi))
/// along the branch of dU/deta = 0 that passes through both phases.
class ReducedPotential {
 public:
  double lambda() const { return rotation_.lambda; }
  const Rotation& rotation() const { return rotation_; }
  double xi_s() const { return xi_s_; }
  double xi_f() const { return xi_f_; }
  double eta_s() const { return eta_s_; }
  double eta_f() const { return eta_f_; }
  /// Effective squared gradient coefficient k3 (1 + lambda^2).
  double mass_coeff() const { return mass_coeff_; }
  /// +1 when xi_s < xi_f; otherwise the potential variable is -xi.
  double orientation() const { return orientation_; }
  const std::vector<double>& branch_xi() const { return branch_xi_; }
  const std::vector<double>& branch_eta() const { return branch_eta_; }

  /// eta on the tracked branch, Newton-polished from the tabulated value.
  double eta_on_branch(double xi) const;
  /// U(xi, eta(xi)) - U(xi_s, eta_s).
  double u_eff(double xi) const;
  double du_dxi(double xi) const;
  double du_deta(double xi, double eta) const;

  /// The reduced energy as a double well in zeta = orientation * xi, with the
  /// standard phase at min_a.
  DoubleWellPotential as_potential() const;

  /// (m, eps) at the branch point with the given potential coordinate zeta.
  std::pair<double, double> fields_at(double zeta) const;

  friend ReducedPotential reduce_degenerate(const PoroParams& params);

 private:
  PoroParams params_{};
  Rotation rotation_{1.0};
  double xi_s_ = 0.0, eta_s_ = 0.0, xi_f_ = 0.0, eta_f_ = 0.0;
  double u_offset_ = 0.0;
  double mass_coeff_ = 0.0;
  double orientation_ = 1.0;
  std::vector<double> branch_xi_;
  std::vector<double> branch_eta_;
};

/// Requires k1 k3 - k2^2 = 0 (relative 1e-12), k2 != 0 and params.p at the
/// coexistence pressure. Throws NotDegenerate, BranchJump or InvalidParams.
ReducedPotential reduce_degenerate(const PoroParams& params);

/// Sharp-interface limit of the degenerate two-field kink on [0, ell], with
/// the standard phase at x = 0.
double predict_interface(const PoroParams& params, double ell);

}  // namespace kinklab
