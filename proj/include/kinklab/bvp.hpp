#pragma once

#include <optional>
#include <span>
#include <vector>

#include "kinklab/poromechanics.hpp"
#include "kinklab/potential.hpp"

namespace kinklab {

/// Uniform grid on [0, ell] with n interior nodes and spacing ell / (n + 1).
class FdGrid {
 public:
  FdGrid(int n, double ell);
  int n() const { return n_; }
  double ell() const { return ell_; }
  double h() const { return ell_ / (n_ + 1); }
  /// Node i in [0, n + 1]; node 0 is x = 0 and node n + 1 is x = ell.
  double x(int i) const;
  std::vector<double> nodes() const;

 private:
  int n_;
  double ell_;
};

struct NewtonOptions {
  double tol = 1e-10;  // on the infinity norm of the residual
  int max_iter = 100;
  int max_halvings = 30;
};

struct NewtonReport {
  bool converged = false;
  int iterations = 0;
  double final_residual_norm = 0.0;
  bool damping_used = false;
  /// max(tol, rounding floor of the discrete operator); see solve_one_field.
  double tolerance_used = 0.0;
  std::vector<double> residual_history;
};

struct OneFieldSolution {
  std::vector<double> u;  // all n + 2 nodes, boundary values included
  NewtonReport report;
};

/// Damped Newton for k^2 u'' = V'(u) with u(0) = left, u(ell) = right
/// (default: the two minima), second-order central differences.
///
/// `init` holds the n interior values. Convergence is declared when the
/// residual infinity norm drops below max(tol, floor), where floor bounds the
/// rounding error of evaluating k^2 (u_{i-1} - 2 u_i + u_{i+1}) / h^2 - V'(u_i).
/// Throws NewtonDivergence or SingularJacobian.
OneFieldSolution solve_one_field(const DoubleWellPotential& pot, double k, const FdGrid& grid,
                                 std::span<const double> init, const NewtonOptions& options = {},
                                 std::optional<std::pair<double, double>> boundary = std::nullopt);

/// Kink between the two minima. Newton starts from a tanh guess of width
/// 2 k / (V''(a) V''(b))^(1/4); when that fails, the kink is continued down
/// from the first k * 2^j (j <= max_steps) that converges, in steps of
/// sqrt(2) that are split further on failure. Throws NewtonDivergence.
///
/// For asymmetric wells the force fixing the kink position is of order E_k,
/// which drops below the residual's rounding floor once k is small. Newton
/// then accepts a translated kink. Seed solve_one_field with
/// compute_profile when the position matters.
OneFieldSolution solve_kink(const DoubleWellPotential& pot, double k, const FdGrid& grid,
                            const NewtonOptions& options = {}, int max_steps = 16);

/// tanh ramp centred at ell/2 of width `width`, rescaled to hit the boundary
/// values exactly; n interior values.
std::vector<double> tanh_guess(const FdGrid& grid, double left, double right, double width);

struct TwoFieldBoundary {
  double m0, eps0;
  double m_ell, eps_ell;
};

struct TwoFieldState {
  std::vector<double> eps;  // interior nodes
  std::vector<double> m;    // interior nodes
  TwoFieldBoundary boundary{};

  std::vector<double> eps_with_boundary() const;
  std::vector<double> m_with_boundary() const;
};

struct TwoFieldSolution {
  TwoFieldState state;
  NewtonReport report;
};

/// Block-tridiagonal Newton for the Euler-Lagrange system
///   k1 eps'' + k2 m'' = dpsi/deps,  k2 eps'' + k3 m'' = dpsi/dm.
/// Throws ConvexityViolation, NewtonDivergence or SingularJacobian.
TwoFieldSolution solve_two_field(const PoroParams& model, const FdGrid& grid,
                                 const TwoFieldState& init, const NewtonOptions& options = {});

/// Initial two-field state: componentwise tanh ramps of width 5 k.
TwoFieldState tanh_guess(const FdGrid& grid, const TwoFieldBoundary& boundary, double width);

struct SweepStep {
  double k;
  TwoFieldState state;
  NewtonReport report;
};

/// Solves for each k in `k_values` (strictly decreasing), with gradient
/// coefficients k * (model.k1, model.k2, model.k3), starting from a tanh
/// guess and seeding each step with the previous solution. A failed step is
/// retried through up to `max_refinements` geometric intermediate values of
/// k. Throws NewtonDivergence naming the k that failed.
std::vector<SweepStep> continuation_sweep(const PoroParams& model, const FdGrid& grid,
                                          const TwoFieldBoundary& boundary,
                                          std::span<const double> k_values,
                                          const NewtonOptions& options = {},
                                          int max_refinements = 6);

/// Positions where the piecewise-linear interpolant of (xs, ys) crosses level.
std::vector<double> level_crossings(std::span<const double> xs, std::span<const double> ys,
                                    double level);

}  // namespace kinklab
