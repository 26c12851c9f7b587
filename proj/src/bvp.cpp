#include "kinklab/bvp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "kinklab/errors.hpp"

namespace kinklab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double inf_norm(std::span<const double> v) {
  double r = 0.0;
  for (double x : v) r = std::max(r, std::abs(x));
  return r;
}

double two_norm(std::span<const double> v) {
  double r = 0.0;
  for (double x : v) r += x * x;
  return std::sqrt(r);
}

extern "C" {
void dgtsv_(const int* n, const int* nrhs, double* dl, double* d, double* du, double* b,
            const int* ldb, int* info);
void dgbsv_(const int* n, const int* kl, const int* ku, const int* nrhs, double* ab,
            const int* ldab, int* ipiv, double* b, const int* ldb, int* info);
}

// Tridiagonal solve with constant off-diagonals; partial pivoting, since the
// Jacobian is indefinite away from the solution.
void tridiagonal_solve(double lower, std::vector<double> diag, double upper,
                       std::vector<double>& rhs) {
  const int n = static_cast<int>(diag.size());
  std::vector<double> dl(n - 1, lower);
  std::vector<double> du(n - 1, upper);
  const int nrhs = 1;
  int info = 0;
  dgtsv_(&n, &nrhs, dl.data(), diag.data(), du.data(), rhs.data(), &n, &info);
  if (info != 0) throw SingularJacobian("tridiagonal Jacobian is singular");
}

// 2 x 2 blocks, row-major {a00, a01, a10, a11}.
using Mat2 = std::array<double, 4>;

// Block-tridiagonal solve on interleaved unknowns, as a band matrix with
// three sub- and super-diagonals.
void block_tridiagonal_solve(const Mat2& off, const std::vector<Mat2>& diag,
                             std::vector<double>& rhs) {
  const int nb = static_cast<int>(diag.size());
  const int n = 2 * nb;
  const int kl = 3;
  const int ku = 3;
  const int ldab = 2 * kl + ku + 1;
  std::vector<double> ab(static_cast<std::size_t>(ldab) * n, 0.0);
  const auto put = [&](int row, int col, double v) {
    ab[static_cast<std::size_t>(col) * ldab + kl + ku + row - col] = v;
  };
  for (int b = 0; b < nb; ++b) {
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        put(2 * b + r, 2 * b + c, diag[b][2 * r + c]);
        if (b > 0) put(2 * b + r, 2 * (b - 1) + c, off[2 * r + c]);
        if (b + 1 < nb) put(2 * b + r, 2 * (b + 1) + c, off[2 * r + c]);
      }
    }
  }
  std::vector<int> ipiv(n);
  const int nrhs = 1;
  int info = 0;
  dgbsv_(&n, &kl, &ku, &nrhs, ab.data(), &ldab, ipiv.data(), rhs.data(), &n, &info);
  if (info != 0) throw SingularJacobian("block-tridiagonal Jacobian is singular");
}

/// Generic damped Newton loop over a flat unknown vector.
template <class Residual, class Step>
NewtonReport damped_newton(std::vector<double>& z, Residual&& residual, Step&& newton_step,
                           const NewtonOptions& options, double floor) {
  NewtonReport report;
  report.tolerance_used = std::max(options.tol, floor);
  std::vector<double> f = residual(z);
  double norm = inf_norm(f);
  report.residual_history.push_back(norm);
  while (norm > report.tolerance_used) {
    if (report.iterations >= options.max_iter) {
      report.final_residual_norm = norm;
      std::ostringstream msg;
      msg << "Newton did not converge in " << options.max_iter
          << " iterations (residual " << norm << ")";
      throw NewtonDivergence(msg.str());
    }
    const std::vector<double> delta = newton_step(z, f);
    // Backtracking on the Euclidean norm, which is smooth along the Newton
    // direction; convergence is judged in the infinity norm.
    const double merit = two_norm(f);
    double lambda = 1.0;
    bool accepted = false;
    std::vector<double> trial(z.size());
    for (int halving = 0; halving <= options.max_halvings; ++halving) {
      for (std::size_t i = 0; i < z.size(); ++i) trial[i] = z[i] + lambda * delta[i];
      std::vector<double> f_trial = residual(trial);
      const double trial_merit = two_norm(f_trial);
      if (std::isfinite(trial_merit) && trial_merit < merit) {
        z.swap(trial);
        f.swap(f_trial);
        norm = inf_norm(f);
        accepted = true;
        break;
      }
      lambda *= 0.5;
      report.damping_used = true;
    }
    ++report.iterations;
    if (!accepted) {
      std::ostringstream msg;
      msg << "Newton line search failed after " << options.max_halvings
          << " halvings (residual " << norm << ")";
      throw NewtonDivergence(msg.str());
    }
    report.residual_history.push_back(norm);
  }
  report.converged = true;
  report.final_residual_norm = norm;
  return report;
}

}  // namespace

FdGrid::FdGrid(int n, double ell) : n_(n), ell_(ell) {
  if (n < 3) throw InvalidParams("FdGrid: need at least 3 interior nodes");
  if (!(ell > 0.0) || !std::isfinite(ell)) throw InvalidParams("FdGrid: ell must be positive");
}

double FdGrid::x(int i) const { return ell_ * static_cast<double>(i) / (n_ + 1); }

std::vector<double> FdGrid::nodes() const {
  std::vector<double> xs(n_ + 2);
  for (int i = 0; i < n_ + 2; ++i) xs[i] = x(i);
  return xs;
}

std::vector<double> tanh_guess(const FdGrid& grid, double left, double right, double width) {
  const double ell = grid.ell();
  const auto ramp = [&](double x) { return std::tanh((x - 0.5 * ell) / width); };
  const double r0 = ramp(0.0);
  const double r1 = ramp(ell);
  std::vector<double> u(grid.n());
  for (int i = 0; i < grid.n(); ++i) {
    const double t = (ramp(grid.x(i + 1)) - r0) / (r1 - r0);
    u[i] = left + (right - left) * t;
  }
  return u;
}

OneFieldSolution solve_one_field(const DoubleWellPotential& pot, double k, const FdGrid& grid,
                                 std::span<const double> init, const NewtonOptions& options,
                                 std::optional<std::pair<double, double>> boundary) {
  const int n = grid.n();
  if (static_cast<int>(init.size()) != n)
    throw InvalidParams("solve_one_field: init must hold the n interior values");
  if (!(k > 0.0)) throw InvalidParams("solve_one_field: k must be positive");
  const auto [left, right] = boundary.value_or(std::pair{pot.min_a(), pot.min_b()});
  const double h = grid.h();
  const double coef = k * k / (h * h);

  const auto residual = [&](const std::vector<double>& u) {
    std::vector<double> f(n);
    for (int i = 0; i < n; ++i) {
      const double ul = i == 0 ? left : u[i - 1];
      const double ur = i == n - 1 ? right : u[i + 1];
      f[i] = coef * (ul - 2.0 * u[i] + ur) - pot.first_derivative(u[i]);
    }
    return f;
  };
  const auto step = [&](const std::vector<double>& u, const std::vector<double>& f) {
    std::vector<double> diag(n);
    for (int i = 0; i < n; ++i) diag[i] = -2.0 * coef - pot.second_derivative(u[i]);
    std::vector<double> rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = -f[i];
    tridiagonal_solve(coef, std::move(diag), coef, rhs);
    return rhs;
  };

  std::vector<double> u(init.begin(), init.end());
  double u_scale = std::max(std::abs(left), std::abs(right));
  for (double v : u) u_scale = std::max(u_scale, std::abs(v));
  double slope_scale = 0.0;
  for (double v : u) slope_scale = std::max(slope_scale, std::abs(pot.first_derivative(v)));
  const double floor = 32.0 * kEps * (4.0 * coef * u_scale + slope_scale);

  OneFieldSolution out;
  out.report = damped_newton(u, residual, step, options, floor);
  out.u.reserve(n + 2);
  out.u.push_back(left);
  out.u.insert(out.u.end(), u.begin(), u.end());
  out.u.push_back(right);
  return out;
}

OneFieldSolution solve_kink(const DoubleWellPotential& pot, double k, const FdGrid& grid,
                            const NewtonOptions& options, int max_steps) {
  if (!(k > 0.0)) throw InvalidParams("solve_kink: k must be positive");
  const auto [ca, cb] = curvature_at_minima(pot);
  // tanh(x / w) solves the harmonic-well problem with w = 2 k / sqrt(V'').
  const double width_per_k = 2.0 / std::sqrt(std::sqrt(ca * cb));
  const auto attempt = [&](double kk, std::span<const double> init) -> std::optional<OneFieldSolution> {
    try {
      return solve_one_field(pot, kk, grid, init, options);
    } catch (const NewtonDivergence&) {
    } catch (const SingularJacobian&) {
    }
    return std::nullopt;
  };
  const auto from_tanh = [&](double kk) {
    return attempt(kk, tanh_guess(grid, pot.min_a(), pot.min_b(), width_per_k * kk));
  };

  if (auto direct = from_tanh(k)) return *direct;

  // Wider kinks are better conditioned: find a k that converges from the
  // tanh guess, then walk back down.
  std::optional<OneFieldSolution> current;
  double k_current = k;
  for (int step = 0; step < max_steps && !current; ++step) {
    k_current *= 2.0;
    current = from_tanh(k_current);
  }
  if (!current) {
    std::ostringstream msg;
    msg << "solve_kink: no converging start found up to k=" << k_current;
    throw NewtonDivergence(msg.str());
  }

  // Geometric steps of sqrt(2); a failed step is split in log k.
  const auto advance = [&](auto&& self, double k_target, int depth) -> void {
    const std::span<const double> interior(current->u.data() + 1, current->u.size() - 2);
    if (auto next = attempt(k_target, interior)) {
      current = std::move(next);
      k_current = k_target;
      return;
    }
    if (depth >= 8) {
      std::ostringstream msg;
      msg << "solve_kink: continuation stalled between k=" << k_current << " and k=" << k_target;
      throw NewtonDivergence(msg.str());
    }
    self(self, std::sqrt(k_current * k_target), depth + 1);
    self(self, k_target, depth + 1);
  };
  while (k_current > k) advance(advance, std::max(k, k_current / std::sqrt(2.0)), 0);
  return *current;
}

std::vector<double> TwoFieldState::eps_with_boundary() const {
  std::vector<double> out;
  out.reserve(eps.size() + 2);
  out.push_back(boundary.eps0);
  out.insert(out.end(), eps.begin(), eps.end());
  out.push_back(boundary.eps_ell);
  return out;
}

std::vector<double> TwoFieldState::m_with_boundary() const {
  std::vector<double> out;
  out.reserve(m.size() + 2);
  out.push_back(boundary.m0);
  out.insert(out.end(), m.begin(), m.end());
  out.push_back(boundary.m_ell);
  return out;
}

TwoFieldState tanh_guess(const FdGrid& grid, const TwoFieldBoundary& boundary, double width) {
  TwoFieldState s;
  s.boundary = boundary;
  s.eps = tanh_guess(grid, boundary.eps0, boundary.eps_ell, width);
  s.m = tanh_guess(grid, boundary.m0, boundary.m_ell, width);
  return s;
}

TwoFieldSolution solve_two_field(const PoroParams& model, const FdGrid& grid,
                                 const TwoFieldState& init, const NewtonOptions& options) {
  check_material(model);
  check_convexity(model);
  const int n = grid.n();
  if (static_cast<int>(init.eps.size()) != n || static_cast<int>(init.m.size()) != n)
    throw InvalidParams("solve_two_field: state must hold the n interior values");
  const double h2 = grid.h() * grid.h();
  const Mat2 off{model.k1 / h2, model.k2 / h2, model.k2 / h2, model.k3 / h2};
  const TwoFieldBoundary& bc = init.boundary;

  // Interleaved unknowns z = (eps_0, m_0, eps_1, m_1, ...).
  const auto residual = [&](const std::vector<double>& z) {
    std::vector<double> f(2 * n);
    for (int i = 0; i < n; ++i) {
      const double el = i == 0 ? bc.eps0 : z[2 * i - 2];
      const double ml = i == 0 ? bc.m0 : z[2 * i - 1];
      const double er = i == n - 1 ? bc.eps_ell : z[2 * i + 2];
      const double mr = i == n - 1 ? bc.m_ell : z[2 * i + 3];
      const double e = z[2 * i];
      const double m = z[2 * i + 1];
      const double lap_e = el - 2.0 * e + er;
      const double lap_m = ml - 2.0 * m + mr;
      const PsiGradient g = psi_gradient(model, m, e);
      f[2 * i] = off[0] * lap_e + off[1] * lap_m - g.deps;
      f[2 * i + 1] = off[2] * lap_e + off[3] * lap_m - g.dm;
    }
    return f;
  };
  const auto step = [&](const std::vector<double>& z, const std::vector<double>& f) {
    std::vector<Mat2> diag(n);
    std::vector<double> delta(2 * n);
    for (int i = 0; i < n; ++i) {
      const PsiHessian hs = psi_hessian(model, z[2 * i + 1], z[2 * i]);
      diag[i] = {-2.0 * off[0] - hs.epseps, -2.0 * off[1] - hs.meps, -2.0 * off[2] - hs.meps,
                 -2.0 * off[3] - hs.mm};
      delta[2 * i] = -f[2 * i];
      delta[2 * i + 1] = -f[2 * i + 1];
    }
    block_tridiagonal_solve(off, diag, delta);
    return delta;
  };

  std::vector<double> z(2 * n);
  double scale = std::max({std::abs(bc.eps0), std::abs(bc.m0), std::abs(bc.eps_ell),
                           std::abs(bc.m_ell)});
  for (int i = 0; i < n; ++i) {
    z[2 * i] = init.eps[i];
    z[2 * i + 1] = init.m[i];
    scale = std::max({scale, std::abs(init.eps[i]), std::abs(init.m[i])});
  }
  const double coef = std::max({std::abs(off[0]), std::abs(off[1]), std::abs(off[3])});
  double force_scale = 0.0;
  for (int i = 0; i < n; ++i) {
    const PsiGradient g = psi_gradient(model, z[2 * i + 1], z[2 * i]);
    force_scale = std::max({force_scale, std::abs(g.dm), std::abs(g.deps)});
  }
  const double floor = 64.0 * kEps * (8.0 * coef * scale + force_scale + std::abs(model.p));

  TwoFieldSolution out;
  out.report = damped_newton(z, residual, step, options, floor);
  out.state.boundary = bc;
  out.state.eps.resize(n);
  out.state.m.resize(n);
  for (int i = 0; i < n; ++i) {
    out.state.eps[i] = z[2 * i];
    out.state.m[i] = z[2 * i + 1];
  }
  return out;
}

std::vector<SweepStep> continuation_sweep(const PoroParams& model, const FdGrid& grid,
                                          const TwoFieldBoundary& boundary,
                                          std::span<const double> k_values,
                                          const NewtonOptions& options, int max_refinements) {
  if (k_values.empty()) throw InvalidParams("continuation_sweep: no k values");
  for (std::size_t i = 0; i < k_values.size(); ++i) {
    if (!(k_values[i] > 0.0)) throw InvalidParams("continuation_sweep: k values must be positive");
    if (i > 0 && !(k_values[i] < k_values[i - 1]))
      throw InvalidParams("continuation_sweep: k values must be strictly decreasing");
  }

  std::vector<SweepStep> steps;
  TwoFieldState current = tanh_guess(grid, boundary, 5.0 * k_values.front());
  double k_current = 0.0;

  // Reaches k_target from `current` (solved at k_current), inserting
  // geometric intermediate steps on failure.
  const auto advance = [&](auto&& self, double k_target, int depth) -> TwoFieldSolution {
    try {
      return solve_two_field(with_gradient_scale(model, k_target), grid, current, options);
    } catch (const Error&) {
      if (depth >= max_refinements || k_current == 0.0) throw;
    }
    const double k_mid = std::sqrt(k_current * k_target);
    TwoFieldSolution mid = self(self, k_mid, depth + 1);
    current = mid.state;
    k_current = k_mid;
    return self(self, k_target, depth + 1);
  };

  for (double k : k_values) {
    TwoFieldSolution sol;
    try {
      sol = advance(advance, k, 0);
    } catch (const Error& err) {
      std::ostringstream msg;
      msg << "continuation failed at k=" << k << ": " << err.what();
      throw NewtonDivergence(msg.str());
    }
    current = sol.state;
    k_current = k;
    steps.push_back({k, std::move(sol.state), std::move(sol.report)});
  }
  return steps;
}

std::vector<double> level_crossings(std::span<const double> xs, std::span<const double> ys,
                                    double level) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < xs.size() && i + 1 < ys.size(); ++i) {
    const double d0 = ys[i] - level;
    const double d1 = ys[i + 1] - level;
    if (d0 == 0.0) {
      out.push_back(xs[i]);
    } else if ((d0 < 0.0 && d1 > 0.0) || (d0 > 0.0 && d1 < 0.0)) {
      out.push_back(xs[i] + (xs[i + 1] - xs[i]) * d0 / (d0 - d1));
    }
  }
  if (!ys.empty() && ys.size() == xs.size() && ys.back() == level) out.push_back(xs.back());
  return out;
}

}  // namespace kinklab
