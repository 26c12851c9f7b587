#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "kinklab/commands.hpp"
#include "kinklab/errors.hpp"

namespace kinklab {

namespace {

SelftestCheck compare(std::string name, double measured, double expected, double tolerance) {
  return {std::move(name), std::abs(measured - expected) <= tolerance, measured, expected,
          tolerance};
}

/// Runs one check, turning a library exception into a failed row.
SelftestCheck guarded(const std::string& name, const std::function<SelftestCheck()>& f) {
  try {
    return f();
  } catch (const Error&) {
    return {name, false, std::nan(""), 0.0, 0.0};
  }
}

// Composite Simpson on [lo, hi] with an even number of panels.
double simpson(const std::function<double(double)>& f, double lo, double hi, int panels) {
  const double h = (hi - lo) / panels;
  double s = f(lo) + f(hi);
  for (int i = 1; i < panels; ++i) s += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

std::vector<SelftestCheck> run_selftest() {
  using std::numbers::pi;
  std::vector<SelftestCheck> checks;

  checks.push_back(guarded("quartic interface at ell/2 (k=0.2)", [] {
    return compare("quartic interface at ell/2 (k=0.2)",
                   interface_position(build_quartic(), 0.2, 1.0), 0.5, 1e-6);
  }));

  checks.push_back(guarded("quartic T(0.1) vs Simpson", [] {
    // V = (1 - u^2)^2 / 2 keeps the integrand smooth for e = 0.1.
    const auto f = [](double u) {
      const double w = 1.0 - u * u;
      return 1.0 / std::sqrt(2.0 * (0.1 + 0.5 * w * w));
    };
    return compare("quartic T(0.1) vs Simpson", profile_time(build_quartic(), 0.1, -1.0, 1.0),
                   simpson(f, -1.0, 1.0, 20000), 1e-8);
  }));

  checks.push_back(guarded("rocked-ratchet curvature", [] {
    const auto [ca, cb] = curvature_at_minima(build_rocked_ratchet({}));
    const double exact = 16.0 * (std::sqrt(3.0) - 1.0) * pi * pi * pi;
    return compare("rocked-ratchet curvature", std::max(std::abs(ca - exact), std::abs(cb - exact)) / exact,
                   0.0, 1e-6);
  }));

  checks.push_back(guarded("ratchet-cm curvature at b", [] {
    const double d1 = -std::expm1(-0.5);
    const double d2 = -std::expm1(-7.5);
    const double exact = 2.0 * std::pow(-std::expm1(-10.0), 2) / (d1 * d1 * d2 * d2);
    return compare("ratchet-cm curvature at b",
                   curvature_at_minima(build_ratchet_cm({})).second / exact, 1.0, 1e-9);
  }));

  checks.push_back(guarded("ratchet-cm sharp-interface limit", [] {
    const double e2 = std::exp(2.0);
    const double s = 1.0 + e2 + e2 * e2 + e2 * e2 * e2;
    const double e8 = e2 * e2 * e2 * e2;
    return compare("ratchet-cm sharp-interface limit", limit_position(build_ratchet_cm({}), 1.0),
                   (s + e8) / (s + 6.0 * e8), 1e-9);
  }));

  checks.push_back(guarded("constant one-field solution", [] {
    const auto pot = build_quartic();
    const FdGrid grid(63, 1.0);
    const std::vector<double> init(grid.n(), -1.0);
    const OneFieldSolution sol = solve_one_field(pot, 0.3, grid, init, {}, std::pair{-1.0, -1.0});
    double dev = 0.0;
    for (double u : sol.u) dev = std::max(dev, std::abs(u + 1.0));
    return compare("constant one-field solution", dev + sol.report.iterations, 0.0, 1e-12);
  }));

  checks.push_back(guarded("one-field FD vs quadrature (quartic k=0.25)", [] {
    const auto pot = build_quartic();
    const FdGrid grid(511, 1.0);
    const OneFieldSolution sol = solve_kink(pot, 0.25, grid);
    const KinkProfile prof = compute_profile(pot, 0.25, 1.0, 1001);
    double dev = 0.0;
    for (int i = 0; i < grid.n() + 2; ++i)
      dev = std::max(dev, std::abs(sol.u[i] - sample_profile(prof, grid.x(i))));
    return compare("one-field FD vs quadrature (quartic k=0.25)", dev, 0.0, 1e-4);
  }));

  checks.push_back(guarded("poro coexistence pressure", [] {
    return compare("poro coexistence pressure", find_coexistence_pressure(PoroParams{}),
                   0.2422091576, 1e-8);
  }));

  checks.push_back(guarded("poro degenerate prediction", [] {
    return compare("poro degenerate prediction", predict_interface(at_coexistence(PoroParams{}), 1.0),
                   0.6164, 1e-3);
  }));

  checks.push_back(guarded("constant two-field solution", [] {
    const PoroParams m = at_coexistence(PoroParams{});
    const PhasePoint s = find_phases(m).front();
    const FdGrid grid(63, 1.0);
    TwoFieldState init;
    init.boundary = {s.m, s.eps, s.m, s.eps};
    init.eps.assign(grid.n(), s.eps);
    init.m.assign(grid.n(), s.m);
    const TwoFieldSolution sol = solve_two_field(m, grid, init);
    return compare("constant two-field solution", sol.report.iterations, 0.0, 1.0);
  }));

  return checks;
}

int cmd_selftest(std::ostream& out) {
  const std::vector<SelftestCheck> checks = run_selftest();
  bool all = true;
  out << std::setprecision(10);
  for (const SelftestCheck& c : checks) {
    all = all && c.passed;
    out << (c.passed ? "PASS " : "FAIL ") << std::left << std::setw(46) << c.name
        << " measured=" << c.measured << " expected=" << c.expected << " tol=" << c.tolerance
        << "\n";
  }
  out << (all ? "selftest: all checks passed\n" : "selftest: FAILED\n");
  return all ? kExitOk : kExitSelftestFailed;
}

}  // namespace kinklab
