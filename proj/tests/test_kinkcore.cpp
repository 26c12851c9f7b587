#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "kinklab/errors.hpp"
#include "kinklab/kinkcore.hpp"

using namespace kinklab;

namespace {

double simpson(const std::function<double(double)>& f, double lo, double hi, int panels) {
  const double h = (hi - lo) / panels;
  double s = f(lo) + f(hi);
  for (int i = 1; i < panels; ++i) s += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Quartic profile time through u = tanh(s): the integrand
// (1 - u^2) / sqrt((1 - u^2)^2 + 2e) is smooth and bounded by one, so a
// plain trapezoid rule on a long s-interval converges geometrically.
double quartic_time_oracle(double e) {
  const double span = 0.5 * std::log(1.0 / e) + 40.0;
  const int n = 400000;
  const double h = 2.0 * span / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double s = -span + i * h;
    const double c = std::cosh(s);
    const double w = 1.0 / (c * c);
    const double f = w / std::sqrt(w * w + 2.0 * e);
    sum += (i == 0 || i == n) ? 0.5 * f : f;
  }
  return sum * h;
}

double quartic_level_oracle(double k, double ell) {
  double lo = std::log(1e-300);
  double hi = std::log(10.0);
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (k * quartic_time_oracle(std::exp(mid)) > ell ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

}  // namespace

TEST_CASE("profile_time of a flat potential is the interval length") {
  const DoubleWellPotential flat([](double) { return 0.0; }, 0.0, 1.0,
                                 [](double) { return 0.0; }, [](double) { return 0.0; });
  CHECK(profile_time(flat, 0.5, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("quartic profile time against a 1e6-panel Simpson oracle") {
  const auto f = [](double u) {
    const double w = 1.0 - u * u;
    return 1.0 / std::sqrt(2.0 * (0.1 + 0.5 * w * w));
  };
  const double oracle = simpson(f, -1.0, 1.0, 1000000);
  CHECK(std::abs(profile_time(build_quartic(), 0.1, -1.0, 1.0) - oracle) < 1e-9);
}

TEST_CASE("profile time grows as the energy level is halved") {
  const auto pot = build_quartic();
  double prev = 0.0;
  for (double e = 0.4; e > 1e-12; e *= 0.5) {
    const double t = profile_time(pot, e, -1.0, 1.0);
    CHECK(t > prev);
    prev = t;
  }
}

TEST_CASE("profile_time agrees with the smooth oracle at tiny energies") {
  const auto pot = build_quartic();
  for (double e : {1e-3, 1e-9, 1e-20, 1e-60, 1e-150, 1e-300}) {
    CAPTURE(e);
    CHECK(std::abs(profile_time(pot, e, -1.0, 1.0) - quartic_time_oracle(e)) < 1e-8);
  }
}

TEST_CASE("profile_time rejects bad arguments") {
  const auto pot = build_quartic();
  CHECK_THROWS_AS(profile_time(pot, 0.0, -1.0, 1.0), InvalidParams);
  CHECK_THROWS_AS(profile_time(pot, 0.1, 0.5, 0.2), InvalidParams);
  CHECK_THROWS_AS(profile_time(pot, 0.1, -2.0, 1.0), InvalidParams);
}

TEST_CASE("energy level for the quartic against nested bisection") {
  const auto sol = solve_energy_level(build_quartic(), 0.1, 1.0);
  const double oracle = quartic_level_oracle(0.1, 1.0);
  CHECK(sol.e_k > 0.0);
  CHECK(std::abs(sol.e_k / oracle - 1.0) < 1e-8);
  CHECK(std::abs(sol.residual) <= 1e-9);
}

TEST_CASE("energy level increases with k and tends to zero") {
  for (const auto& pot : {build_quartic(), build_ratchet_cm({}), build_rocked_ratchet({})}) {
    CAPTURE(pot.name());
    double prev = -1e300;
    for (double k : {0.0125, 0.025, 0.05, 0.1, 0.2, 0.5, 1.0, 3.0}) {
      const auto sol = solve_energy_level(pot, k, 1.0);
      CHECK(sol.log_e_k > prev);
      CHECK(std::abs(sol.residual) <= 1e-9);
      if (sol.e_k > 0.0) {
        CHECK(sol.log_e_k == doctest::Approx(std::log(sol.e_k)).epsilon(1e-14));
        const double t = profile_time(pot, sol.e_k, pot.min_a(), pot.min_b());
        CHECK(std::abs(k * t - 1.0) <= 1e-9);
      }
      prev = sol.log_e_k;
    }
  }
  CHECK(solve_energy_level(build_quartic(), 0.05, 1.0).e_k < 1e-15);
  // The rocked-ratchet level at k = 0.025 lies below the smallest double.
  CHECK(solve_energy_level(build_rocked_ratchet({}), 0.025, 1.0).log_e_k < -745.0);
}

TEST_CASE("energy level rejects non-positive k and ell") {
  CHECK_THROWS_AS(solve_energy_level(build_quartic(), 0.0, 1.0), InvalidParams);
  CHECK_THROWS_AS(solve_energy_level(build_quartic(), 0.1, -1.0), InvalidParams);
}

TEST_CASE("profile invariants") {
  for (const auto& pot : {build_quartic(), build_ratchet_cm({}), build_rocked_ratchet({})}) {
    for (double k : {0.5, 0.1, 0.025}) {
      CAPTURE(pot.name());
      CAPTURE(k);
      const auto prof = compute_profile(pot, k, 1.0, 801);
      REQUIRE(prof.xs.size() == prof.us.size());
      CHECK(std::abs(prof.xs.front()) <= 1e-9);
      CHECK(std::abs(prof.xs.back() - 1.0) <= 1e-9);
      CHECK(prof.us.front() == pot.min_a());
      CHECK(prof.us.back() == pot.min_b());
      for (std::size_t i = 1; i < prof.xs.size(); ++i) {
        CHECK(prof.us[i] > prof.us[i - 1]);
        CHECK(prof.xs[i] > prof.xs[i - 1]);
      }
      CHECK(prof.interface_x == doctest::Approx(interface_position(pot, k, 1.0)).epsilon(1e-9));
    }
  }
}

TEST_CASE("profile first integral holds to second order in the node spacing") {
  // Centred slope on the non-uniform (x, u) nodes; error ~ (spacing)^2.
  const auto defect = [](const DoubleWellPotential& pot, double k, int n) {
    const auto prof = compute_profile(pot, k, 1.0, n);
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < prof.xs.size(); ++i) {
      const double dudx = (prof.us[i + 1] - prof.us[i - 1]) / (prof.xs[i + 1] - prof.xs[i - 1]);
      const double d = 0.5 * k * k * dudx * dudx - pot.value(prof.us[i]) - prof.e_k;
      worst = std::max(worst, std::abs(d));
    }
    return worst;
  };
  for (const auto& pot : {build_quartic(), build_ratchet_cm({})}) {
    CAPTURE(pot.name());
    const double coarse = defect(pot, 0.25, 201);
    const double fine = defect(pot, 0.25, 401);
    CHECK(fine < coarse / 3.0);
  }
}

TEST_CASE("symmetric quartic interface sits at ell/2") {
  const auto pot = build_quartic();
  for (double k : {1.0, 0.3, 0.1, 0.03, 0.01}) {
    CAPTURE(k);
    CHECK(std::abs(interface_position(pot, k, 1.0) - 0.5) <= 1e-6);
    const auto d = localization_diagnostics(pot, k, 1.0, -0.5, 0.5);
    CHECK(std::abs(d.weighted_residual) <= 1e-5);
  }
  CHECK(std::abs(interface_position(pot, 0.1, 3.0) - 1.5) <= 1e-6);
}

TEST_CASE("ratchet-cm and rocked-ratchet interface positions") {
  CHECK(std::abs(interface_position(build_ratchet_cm({}), 0.01, 1.0) - 0.187846) < 0.01);
  CHECK(std::abs(interface_position(build_rocked_ratchet({}), 0.1, 1.0) - 0.5) < 0.02);
}

TEST_CASE("limit position: closed form, symmetry and scale invariance") {
  const double e2 = std::exp(2.0);
  const double e8 = e2 * e2 * e2 * e2;
  const double closed = (1 + e2 + e2 * e2 + e2 * e2 * e2 + e8) / (1 + e2 + e2 * e2 + e2 * e2 * e2 + 6 * e8);
  const auto cm = build_ratchet_cm({});
  CHECK(limit_position(cm, 1.0) == doctest::Approx(closed).epsilon(1e-12));
  CHECK(limit_position(build_quartic(), 2.0) == doctest::Approx(1.0));
  CHECK(limit_position(build_rocked_ratchet({}), 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  const DoubleWellPotential scaled([cm](double u) { return 7.5 * cm.value(u); }, -1.0, 1.0,
                                   [cm](double u) { return 7.5 * cm.first_derivative(u); },
                                   [cm](double u) { return 7.5 * cm.second_derivative(u); });
  CHECK(limit_position(scaled, 1.0) == doctest::Approx(limit_position(cm, 1.0)).epsilon(1e-14));
  const DoubleWellPotential flat([](double u) { return std::pow(1.0 - u * u, 4); }, -1.0, 1.0);
  CHECK_THROWS_AS(limit_position(flat, 1.0), NonPositiveCurvature);
}

TEST_CASE("localization diagnostics along a halving sequence") {
  for (const auto& pot : {build_ratchet_cm({}), build_rocked_ratchet({})}) {
    CAPTURE(pot.name());
    const double a = pot.min_a();
    const double b = pot.min_b();
    double prev_width = 1e300;
    double prev_res = 1e300;
    double lo = 1e300;
    double hi = 0.0;
    double max_rem = 0.0;
    for (double k = 0.2; k > 0.02; k *= 0.5) {
      const auto d = localization_diagnostics(pot, k, 1.0, a + 0.25 * (b - a), a + 0.75 * (b - a));
      CHECK(d.width_u1_u2 < prev_width);
      CHECK(std::abs(d.weighted_residual) < prev_res);
      CHECK(d.predicted_limit > 0.0);
      CHECK(d.predicted_limit < 1.0);
      prev_width = d.width_u1_u2;
      prev_res = std::abs(d.weighted_residual);
      lo = std::min(lo, std::abs(d.weighted_residual) / k);
      hi = std::max(hi, std::abs(d.weighted_residual) / k);
      max_rem = std::max({max_rem, std::abs(d.remainder_a), std::abs(d.remainder_b)});
    }
    CHECK(hi / lo < 3.0);
    CHECK(max_rem < 10.0);
  }
}

TEST_CASE("barrier top and crossing positions") {
  CHECK(std::abs(barrier_top(build_quartic())) < 1e-7);
  const auto pot = build_ratchet_cm({});
  const double top = barrier_top(pot);
  CHECK(std::abs(pot.first_derivative(top)) < 1e-6);
  CHECK(pot.value(top) >= pot.value(top - 1e-3));
  CHECK(pot.value(top) >= pot.value(top + 1e-3));
  CHECK(pot.value(top) > pot.value(0.5));
  const auto level = solve_energy_level(pot, 0.1, 1.0);
  const double x_mid = interface_position(pot, level);
  CHECK(crossing_position(pot, level, 0.0) == doctest::Approx(x_mid).epsilon(1e-12));
  CHECK(crossing_position(pot, level, -0.5) < x_mid);
  CHECK(crossing_position(pot, level, 0.5) > x_mid);
}

TEST_CASE("sample_profile interpolates the nodes and stays monotone") {
  const auto prof = compute_profile(build_ratchet_cm({}), 0.1, 1.0, 301);
  for (std::size_t i = 0; i < prof.xs.size(); i += 17)
    CHECK(sample_profile(prof, prof.xs[i]) == doctest::Approx(prof.us[i]).epsilon(1e-14));
  double prev = -2.0;
  for (int i = 0; i <= 2000; ++i) {
    const double u = sample_profile(prof, i / 2000.0);
    CHECK(u >= prev);
    prev = u;
  }
}
