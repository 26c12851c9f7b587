#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kinklab/errors.hpp"
#include "kinklab/potential.hpp"

using namespace kinklab;
using std::numbers::pi;

namespace {

// Eighth-order central second difference of v at u.
double d2_8th(const DoubleWellPotential& pot, double u, double h) {
  static constexpr double c[5] = {-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0,
                                  -1.0 / 560.0};
  double s = c[0] * pot.value(u);
  for (int j = 1; j <= 4; ++j) s += c[j] * (pot.value(u + j * h) + pot.value(u - j * h));
  return s / (h * h);
}

DoubleWellPotential values_only(const DoubleWellPotential& pot) {
  return DoubleWellPotential([pot](double u) { return pot.value(u); }, pot.min_a(), pot.min_b());
}

double ratchet_cm_curvature_b(double omega0, double b1, double b2, double u0) {
  const double d1 = -std::expm1(b1 * (u0 - 1.0));
  const double d2 = -std::expm1(-b2 * (u0 + 1.0));
  const double g = -std::expm1(-2.0 * b2);
  return 2.0 * b1 * b1 * g * g / (omega0 * omega0 * d1 * d1 * d2 * d2);
}

double ratchet_cm_curvature_a(double omega0, double b1, double b2, double u0) {
  const double d1 = -std::expm1(b1 * (u0 - 1.0));
  const double d2 = -std::expm1(-b2 * (u0 + 1.0));
  const double g = -std::expm1(-2.0 * b1);
  return 2.0 * b2 * b2 * g * g / (omega0 * omega0 * d1 * d1 * d2 * d2);
}

}  // namespace

TEST_CASE("quartic passes validation with curvature 4") {
  const auto pot = build_quartic();
  const auto report = validate(pot);
  CHECK(report.passed());
  const auto [ca, cb] = curvature_at_minima(pot);
  CHECK(ca == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(cb == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("mislabelled minimum fails the zero-minimum check") {
  const auto q = build_quartic();
  const DoubleWellPotential bad([q](double u) { return q.value(u); }, -1.0, 0.9);
  const auto report = validate(bad);
  CHECK_FALSE(report.passed());
  REQUIRE(report.find("zero_minimum_b") != nullptr);
  CHECK_FALSE(report.find("zero_minimum_b")->passed);
  CHECK(report.find("zero_minimum_a")->passed);
}

TEST_CASE("validate rejects too few samples and unordered minima") {
  const auto q = build_quartic();
  CHECK_FALSE(validate(q, 8).passed());
  const DoubleWellPotential swapped([q](double u) { return q.value(u); }, 1.0, -1.0);
  const auto report = validate(swapped);
  CHECK_FALSE(report.passed());
  CHECK_FALSE(report.find("ordered_minima")->passed);
}

TEST_CASE("flat minimum raises NonPositiveCurvature") {
  const DoubleWellPotential flat([](double u) { return std::pow(1.0 - u * u, 4); }, -1.0, 1.0);
  CHECK_THROWS_AS(curvature_at_minima(flat), NonPositiveCurvature);
}

TEST_CASE("ratchet-cm: zero minima, validation and curvature oracles") {
  const RatchetCMParams p{1.0, 1.0, 5.0, 0.5};
  const auto pot = build_ratchet_cm(p);
  CHECK(pot.value(-1.0) == 0.0);
  CHECK(pot.value(1.0) == 0.0);
  CHECK(validate(pot).passed());
  const auto [ca, cb] = curvature_at_minima(pot);
  CHECK(ca == doctest::Approx(ratchet_cm_curvature_a(1, 1, 5, 0.5)).epsilon(1e-12));
  CHECK(cb == doctest::Approx(ratchet_cm_curvature_b(1, 1, 5, 0.5)).epsilon(1e-12));
  CHECK(ca == doctest::Approx(d2_8th(pot, -1.0, 1e-3)).epsilon(1e-8));
  CHECK(cb == doctest::Approx(d2_8th(pot, 1.0, 1e-3)).epsilon(1e-8));
}

TEST_CASE("ratchet-cm with b1 = b2 and u0 = 0 is even") {
  const auto pot = build_ratchet_cm({1.0, 1.0, 1.0, 0.0});
  double worst = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double u = -1.0 + i / 100.0;
    worst = std::max(worst, std::abs(pot.value(u) - pot.value(-u)));
  }
  CHECK(worst < 1e-14);
}

TEST_CASE("ratchet-cm barrier height is 1/omega0^2 at u0") {
  CHECK(build_ratchet_cm({1.0, 2.0, 3.0, 0.5}).value(0.5) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(build_ratchet_cm({2.0, 2.0, 3.0, 0.5}).value(0.5) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("ratchet-cm rejects bad parameters") {
  CHECK_THROWS_AS(build_ratchet_cm({1.0, -1.0, 5.0, 0.5}), InvalidParams);
  CHECK_THROWS_AS(build_ratchet_cm({1.0, 1.0, 0.0, 0.5}), InvalidParams);
  CHECK_THROWS_AS(build_ratchet_cm({1.0, 1.0, 5.0, 1.0}), InvalidParams);
}

TEST_CASE("rocked ratchet: zeros, stationarity, curvature and period") {
  const auto pot = build_rocked_ratchet({1.0});
  CHECK(std::abs(pot.value(0.0)) < 1e-12);
  CHECK(std::abs(pot.value(1.0)) < 1e-12);
  CHECK(std::abs(pot.first_derivative(0.0)) < 1e-8);
  CHECK(validate(pot).passed());
  const double exact = 16.0 * (std::sqrt(3.0) - 1.0) * pi * pi * pi;
  const auto [ca, cb] = curvature_at_minima(pot);
  CHECK(ca == doctest::Approx(exact).epsilon(1e-12));
  CHECK(cb == doctest::Approx(exact).epsilon(1e-12));

  const auto wide = build_rocked_ratchet({2.0});
  CHECK(curvature_at_minima(wide).first == doctest::Approx(exact / 8.0).epsilon(1e-12));
  CHECK(std::abs(wide.value(2.0)) < 1e-12);

  double worst = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double u = -1.0 + i / 100.0;
    worst = std::max(worst, std::abs(pot.value(u) - pot.value(u + 1.0)));
  }
  CHECK(worst <= 1e-10);
  CHECK_THROWS_AS(build_rocked_ratchet({0.0}), InvalidParams);
}

TEST_CASE("rocked ratchet constants follow the closed forms") {
  const auto c = rocked_ratchet_constants({1.0});
  CHECK(c.offset == doctest::Approx(2.0 * pi));
  CHECK(1.0 / c.sigma ==
        doctest::Approx((1.0 / (8.0 * pi)) * std::sqrt(std::sqrt(3.0) / 2.0) * (3.0 + std::sqrt(3.0))));
  CHECK(c.u0 == doctest::Approx(std::acos((std::sqrt(3.0) - 1.0) / 2.0) / (2.0 * pi)));
}

TEST_CASE("finite-difference fallback matches analytic curvature for every builtin") {
  for (const auto& pot : {build_quartic(), build_ratchet_cm({}), build_rocked_ratchet({})}) {
    CAPTURE(pot.name());
    const auto fd = values_only(pot);
    CHECK_FALSE(fd.has_analytic_second());
    const auto [ea, eb] = curvature_at_minima(pot);
    const auto [fa, fb] = curvature_at_minima(fd);
    CHECK(std::abs(fa - ea) <= 1e-6 * ea);
    CHECK(std::abs(fb - eb) <= 1e-6 * eb);
    for (double t : {0.2, 0.5, 0.8}) {
      const double u = pot.min_a() + t * (pot.min_b() - pot.min_a());
      CHECK(fd.first_derivative(u) == doctest::Approx(pot.first_derivative(u)).epsilon(1e-8));
    }
  }
}

TEST_CASE("validation pass implies curvature succeeds") {
  for (const auto& pot : {build_quartic(), build_ratchet_cm({1, 3, 2, -0.3}), build_rocked_ratchet({3.0})}) {
    REQUIRE(validate(pot).passed());
    CHECK_NOTHROW(curvature_at_minima(pot));
  }
}
