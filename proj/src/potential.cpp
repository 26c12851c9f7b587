#include "kinklab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "kinklab/errors.hpp"

namespace kinklab {

namespace {

double richardson(double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; }

}  // namespace

DoubleWellPotential::DoubleWellPotential(ScalarFunction v, double min_a, double min_b,
                                         std::optional<ScalarFunction> dv,
                                         std::optional<ScalarFunction> d2v,
                                         std::optional<double> fd_step, std::string name)
    : v_(std::move(v)),
      dv_(std::move(dv)),
      d2v_(std::move(d2v)),
      min_a_(min_a),
      min_b_(min_b),
      fd_step_(fd_step.value_or(std::abs(min_b - min_a) * 1e-5)),
      name_(std::move(name)) {
  if (!v_) throw InvalidParams("potential: energy density is empty");
  if (!(fd_step_ > 0.0) || !std::isfinite(fd_step_))
    throw InvalidParams("potential: fd_step must be positive");
}

double DoubleWellPotential::fd_step_second() const {
  // Geometric mean of fd_step and the well separation: for the default step
  // this is ~3e-3 (b-a), where the extrapolated second difference balances
  // truncation against cancellation.
  const double span = std::abs(min_b_ - min_a_);
  return span > 0.0 ? std::sqrt(fd_step_ * span) : fd_step_;
}

double DoubleWellPotential::first_derivative(double u) const {
  if (dv_) return (*dv_)(u);
  const double h = fd_step_;
  const auto central = [&](double s) { return (v_(u + s) - v_(u - s)) / (2.0 * s); };
  return richardson(central(h), central(h / 2.0));
}

double DoubleWellPotential::second_derivative(double u) const {
  if (d2v_) return (*d2v_)(u);
  const double h = fd_step_second();
  const double vu = v_(u);
  const auto central = [&](double s) { return (v_(u + s) - 2.0 * vu + v_(u - s)) / (s * s); };
  return richardson(central(h), central(h / 2.0));
}

double DoubleWellPotential::third_derivative(double u) const {
  const double h = fd_step_second();
  const auto central = [&](double s) {
    return (second_derivative(u + s) - second_derivative(u - s)) / (2.0 * s);
  };
  return richardson(central(h), central(h / 2.0));
}

bool ValidationReport::passed() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

ValidationReport validate(const DoubleWellPotential& pot, int n_samples) {
  ValidationReport report;
  const double a = pot.min_a();
  const double b = pot.min_b();

  if (n_samples < 16) {
    report.checks.push_back({"n_samples", false, static_cast<double>(n_samples),
                             "at least 16 samples are required"});
    return report;
  }

  report.checks.push_back(
      {"ordered_minima", a < b, b - a, "min_a < min_b"});

  const double va = pot.value(a);
  const double vb = pot.value(b);
  report.checks.push_back({"zero_minimum_a", std::abs(va) <= kTolZero, va, "|V(min_a)| <= 1e-9"});
  report.checks.push_back({"zero_minimum_b", std::abs(vb) <= kTolZero, vb, "|V(min_b)| <= 1e-9"});

  const double ca = pot.second_derivative(a);
  const double cb = pot.second_derivative(b);
  report.checks.push_back({"curvature_a", ca > 0.0 && std::isfinite(ca), ca, "V''(min_a) > 0"});
  report.checks.push_back({"curvature_b", cb > 0.0 && std::isfinite(cb), cb, "V''(min_b) > 0"});

  if (a < b) {
    const double span = b - a;
    const double neighborhood = span * 1e-6;
    double min_sample = std::numeric_limits<double>::infinity();
    double arg_min = a;
    for (int i = 0; i < n_samples; ++i) {
      const double s = a + span * (i + 0.5) / n_samples;
      if (s - a < neighborhood || b - s < neighborhood) continue;
      const double v = pot.value(s);
      if (!(v >= min_sample)) {  // also catches NaN
        min_sample = v;
        arg_min = s;
      }
    }
    std::ostringstream detail;
    detail.precision(17);
    detail << "min sampled V on (min_a, min_b) at u=" << arg_min;
    report.checks.push_back(
        {"interior_positive", min_sample > 0.0 && std::isfinite(min_sample), min_sample,
         detail.str()});
  } else {
    report.checks.push_back({"interior_positive", false, 0.0, "empty interval"});
  }
  return report;
}

std::pair<double, double> curvature_at_minima(const DoubleWellPotential& pot) {
  const double ca = pot.second_derivative(pot.min_a());
  const double cb = pot.second_derivative(pot.min_b());
  if (!(ca > 0.0) || !(cb > 0.0)) {
    std::ostringstream msg;
    msg << "non-positive curvature at the minima of '" << pot.name() << "': V''(a)=" << ca
        << ", V''(b)=" << cb;
    throw NonPositiveCurvature(msg.str());
  }
  return {ca, cb};
}

DoubleWellPotential build_quartic() {
  return DoubleWellPotential(
      [](double u) {
        const double w = 1.0 - u * u;
        return 0.5 * w * w;
      },
      -1.0, 1.0, [](double u) { return -2.0 * u * (1.0 - u * u); },
      [](double u) { return 6.0 * u * u - 2.0; }, std::nullopt, "quartic");
}

DoubleWellPotential build_ratchet_cm(const RatchetCMParams& p) {
  if (!(p.b1 > 0.0) || !(p.b2 > 0.0) || !(p.u0 > -1.0 && p.u0 < 1.0) || p.omega0 == 0.0 ||
      !std::isfinite(p.omega0))
    throw InvalidParams("ratchet-cm: need b1 > 0, b2 > 0, u0 in (-1, 1), omega0 != 0");

  const double b1 = p.b1;
  const double b2 = p.b2;
  const double scale = 1.0 / (p.omega0 * p.omega0);
  // f(u) = g1(u) g2(u) / norm vanishes at +-1 and equals 1 at u0; V = scale f^2.
  const double norm = -std::expm1(b1 * (p.u0 - 1.0)) * -std::expm1(-b2 * (p.u0 + 1.0));

  struct Jet {
    double f, df, d2f;
  };
  const auto jet = [=](double u) {
    const double e1 = std::exp(b1 * (u - 1.0));
    const double e2 = std::exp(-b2 * (u + 1.0));
    const double g1 = -std::expm1(b1 * (u - 1.0));
    const double g2 = -std::expm1(-b2 * (u + 1.0));
    const double dg1 = -b1 * e1;
    const double dg2 = b2 * e2;
    const double d2g1 = -b1 * b1 * e1;
    const double d2g2 = -b2 * b2 * e2;
    return Jet{g1 * g2 / norm, (dg1 * g2 + g1 * dg2) / norm,
               (d2g1 * g2 + 2.0 * dg1 * dg2 + g1 * d2g2) / norm};
  };

  return DoubleWellPotential(
      [=](double u) {
        const Jet j = jet(u);
        return scale * j.f * j.f;
      },
      -1.0, 1.0,
      [=](double u) {
        const Jet j = jet(u);
        return 2.0 * scale * j.f * j.df;
      },
      [=](double u) {
        const Jet j = jet(u);
        return 2.0 * scale * (j.df * j.df + j.f * j.d2f);
      },
      std::nullopt, "ratchet-cm");
}

RockedRatchetConstants rocked_ratchet_constants(const RockedRatchetParams& p) {
  if (!(p.a_period > 0.0) || !std::isfinite(p.a_period))
    throw InvalidParams("rocked-ratchet: a_period must be positive");
  using std::numbers::pi;
  using std::numbers::sqrt3;
  const double a = p.a_period;
  RockedRatchetConstants c{};
  c.sigma = 1.0 / ((a / (8.0 * pi)) * std::sqrt(sqrt3 / 2.0) * (3.0 + sqrt3));
  c.u0 = (a / (2.0 * pi)) * std::acos((sqrt3 - 1.0) / 2.0);
  // Positive sign: V(n a) = -2 pi / a + R, so R = +2 pi / a zeroes the minima.
  c.offset = 2.0 * pi / a;
  c.curvature_at_minima = 16.0 * (sqrt3 - 1.0) * pi * pi * pi / (a * a * a);
  return c;
}

DoubleWellPotential build_rocked_ratchet(const RockedRatchetParams& p) {
  const RockedRatchetConstants c = rocked_ratchet_constants(p);
  using std::numbers::pi;
  const double q = 2.0 * pi / p.a_period;
  const double sigma = c.sigma;
  const double u0 = c.u0;
  const double offset = c.offset;
  return DoubleWellPotential(
      [=](double u) {
        const double phase = q * (u - u0);
        return sigma * std::sin(phase) + 0.25 * sigma * std::sin(2.0 * phase) + offset;
      },
      0.0, p.a_period,
      [=](double u) {
        const double phase = q * (u - u0);
        return sigma * q * (std::cos(phase) + 0.5 * std::cos(2.0 * phase));
      },
      [=](double u) {
        const double phase = q * (u - u0);
        return -sigma * q * q * (std::sin(phase) + std::sin(2.0 * phase));
      },
      std::nullopt, "rocked-ratchet");
}

}  // namespace kinklab
