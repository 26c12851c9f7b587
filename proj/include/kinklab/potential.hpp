#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kinklab {

using ScalarFunction = std::function<double(double)>;

/// Threshold below which a potential value at a declared minimum counts as zero.
inline constexpr double kTolZero = 1e-9;

/// A double-well energy density V with degenerate zero minima at min_a < min_b.
///
/// Derivatives not supplied analytically are approximated by central
/// differences with one level of Richardson extrapolation. The object is
/// immutable after construction and safe to evaluate from several threads.
class DoubleWellPotential {
 public:
  DoubleWellPotential(ScalarFunction v, double min_a, double min_b,
                      std::optional<ScalarFunction> dv = std::nullopt,
                      std::optional<ScalarFunction> d2v = std::nullopt,
                      std::optional<double> fd_step = std::nullopt,
                      std::string name = "custom");

  double value(double u) const { return v_(u); }
  double first_derivative(double u) const;
  double second_derivative(double u) const;

  /// V''' by a central difference of second_derivative; only used for the
  /// local Taylor model next to the minima.
  double third_derivative(double u) const;

  double min_a() const { return min_a_; }
  double min_b() const { return min_b_; }
  double fd_step() const { return fd_step_; }
  bool has_analytic_first() const { return dv_.has_value(); }
  bool has_analytic_second() const { return d2v_.has_value(); }
  const std::string& name() const { return name_; }

  /// Second-derivative step used by the finite-difference fallback.
  double fd_step_second() const;

 private:
  ScalarFunction v_;
  std::optional<ScalarFunction> dv_;
  std::optional<ScalarFunction> d2v_;
  double min_a_;
  double min_b_;
  double fd_step_;
  std::string name_;
};

struct ValidationCheck {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool passed() const;
  const ValidationCheck* find(const std::string& name) const;
};

/// Checks the double-well hypotheses by sampling: ordered minima, zero
/// values at the minima, positive curvature there, and V > 0 in between.
/// Never throws on a bad potential; the report carries the verdict.
ValidationReport validate(const DoubleWellPotential& pot, int n_samples = 1024);

/// (V''(min_a), V''(min_b)); throws NonPositiveCurvature if either is <= 0.
std::pair<double, double> curvature_at_minima(const DoubleWellPotential& pot);

// Builtins -------------------------------------------------------------------

/// V(u) = (1 - u^2)^2 / 2, minima at -1 and +1, V''(+-1) = 4.
DoubleWellPotential build_quartic();

struct RatchetCMParams {
  double omega0 = 1.0;
  double b1 = 1.0;
  double b2 = 5.0;
  double u0 = 0.5;
};

/// Asymmetric exponential double well with minima at -1 and +1 and
/// V(u0) = 1/omega0^2. The barrier maximum is generally not at u0.
DoubleWellPotential build_ratchet_cm(const RatchetCMParams& p);

struct RockedRatchetParams {
  double a_period = 1.0;
};

/// Closed-form constants of the rocked-ratchet potential for one period.
struct RockedRatchetConstants {
  double sigma;
  double u0;
  double offset;  // additive constant R
  double curvature_at_minima;
};

RockedRatchetConstants rocked_ratchet_constants(const RockedRatchetParams& p);

/// sigma sin(2 pi (u-u0)/a) + sigma/4 sin(4 pi (u-u0)/a) + R restricted to
/// one period, minima at 0 and a_period.
DoubleWellPotential build_rocked_ratchet(const RockedRatchetParams& p);

}  // namespace kinklab
