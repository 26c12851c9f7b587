#include "kinklab/poromechanics.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "kinklab/errors.hpp"
#include "kinklab/kinkcore.hpp"
#include "kinklab/roots.hpp"

namespace kinklab {

namespace {

constexpr int kStartsPerAxis = 21;
constexpr double kMergeDistance = 1e-6;
constexpr double kDegeneracyTol = 1e-12;
constexpr int kBranchSteps = 2000;

struct Point2 {
  double m;
  double eps;
};

/// Newton on grad psi = 0; nullopt when the iteration does not settle.
std::optional<Point2> newton_critical(const PoroParams& params, Point2 x) {
  for (int it = 0; it < 100; ++it) {
    const PsiGradient g = psi_gradient(params, x.m, x.eps);
    const PsiHessian h = psi_hessian(params, x.m, x.eps);
    const double det = h.det();
    if (!(std::abs(det) > 1e-300)) return std::nullopt;
    const double dm = -(h.epseps * g.dm - h.meps * g.deps) / det;
    const double de = -(-h.meps * g.dm + h.mm * g.deps) / det;
    x.m += dm;
    x.eps += de;
    if (!std::isfinite(x.m) || !std::isfinite(x.eps) || std::abs(x.m) > 1e6 ||
        std::abs(x.eps) > 1e6)
      return std::nullopt;
    if (std::abs(dm) <= 1e-15 * (1.0 + std::abs(x.m)) &&
        std::abs(de) <= 1e-15 * (1.0 + std::abs(x.eps)))
      break;
  }
  const PsiGradient g = psi_gradient(params, x.m, x.eps);
  const double scale = 1.0 + std::abs(params.p);
  if (std::max(std::abs(g.dm), std::abs(g.deps)) > 1e-11 * scale) return std::nullopt;
  return x;
}

CriticalKind classify(const PsiHessian& h) {
  const double det = h.det();
  const double scale = std::abs(h.mm * h.epseps) + h.meps * h.meps;
  if (std::abs(det) <= 1e-12 * scale) return CriticalKind::degenerate;
  if (det < 0.0) return CriticalKind::saddle;
  return h.mm > 0.0 ? CriticalKind::minimum : CriticalKind::maximum;
}

PhasePoint make_phase(const PoroParams& params, Point2 x, PhaseKind kind) {
  return {x.m, x.eps, psi(params, x.m, x.eps), kind};
}

std::optional<PhasePoint> polish_minimum(const PoroParams& params, const PhasePoint& seed) {
  const auto x = newton_critical(params, {seed.m, seed.eps});
  if (!x || classify(psi_hessian(params, x->m, x->eps)) != CriticalKind::minimum)
    return std::nullopt;
  return make_phase(params, *x, seed.kind);
}

bool has_two_phases(const PoroParams& params) {
  try {
    return find_phases(params).size() >= 2;
  } catch (const NoPhaseFound&) {
    return false;
  }
}

}  // namespace

void check_material(const PoroParams& params) {
  if (!(params.alpha > 0.0) || !(params.a_ratio > 0.0) || !(params.b_couple > 0.0) ||
      !(params.p >= 0.0) || !std::isfinite(params.alpha) || !std::isfinite(params.a_ratio) ||
      !std::isfinite(params.b_couple) || !std::isfinite(params.p))
    throw InvalidParams("poromechanics: need alpha, a, b > 0 and p >= 0");
}

void check_convexity(const PoroParams& params) {
  const double det = params.k1 * params.k3 - params.k2 * params.k2;
  const double scale = std::max(std::abs(params.k1 * params.k3), params.k2 * params.k2);
  if (!(params.k1 > 0.0) || !(params.k3 > 0.0) || det < -kDegeneracyTol * scale) {
    std::ostringstream msg;
    msg << "gradient energy not convex: k1=" << params.k1 << ", k2=" << params.k2
        << ", k3=" << params.k3;
    throw ConvexityViolation(msg.str());
  }
}

PoroParams with_gradient_scale(const PoroParams& params, double scale) {
  PoroParams out = params;
  out.k1 *= scale;
  out.k2 *= scale;
  out.k3 *= scale;
  return out;
}

double psi(const PoroParams& q, double m, double eps) {
  const double b = q.b_couple;
  const double relative = m - b * eps;
  return q.alpha / 12.0 * m * m * (3.0 * m * m - 8.0 * b * eps * m + 6.0 * b * b * eps * eps) +
         q.p * eps + 0.5 * eps * eps + 0.5 * q.a_ratio * relative * relative;
}

PsiGradient psi_gradient(const PoroParams& q, double m, double eps) {
  const double b = q.b_couple;
  const double al = q.alpha;
  const double relative = m - b * eps;
  return {al * m * m * m - 2.0 * al * b * eps * m * m + al * b * b * eps * eps * m +
              q.a_ratio * relative,
          -(2.0 / 3.0) * al * b * m * m * m + al * b * b * eps * m * m + q.p + eps -
              q.a_ratio * b * relative};
}

PsiHessian psi_hessian(const PoroParams& q, double m, double eps) {
  const double b = q.b_couple;
  const double al = q.alpha;
  return {3.0 * al * m * m - 4.0 * al * b * eps * m + al * b * b * eps * eps + q.a_ratio,
          -2.0 * al * b * m * m + 2.0 * al * b * b * eps * m - q.a_ratio * b,
          al * b * b * m * m + 1.0 + q.a_ratio * b * b};
}

std::vector<CriticalPoint> find_critical_points(const PoroParams& params) {
  check_material(params);
  const double m_lo = -0.5;
  const double m_hi = 3.0 * params.b_couple;
  const double e_lo = -3.0;
  const double e_hi = 1.0;
  std::vector<CriticalPoint> found;
  for (int i = 0; i < kStartsPerAxis; ++i) {
    for (int j = 0; j < kStartsPerAxis; ++j) {
      const Point2 start{m_lo + (m_hi - m_lo) * i / (kStartsPerAxis - 1),
                         e_lo + (e_hi - e_lo) * j / (kStartsPerAxis - 1)};
      const auto x = newton_critical(params, start);
      if (!x) continue;
      const bool duplicate = std::any_of(found.begin(), found.end(), [&](const auto& c) {
        return std::hypot(c.m - x->m, c.eps - x->eps) < kMergeDistance;
      });
      if (duplicate) continue;
      const PsiHessian h = psi_hessian(params, x->m, x->eps);
      found.push_back({x->m, x->eps, psi(params, x->m, x->eps), classify(h), h.det()});
    }
  }
  std::sort(found.begin(), found.end(),
            [](const auto& l, const auto& r) { return l.m < r.m; });
  return found;
}

std::vector<PhasePoint> find_phases(const PoroParams& params) {
  std::vector<Point2> minima;
  for (const auto& c : find_critical_points(params))
    if (c.kind == CriticalKind::minimum) minima.push_back({c.m, c.eps});
  if (minima.empty()) throw NoPhaseFound("no local minimum of psi found");
  std::vector<PhasePoint> phases{make_phase(params, minima.front(), PhaseKind::standard)};
  if (minima.size() >= 2)
    phases.push_back(make_phase(params, minima.back(), PhaseKind::fluid_rich));
  return phases;
}

double find_critical_pressure(const PoroParams& params, double p_tol) {
  PoroParams probe = params;
  probe.p = 0.0;
  if (has_two_phases(probe))
    throw BracketFailure("a fluid-rich phase already exists at p = 0");
  double lo = 0.0;
  double hi = 1.0;
  for (probe.p = hi; !has_two_phases(probe); probe.p = hi) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw BracketFailure("no fluid-rich phase up to p = 1e6");
  }
  while (hi - lo > p_tol * hi) {
    probe.p = 0.5 * (lo + hi);
    (has_two_phases(probe) ? hi : lo) = probe.p;
  }
  return 0.5 * (lo + hi);
}

Coexistence find_coexistence(const PoroParams& params, double p_tol) {
  check_material(params);
  const double p_c = find_critical_pressure(params, p_tol);

  // Phases are tracked by Newton continuation in p; the multistart search is
  // the fallback when tracking loses a minimum.
  std::optional<PhasePoint> last_s;
  std::optional<PhasePoint> last_f;
  const auto phases_at = [&](double p) -> std::optional<std::pair<PhasePoint, PhasePoint>> {
    PoroParams q = params;
    q.p = p;
    if (last_s && last_f) {
      const auto s = polish_minimum(q, *last_s);
      const auto f = polish_minimum(q, *last_f);
      if (s && f && std::hypot(s->m - f->m, s->eps - f->eps) > kMergeDistance) {
        last_s = s;
        last_f = f;
        return std::pair{*s, *f};
      }
    }
    const auto phases = find_phases(q);
    if (phases.size() < 2) return std::nullopt;
    last_s = phases[0];
    last_f = phases[1];
    return std::pair{phases[0], phases[1]};
  };
  const auto gap = [&](double p) {
    const auto ph = phases_at(p);
    if (!ph) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "fluid-rich phase lost at p=" << p;
      throw BracketFailure(msg.str());
    }
    return ph->first.psi - ph->second.psi;
  };

  double lo = p_c;
  double offset = std::max(1e-8, 1e-6 * p_c);
  std::optional<std::pair<PhasePoint, PhasePoint>> start;
  for (int tries = 0; tries < 12 && !start; ++tries, offset *= 10.0) {
    lo = p_c + offset;
    start = phases_at(lo);
  }
  if (!start) throw BracketFailure("no two-phase pressure found above the critical pressure");
  const double g_lo = start->first.psi - start->second.psi;
  if (g_lo >= 0.0)
    throw BracketFailure("standard phase is not the stable one just above p_c; no coexistence");

  double hi = lo;
  double g_hi = g_lo;
  for (double step = 0.01 * (1.0 + p_c); g_hi < 0.0; step *= 2.0) {
    lo = hi;
    hi += step;
    if (hi > 1e6) throw BracketFailure("no coexistence pressure below p = 1e6");
    g_hi = gap(hi);
  }
  const double g_lo2 = gap(lo);
  const RootResult r = find_root_bracketed(gap, lo, hi, g_lo2, g_hi, p_tol * hi);

  Coexistence out;
  out.p_c = p_c;
  out.p_co = r.root;
  const auto ph = phases_at(r.root);
  out.standard = ph->first;
  out.fluid_rich = ph->second;
  return out;
}

double find_coexistence_pressure(const PoroParams& params, double p_tol) {
  return find_coexistence(params, p_tol).p_co;
}

PoroParams at_coexistence(const PoroParams& params) {
  PoroParams out = params;
  out.p = find_coexistence_pressure(params);
  return out;
}

double Rotation::xi(double m, double eps) const {
  return (m + lambda * eps) / std::sqrt(1.0 + lambda * lambda);
}
double Rotation::eta(double m, double eps) const {
  return (-lambda * m + eps) / std::sqrt(1.0 + lambda * lambda);
}
double Rotation::m(double xi, double eta) const {
  return (xi - lambda * eta) / std::sqrt(1.0 + lambda * lambda);
}
double Rotation::eps(double xi, double eta) const {
  return (lambda * xi + eta) / std::sqrt(1.0 + lambda * lambda);
}

namespace {

struct RotatedDerivatives {
  double u_xi;
  double u_eta;
  double u_etaeta;
};

RotatedDerivatives rotated(const PoroParams& params, const Rotation& rot, double xi,
                           double eta) {
  const double m = rot.m(xi, eta);
  const double e = rot.eps(xi, eta);
  const double lam = rot.lambda;
  const double r2 = 1.0 + lam * lam;
  const double r = std::sqrt(r2);
  const PsiGradient g = psi_gradient(params, m, e);
  const PsiHessian h = psi_hessian(params, m, e);
  return {(g.dm + lam * g.deps) / r, (-lam * g.dm + g.deps) / r,
          (lam * lam * h.mm - 2.0 * lam * h.meps + h.epseps) / r2};
}

/// Root of dU/deta at fixed xi by Newton from `seed`; requires a strict
/// minimum in eta there (the branch is a graph only while U_etaeta > 0).
std::optional<double> solve_constraint(const PoroParams& params, const Rotation& rot, double xi,
                                       double seed) {
  double eta = seed;
  for (int it = 0; it < 50; ++it) {
    const RotatedDerivatives d = rotated(params, rot, xi, eta);
    if (!(d.u_etaeta > 0.0)) return std::nullopt;
    const double step = d.u_eta / d.u_etaeta;
    eta -= step;
    if (!std::isfinite(eta)) return std::nullopt;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(eta))) {
      if (!(rotated(params, rot, xi, eta).u_etaeta > 0.0)) return std::nullopt;
      return eta;
    }
  }
  return std::nullopt;
}

}  // namespace

double ReducedPotential::eta_on_branch(double xi) const {
  const auto& xs = branch_xi_;
  double seed;
  if (xi <= xs.front()) {
    seed = branch_eta_.front();
  } else if (xi >= xs.back()) {
    seed = branch_eta_.back();
  } else {
    const auto it = std::upper_bound(xs.begin(), xs.end(), xi);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double t = (xi - xs[i]) / (xs[i + 1] - xs[i]);
    seed = branch_eta_[i] + t * (branch_eta_[i + 1] - branch_eta_[i]);
  }
  const auto eta = solve_constraint(params_, rotation_, xi, seed);
  if (!eta) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "constraint branch not found at xi=" << xi;
    throw BranchJump(msg.str());
  }
  return *eta;
}

double ReducedPotential::u_eff(double xi) const {
  const double eta = eta_on_branch(xi);
  return psi(params_, rotation_.m(xi, eta), rotation_.eps(xi, eta)) - u_offset_;
}

double ReducedPotential::du_dxi(double xi) const {
  return rotated(params_, rotation_, xi, eta_on_branch(xi)).u_xi;
}

double ReducedPotential::du_deta(double xi, double eta) const {
  return rotated(params_, rotation_, xi, eta).u_eta;
}

std::pair<double, double> ReducedPotential::fields_at(double zeta) const {
  const double xi = orientation_ * zeta;
  const double eta = eta_on_branch(xi);
  return {rotation_.m(xi, eta), rotation_.eps(xi, eta)};
}

DoubleWellPotential ReducedPotential::as_potential() const {
  const auto self = std::make_shared<const ReducedPotential>(*this);
  const double o = orientation_;
  const auto v = [self, o](double zeta) { return self->u_eff(o * zeta); };
  // Five-point second difference, one Richardson level. u_eff carries
  // rounding noise of order 1e-17, so steps much below 1e-2 (xi_f - xi_s)
  // are dominated by cancellation rather than truncation.
  const double h = 1e-2 * std::abs(xi_f_ - xi_s_);
  const auto d2v = [v, h](double zeta) {
    const auto five_point = [&](double s) {
      return (-v(zeta + 2.0 * s) + 16.0 * v(zeta + s) - 30.0 * v(zeta) + 16.0 * v(zeta - s) -
              v(zeta - 2.0 * s)) /
             (12.0 * s * s);
    };
    const double coarse = five_point(h);
    const double fine = five_point(0.5 * h);
    return (16.0 * fine - coarse) / 15.0;
  };
  return DoubleWellPotential(
      v, o * xi_s_, o * xi_f_, [self, o](double zeta) { return o * self->du_dxi(o * zeta); },
      d2v, std::nullopt, "poro-effective");
}

ReducedPotential reduce_degenerate(const PoroParams& params) {
  check_material(params);
  check_convexity(params);
  const double det = params.k1 * params.k3 - params.k2 * params.k2;
  const double scale = std::max(params.k1 * params.k3, params.k2 * params.k2);
  if (params.k2 == 0.0 || std::abs(det) > kDegeneracyTol * scale) {
    std::ostringstream msg;
    msg << "gradient coefficients are not degenerate: k1 k3 - k2^2 = " << det;
    throw NotDegenerate(msg.str());
  }

  const auto phases = find_phases(params);
  if (phases.size() < 2) throw InvalidParams("reduce_degenerate: only one phase at this pressure");
  const PhasePoint& s = phases[0];
  const PhasePoint& f = phases[1];
  if (std::abs(s.psi - f.psi) > 1e-9 * (1.0 + std::abs(s.psi))) {
    std::ostringstream msg;
    msg << "reduce_degenerate: p=" << params.p << " is not the coexistence pressure (psi gap "
        << s.psi - f.psi << ")";
    throw InvalidParams(msg.str());
  }

  ReducedPotential r;
  r.params_ = params;
  r.rotation_ = Rotation{params.k1 / params.k2};
  const Rotation& rot = r.rotation_;
  r.xi_s_ = rot.xi(s.m, s.eps);
  r.eta_s_ = rot.eta(s.m, s.eps);
  r.xi_f_ = rot.xi(f.m, f.eps);
  r.eta_f_ = rot.eta(f.m, f.eps);
  r.u_offset_ = s.psi;
  r.mass_coeff_ = params.k3 * (1.0 + rot.lambda * rot.lambda);
  r.orientation_ = r.xi_s_ < r.xi_f_ ? 1.0 : -1.0;

  // Tabulate the branch of dU/deta = 0 through the standard phase, 10%
  // beyond each phase, and require it to pass through the fluid-rich phase.
  const double span = std::abs(r.xi_f_ - r.xi_s_);
  const double step = span / kBranchSteps;
  const double lo = std::min(r.xi_s_, r.xi_f_) - 0.1 * span;
  const double hi = std::max(r.xi_s_, r.xi_f_) + 0.1 * span;
  const double between_lo = std::min(r.xi_s_, r.xi_f_);
  const double between_hi = std::max(r.xi_s_, r.xi_f_);

  std::vector<double> up_xi, up_eta, down_xi, down_eta;
  for (int dir : {+1, -1}) {
    auto& xs = dir > 0 ? up_xi : down_xi;
    auto& es = dir > 0 ? up_eta : down_eta;
    double eta = r.eta_s_;
    for (int i = 0;; ++i) {
      const double xi = r.xi_s_ + dir * step * i;
      if (xi < lo - 0.5 * step || xi > hi + 0.5 * step) break;
      const auto next = solve_constraint(params, rot, xi, eta);
      if (!next) {
        if (xi >= between_lo && xi <= between_hi) {
          std::ostringstream msg;
          msg.precision(17);
          msg << "constraint branch through the standard phase ends at xi=" << xi
              << " before reaching the fluid-rich phase";
          throw BranchJump(msg.str());
        }
        break;
      }
      eta = *next;
      xs.push_back(xi);
      es.push_back(eta);
    }
  }
  std::reverse(down_xi.begin(), down_xi.end());
  std::reverse(down_eta.begin(), down_eta.end());
  r.branch_xi_ = std::move(down_xi);
  r.branch_eta_ = std::move(down_eta);
  r.branch_xi_.insert(r.branch_xi_.end(), up_xi.begin() + 1, up_xi.end());
  r.branch_eta_.insert(r.branch_eta_.end(), up_eta.begin() + 1, up_eta.end());

  const double eta_at_f = r.eta_on_branch(r.xi_f_);
  if (std::abs(eta_at_f - r.eta_f_) > 1e-8 * (1.0 + std::abs(r.eta_f_))) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "phases lie on different components of the constraint curve (branch eta="
        << eta_at_f << ", fluid-rich eta=" << r.eta_f_ << ")";
    throw BranchJump(msg.str());
  }
  return r;
}

double predict_interface(const PoroParams& params, double ell) {
  return limit_position(reduce_degenerate(params).as_potential(), ell);
}

}  // namespace kinklab
