#include "kinklab/quadrature.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

#include "kinklab/errors.hpp"

namespace kinklab {

namespace {

// Kronrod abscissae on [0, 1]; odd indices are the Gauss-7 nodes.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lo, hi, value, error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel kronrod15(const std::function<double(double)>& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kNodes[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  if (!std::isfinite(kronrod)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "integrand not finite on [" << lo << ", " << hi << "]";
    throw QuadratureFailure(msg.str());
  }
  return {lo, hi, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    std::span<const double> breakpoints,
                                    const QuadratureOptions& options) {
  if (breakpoints.size() < 2) throw QuadratureFailure("need at least two breakpoints");

  std::priority_queue<Panel> queue;
  double total = 0.0;
  double total_error = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i] < breakpoints[i + 1])) {
      if (breakpoints[i] == breakpoints[i + 1]) continue;
      throw QuadratureFailure("breakpoints must be increasing");
    }
    Panel p = kronrod15(f, breakpoints[i], breakpoints[i + 1]);
    total += p.value;
    total_error += p.error;
    queue.push(p);
  }

  int panels = static_cast<int>(queue.size());
  while (total_error > options.abs_tol) {
    if (panels >= options.max_panels || queue.empty()) {
      std::ostringstream msg;
      msg << "adaptive quadrature exhausted " << options.max_panels
          << " panels with error estimate " << total_error;
      throw QuadratureFailure(msg.str());
    }
    Panel worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      // Panel cannot be halved in floating point; its estimate is final.
      throw QuadratureFailure("adaptive quadrature reached machine resolution");
    }
    Panel left = kronrod15(f, worst.lo, mid);
    Panel right = kronrod15(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++panels;
  }

  // Re-sum to shed the cancellation accumulated by incremental updates.
  double value = 0.0;
  double error = 0.0;
  while (!queue.empty()) {
    value += queue.top().value;
    error += queue.top().error;
    queue.pop();
  }
  return {value, error, panels};
}

}  // namespace kinklab
