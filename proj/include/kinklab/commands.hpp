#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "kinklab/config.hpp"

namespace kinklab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitSelftestFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitSolverError = 3;

/// One-field kinks for every k: writes profile_k<k>.{csv,json} and
/// summary.json under cfg.output_path and prints the summary table.
int cmd_kink(const RunConfig& cfg, std::ostream& out, std::ostream& err);

enum class PoroAction { phases, coexistence, kink, predict };

int cmd_poro(const RunConfig& cfg, PoroAction action, std::ostream& out, std::ostream& err);

struct SelftestCheck {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
};

/// Fast consistency checks: symmetric cases, curvature identities, golden
/// numbers and small oracle comparisons. Deterministic.
std::vector<SelftestCheck> run_selftest();

int cmd_selftest(std::ostream& out);

/// Shortest decimal text that round-trips k; used in output file names.
std::string format_k(double k);

}  // namespace kinklab
