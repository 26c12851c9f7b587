#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kinklab/bvp.hpp"
#include "kinklab/kinkcore.hpp"
#include "kinklab/poromechanics.hpp"
#include "kinklab/potential.hpp"

namespace kinklab {

enum class OutputFormat { csv, json };

struct PotentialSpec {
  std::string name;                      // quartic | ratchet-cm | rocked-ratchet
  std::map<std::string, double> params;  // builtin-specific, see build_potential
};

/// Material block for `kinklab poro`. Gradient coefficients at scale k are
/// k * k_ratios; p defaults to the coexistence pressure.
struct PoroSpec {
  PoroParams material;
  std::optional<double> p;
  std::vector<double> p_values;  // pressures listed by `poro phases`
};

struct RunConfig {
  std::optional<PotentialSpec> potential;
  std::optional<PoroSpec> poro;
  double ell = 1.0;
  std::vector<double> k_values;
  int grid_n = 2047;
  KinkTolerances kink_tol;
  NewtonOptions newton;
  /// Levels for width_u1_u2 as fractions of b - a.
  double u1_fraction = 0.25;
  double u2_fraction = 0.75;
  std::filesystem::path output_path = "kinklab-out";
  OutputFormat output_format = OutputFormat::csv;
};

/// Parses a JSON config; relative output paths are kept as given.
/// Throws ConfigError with the offending key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Builtin potential from a spec. Throws ConfigError on unknown names or keys.
DoubleWellPotential build_potential(const PotentialSpec& spec);

}  // namespace kinklab
