#include "kinklab/commands.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "kinklab/errors.hpp"

namespace kinklab {

namespace {

using nlohmann::ordered_json;

/// Raised for a solver failure together with the pipeline stage it hit.
struct StageError {
  std::string stage;
  std::string what;
};

template <class F>
auto run_stage(const std::string& stage, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw StageError{stage, e.what()};
  }
}

std::string fixed17(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw StageError{"output", "cannot create " + dir.string() + ": " + ec.message()};
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw StageError{"output", "cannot write " + path.string()};
  f << text;
  if (!f) throw StageError{"output", "write failed for " + path.string()};
}

/// Columns of equal length written as CSV (17 significant digits) or as a
/// JSON object of arrays.
std::string table_text(const std::vector<std::string>& names,
                       const std::vector<const std::vector<double>*>& cols, OutputFormat format) {
  const std::size_t rows = cols.front()->size();
  if (format == OutputFormat::json) {
    ordered_json j;
    for (std::size_t c = 0; c < names.size(); ++c) j[names[c]] = *cols[c];
    return j.dump(1) + "\n";
  }
  std::ostringstream s;
  s << std::setprecision(17);
  for (std::size_t c = 0; c < names.size(); ++c) s << (c ? "," : "") << names[c];
  s << "\n";
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) s << (c ? "," : "") << (*cols[c])[r];
    s << "\n";
  }
  return s.str();
}

std::string profile_name(double k, OutputFormat format) {
  return "profile_k" + format_k(k) + (format == OutputFormat::csv ? ".csv" : ".json");
}

int report_failure(const StageError& e, std::ostream& err) {
  err << "kinklab: " << e.stage << " failed: " << e.what << "\n";
  return kExitSolverError;
}

PoroParams material_at(const RunConfig& cfg, double p) {
  PoroParams m = cfg.poro->material;
  m.p = p;
  return m;
}

double working_pressure(const RunConfig& cfg) {
  if (cfg.poro->p) return *cfg.poro->p;
  return run_stage("coexistence bracket",
                   [&] { return find_coexistence_pressure(cfg.poro->material); });
}

int poro_phases(const RunConfig& cfg, std::ostream& out) {
  std::vector<double> ps = cfg.poro->p_values;
  if (ps.empty()) {
    const Coexistence co =
        run_stage("coexistence bracket", [&] { return find_coexistence(cfg.poro->material); });
    ps = {0.0, 0.5 * co.p_c, co.p_c, 0.5 * (co.p_c + co.p_co), co.p_co, 1.5 * co.p_co};
  }
  out << "p,phase,m,eps,psi\n" << std::setprecision(17);
  for (double p : ps) {
    const auto phases = run_stage("phase finding", [&] { return find_phases(material_at(cfg, p)); });
    for (const PhasePoint& ph : phases) {
      out << p << "," << (ph.kind == PhaseKind::standard ? "standard" : "fluid_rich") << ","
          << ph.m << "," << ph.eps << "," << ph.psi << "\n";
    }
  }
  return kExitOk;
}

int poro_coexistence(const RunConfig& cfg, std::ostream& out) {
  const Coexistence co =
      run_stage("coexistence bracket", [&] { return find_coexistence(cfg.poro->material); });
  ordered_json j;
  j["p_c"] = co.p_c;
  j["p_co"] = co.p_co;
  j["standard"] = {{"m", co.standard.m}, {"eps", co.standard.eps}, {"psi", co.standard.psi}};
  j["fluid_rich"] = {
      {"m", co.fluid_rich.m}, {"eps", co.fluid_rich.eps}, {"psi", co.fluid_rich.psi}};
  out << j.dump(1) << "\n";
  return kExitOk;
}

int poro_predict(const RunConfig& cfg, std::ostream& out) {
  const PoroParams m = material_at(cfg, working_pressure(cfg));
  const double x = run_stage("degenerate reduction", [&] { return predict_interface(m, cfg.ell); });
  ordered_json j;
  j["p"] = m.p;
  j["x_i_0"] = x;
  out << j.dump(1) << "\n";
  return kExitOk;
}

int poro_kink(const RunConfig& cfg, std::ostream& out) {
  if (cfg.k_values.empty()) throw ConfigError("k_values: must not be empty");
  std::vector<double> ks = cfg.k_values;
  std::sort(ks.begin(), ks.end(), std::greater<>());
  if (std::adjacent_find(ks.begin(), ks.end()) != ks.end())
    throw ConfigError("k_values: entries must be distinct");

  const PoroParams m = material_at(cfg, working_pressure(cfg));
  run_stage("convexity check", [&] {
    check_convexity(m);
    return 0;
  });
  const auto phases = run_stage("phase finding", [&] { return find_phases(m); });
  if (phases.size() < 2)
    throw StageError{"phase finding", "only one phase at p=" + fixed17(m.p)};
  const TwoFieldBoundary bc{phases[0].m, phases[0].eps, phases[1].m, phases[1].eps};
  const FdGrid grid(cfg.grid_n, cfg.ell);
  const auto steps = run_stage("continuation", [&] {
    return continuation_sweep(m, grid, bc, ks, cfg.newton);
  });

  // The sharp-interface prediction exists only for degenerate coefficients.
  std::optional<double> limit;
  try {
    limit = predict_interface(m, cfg.ell);
  } catch (const Error&) {
  }

  ensure_directory(cfg.output_path);
  const std::vector<double> xs = grid.nodes();
  ordered_json rows = ordered_json::array();
  out << "k,eps_crossing,m_crossing,newton_iterations\n" << std::setprecision(17);
  for (const SweepStep& s : steps) {
    const std::vector<double> eps = s.state.eps_with_boundary();
    const std::vector<double> mm = s.state.m_with_boundary();
    write_file(cfg.output_path / profile_name(s.k, cfg.output_format),
               table_text({"x", "eps", "m"}, {&xs, &eps, &mm}, cfg.output_format));
    const auto ce = level_crossings(xs, eps, 0.5 * (bc.eps0 + bc.eps_ell));
    const auto cm = level_crossings(xs, mm, 0.5 * (bc.m0 + bc.m_ell));
    ordered_json row;
    row["k"] = s.k;
    row["eps_crossing"] = ce.empty() ? ordered_json(nullptr) : ordered_json(ce.front());
    row["m_crossing"] = cm.empty() ? ordered_json(nullptr) : ordered_json(cm.front());
    row["x_i_0"] = limit ? ordered_json(*limit) : ordered_json(nullptr);
    row["newton_iterations"] = s.report.iterations;
    row["residual"] = s.report.final_residual_norm;
    rows.push_back(row);
    out << s.k << "," << (ce.empty() ? std::nan("") : ce.front()) << ","
        << (cm.empty() ? std::nan("") : cm.front()) << "," << s.report.iterations << "\n";
  }
  ordered_json summary;
  summary["p"] = m.p;
  summary["k_ratios"] = {cfg.poro->material.k1, cfg.poro->material.k2, cfg.poro->material.k3};
  summary["rows"] = rows;
  write_file(cfg.output_path / "summary.json", summary.dump(1) + "\n");
  return kExitOk;
}

}  // namespace

std::string format_k(double k) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), k);
  return std::string(buf.data(), res.ptr);
}

int cmd_kink(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (!cfg.potential) throw ConfigError("potential: required for kink");
    if (cfg.k_values.empty()) throw ConfigError("k_values: must not be empty");
    const DoubleWellPotential pot = build_potential(*cfg.potential);
    const double a = pot.min_a();
    const double b = pot.min_b();
    const double u1 = a + cfg.u1_fraction * (b - a);
    const double u2 = a + cfg.u2_fraction * (b - a);
    run_stage("potential validation", [&] {
      curvature_at_minima(pot);
      return 0;
    });

    ensure_directory(cfg.output_path);
    ordered_json rows = ordered_json::array();
    out << "k,E_k,log_E_k,x_i_k,x_i_0,weighted_residual,width_u1_u2\n" << std::setprecision(17);
    for (double k : cfg.k_values) {
      const KinkProfile prof = run_stage("kink profile (k=" + format_k(k) + ")", [&] {
        return compute_profile(pot, k, cfg.ell, cfg.grid_n, cfg.kink_tol);
      });
      const LocalizationDiagnostics d = run_stage("diagnostics (k=" + format_k(k) + ")", [&] {
        return localization_diagnostics(pot, k, cfg.ell, u1, u2, cfg.kink_tol);
      });
      write_file(cfg.output_path / profile_name(k, cfg.output_format),
                 table_text({"x", "u"}, {&prof.xs, &prof.us}, cfg.output_format));
      ordered_json row;
      row["k"] = k;
      row["E_k"] = d.e_k;
      row["log_E_k"] = d.log_e_k;
      row["x_i_k"] = d.interface_x;
      row["x_i_0"] = d.predicted_limit;
      row["weighted_residual"] = d.weighted_residual;
      row["width_u1_u2"] = d.width_u1_u2;
      rows.push_back(row);
      out << k << "," << d.e_k << "," << d.log_e_k << "," << d.interface_x << "," << d.predicted_limit << ","
          << d.weighted_residual << "," << d.width_u1_u2 << "\n";
    }
    write_file(cfg.output_path / "summary.json", rows.dump(1) + "\n");
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "kinklab: config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const StageError& e) {
    return report_failure(e, err);
  }
}

int cmd_poro(const RunConfig& cfg, PoroAction action, std::ostream& out, std::ostream& err) {
  try {
    if (!cfg.poro) throw ConfigError("poro: required for the poro command");
    switch (action) {
      case PoroAction::phases:
        return poro_phases(cfg, out);
      case PoroAction::coexistence:
        return poro_coexistence(cfg, out);
      case PoroAction::kink:
        return poro_kink(cfg, out);
      case PoroAction::predict:
        return poro_predict(cfg, out);
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "kinklab: config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const StageError& e) {
    return report_failure(e, err);
  }
}

}  // namespace kinklab
