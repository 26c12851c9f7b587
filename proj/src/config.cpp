#include "kinklab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kinklab/errors.hpp"

namespace kinklab {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

double number(const json& obj, const std::string& key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return v.get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback,
                 const std::string& where) {
  return obj.contains(key) ? number(obj, key, where) : fallback;
}

int integer_or(const json& obj, const std::string& key, int fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return v.get<int>();
}

std::vector<double> number_list(const json& obj, const std::string& key,
                                const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_array()) throw ConfigError(where + "." + key + ": expected a list of numbers");
  std::vector<double> out;
  for (const json& x : v) {
    if (!x.is_number()) throw ConfigError(where + "." + key + ": expected a list of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

PotentialSpec parse_potential(const json& obj) {
  if (!obj.is_object()) throw ConfigError("potential: expected an object");
  reject_unknown(obj, {"name", "params"}, "potential");
  if (!obj.contains("name") || !obj.at("name").is_string())
    throw ConfigError("potential.name: expected a string");
  PotentialSpec spec;
  spec.name = obj.at("name").get<std::string>();
  if (obj.contains("params")) {
    const json& params = obj.at("params");
    if (!params.is_object()) throw ConfigError("potential.params: expected an object");
    for (const auto& [key, value] : params.items()) {
      if (!value.is_number()) throw ConfigError("potential.params." + key + ": expected a number");
      spec.params[key] = value.get<double>();
    }
  }
  build_potential(spec);  // validates names and values
  return spec;
}

PoroSpec parse_poro(const json& obj) {
  if (!obj.is_object()) throw ConfigError("poro: expected an object");
  reject_unknown(obj, {"alpha", "a_ratio", "b_couple", "k_ratios", "p", "p_values"}, "poro");
  PoroSpec spec;
  PoroParams& m = spec.material;
  m.alpha = number_or(obj, "alpha", m.alpha, "poro");
  m.a_ratio = number_or(obj, "a_ratio", m.a_ratio, "poro");
  m.b_couple = number_or(obj, "b_couple", m.b_couple, "poro");
  m.k1 = m.k2 = m.k3 = 1.0;
  if (obj.contains("k_ratios")) {
    const auto ks = number_list(obj, "k_ratios", "poro");
    if (ks.size() != 3) throw ConfigError("poro.k_ratios: expected [k1, k2, k3]");
    m.k1 = ks[0];
    m.k2 = ks[1];
    m.k3 = ks[2];
  }
  if (obj.contains("p")) spec.p = number(obj, "p", "poro");
  if (obj.contains("p_values")) spec.p_values = number_list(obj, "p_values", "poro");
  try {
    PoroParams probe = m;
    probe.p = spec.p.value_or(0.0);
    check_material(probe);
    for (double p : spec.p_values) {
      probe.p = p;
      check_material(probe);
    }
  } catch (const InvalidParams& e) {
    throw ConfigError(std::string("poro: ") + e.what());
  }
  return spec;
}

}  // namespace

DoubleWellPotential build_potential(const PotentialSpec& spec) {
  const auto param = [&](const std::string& key, double fallback) {
    const auto it = spec.params.find(key);
    return it == spec.params.end() ? fallback : it->second;
  };
  const auto only = [&](const std::set<std::string>& known) {
    for (const auto& [key, value] : spec.params) {
      if (!known.count(key))
        throw ConfigError("potential.params: '" + key + "' is not a parameter of " + spec.name);
    }
  };
  try {
    if (spec.name == "quartic") {
      only({});
      return build_quartic();
    }
    if (spec.name == "ratchet-cm") {
      only({"omega0", "b1", "b2", "u0"});
      RatchetCMParams p;
      p.omega0 = param("omega0", p.omega0);
      p.b1 = param("b1", p.b1);
      p.b2 = param("b2", p.b2);
      p.u0 = param("u0", p.u0);
      return build_ratchet_cm(p);
    }
    if (spec.name == "rocked-ratchet") {
      only({"a_period"});
      RockedRatchetParams p;
      p.a_period = param("a_period", p.a_period);
      return build_rocked_ratchet(p);
    }
  } catch (const InvalidParams& e) {
    throw ConfigError(std::string("potential.params: ") + e.what());
  }
  throw ConfigError("potential.name: unknown potential '" + spec.name +
                    "' (expected quartic, ratchet-cm or rocked-ratchet)");
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config: expected a top-level object");
  reject_unknown(root,
                 {"potential", "poro", "ell", "k_values", "grid_n", "tolerances", "u_levels",
                  "output_path", "output_format"},
                 "config");

  RunConfig cfg;
  try {
    if (root.contains("potential")) cfg.potential = parse_potential(root.at("potential"));
    if (root.contains("poro")) cfg.poro = parse_poro(root.at("poro"));
    cfg.ell = number_or(root, "ell", cfg.ell, "config");
    if (!(cfg.ell > 0.0)) throw ConfigError("ell: must be positive");
    if (root.contains("k_values")) cfg.k_values = number_list(root, "k_values", "config");
    for (double k : cfg.k_values)
      if (!(k > 0.0)) throw ConfigError("k_values: entries must be positive");
    cfg.grid_n = integer_or(root, "grid_n", cfg.grid_n, "config");
    if (cfg.grid_n < 3) throw ConfigError("grid_n: must be at least 3");

    if (root.contains("tolerances")) {
      const json& t = root.at("tolerances");
      if (!t.is_object()) throw ConfigError("tolerances: expected an object");
      reject_unknown(t,
                     {"quad_tol", "root_rel_tol", "max_panels", "newton_tol", "newton_max_iter",
                      "max_halvings"},
                     "tolerances");
      cfg.kink_tol.quad_tol = number_or(t, "quad_tol", cfg.kink_tol.quad_tol, "tolerances");
      cfg.kink_tol.root_rel_tol =
          number_or(t, "root_rel_tol", cfg.kink_tol.root_rel_tol, "tolerances");
      cfg.kink_tol.max_panels = integer_or(t, "max_panels", cfg.kink_tol.max_panels, "tolerances");
      cfg.newton.tol = number_or(t, "newton_tol", cfg.newton.tol, "tolerances");
      cfg.newton.max_iter = integer_or(t, "newton_max_iter", cfg.newton.max_iter, "tolerances");
      cfg.newton.max_halvings =
          integer_or(t, "max_halvings", cfg.newton.max_halvings, "tolerances");
      if (!(cfg.kink_tol.quad_tol > 0.0) || !(cfg.kink_tol.root_rel_tol > 0.0) ||
          cfg.kink_tol.max_panels < 1 || !(cfg.newton.tol > 0.0) || cfg.newton.max_iter < 1 ||
          cfg.newton.max_halvings < 0)
        throw ConfigError("tolerances: values must be positive");
    }

    if (root.contains("u_levels")) {
      const auto levels = number_list(root, "u_levels", "config");
      if (levels.size() != 2 || !(levels[0] > 0.0) || !(levels[0] < levels[1]) ||
          !(levels[1] < 1.0))
        throw ConfigError("u_levels: expected [f1, f2] with 0 < f1 < f2 < 1");
      cfg.u1_fraction = levels[0];
      cfg.u2_fraction = levels[1];
    }

    if (root.contains("output_path")) {
      if (!root.at("output_path").is_string())
        throw ConfigError("output_path: expected a string");
      cfg.output_path = root.at("output_path").get<std::string>();
    }
    if (root.contains("output_format")) {
      const json& f = root.at("output_format");
      if (f == "csv") {
        cfg.output_format = OutputFormat::csv;
      } else if (f == "json") {
        cfg.output_format = OutputFormat::json;
      } else {
        throw ConfigError("output_format: expected \"csv\" or \"json\"");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace kinklab
