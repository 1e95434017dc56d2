#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "optomech/format.hpp"

namespace optomech::cli {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  while (!s.empty()) {
    const auto comma = s.find(',');
    const auto item = trim(s.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

// Key lookup over one section, tracking which keys were consumed.
class Section {
 public:
  Section(const IniSection* sec, std::string label) : sec_(sec), label_(std::move(label)) {}

  std::optional<std::string> str(const std::string& key) {
    allowed_.insert(key);
    if (!sec_) return std::nullopt;
    std::optional<std::string> value;
    for (const auto& e : sec_->entries) {
      if (e.key == key) value = e.value;
    }
    return value;
  }
  std::optional<double> num(const std::string& key) {
    auto v = str(key);
    if (!v) return std::nullopt;
    return parse_double(*v, label_ + " " + key);
  }
  std::optional<std::int64_t> integer(const std::string& key) {
    auto v = str(key);
    if (!v) return std::nullopt;
    return parse_int(*v, label_ + " " + key);
  }
  double required(const std::string& key) {
    auto v = num(key);
    if (!v) throw ConfigError("missing required key " + label_ + " " + key);
    return *v;
  }
  void reject_unknown() const {
    if (!sec_) return;
    for (const auto& e : sec_->entries) {
      if (!allowed_.count(e.key)) {
        throw ConfigError("unknown key '" + e.key + "' in " + label_ + " (line " +
                          std::to_string(e.line) + ")");
      }
    }
  }
  bool present() const { return sec_ != nullptr; }

 private:
  const IniSection* sec_;
  std::string label_;
  std::set<std::string> allowed_;
};

const IniSection* find_unique(const IniDocument& doc, const std::string& name) {
  const IniSection* found = nullptr;
  for (const auto& s : doc.sections) {
    if (s.name != name) continue;
    if (found) {
      throw ConfigError("section [" + name + "] appears more than once (line " +
                        std::to_string(s.line) + ")");
    }
    found = &s;
  }
  return found;
}

std::string fmt(double v) { return format_double(v); }

TabulatedModel read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open table '" + path.string() + "'");
  std::vector<double> x;
  std::vector<double> g;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto comma = t.find(',');
    if (comma == std::string_view::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected 'x_m,gamma_s'");
    }
    const auto a = trim(t.substr(0, comma));
    const auto b = trim(t.substr(comma + 1));
    // Allow a header row.
    if (x.empty() && g.empty() && a == "x_m") continue;
    x.push_back(parse_double(a, path.string() + ":" + std::to_string(lineno)));
    g.push_back(parse_double(b, path.string() + ":" + std::to_string(lineno)));
  }
  try {
    return TabulatedModel(std::move(x), std::move(g));
  } catch (const std::exception& e) {
    throw ConfigError("table '" + path.string() + "': " + e.what());
  }
}

}  // namespace

double parse_double(std::string_view text, const std::string& what) {
  const auto t = trim(text);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (t.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
    throw ConfigError("invalid number '" + std::string(t) + "' for " + what);
  }
  return v;
}

std::int64_t parse_int(std::string_view text, const std::string& what) {
  const auto t = trim(text);
  std::int64_t v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError("invalid integer '" + std::string(t) + "' for " + what);
  }
  return v;
}

IniDocument parse_ini(std::string_view text, std::string source) {
  IniDocument doc;
  doc.source = std::move(source);
  int lineno = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++lineno;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    const std::string where = doc.source + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      const auto name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) throw ConfigError(where + ": empty section name");
      doc.sections.push_back({std::string(name), lineno, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value'");
    if (doc.sections.empty()) throw ConfigError(where + ": key outside of any section");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    doc.sections.back().entries.push_back(
        {std::string(key), std::string(trim(line.substr(eq + 1))), lineno});
  }
  return doc;
}

IniDocument read_ini(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_ini(ss.str(), path.string());
}

void apply_override(IniDocument& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq) {
    throw ConfigError("override '" + std::string(assignment) +
                      "' must look like section.key=value");
  }
  std::string section(trim(assignment.substr(0, dot)));
  const std::string key(trim(assignment.substr(dot + 1, eq - dot - 1)));
  const std::string value(trim(assignment.substr(eq + 1)));
  if (section.empty() || key.empty()) {
    throw ConfigError("override '" + std::string(assignment) + "' has an empty section or key");
  }
  std::size_t index = 1;
  if (const auto hash = section.find('#'); hash != std::string::npos) {
    const auto i = parse_int(std::string_view(section).substr(hash + 1), "override index");
    if (i < 1) throw ConfigError("override index must be >= 1 in '" + std::string(assignment) + "'");
    index = static_cast<std::size_t>(i);
    section = section.substr(0, hash);
  }
  std::size_t seen = 0;
  for (auto& s : doc.sections) {
    if (s.name == section && ++seen == index) {
      s.entries.push_back({key, value, 0});
      return;
    }
  }
  if (seen + 1 != index) {
    throw ConfigError("override '" + std::string(assignment) + "' refers to [" + section +
                      "] block " + std::to_string(index) + " but only " + std::to_string(seen) +
                      " exist");
  }
  doc.sections.push_back({section, 0, {{key, value, 0}}});
}

RunConfig resolve(const IniDocument& doc, const std::filesystem::path& base_dir) {
  static const std::set<std::string> known = {"system", "environment", "limits",
                                              "plan",   "model",       "run"};
  for (const auto& s : doc.sections) {
    if (!known.count(s.name)) {
      throw ConfigError("unknown section [" + s.name + "] (line " + std::to_string(s.line) + ")");
    }
  }
  RunConfig cfg;
  auto& echo = cfg.echo;

  // [system]
  Section sys(find_unique(doc, "system"), "[system]");
  {
    const auto preset_name = sys.str("preset");
    const auto name = sys.str("name");
    const auto mass = sys.num("mass_kg");
    const auto omega_m = sys.num("omega_m_rad_s");
    const auto length = sys.num("cavity_length_m");
    const auto omega_c = sys.num("omega_c_rad_s");
    const auto finesse = sys.num("finesse");
    const auto tau = sys.num("tau_s");
    const auto alpha = sys.num("alpha");
    const auto n_th = sys.num("n_th");
    sys.reject_unknown();
    if (sys.present()) {
      SystemParams p;
      if (preset_name) {
        try {
          p = preset(*preset_name);
        } catch (const std::exception& e) {
          throw ConfigError(std::string("[system] preset: ") + e.what());
        }
      } else {
        p.mass_kg = sys.required("mass_kg");
        p.omega_m = sys.required("omega_m_rad_s");
        p.cavity_length_m = sys.required("cavity_length_m");
        p.omega_c = sys.required("omega_c_rad_s");
        p.finesse = sys.required("finesse");
      }
      if (name) p.name = *name;
      if (mass) p.mass_kg = *mass;
      if (omega_m) p.omega_m = *omega_m;
      if (length) p.cavity_length_m = *length;
      if (omega_c) p.omega_c = *omega_c;
      if (finesse) p.finesse = *finesse;
      try {
        if (tau) {
          p.tau_s = *tau;
        } else if (!preset_name || length || finesse) {
          p.tau_s = pulse_duration(kappa_from_finesse(p.cavity_length_m, p.finesse));
        }
        if (alpha) {
          p.alpha = *alpha;
        } else if (!preset_name || mass || omega_m || length || omega_c || finesse || tau) {
          p.alpha = std::sqrt(recommended_alpha_sq(p.g0(), p.tau_s, p.omega_m));
        }
        if (n_th) p.n_th = *n_th;
        p.validate();
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        throw ConfigError(std::string("[system]: ") + e.what());
      }
      cfg.system = p;
      echo.push_back("[system]");
      if (preset_name) echo.push_back("preset = " + *preset_name);
      echo.push_back("name = " + p.name);
      echo.push_back("mass_kg = " + fmt(p.mass_kg));
      echo.push_back("omega_m_rad_s = " + fmt(p.omega_m));
      echo.push_back("cavity_length_m = " + fmt(p.cavity_length_m));
      echo.push_back("omega_c_rad_s = " + fmt(p.omega_c));
      echo.push_back("finesse = " + fmt(p.finesse));
      echo.push_back("tau_s = " + fmt(p.tau_s));
      echo.push_back("alpha = " + fmt(p.alpha));
      echo.push_back("n_th = " + fmt(p.n_th));
    }
  }

  // [environment]
  Section env(find_unique(doc, "environment"), "[environment]");
  {
    const auto t = env.num("temperature_k");
    const auto q = env.num("quality_factor");
    env.reject_unknown();
    if (env.present()) {
      if (!t) throw ConfigError("missing required key [environment] temperature_k");
      if (!q) throw ConfigError("missing required key [environment] quality_factor");
      if (!(*t > 0.0) || !(*q > 0.0)) {
        throw ConfigError("[environment] temperature_k and quality_factor must be positive");
      }
      cfg.environment = Environment{*t, *q};
      echo.push_back("[environment]");
      echo.push_back("temperature_k = " + fmt(*t));
      echo.push_back("quality_factor = " + fmt(*q));
    }
  }

  // [limits]
  Section lim(find_unique(doc, "limits"), "[limits]");
  {
    const auto d = lim.num("drive_power_w");
    const auto r = lim.num("readout_power_w");
    const auto c = lim.num("cooling_power_w");
    lim.reject_unknown();
    if (d) cfg.limits.drive_w = *d;
    if (r) cfg.limits.readout_w = *r;
    if (c) cfg.limits.cooling_w = *c;
    if (lim.present()) {
      echo.push_back("[limits]");
      echo.push_back("drive_power_w = " + fmt(cfg.limits.drive_w));
      echo.push_back("readout_power_w = " + fmt(cfg.limits.readout_w));
      echo.push_back("cooling_power_w = " + fmt(cfg.limits.cooling_w));
    }
  }

  // [plan]
  Section pl(find_unique(doc, "plan"), "[plan]");
  {
    const auto req = pl.str("require");
    pl.reject_unknown();
    if (req) {
      cfg.require = split_list(*req);
      echo.push_back("[plan]");
      echo.push_back("require = " + *req);
    }
  }

  // [model] blocks
  std::set<std::string> names;
  for (const auto& s : doc.sections) {
    if (s.name != "model") continue;
    const std::string label = "[model] (line " + std::to_string(s.line) + ")";
    Section m(&s, label);
    ModelSpec spec;
    const auto name = m.str("name");
    const auto type = m.str("type");
    const auto lambda = m.num("lambda_m2_s");
    const auto lambda_e = m.num("lambda_e_m2_s");
    const auto target = m.num("doubling_target_s");
    const auto r0 = m.num("r0_m");
    const auto m_nuc = m.num("m_nuc_kg");
    const auto n_nuc = m.num("n_nuclei");
    const auto a_num = m.num("mass_number");
    const auto pref = m.num("prefactor");
    const auto table = m.str("table_path");
    m.reject_unknown();
    if (!type) throw ConfigError("missing required key " + label + " type");
    spec.type = *type;
    spec.name = name ? *name : *type;
    if (!names.insert(spec.name).second) {
      throw ConfigError("duplicate model name '" + spec.name + "'");
    }
    for (const auto& e : s.entries) spec.keys.emplace_back(e.key, e.value);

    auto need_system = [&](const char* why) -> const SystemParams& {
      if (!cfg.system) throw ConfigError(label + " " + why + " needs a [system] block");
      return *cfg.system;
    };
    try {
      if (spec.type == "standard") {
        StandardModel sm;
        if (lambda) {
          sm.lambda = *lambda;
        } else {
          if (!cfg.environment) {
            throw ConfigError(label + " standard model needs lambda_m2_s or an [environment] block");
          }
          const auto& p = need_system("standard model from environment");
          sm.lambda = standard_lambda(p.mass_kg, p.omega_m, cfg.environment->quality_factor,
                                      cfg.environment->temperature_k);
        }
        spec.resolved = {spec.name, sm};
      } else if (spec.type == "ellis") {
        EllisQuadratic em;
        if (lambda_e && target) {
          throw ConfigError(label + " give either lambda_e_m2_s or doubling_target_s, not both");
        }
        if (lambda_e) {
          em.lambda_e = *lambda_e;
        } else if (target) {
          const auto& p = need_system("doubling_target_s");
          em.lambda_e = calibrate_quadratic(*target, p.alpha, p.g0_tau(), p.x0());
        } else {
          throw ConfigError("missing required key " + label + " lambda_e_m2_s");
        }
        spec.resolved = {spec.name, em};
      } else if (spec.type == "diosi-penrose") {
        DiosiPenrose dp;
        if (a_num) {
          const auto& p = need_system("mass_number");
          dp = diosi_penrose_nuclear(p.mass_kg, *a_num);
        }
        if (r0) dp.r0 = *r0;
        if (m_nuc) dp.m_nuc = *m_nuc;
        if (n_nuc) dp.n_nuclei = *n_nuc;
        if (pref && target) {
          throw ConfigError(label + " give either prefactor or doubling_target_s, not both");
        }
        if (pref) dp.prefactor = *pref;
        if (target) {
          const auto& p = need_system("doubling_target_s");
          dp.prefactor = fit_diosi_penrose_prefactor(dp, *target, p.alpha, p.g0_tau(), p.x0());
        }
        if (!(dp.r0 > 0.0)) throw ConfigError("missing required key " + label + " r0_m");
        if (!(dp.m_nuc > 0.0)) throw ConfigError("missing required key " + label + " m_nuc_kg");
        spec.resolved = {spec.name, dp};
      } else if (spec.type == "table") {
        if (!table) throw ConfigError("missing required key " + label + " table_path");
        std::filesystem::path path(*table);
        if (path.is_relative()) path = base_dir / path;
        spec.resolved = {spec.name, read_table(path)};
      } else {
        throw ConfigError(label + " unknown model type '" + spec.type +
                          "' (standard, ellis, diosi-penrose, table)");
      }
      validate(spec.resolved.model);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(label + ": " + e.what());
    }

    echo.push_back("[model]");
    echo.push_back("name = " + spec.name);
    echo.push_back("type = " + spec.type);
    const auto& model = spec.resolved.model;
    if (const auto* sm = std::get_if<StandardModel>(&model)) {
      echo.push_back("lambda_m2_s = " + fmt(sm->lambda));
    } else if (const auto* em = std::get_if<EllisQuadratic>(&model)) {
      echo.push_back("lambda_e_m2_s = " + fmt(em->lambda_e));
    } else if (const auto* dp = std::get_if<DiosiPenrose>(&model)) {
      echo.push_back("r0_m = " + fmt(dp->r0));
      echo.push_back("m_nuc_kg = " + fmt(dp->m_nuc));
      echo.push_back("n_nuclei = " + fmt(dp->n_nuclei));
      echo.push_back("prefactor = " + fmt(dp->prefactor));
    } else if (table) {
      echo.push_back("table_path = " + *table);
    }
    cfg.models.push_back(std::move(spec));
  }

  // [run]
  Section run(find_unique(doc, "run"), "[run]");
  {
    RunSettings& r = cfg.run;
    auto non_negative = [](double v, const std::string& what) {
      if (!(v >= 0.0)) throw ConfigError(what + " must be >= 0");
      return v;
    };
    if (auto v = run.integer("k")) {
      if (*v < 0) throw ConfigError("[run] k must be >= 0");
      r.k = *v;
    }
    if (auto v = run.str("k_values")) {
      r.k_values.clear();
      for (const auto& item : split_list(*v)) {
        const auto k = parse_int(item, "[run] k_values");
        if (k < 0) throw ConfigError("[run] k_values must be >= 0");
        r.k_values.push_back(k);
      }
      if (r.k_values.empty()) throw ConfigError("[run] k_values is empty");
    }
    if (auto v = run.num("theta_rad")) r.theta_rad = *v;
    if (auto v = run.integer("shots")) {
      if (*v < 1) throw ConfigError("[run] shots must be >= 1");
      r.shots = static_cast<std::size_t>(*v);
    }
    if (auto v = run.str("seed")) {
      std::uint64_t seed = 0;
      const auto t = trim(*v);
      const auto res = std::from_chars(t.data(), t.data() + t.size(), seed);
      if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw ConfigError("invalid seed '" + *v + "'");
      }
      r.seed = seed;
    }
    if (auto v = run.integer("threads")) {
      if (*v < 1 || *v > 4096) throw ConfigError("[run] threads must be in [1, 4096]");
      r.threads = static_cast<unsigned>(*v);
    }
    if (auto v = run.num("delta_x_x0")) r.delta_x_x0 = non_negative(*v, "[run] delta_x_x0");
    if (auto v = run.num("sigma_lo_rad")) r.sigma_lo_rad = non_negative(*v, "[run] sigma_lo_rad");
    if (auto v = run.str("output")) r.output = *v;
    if (auto v = run.str("summary")) r.summary = *v;
    if (auto v = run.str("report_kv")) r.report_kv = *v;
    if (auto v = run.str("sweep_var")) r.sweep_var = *v;
    if (auto v = run.num("sweep_start")) r.sweep_start = *v;
    if (auto v = run.num("sweep_stop")) r.sweep_stop = *v;
    if (auto v = run.integer("sweep_points")) {
      if (*v < 1) throw ConfigError("[run] sweep_points must be >= 1");
      r.sweep_points = static_cast<std::size_t>(*v);
    }
    if (auto v = run.num("g0tau")) r.g0tau = non_negative(*v, "[run] g0tau");
    if (auto v = run.num("alpha")) r.alpha = non_negative(*v, "[run] alpha");
    if (auto v = run.num("n_th")) r.n_th = non_negative(*v, "[run] n_th");
    if (auto v = run.num("t_s")) r.t_s = *v;
    if (auto v = run.integer("cutoff")) {
      if (*v < 1) throw ConfigError("[run] cutoff must be >= 1");
      r.cutoff = static_cast<std::size_t>(*v);
    }
    if (auto v = run.num("eta_max")) r.eta_max = non_negative(*v, "[run] eta_max");
    if (auto v = run.integer("eta_points")) {
      if (*v < 1) throw ConfigError("[run] eta_points must be >= 1");
      r.eta_points = static_cast<std::size_t>(*v);
    }
    if (auto v = run.str("model")) r.model = *v;
    run.reject_unknown();

    // Thread count is an execution detail and stays out of the echo so that
    // outputs are identical for every degree of parallelism.
    echo.push_back("[run]");
    if (const auto* sec = find_unique(doc, "run")) {
      std::map<std::string, std::string> last;
      for (const auto& e : sec->entries) last[e.key] = e.value;
      for (const auto& [k, v] : last) {
        if (k != "threads" && k != "seed") echo.push_back(k + " = " + v);
      }
    }
    echo.push_back("seed = " + std::to_string(r.seed));
  }
  return cfg;
}

}  // namespace optomech::cli
