#pragma once

// INI-style run configuration.
//
//   [system]       preset or explicit platform keys
//   [environment]  temperature_k, quality_factor
//   [limits]       drive_power_w, readout_power_w, cooling_power_w
//   [plan]         require = comma-separated verdict names
//   [model]        repeatable; name, type and model parameters
//   [run]          subcommand parameters
//
// Every physical key carries its unit in the name. Unknown sections or keys
// are errors. Overrides use "section.key=value" or "model#i.key=value"
// (i counts [model] blocks from 1).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "optomech/decoherence.hpp"
#include "optomech/feasibility.hpp"
#include "optomech/system.hpp"

namespace optomech::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IniEntry {
  std::string key;
  std::string value;
  int line = 0;
};

struct IniSection {
  std::string name;
  int line = 0;
  std::vector<IniEntry> entries;
};

struct IniDocument {
  std::string source;
  std::vector<IniSection> sections;
};

IniDocument parse_ini(std::string_view text, std::string source = "<string>");
IniDocument read_ini(const std::filesystem::path& path);

/// Applies "section.key=value" / "model#i.key=value"; creates the section
/// (or the i-th model block) if it does not exist yet.
void apply_override(IniDocument& doc, std::string_view assignment);

struct ModelSpec {
  std::string name;
  std::string type;
  NamedModel resolved;
  std::vector<std::pair<std::string, std::string>> keys;  // as given
};

struct RunSettings {
  std::int64_t k = 0;
  std::vector<std::int64_t> k_values{0, 1, 10, 100};
  double theta_rad = 1.5707963267948966;
  std::size_t shots = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double delta_x_x0 = 0.0;
  double sigma_lo_rad = 0.0;
  std::string output;
  std::string summary;
  std::string report_kv;
  std::string sweep_var;
  double sweep_start = 0.0;
  double sweep_stop = 0.0;
  std::size_t sweep_points = 0;
  std::optional<double> g0tau;
  std::optional<double> alpha;
  std::optional<double> n_th;
  double t_s = 0.0;
  std::optional<std::size_t> cutoff;
  double eta_max = 3.0;
  std::size_t eta_points = 7;
  std::string model;
};

struct RunConfig {
  std::optional<SystemParams> system;
  std::optional<Environment> environment;
  PowerLimits limits;
  std::vector<std::string> require;
  std::vector<ModelSpec> models;
  RunSettings run;
  std::vector<std::string> echo;  // resolved configuration, one "key = value" per line
};

/// Resolves the document into typed settings. `base_dir` anchors relative
/// table paths.
RunConfig resolve(const IniDocument& doc, const std::filesystem::path& base_dir);

/// Strict locale-independent number parsing; throws ConfigError naming `what`.
double parse_double(std::string_view text, const std::string& what);
std::int64_t parse_int(std::string_view text, const std::string& what);

}  // namespace optomech::cli
