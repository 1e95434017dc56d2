#include "commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "optomech/constants.hpp"
#include "optomech/errors.hpp"
#include "optomech/format.hpp"
#include "optomech/protocol.hpp"
#include "optomech/witness.hpp"

namespace optomech::cli {
namespace {

std::string header(const std::string& command, const RunConfig& cfg) {
  std::string h = "# optomech " + command + "\n";
  for (const auto& line : cfg.echo) h += "# " + line + "\n";
  return h;
}

// Writes to `path` or, when empty, to `fallback`.
void emit(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    fallback.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << text;
  if (!f) throw ConfigError("write to '" + path + "' failed");
}

const SystemParams& need_system(const RunConfig& cfg, const char* command) {
  if (!cfg.system) throw ConfigError(std::string(command) + " needs a [system] block");
  return *cfg.system;
}

std::vector<double> grid(double start, double stop, std::size_t points) {
  std::vector<double> v(points);
  for (std::size_t i = 0; i < points; ++i) {
    v[i] = points == 1 ? start
                       : start + (stop - start) * static_cast<double>(i) /
                                     static_cast<double>(points - 1);
  }
  return v;
}

std::string f(double v) { return format_double(v); }

}  // namespace

int cmd_plan(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const SystemParams& p = need_system(cfg, "plan");
  if (!cfg.environment) throw ConfigError("plan needs an [environment] block");
  std::vector<NamedModel> models;
  for (const auto& m : cfg.models) models.push_back(m.resolved);
  const FeasibilityReport report = plan(p, *cfg.environment, models, cfg.limits);
  if (const auto bad = audit(report); !bad.empty()) {
    throw std::logic_error("feasibility report failed its self-audit on " + bad.front());
  }

  std::vector<std::string> required = cfg.require;
  if (required.empty()) {
    for (const auto& [name, ok] : report.verdicts) required.push_back(name);
  }
  for (const auto& name : required) {
    if (!report.verdicts.count(name)) {
      std::string known;
      for (const auto& [n, ok] : report.verdicts) known += (known.empty() ? "" : ", ") + n;
      throw ConfigError("[plan] require names unknown verdict '" + name + "' (known: " + known +
                        ")");
    }
  }

  emit(cfg.run.output, header("plan", cfg) + render_text(report), out);
  if (!cfg.run.report_kv.empty()) {
    emit(cfg.run.report_kv, header("plan", cfg) + render_kv(report), out);
  }
  int code = kExitOk;
  for (const auto& name : required) {
    if (!report.verdicts.at(name)) {
      err << "verdict failed: " << name << "\n";
      code = kExitVerdict;
    }
  }
  return code;
}

int cmd_witness(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const RunSettings& r = cfg.run;
  WitnessInputs base;
  const bool sweeps_alpha = r.sweep_var == "alpha" || r.sweep_var == "alpha_sq";
  if (r.g0tau) {
    base.g0_tau = *r.g0tau;
  } else if (cfg.system) {
    base.g0_tau = cfg.system->g0_tau();
  } else if (r.sweep_var != "g0tau") {
    throw ConfigError("witness needs [run] g0tau or a [system] block");
  }
  if (r.alpha) {
    base.alpha = *r.alpha;
  } else if (cfg.system) {
    base.alpha = cfg.system->alpha;
  } else if (!sweeps_alpha) {
    throw ConfigError("witness needs [run] alpha or a [system] block");
  }
  base.omega_m = cfg.system ? cfg.system->omega_m : 1.0;
  base.t_s = r.t_s;
  base.n_th = r.n_th ? *r.n_th : (cfg.system ? cfg.system->n_th : 0.0);
  base.delta_x = r.delta_x_x0;
  base.sigma_lo = r.sigma_lo_rad;

  if (r.sweep_var.empty()) throw ConfigError("witness needs [run] sweep_var");
  if (r.sweep_points == 0) throw ConfigError("witness needs [run] sweep_points");
  auto setter = [&](WitnessInputs& in, double v) {
    if (r.sweep_var == "alpha") {
      in.alpha = v;
    } else if (r.sweep_var == "alpha_sq") {
      if (v < 0.0) throw ConfigError("alpha_sq sweep values must be >= 0");
      in.alpha = std::sqrt(v);
    } else if (r.sweep_var == "g0tau") {
      in.g0_tau = v;
    } else if (r.sweep_var == "t_s") {
      in.t_s = v;
    } else if (r.sweep_var == "n_th") {
      in.n_th = v;
    } else if (r.sweep_var == "delta_x_x0") {
      in.delta_x = v;
    } else if (r.sweep_var == "sigma_lo_rad") {
      in.sigma_lo = v;
    } else {
      throw ConfigError("unknown sweep_var '" + r.sweep_var +
                        "' (alpha, alpha_sq, g0tau, t_s, n_th, delta_x_x0, sigma_lo_rad)");
    }
  };

  std::string text = header("witness", cfg);
  text += "# sweep_var = " + r.sweep_var + "\n";
  text += r.cutoff ? "sweep_var,lhs,rhs,margin,violated,oracle_margin\n"
                   : "sweep_var,lhs,rhs,margin,violated\n";
  for (double v : grid(r.sweep_start, r.sweep_stop, r.sweep_points)) {
    WitnessInputs in = base;
    setter(in, v);
    const WitnessReport rep = witness_analytic(in);
    text += f(v) + "," + f(rep.lhs) + "," + f(rep.rhs) + "," + f(rep.margin) + "," +
            (rep.violated ? "true" : "false");
    if (r.cutoff) {
      double oracle = 0.0;
      if (in.n_th == 0.0) {
        oracle = witness_fock_oracle(in, *r.cutoff).margin;
      } else {
        oracle = thermal_oracle(in, *r.cutoff, 4096, r.seed).report.margin;
      }
      text += "," + f(oracle);
    }
    text += "\n";
  }
  emit(r.output, text, out);
  return kExitOk;
}

int cmd_decohere(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const SystemParams& p = need_system(cfg, "decohere");
  if (cfg.models.empty()) throw ConfigError("decohere needs at least one [model] block");
  const RunSettings& r = cfg.run;
  const double alpha = r.alpha ? *r.alpha : p.alpha;
  const double s = p.g0_tau();
  const double x0 = p.x0();

  std::string text = header("decohere", cfg);
  for (const auto& m : cfg.models) {
    try {
      const DoublingTime d = doubling_time(m.resolved.model, alpha, s, x0, p.omega_m);
      text += "# doubling_time model = " + m.name + ", closed_form_s = " + f(d.closed_form_s) +
              ", exact_s = " + f(d.exact_s) + ", k_continuous = " + f(d.k_continuous) +
              ", k_rounded = " + f(d.k_rounded) + ", rounded_s = " + f(d.rounded_s) + "\n";
    } catch (const NoDecoherenceError& e) {
      text += "# doubling_time model = " + m.name + ", none (" + e.what() + ")\n";
    }
  }
  text += "model,k,eta,xi,mean_theta0,var_theta_pi2,ratio_xi2_xi1_4\n";
  const auto etas = r.eta_points == 1 ? std::vector<double>{r.eta_max}
                                      : grid(0.0, r.eta_max, r.eta_points);
  for (const auto& m : cfg.models) {
    for (const auto k : r.k_values) {
      PhaseKernel kernel{m.resolved.model, static_cast<double>(k), p.omega_m, s, x0};
      const QuadratureMoments at0 = quadrature_moments(kernel, alpha, 0.0);
      const QuadratureMoments at90 = quadrature_moments(kernel, alpha, constants::pi / 2.0);
      const double ratio = dp_discriminator(kernel);
      for (double eta : etas) {
        text += m.name + "," + std::to_string(k) + "," + f(eta) + "," + f(xi(kernel, eta)) + "," +
                f(at0.mean) + "," + f(at90.variance()) + "," + f(ratio) + "\n";
      }
    }
  }
  emit(r.output, text, out);
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const RunSettings& r = cfg.run;
  ProtocolConfig pc;
  pc.params = need_system(cfg, "simulate");
  if (r.alpha) pc.params.alpha = *r.alpha;
  if (r.n_th) pc.params.n_th = *r.n_th;
  std::string model_name = "none";
  if (!r.model.empty()) {
    const auto it = std::find_if(cfg.models.begin(), cfg.models.end(),
                                 [&](const ModelSpec& m) { return m.name == r.model; });
    if (it == cfg.models.end()) throw ConfigError("[run] model '" + r.model + "' is not defined");
    pc.model = it->resolved.model;
    model_name = it->name;
  } else if (cfg.models.size() == 1) {
    pc.model = cfg.models.front().resolved.model;
    model_name = cfg.models.front().name;
  } else if (cfg.models.size() > 1) {
    throw ConfigError("several [model] blocks; choose one with [run] model");
  }
  pc.half_periods = r.k;
  pc.theta = r.theta_rad;
  pc.shots = r.shots;
  pc.seed = r.seed;
  pc.delta_x = r.delta_x_x0;
  pc.sigma_lo = r.sigma_lo_rad;
  pc.threads = r.threads;

  const ProtocolRun result = run_protocol(pc);
  std::string text = header("simulate", cfg);
  text += "# model = " + model_name + "\n";
  text += "shot_index,phi_deco_rad,x_meas_x0,phi_feedback_rad,outcome\n";
  text.reserve(text.size() + result.records.size() * 110);
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    const ShotRecord& rec = result.records[i];
    text += std::to_string(i);
    text += ',';
    text += f(rec.phi_deco);
    text += ',';
    text += f(rec.x_meas);
    text += ',';
    text += f(rec.phi_feedback);
    text += ',';
    text += f(rec.quadrature_outcome);
    text += '\n';
  }
  const MomentEstimate& e = result.estimate;
  std::string summary;
  summary += "shots = " + std::to_string(e.shots) + "\n";
  summary += "mean = " + f(e.mean) + "\n";
  summary += "second_moment = " + f(e.second_moment) + "\n";
  summary += "variance = " + f(e.variance) + "\n";
  summary += "std_error_mean = " + f(e.std_error_mean) + "\n";
  summary += "std_error_var = " + f(e.std_error_var) + "\n";
  std::istringstream lines(summary);
  for (std::string line; std::getline(lines, line);) text += "# summary " + line + "\n";
  emit(r.output, text, out);
  if (!r.summary.empty()) emit(r.summary, header("simulate", cfg) + summary, out);
  if (!r.output.empty()) out << summary;
  return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pulsed optomechanics: entanglement witness, decoherence recording, feasibility"};
  app.name("optomech");
  app.require_subcommand(1);

  struct Options {
    std::string config;
    std::vector<std::string> overrides;
    std::string output;
    int threads = 0;
  };
  Options opt;
  auto add = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", opt.config, "INI configuration file");
    sub->add_option("--set", opt.overrides, "override section.key=value (repeatable)");
    sub->add_option("-o,--output", opt.output, "output path (overrides [run] output)");
    sub->add_option("--threads", opt.threads, "worker threads (does not change results)")
        ->check(CLI::Range(1, 4096));
    return sub;
  };
  auto* plan_cmd = add("plan", "feasibility report for a platform");
  auto* witness_cmd = add("witness", "CSV sweep of the separability witness");
  auto* decohere_cmd = add("decohere", "CSV of phase kernels, moments and doubling times");
  auto* simulate_cmd = add("simulate", "Monte Carlo of the recording protocol");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  try {
    IniDocument doc;
    std::filesystem::path base = std::filesystem::current_path();
    if (!opt.config.empty()) {
      doc = read_ini(opt.config);
      base = std::filesystem::absolute(opt.config).parent_path();
    }
    for (const auto& o : opt.overrides) apply_override(doc, o);
    if (!opt.output.empty()) apply_override(doc, "run.output=" + opt.output);
    RunConfig cfg = resolve(doc, base);
    if (opt.threads > 0) cfg.run.threads = static_cast<unsigned>(opt.threads);

    if (plan_cmd->parsed()) return cmd_plan(cfg, out, err);
    if (witness_cmd->parsed()) return cmd_witness(cfg, out, err);
    if (decohere_cmd->parsed()) return cmd_decohere(cfg, out, err);
    if (simulate_cmd->parsed()) return cmd_simulate(cfg, out, err);
    err << "error: no subcommand\n";
    return kExitError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  } catch (...) {
    err << "error: unknown failure\n";
  }
  return kExitError;
}

}  // namespace optomech::cli
