#include "optomech/feasibility.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "optomech/constants.hpp"
#include "optomech/errors.hpp"
#include "optomech/format.hpp"
#include "optomech/witness.hpp"

namespace optomech {
namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(what) + " must be positive and finite, got " +
                      std::to_string(v));
  }
}

// Runs fn and rethrows any library error with `stage` prepended, keeping
// the error type.
template <class Fn>
auto stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const DomainError& e) {
    throw DomainError(name + ": " + e.what());
  } catch (const RegimeError& e) {
    throw RegimeError(name + ": " + e.what());
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(name + ": " + e.what());
  } catch (const NoDecoherenceError& e) {
    throw NoDecoherenceError(name + ": " + e.what());
  }
}

constexpr double kRel = 1e-12;

bool entanglement_ok(const FeasibilityReport& r) {
  return r.alpha_sq >= r.min_alpha_sq * (1.0 - kRel) && r.n_th <= r.n_th_bound &&
         r.drive_power <= r.limits.drive_w && r.cooling_power <= r.limits.cooling_w;
}

bool recording_ok(const FeasibilityReport& r) { return r.readout_power <= r.limits.readout_w; }

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

double kappa_from_finesse(double cavity_length_m, double finesse) {
  require_positive(cavity_length_m, "cavity_length_m");
  require_positive(finesse, "finesse");
  return constants::pi * constants::c / (2.0 * cavity_length_m * finesse);
}

double pulse_duration(double kappa) {
  require_positive(kappa, "kappa");
  return constants::ln2 / kappa;
}

double recommended_alpha_sq(double g0, double tau_s, double omega_m) {
  require_positive(g0, "g0");
  require_positive(tau_s, "tau_s");
  require_positive(omega_m, "omega_m");
  const double s = g0 * tau_s;
  return 0.6 / (s * s * omega_m * tau_s);
}

double photons_to_power(double photons, double omega_c, double tau_s) {
  require_positive(photons, "photons");
  require_positive(omega_c, "omega_c");
  require_positive(tau_s, "tau_s");
  return photons * constants::hbar * omega_c / tau_s;
}

double readout_precision(double photons, double kappa, double g0) {
  require_positive(photons, "photons");
  require_positive(kappa, "kappa");
  require_positive(g0, "g0");
  return kappa / (std::sqrt(5.0) * g0 * std::sqrt(photons));
}

double readout_photons_for(double delta_x, double kappa, double g0) {
  require_positive(delta_x, "delta_x");
  require_positive(kappa, "kappa");
  require_positive(g0, "g0");
  const double r = kappa / (std::sqrt(5.0) * g0 * delta_x);
  return r * r;
}

double cooling_occupation(double photons, double kappa, double g0) {
  require_positive(photons, "photons");
  require_positive(kappa, "kappa");
  require_positive(g0, "g0");
  const double q = (kappa * kappa) / (g0 * g0 * photons);
  return 0.5 * q * q / (std::sqrt(1.0 + q * q) + 1.0);
}

double cooling_photons_for(double n_eff, double kappa, double g0) {
  require_positive(n_eff, "n_eff");
  require_positive(kappa, "kappa");
  require_positive(g0, "g0");
  // sqrt((2n+1)^2 - 1) without cancellation for small n.
  const double root = std::sqrt(4.0 * n_eff * (n_eff + 1.0));
  return kappa * kappa / (g0 * g0 * root);
}

double occupation_bound(double g0_tau, double alpha) {
  const double s = g0_tau * alpha;
  return 8.0 * s * s - 0.5;
}

FeasibilityReport plan(const SystemParams& params, const Environment& env,
                       const std::vector<NamedModel>& models, const PowerLimits& limits) {
  stage("system", [&] { params.validate(); });
  require_positive(env.temperature_k, "temperature_k");
  require_positive(env.quality_factor, "quality_factor");

  FeasibilityReport r;
  r.system_name = params.name;
  r.limits = limits;
  r.temperature_k = env.temperature_k;
  r.quality_factor = env.quality_factor;
  r.kappa = stage("linewidth", [&] {
    return kappa_from_finesse(params.cavity_length_m, params.finesse);
  });
  r.tau = params.tau_s;
  r.x0 = params.x0();
  r.g0 = params.g0();
  r.g0_tau = params.g0_tau();
  r.omega_m_tau = params.omega_m_tau();
  r.alpha_sq_max = stage("drive", [&] { return recommended_alpha_sq(r.g0, r.tau, params.omega_m); });
  r.alpha_sq = params.alpha > 0.0 ? params.alpha * params.alpha : r.alpha_sq_max;
  const double alpha = std::sqrt(r.alpha_sq);
  r.epsilon = pulsed_regime_epsilon(alpha, r.g0, r.tau, params.omega_m);
  r.drive_power = stage("drive", [&] { return photons_to_power(r.alpha_sq, params.omega_c, r.tau); });

  r.min_alpha_sq = stage("witness", [&] { return min_alpha_squared(r.g0_tau); });
  r.n_th = params.n_th;
  r.n_th_bound = occupation_bound(r.g0_tau, alpha);
  const NoiseThresholds noise = stage("witness", [&] { return noise_thresholds(r.g0_tau, alpha); });
  r.sigma_lo_bound = noise.sigma_max;
  r.delta_x_entanglement = noise.delta_x_ent;
  r.delta_x_bound = 1.0 / (2.0 * r.g0_tau * alpha);

  stage("readout", [&] {
    r.readout_photons = readout_photons_for(r.delta_x_bound, r.kappa, r.g0);
    r.readout_power = photons_to_power(r.readout_photons, params.omega_c, r.tau);
  });
  stage("cooling", [&] {
    if (r.n_th_bound > 0.0) {
      r.cooling_photons = cooling_photons_for(r.n_th_bound, r.kappa, r.g0);
      r.cooling_power = photons_to_power(r.cooling_photons, params.omega_c, r.tau);
    } else {
      r.cooling_photons = std::numeric_limits<double>::infinity();
      r.cooling_power = std::numeric_limits<double>::infinity();
    }
  });

  stage("standard decoherence", [&] {
    r.standard_lambda =
        standard_lambda(params.mass_kg, params.omega_m, env.quality_factor, env.temperature_k);
    r.standard_doubling_s = doubling_time(StandardModel{r.standard_lambda}, alpha, r.g0_tau, r.x0,
                                          params.omega_m)
                                .closed_form_s;
  });

  r.verdicts["pulsed_regime"] = r.epsilon <= kMaxPulsedEpsilon + 1e-12;
  r.verdicts["entanglement_detectable"] = entanglement_ok(r);
  r.verdicts["decoherence_recordable"] = recording_ok(r);

  for (const auto& m : models) {
    ModelBudget b;
    b.name = m.name;
    b.kind = model_kind(m.model);
    stage("model " + m.name, [&] {
      const DoublingTime d = doubling_time(m.model, alpha, r.g0_tau, r.x0, params.omega_m);
      b.doubling_time_s = d.closed_form_s;
      b.doubling_time_exact_s = d.exact_s;
      PhaseKernel kernel{m.model, d.k_continuous, params.omega_m, r.g0_tau, r.x0};
      b.discriminator = dp_discriminator(kernel);
    });
    b.testable = b.doubling_time_s < r.standard_doubling_s;
    r.verdicts[m.name + "_testable"] = b.testable;
    r.models.push_back(b);
  }
  return r;
}

std::vector<std::string> audit(const FeasibilityReport& r) {
  std::map<std::string, bool> expected;
  expected["pulsed_regime"] = r.epsilon <= kMaxPulsedEpsilon + 1e-12;
  expected["entanglement_detectable"] = entanglement_ok(r);
  expected["decoherence_recordable"] = recording_ok(r);
  for (const auto& m : r.models) {
    expected[m.name + "_testable"] = m.doubling_time_s < r.standard_doubling_s;
  }
  std::vector<std::string> bad;
  for (const auto& [name, value] : expected) {
    const auto it = r.verdicts.find(name);
    if (it == r.verdicts.end() || it->second != value) bad.push_back(name);
  }
  for (const auto& [name, value] : r.verdicts) {
    if (!expected.count(name)) bad.push_back(name);
  }
  return bad;
}

std::string render_text(const FeasibilityReport& r) {
  const double deg = 180.0 / constants::pi;
  std::string out;
  auto line = [&](const std::string& label, const std::string& value) {
    std::string l = "  " + label;
    if (l.size() < 34) l.append(34 - l.size(), ' ');
    out += l + value + "\n";
  };
  out += "Feasibility report: " + (r.system_name.empty() ? std::string("(unnamed)") : r.system_name) +
         "\n\nCavity and pulse\n";
  line("linewidth kappa", fmt("%.4g rad/s", r.kappa));
  line("pulse duration tau", fmt("%.3g us", r.tau * 1e6));
  line("zero-point spread x0", fmt("%.4g m", r.x0));
  line("coupling g0", fmt("%.4g rad/s", r.g0));
  line("g0 tau", fmt("%.4g", r.g0_tau));
  line("omega_m tau", fmt("%.4g", r.omega_m_tau));
  out += "\nDrive\n";
  line("max photon number alpha^2", fmt("%.3g", r.alpha_sq_max));
  line("operating alpha^2", fmt("%.3g", r.alpha_sq));
  line("Kerr parameter epsilon", fmt("%.3g", r.epsilon));
  line("drive power", fmt("%.3g uW", r.drive_power * 1e6));
  out += "\nEntanglement\n";
  line("threshold alpha^2", fmt("%.3g", r.min_alpha_sq));
  line("occupation n_th", fmt("%.3g", r.n_th));
  line("occupation bound", fmt("%.3g", r.n_th_bound));
  line("LO phase noise bound", fmt("%.3g rad", r.sigma_lo_bound) + fmt(" (%.3g deg)", r.sigma_lo_bound * deg));
  line("readout noise bound (witness)", fmt("%.3g x0", r.delta_x_entanglement));
  line("cooling photons", fmt("%.3g", r.cooling_photons));
  line("cooling power", fmt("%.3g nW", r.cooling_power * 1e9));
  out += "\nDecoherence recording\n";
  line("position accuracy dx/x0", fmt("%.3g", r.delta_x_bound));
  line("readout photons", fmt("%.3g", r.readout_photons));
  line("readout power", fmt("%.3g uW", r.readout_power * 1e6));
  out += "\nDoubling times\n";
  line("environment", fmt("T = %.3g K", r.temperature_k) + fmt(", Q = %.3g", r.quality_factor));
  line("standard Lambda", fmt("%.3g m^-2 s^-1", r.standard_lambda));
  line("standard", fmt("%.3g s", r.standard_doubling_s));
  for (const auto& m : r.models) {
    line(m.name + " (" + m.kind + ")",
         fmt("%.3g s", m.doubling_time_s) + fmt(", xi(2)/xi(1)^4 = %.4g", m.discriminator));
  }
  out += "\nVerdicts\n";
  for (const auto& [name, ok] : r.verdicts) {
    const std::string suffix = "_testable";
    if (name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      out += "  " + name.substr(0, name.size() - suffix.size()) + ": " +
             (ok ? "testable" : "not testable") + "\n";
    } else {
      out += "  " + name + ": " + (ok ? "pass" : "FAIL") + "\n";
    }
  }
  return out;
}

std::string render_kv(const FeasibilityReport& r) {
  std::string out;
  auto kv = [&](const std::string& k, double v) { out += k + " = " + format_double(v) + "\n"; };
  out += "system = " + r.system_name + "\n";
  kv("kappa_rad_s", r.kappa);
  kv("tau_s", r.tau);
  kv("x0_m", r.x0);
  kv("g0_rad_s", r.g0);
  kv("g0_tau", r.g0_tau);
  kv("omega_m_tau", r.omega_m_tau);
  kv("alpha_sq_max", r.alpha_sq_max);
  kv("alpha_sq", r.alpha_sq);
  kv("epsilon", r.epsilon);
  kv("drive_power_w", r.drive_power);
  kv("min_alpha_sq", r.min_alpha_sq);
  kv("n_th", r.n_th);
  kv("n_th_bound", r.n_th_bound);
  kv("sigma_lo_bound_rad", r.sigma_lo_bound);
  kv("delta_x_bound_x0", r.delta_x_bound);
  kv("delta_x_entanglement_x0", r.delta_x_entanglement);
  kv("readout_photons", r.readout_photons);
  kv("readout_power_w", r.readout_power);
  kv("cooling_photons", r.cooling_photons);
  kv("cooling_power_w", r.cooling_power);
  kv("temperature_k", r.temperature_k);
  kv("quality_factor", r.quality_factor);
  kv("standard_lambda_m2_s", r.standard_lambda);
  kv("standard_doubling_s", r.standard_doubling_s);
  kv("limit_drive_w", r.limits.drive_w);
  kv("limit_readout_w", r.limits.readout_w);
  kv("limit_cooling_w", r.limits.cooling_w);
  for (const auto& m : r.models) {
    out += "model." + m.name + ".kind = " + m.kind + "\n";
    kv("model." + m.name + ".doubling_time_s", m.doubling_time_s);
    kv("model." + m.name + ".doubling_time_exact_s", m.doubling_time_exact_s);
    kv("model." + m.name + ".discriminator", m.discriminator);
  }
  for (const auto& [name, ok] : r.verdicts) {
    out += "verdict." + name + " = " + (ok ? "true" : "false") + "\n";
  }
  return out;
}

}  // namespace optomech
