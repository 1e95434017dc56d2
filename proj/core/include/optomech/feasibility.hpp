#pragma once

// Experimental budget: pulse duration from the cavity, drive strength,
// noise and cooling requirements, doubling times and verdicts.

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "optomech/decoherence.hpp"
#include "optomech/system.hpp"

namespace optomech {

/// Amplitude decay rate pi c / (2 L F), rad/s.
double kappa_from_finesse(double cavity_length_m, double finesse);

/// ln 2 / kappa.
double pulse_duration(double kappa);

/// 0.6 / ((g0 tau)^2 omega_m tau); puts the pulsed-regime epsilon at 0.1.
double recommended_alpha_sq(double g0, double tau_s, double omega_m);

/// N hbar omega_c / tau.
double photons_to_power(double photons, double omega_c, double tau_s);

/// delta_x / x0 = kappa / (sqrt5 g0 sqrt(N_p)).
double readout_precision(double photons, double kappa, double g0);
double readout_photons_for(double delta_x, double kappa, double g0);

/// n_eff = (sqrt(1 + kappa^4 / (g0^4 N^2)) - 1) / 2.
double cooling_occupation(double photons, double kappa, double g0);
double cooling_photons_for(double n_eff, double kappa, double g0);

/// 8 (g0tau alpha)^2 - 1/2.
double occupation_bound(double g0_tau, double alpha);

struct Environment {
  double temperature_k = 0.0;
  double quality_factor = 0.0;
};

struct PowerLimits {
  double drive_w = std::numeric_limits<double>::infinity();
  double readout_w = std::numeric_limits<double>::infinity();
  double cooling_w = std::numeric_limits<double>::infinity();
};

struct ModelBudget {
  std::string name;
  std::string kind;
  double doubling_time_s = 0.0;       // closed form
  double doubling_time_exact_s = 0.0;
  double discriminator = 1.0;         // xi(2)/xi(1)^4 at the doubling time
  bool testable = false;
};

struct FeasibilityReport {
  std::string system_name;
  double kappa = 0.0;
  double tau = 0.0;
  double x0 = 0.0;
  double g0 = 0.0;
  double g0_tau = 0.0;
  double omega_m_tau = 0.0;
  double alpha_sq_max = 0.0;
  double alpha_sq = 0.0;             // operating point
  double epsilon = 0.0;
  double drive_power = 0.0;
  double min_alpha_sq = 0.0;
  double n_th = 0.0;
  double n_th_bound = 0.0;
  double sigma_lo_bound = 0.0;       // rad
  double delta_x_bound = 0.0;        // x0 units, recording decoherence
  double delta_x_entanglement = 0.0; // x0 units, witness
  double readout_photons = 0.0;
  double readout_power = 0.0;
  double cooling_photons = 0.0;
  double cooling_power = 0.0;
  double temperature_k = 0.0;
  double quality_factor = 0.0;
  double standard_lambda = 0.0;
  double standard_doubling_s = 0.0;
  std::vector<ModelBudget> models;
  PowerLimits limits;
  std::map<std::string, bool> verdicts;
};

/// Pure function of its arguments. Sub-operation errors are rethrown with
/// the stage name prepended.
FeasibilityReport plan(const SystemParams& params, const Environment& env,
                       const std::vector<NamedModel>& models, const PowerLimits& limits = {});

/// Recomputes every verdict from the reported numbers; returns the names of
/// verdicts that disagree (empty when consistent).
std::vector<std::string> audit(const FeasibilityReport& report);

std::string render_text(const FeasibilityReport& report);
std::string render_kv(const FeasibilityReport& report);

}  // namespace optomech
