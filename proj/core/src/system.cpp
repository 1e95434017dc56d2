#include "optomech/system.hpp"

#include <cmath>
#include <string>

#include "optomech/constants.hpp"
#include "optomech/errors.hpp"

namespace optomech {
namespace {

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DomainError(std::string(what) + " must be positive and finite, got " +
                      std::to_string(value));
  }
}

void require_non_negative(double value, const char* what) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw DomainError(std::string(what) + " must be non-negative and finite, got " +
                      std::to_string(value));
  }
}

}  // namespace

void SystemParams::validate() const {
  require_positive(mass_kg, "mass_kg");
  require_positive(omega_m, "omega_m");
  require_positive(cavity_length_m, "cavity_length_m");
  require_positive(omega_c, "omega_c");
  require_positive(finesse, "finesse");
  require_positive(tau_s, "tau_s");
  require_non_negative(alpha, "alpha");
  require_non_negative(n_th, "n_th");
}

double SystemParams::x0() const { return zero_point_spread(mass_kg, omega_m); }

double SystemParams::g0() const { return coupling_g0(omega_c, cavity_length_m, mass_kg, omega_m); }

double SystemParams::g0_tau() const { return g0() * tau_s; }

double SystemParams::omega_m_tau() const { return omega_m * tau_s; }

double zero_point_spread(double mass_kg, double omega_m) {
  require_positive(mass_kg, "mass");
  require_positive(omega_m, "omega_m");
  return std::sqrt(constants::hbar / (2.0 * mass_kg * omega_m));
}

double coupling_g0(double omega_c, double cavity_length_m, double mass_kg, double omega_m) {
  require_positive(omega_c, "omega_c");
  require_positive(cavity_length_m, "cavity length");
  return omega_c / cavity_length_m * zero_point_spread(mass_kg, omega_m);
}

double position_spread(double alpha, double g0, double tau_s, double x0) {
  require_non_negative(alpha, "alpha");
  require_positive(g0, "g0");
  require_positive(tau_s, "tau");
  require_positive(x0, "x0");
  const double g0_tau = g0 * tau_s;
  if (g0_tau >= kMaxG0Tau) {
    throw RegimeError("position_spread: g0*tau = " + std::to_string(g0_tau) +
                      " is outside the pulsed regime (< 0.5)");
  }
  return x0 * std::sqrt(1.0 + 2.0 * g0_tau * g0_tau * alpha * alpha);
}

Complex branch_amplitude(std::int64_t n, double g0, double omega_m, double tau_s, double t_s,
                         BranchMode mode) {
  if (n < 0) throw DomainError("branch_amplitude: photon number must be >= 0");
  const Complex rotation = std::polar(1.0, -omega_m * t_s);
  const double photons = static_cast<double>(n);
  if (mode == BranchMode::Pulsed) {
    return Complex(0.0, photons * g0 * tau_s) * rotation;
  }
  // beta = (g0/omega_m)(1 - e^{-i w tau}) = (2 g0/w) sin(w tau/2) e^{i(pi - w tau)/2};
  // the product form avoids the cancellation in 1 - e^{-i w tau} for small w tau.
  const double half = 0.5 * omega_m * tau_s;
  const Complex beta =
      (2.0 * g0 / omega_m) * std::sin(half) * Complex(std::sin(half), std::cos(half));
  return photons * beta * rotation;
}

PulsedRegime pulsed_regime(double alpha, double g0, double tau_s, double omega_m) {
  const double g0_tau = g0 * tau_s;
  const double eps = alpha * alpha * g0_tau * g0_tau * (omega_m * tau_s) / 6.0;
  return {eps, eps <= kMaxPulsedEpsilon + 1e-12};
}

double kerr_infidelity(double epsilon) { return epsilon * epsilon; }

double readout_angle_adjustment(double omega_m, double tau_s) { return 0.5 * omega_m * tau_s; }

void require_pulsed_regime(const SystemParams& params) {
  params.validate();
  const double g0_tau = params.g0_tau();
  if (!(g0_tau < kMaxG0Tau)) {
    throw RegimeError("g0*tau = " + std::to_string(g0_tau) + " violates g0*tau < 0.5");
  }
  if (!(params.omega_m_tau() < 1.0)) {
    throw RegimeError("omega_m*tau = " + std::to_string(params.omega_m_tau()) +
                      " violates omega_m*tau < 1");
  }
  const auto regime = pulsed_regime(params.alpha, params.g0(), params.tau_s, params.omega_m);
  if (!regime.valid) {
    throw RegimeError("Kerr parameter lambda*alpha^2 = " + std::to_string(regime.epsilon) +
                      " exceeds the pulsed-regime limit " + std::to_string(kMaxPulsedEpsilon));
  }
}

SystemParams preset(std::string_view name) {
  if (name == "trampoline-60ng") {
    SystemParams p;
    p.name = "trampoline-60ng";
    p.mass_kg = 60e-12;
    p.omega_m = 2.0 * constants::pi * 20e3;
    p.cavity_length_m = 0.5e-2;
    p.finesse = 1.5e5;
    // Optical frequency chosen so that g0 = 2 pi x 100 s^-1 (about 1.58 um).
    p.omega_c = 2.0 * constants::pi * 100.0 * p.cavity_length_m / p.x0();
    // tau = ln2 / kappa with kappa = pi c / (2 L F).
    const double kappa = constants::pi * constants::c / (2.0 * p.cavity_length_m * p.finesse);
    p.tau_s = constants::ln2 / kappa;
    // Largest drive keeping lambda alpha^2 at 0.1.
    const double g0_tau = p.g0_tau();
    p.alpha = std::sqrt(0.6 / (g0_tau * g0_tau * p.omega_m_tau()));
    p.n_th = 0.0;
    return p;
  }
  throw DomainError("unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() { return {"trampoline-60ng"}; }

}  // namespace optomech
