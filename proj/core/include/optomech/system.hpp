#pragma once

// Pulsed optomechanics: the platform description, the kick-and-rotate
// branch amplitudes and the validity bookkeeping of the short-pulse limit.
//
// Units: inputs and outputs are SI. Mechanical quadratures are
// dimensionless with X = (m + m^dag)/sqrt(2), P = (m - m^dag)/(i sqrt(2)),
// so that a physical displacement x corresponds to X = x / (sqrt(2) x0).
// A coherent state |beta> has <X> = sqrt(2) Re beta, <P> = sqrt(2) Im beta
// and both variances equal 1/2. The same convention is used for light.

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace optomech {

using Complex = std::complex<double>;

/// Largest lambda*alpha^2 accepted as "pulsed".
inline constexpr double kMaxPulsedEpsilon = 0.1;

/// Largest g0*tau for which the pulsed-regime state is evaluated at all.
inline constexpr double kMaxG0Tau = 0.5;

struct SystemParams {
  std::string name;
  double mass_kg = 0.0;
  double omega_m = 0.0;          // rad/s
  double cavity_length_m = 0.0;
  double omega_c = 0.0;          // rad/s
  double finesse = 0.0;
  double tau_s = 0.0;            // pulse duration
  double alpha = 0.0;            // real coherent amplitude of the drive
  double n_th = 0.0;             // initial mechanical occupation

  /// Throws DomainError naming the first offending field.
  void validate() const;

  double x0() const;
  double g0() const;
  double g0_tau() const;
  double omega_m_tau() const;
};

double zero_point_spread(double mass_kg, double omega_m);
double coupling_g0(double omega_c, double cavity_length_m, double mass_kg, double omega_m);

/// Average mechanical position spread after the kick, in metres.
/// Requires g0*tau < 0.5.
double position_spread(double alpha, double g0, double tau_s, double x0);

enum class BranchMode {
  Pulsed,  // instantaneous momentum kick i n g0 tau
  Exact,   // finite-duration kick n (g0/omega_m)(1 - e^{-i omega_m tau})
};

/// Mechanical coherent amplitude (units of the zero-point spread) of the
/// n-photon branch a time t after the pulse.
Complex branch_amplitude(std::int64_t n, double g0, double omega_m, double tau_s, double t_s,
                         BranchMode mode = BranchMode::Pulsed);

struct PulsedRegime {
  double epsilon = 0.0;  // lambda alpha^2, lambda = (g0 tau)^2 (omega_m tau) / 6
  bool valid = true;     // epsilon <= kMaxPulsedEpsilon
};

PulsedRegime pulsed_regime(double alpha, double g0, double tau_s, double omega_m);

inline double pulsed_regime_epsilon(double alpha, double g0, double tau_s, double omega_m) {
  return pulsed_regime(alpha, g0, tau_s, omega_m).epsilon;
}

/// First-order infidelity of the Kerr-affected state after the compensating
/// phase shift, |1 + i eps|^2 - 1 = eps^2.
double kerr_infidelity(double epsilon);

/// Phase-space angle by which the position readouts have to be rotated when
/// the pulse is not instantaneous: omega_m tau / 2.
double readout_angle_adjustment(double omega_m, double tau_s);

/// Throws RegimeError unless g0 tau < 0.5 and omega_m tau < 1 and the Kerr
/// parameter stays within kMaxPulsedEpsilon.
void require_pulsed_regime(const SystemParams& params);

/// Named platforms. Known: "trampoline-60ng".
SystemParams preset(std::string_view name);
std::vector<std::string> preset_names();

} // namespace optomech
