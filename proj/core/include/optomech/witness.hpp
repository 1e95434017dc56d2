#pragma once

// Separability witness for the light/mirror state produced by one pulse.
//
// Observables (mechanical quadratures in zero-point units, see system.hpp):
//   A1 = P_M                          B1 = sqrt(2) g0tau a^dag a
//   A2 = sqrt(2) alpha sin(sqrt(2) g0tau X_M)   B2 = P_l
// Any separable state obeys
//   sqrt(Var(A1 - B1) Var(A2 - B2)) >= (|<[A1,A2]>| + |<[B1,B2]>|) / 2.
//
// Imperfections:
//   delta_x  classical Gaussian readout noise on the mechanical quadratures,
//            standard deviation delta_x in units of x0 (so delta_x^2 / 2 in
//            units of X_M);
//   sigma_lo Gaussian jitter of the local-oscillator phase;
//   n_th     thermal initial occupation of the mirror.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace optomech {

struct WitnessInputs {
  double g0_tau = 0.0;
  double alpha = 0.0;
  double t_s = 0.0;       // time after the pulse
  double omega_m = 1.0;   // rad/s, only enters through omega_m * t_s
  double n_th = 0.0;
  double delta_x = 0.0;   // x0 units
  double sigma_lo = 0.0;  // rad

  void validate() const;
};

/// Right-hand side of the witness.
enum class CommutatorBound {
  /// Commutators evaluated under the quadrature convention:
  /// g0tau (alpha |<cos>| + |<X_l>| / sqrt(2)).
  Derived,
  /// The form (g0tau / 2)(sqrt(2) alpha |<cos>| + |<X_l>|), smaller by a
  /// factor sqrt(2); still a valid (weaker) separability bound.
  Reduced,
};

/// First and second moments entering the witness.
struct WitnessMoments {
  double mean_o1 = 0.0;   // <A1 - B1>
  double var_o1 = 0.0;    // Var(A1 - B1)
  double mean_o2 = 0.0;   // <A2 - B2>
  double var_o2 = 0.0;    // Var(A2 - B2)
  double cos_mean = 0.0;  // <cos(sqrt(2) g0tau X_M)>
  double xl_mean = 0.0;   // <X_l>
};

struct WitnessReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
  bool violated = false;
  WitnessMoments moments;
};

/// Slack used by every threshold decision.
inline constexpr double kThresholdSlack = 1e-12;

WitnessReport assemble_report(const WitnessMoments& moments, double g0_tau, double alpha,
                              CommutatorBound bound = CommutatorBound::Derived);

/// Closed-form moments under the coherent-branch model (Poisson mixture with
/// coherences of displaced thermal mirror states). Throws RegimeError for
/// g0_tau >= 0.5.
WitnessReport witness_analytic(const WitnessInputs& inputs,
                               CommutatorBound bound = CommutatorBound::Derived);

/// Same quantities by explicit sums over the photon-number basis up to
/// `cutoff`. Requires n_th == 0. With `dephased` all photon-number
/// coherences are dropped, which leaves a separable state.
WitnessReport witness_fock_oracle(const WitnessInputs& inputs, std::size_t cutoff,
                                  bool dephased = false,
                                  CommutatorBound bound = CommutatorBound::Derived);

struct ThermalOracleResult {
  WitnessReport report;
  WitnessMoments std_errors;
  double margin_std_error = 0.0;
  std::size_t samples = 0;
};

/// Averages the Fock oracle over coherent initial mirror amplitudes drawn
/// from the thermal P-function. Standard errors are delete-one-block
/// jackknife estimates. Throws SampleSizeError if fewer than 64 samples are
/// requested or the margin standard error exceeds `max_margin_std_error`.
ThermalOracleResult thermal_oracle(const WitnessInputs& inputs, std::size_t cutoff,
                                   std::size_t samples, std::uint64_t seed,
                                   double max_margin_std_error = 1e300,
                                   CommutatorBound bound = CommutatorBound::Derived);

/// P(N > cutoff) for N ~ Poisson(mean).
double poisson_tail_mass(double mean, std::size_t cutoff);
/// Smallest cutoff whose tail mass is below `tolerance`.
std::size_t required_cutoff(double mean, double tolerance = 1e-12);
/// mean + 10 sqrt(mean), at least 16.
std::size_t default_cutoff(double alpha);

/// alpha^2 above which the ideal state violates the witness:
/// 1 / (16 g0tau^2).
double min_alpha_squared(double g0_tau);

struct NoiseThresholds {
  double sigma_max = 0.0;     // LO phase noise tolerated for entanglement, rad
  double delta_x_ent = 0.0;   // readout noise tolerated for entanglement, x0 units
};

/// (2 g0tau, sqrt(1.5)); the readout part assumes (4 g0tau alpha)^2 > 10.
NoiseThresholds noise_thresholds(double g0_tau, double alpha);

/// Evaluates witness_analytic at each time in `times_s`.
std::vector<WitnessReport> witness_time_sweep(WitnessInputs inputs,
                                              const std::vector<double>& times_s,
                                              CommutatorBound bound = CommutatorBound::Derived);

}  // namespace optomech
