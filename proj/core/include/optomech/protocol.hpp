#pragma once

// Monte Carlo of the record-the-decoherence protocol:
//   (a) entangling pulse, (b) mirror position readout at t = k pi / omega_m,
//   (c) feedback phase correction of the light, (d) homodyne detection.
// Shots are independent; every random draw comes from a counter-based stream
// keyed by (seed, shot index), so output does not depend on thread count.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "optomech/decoherence.hpp"
#include "optomech/rng.hpp"
#include "optomech/system.hpp"
#include "optomech/witness.hpp"

namespace optomech {

struct ProtocolConfig {
  SystemParams params;
  DecoherenceModel model = StandardModel{};
  std::int64_t half_periods = 0;
  double theta = 1.5707963267948966;  // homodyne angle, rad
  std::size_t shots = 1;
  std::uint64_t seed = 0;
  double delta_x = 0.0;   // position readout noise, x0 units
  double sigma_lo = 0.0;  // LO phase noise, rad
  unsigned threads = 1;

  void validate() const;
  PhaseKernel kernel() const;
};

struct ShotRecord {
  double phi_deco = 0.0;       // decoherence phase
  double x_meas = 0.0;         // readout outcome, x0 units
  double phi_feedback = 0.0;   // residual phase error after feedback
  double quadrature_outcome = 0.0;
};

struct MomentEstimate {
  double mean = 0.0;
  double second_moment = 0.0;
  double variance = 0.0;
  double std_error_mean = 0.0;
  double std_error_var = 0.0;
  std::size_t shots = 0;
};

MomentEstimate estimate_moments(std::span<const double> samples);

/// Draws phases with characteristic function xi(eta).
class PhaseSampler {
 public:
  enum class Kind { PointMass, Gaussian, Tabulated };

  static PhaseSampler point_mass();
  static PhaseSampler gaussian(double stddev);

  Kind kind() const { return kind_; }
  double gaussian_stddev() const { return stddev_; }
  /// Probability of drawing exactly zero (saturating models).
  double atom_weight() const { return atom_; }

  /// Always consumes two uniforms from `rng`.
  double draw(ShotStream& rng) const;

 private:
  friend PhaseSampler build_phase_sampler(const PhaseKernel& kernel);

  Kind kind_ = Kind::PointMass;
  double stddev_ = 0.0;
  double atom_ = 1.0;
  std::vector<double> abs_phi_;  // grid on [0, phi_max]
  std::vector<double> cdf_;      // CDF of |phi| for the continuous part
};

/// Quadratic models give an exact Gaussian; other models invert the
/// numerically Fourier-transformed density. Throws ConvergenceError if the
/// transform goes negative beyond 1e-9 of its peak or loses normalization.
PhaseSampler build_phase_sampler(const PhaseKernel& kernel);

struct ProtocolRun {
  std::vector<ShotRecord> records;
  MomentEstimate estimate;
};

ProtocolRun run_protocol(const ProtocolConfig& config);

struct EmpiricalWitness {
  WitnessReport report;       // violated uses the confidence gate below
  WitnessMoments std_errors;
  double margin_std_error = 0.0;
  double confidence_sigmas = 3.0;
};

/// Samples the witness observables at t = k pi / omega_m, each
/// compatible pair from its own block of `config.shots` shots. The photon
/// number is drawn from the Poisson law truncated at `cutoff`. The verdict
/// requires margin > confidence_sigmas * (jackknife standard error).
EmpiricalWitness joint_witness_sampling(const ProtocolConfig& config, std::size_t cutoff,
                                        double confidence_sigmas = 3.0);

}  // namespace optomech
