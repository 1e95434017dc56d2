#include "optomech/witness.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "optomech/constants.hpp"
#include "optomech/errors.hpp"
#include "optomech/rng.hpp"
#include "optomech/system.hpp"

namespace optomech {
namespace {

using constants::sqrt2;
constexpr Complex kI{0.0, 1.0};

// Expectations shared by the closed-form and Fock-sum evaluations. Mechanical
// readout noise is already folded into the displacement expectations.
struct RawMoments {
  double o1_mean = 0.0;
  double o1_second = 0.0;
  Complex disp1;        // <D(i g0tau)>  = <exp(i sqrt2 g0tau X_M)>
  Complex disp2;        // <D(2 i g0tau)>
  Complex a;            // <a>
  Complex a2;           // <a^2>
  Complex disp_a_plus;  // <D(+i g0tau) a>
  Complex disp_a_minus; // <D(-i g0tau) a>
  double p2_excess = 0.0;  // <a^dag a> - Re<a^2> e^{-2 sigma^2}

  RawMoments& operator+=(const RawMoments& o) {
    o1_mean += o.o1_mean;
    o1_second += o.o1_second;
    disp1 += o.disp1;
    disp2 += o.disp2;
    a += o.a;
    a2 += o.a2;
    disp_a_plus += o.disp_a_plus;
    disp_a_minus += o.disp_a_minus;
    p2_excess += o.p2_excess;
    return *this;
  }
  RawMoments& operator*=(double f) {
    o1_mean *= f;
    o1_second *= f;
    disp1 *= f;
    disp2 *= f;
    a *= f;
    a2 *= f;
    disp_a_plus *= f;
    disp_a_minus *= f;
    p2_excess *= f;
    return *this;
  }
};

// E[exp(i k e)] for the mechanical readout error e ~ N(0, delta_x^2/2) with
// k = sqrt2 |kappa|.
double readout_damping(double kappa_abs, double delta_x) {
  return std::exp(-0.5 * kappa_abs * kappa_abs * delta_x * delta_x);
}

WitnessMoments to_moments(const RawMoments& raw, const WitnessInputs& in) {
  const double lo1 = std::exp(-0.5 * in.sigma_lo * in.sigma_lo);
  const double alpha = in.alpha;

  const double sin_mean = raw.disp1.imag();
  const double sin_sq = 0.5 * (1.0 - raw.disp2.real());
  const Complex sin_a = (raw.disp_a_plus - raw.disp_a_minus) / (2.0 * kI);
  // <S X^theta> = sqrt2 Re(e^{-i theta} <S a>), theta = pi/2 + LO jitter.
  const double sin_p = sqrt2 * sin_a.imag() * lo1;
  const double p_mean = sqrt2 * raw.a.imag() * lo1;
  const double p_second = 0.5 + raw.p2_excess;

  WitnessMoments m;
  m.mean_o1 = raw.o1_mean;
  m.var_o1 = raw.o1_second - raw.o1_mean * raw.o1_mean;
  m.mean_o2 = sqrt2 * alpha * sin_mean - p_mean;
  const double second_o2 = 2.0 * alpha * alpha * sin_sq - 2.0 * sqrt2 * alpha * sin_p + p_second;
  m.var_o2 = second_o2 - m.mean_o2 * m.mean_o2;
  m.cos_mean = raw.disp1.real();
  m.xl_mean = sqrt2 * raw.a.real() * lo1;
  return m;
}

// ---------------------------------------------------------------------------
// Closed form.
//
// Branch n carries the mirror amplitude gamma_n = n b + nu with
// b = i g0tau e^{-i w t}, nu = mu e^{-i w t}, and the light phase
// e^{i n g0tau Re mu}. For a fixed photon-number offset j between ket and bra
// every matrix element is exp(linear in n) times exp(linear in mu, mu*), so
// the Poisson sum and the thermal average both close:
//   <a^j D(kappa)> = alpha^j e^{j zeta} exp(alpha^2 (e^zeta - 1)) K_j(kappa)
// with zeta = 2i Im(kappa b*) and
//   K_j = exp(-j^2 s^2/2 - |kappa|^2/2 - j b* kappa)
//         * exp(n_th (-j^2 s^2 - 2 j s Im(kappa e^{i w t}) - |kappa|^2)).

Complex poisson_generating(double alpha_sq, double theta) {
  // exp(alpha^2 (e^{i theta} - 1)) with the real part kept accurate.
  const double half = std::sin(0.5 * theta);
  return std::exp(Complex(-2.0 * alpha_sq * half * half, alpha_sq * std::sin(theta)));
}

Complex branch_term(int j, Complex kappa, const WitnessInputs& in) {
  const double s = in.g0_tau;
  const double wt = in.omega_m * in.t_s;
  const Complex b = kI * s * std::polar(1.0, -wt);
  const double zeta_im = 2.0 * (kappa * std::conj(b)).imag();
  const double kappa_sq = std::norm(kappa);
  const double jd = static_cast<double>(j);
  const Complex pure = std::exp(-0.5 * jd * jd * s * s - 0.5 * kappa_sq - jd * std::conj(b) * kappa);
  const double thermal = std::exp(
      in.n_th * (-jd * jd * s * s - 2.0 * jd * s * (kappa * std::polar(1.0, wt)).imag() - kappa_sq));
  return std::pow(in.alpha, j) * std::polar(1.0, jd * zeta_im) *
         poisson_generating(in.alpha * in.alpha, zeta_im) * pure * thermal;
}

RawMoments analytic_raw(const WitnessInputs& in) {
  const double s = in.g0_tau;
  const double alpha_sq = in.alpha * in.alpha;
  const double cos_wt = std::cos(in.omega_m * in.t_s);
  const Complex kappa = kI * s;

  RawMoments r;
  // A1 - B1 on branch n: sqrt2 (n s (cos wt - 1) + Im nu) plus vacuum,
  // thermal and readout noise.
  r.o1_mean = sqrt2 * alpha_sq * s * (cos_wt - 1.0);
  const double spread = sqrt2 * s * (1.0 - cos_wt);
  const double var = 0.5 + in.n_th + 0.5 * in.delta_x * in.delta_x + spread * spread * alpha_sq;
  r.o1_second = var + r.o1_mean * r.o1_mean;

  const double damp1 = readout_damping(s, in.delta_x);
  const double damp2 = readout_damping(2.0 * s, in.delta_x);
  r.disp1 = branch_term(0, kappa, in) * damp1;
  r.disp2 = branch_term(0, 2.0 * kappa, in) * damp2;
  r.a = branch_term(1, 0.0, in);
  r.a2 = branch_term(2, 0.0, in);
  r.disp_a_plus = branch_term(1, kappa, in) * damp1;
  r.disp_a_minus = branch_term(1, -kappa, in) * damp1;
  // <a^2> is real here: alpha^2 exp(-2 s^2 (1 + 2 n_th)); keep the
  // difference with <n> = alpha^2 accurate for large alpha.
  const double exponent = -2.0 * s * s * (1.0 + 2.0 * in.n_th) - 2.0 * in.sigma_lo * in.sigma_lo;
  r.p2_excess = -alpha_sq * std::expm1(exponent);
  return r;
}

// ---------------------------------------------------------------------------
// Explicit photon-number sums for a coherent initial mirror amplitude mu.

Complex compose_phase(Complex a, Complex b) {
  // D(a) D(b) = exp((a b* - a* b)/2) D(a + b)
  return 0.5 * (a * std::conj(b) - std::conj(a) * b);
}

Complex coherent_overlap(Complex x, Complex y) {
  return std::exp(-0.5 * std::norm(x) - 0.5 * std::norm(y) + std::conj(x) * y);
}

Complex displacement_element(Complex x, Complex kappa, Complex y) {
  return std::exp(compose_phase(kappa, y)) * coherent_overlap(x, y + kappa);
}

RawMoments fock_raw(const WitnessInputs& in, std::size_t cutoff, bool dephased, Complex mu) {
  const double s = in.g0_tau;
  const Complex rotation = std::polar(1.0, -in.omega_m * in.t_s);
  const Complex kappa = kI * s;
  const double lo2 = std::exp(-2.0 * in.sigma_lo * in.sigma_lo);
  const double damp1 = readout_damping(s, in.delta_x);
  const double damp2 = readout_damping(2.0 * s, in.delta_x);

  const std::size_t size = cutoff + 1;
  std::vector<Complex> amp(size);
  std::vector<Complex> mirror(size);
  const double log_alpha = in.alpha > 0.0 ? std::log(in.alpha) : -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < size; ++n) {
    const double nd = static_cast<double>(n);
    double magnitude = 0.0;
    if (n == 0) {
      magnitude = std::exp(-0.5 * in.alpha * in.alpha);
    } else if (in.alpha > 0.0) {
      magnitude = std::exp(-0.5 * in.alpha * in.alpha + nd * log_alpha - 0.5 * std::lgamma(nd + 1.0));
    }
    const Complex kick = kI * nd * s;
    amp[n] = magnitude * std::exp(compose_phase(kick, mu));
    mirror[n] = (kick + mu) * rotation;
  }

  RawMoments r;
  double photons = 0.0;
  for (std::size_t n = 0; n < size; ++n) {
    const double w = std::norm(amp[n]);
    const double nd = static_cast<double>(n);
    const double o1 = sqrt2 * mirror[n].imag() - sqrt2 * s * nd;
    r.o1_mean += w * o1;
    r.o1_second += w * (0.5 + o1 * o1);
    r.disp1 += w * displacement_element(mirror[n], kappa, mirror[n]);
    r.disp2 += w * displacement_element(mirror[n], 2.0 * kappa, mirror[n]);
    photons += w * nd;
  }
  r.o1_second += 0.5 * in.delta_x * in.delta_x;
  r.disp1 *= damp1;
  r.disp2 *= damp2;

  if (!dephased) {
    for (std::size_t n = 1; n < size; ++n) {
      const double root = std::sqrt(static_cast<double>(n));
      const Complex coh = std::conj(amp[n - 1]) * amp[n] * root;
      r.a += coh * coherent_overlap(mirror[n - 1], mirror[n]);
      r.disp_a_plus += coh * displacement_element(mirror[n - 1], kappa, mirror[n]);
      r.disp_a_minus += coh * displacement_element(mirror[n - 1], -kappa, mirror[n]);
    }
    for (std::size_t n = 2; n < size; ++n) {
      const double root = std::sqrt(static_cast<double>(n) * static_cast<double>(n - 1));
      r.a2 += std::conj(amp[n - 2]) * amp[n] * root * coherent_overlap(mirror[n - 2], mirror[n]);
    }
    r.disp_a_plus *= damp1;
    r.disp_a_minus *= damp1;
  }
  r.p2_excess = photons - r.a2.real() * lo2;
  return r;
}

void require_cutoff(double alpha, std::size_t cutoff) {
  const double mean = alpha * alpha;
  if (poisson_tail_mass(mean, cutoff) >= 1e-12) {
    throw DomainError("Fock cutoff " + std::to_string(cutoff) +
                      " leaves Poisson tail mass >= 1e-12; need cutoff >= " +
                      std::to_string(required_cutoff(mean)));
  }
}

double log_poisson(double mean, double n) {
  if (mean == 0.0) return n == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return -mean + n * std::log(mean) - std::lgamma(n + 1.0);
}

}  // namespace

void WitnessInputs::validate() const {
  if (!(g0_tau > 0.0)) throw DomainError("g0_tau must be positive");
  if (!(g0_tau < kMaxG0Tau)) {
    throw RegimeError("g0_tau = " + std::to_string(g0_tau) + " is outside the pulsed regime (< 0.5)");
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be >= 0");
  if (!(omega_m > 0.0)) throw DomainError("omega_m must be positive");
  if (!std::isfinite(t_s)) throw DomainError("t must be finite");
  if (!(n_th >= 0.0)) throw DomainError("n_th must be >= 0");
  if (!(delta_x >= 0.0)) throw DomainError("delta_x must be >= 0");
  if (!(sigma_lo >= 0.0)) throw DomainError("sigma_lo must be >= 0");
}

WitnessReport assemble_report(const WitnessMoments& m, double g0_tau, double alpha,
                              CommutatorBound bound) {
  WitnessReport r;
  r.moments = m;
  r.lhs = std::sqrt(std::max(m.var_o1, 0.0) * std::max(m.var_o2, 0.0));
  // |<[P_M, A2]>| = 2 alpha g0tau |<cos>|, |<[B1, P_l]>| = sqrt2 g0tau |<X_l>|.
  if (bound == CommutatorBound::Derived) {
    r.rhs = g0_tau * (alpha * std::abs(m.cos_mean) + std::abs(m.xl_mean) / sqrt2);
  } else {
    r.rhs = 0.5 * g0_tau * (sqrt2 * alpha * std::abs(m.cos_mean) + std::abs(m.xl_mean));
  }
  r.margin = r.rhs - r.lhs;
  r.violated = r.margin > kThresholdSlack;
  return r;
}

WitnessReport witness_analytic(const WitnessInputs& inputs, CommutatorBound bound) {
  inputs.validate();
  return assemble_report(to_moments(analytic_raw(inputs), inputs), inputs.g0_tau, inputs.alpha,
                         bound);
}

WitnessReport witness_fock_oracle(const WitnessInputs& inputs, std::size_t cutoff, bool dephased,
                                  CommutatorBound bound) {
  inputs.validate();
  if (inputs.n_th != 0.0) {
    throw DomainError("witness_fock_oracle covers n_th = 0 only; use thermal_oracle");
  }
  require_cutoff(inputs.alpha, cutoff);
  return assemble_report(to_moments(fock_raw(inputs, cutoff, dephased, 0.0), inputs),
                         inputs.g0_tau, inputs.alpha, bound);
}

ThermalOracleResult thermal_oracle(const WitnessInputs& inputs, std::size_t cutoff,
                                   std::size_t samples, std::uint64_t seed,
                                   double max_margin_std_error, CommutatorBound bound) {
  inputs.validate();
  ThermalOracleResult result;
  if (inputs.n_th == 0.0) {
    WitnessInputs pure = inputs;
    result.report = witness_fock_oracle(pure, cutoff, false, bound);
    result.samples = samples;
    return result;
  }
  constexpr std::size_t kBlocks = 32;
  if (samples < 2 * kBlocks) {
    throw SampleSizeError("thermal_oracle needs at least " + std::to_string(2 * kBlocks) +
                          " samples, got " + std::to_string(samples));
  }
  require_cutoff(inputs.alpha, cutoff);

  const double spread = std::sqrt(0.5 * inputs.n_th);
  std::vector<RawMoments> block_sums(kBlocks);
  std::vector<std::size_t> block_counts(kBlocks, 0);
  for (std::size_t i = 0; i < samples; ++i) {
    ShotStream rng(seed, i, 0x7E57u);
    const Complex mu(spread * rng.normal(), spread * rng.normal());
    const std::size_t block = i * kBlocks / samples;
    block_sums[block] += fock_raw(inputs, cutoff, false, mu);
    ++block_counts[block];
  }

  RawMoments total;
  for (const auto& b : block_sums) total += b;
  RawMoments mean = total;
  mean *= 1.0 / static_cast<double>(samples);
  result.report = assemble_report(to_moments(mean, inputs), inputs.g0_tau, inputs.alpha, bound);
  result.samples = samples;

  // Delete-one-block jackknife.
  std::vector<WitnessReport> partial(kBlocks);
  for (std::size_t b = 0; b < kBlocks; ++b) {
    RawMoments rest = block_sums[b];
    rest *= -1.0;
    rest += total;
    rest *= 1.0 / static_cast<double>(samples - block_counts[b]);
    partial[b] = assemble_report(to_moments(rest, inputs), inputs.g0_tau, inputs.alpha, bound);
  }
  auto jackknife = [&](auto field) {
    double avg = 0.0;
    for (const auto& p : partial) avg += field(p);
    avg /= kBlocks;
    double ss = 0.0;
    for (const auto& p : partial) ss += (field(p) - avg) * (field(p) - avg);
    return std::sqrt(ss * (kBlocks - 1) / kBlocks);
  };
  result.std_errors.mean_o1 = jackknife([](const WitnessReport& r) { return r.moments.mean_o1; });
  result.std_errors.var_o1 = jackknife([](const WitnessReport& r) { return r.moments.var_o1; });
  result.std_errors.mean_o2 = jackknife([](const WitnessReport& r) { return r.moments.mean_o2; });
  result.std_errors.var_o2 = jackknife([](const WitnessReport& r) { return r.moments.var_o2; });
  result.std_errors.cos_mean = jackknife([](const WitnessReport& r) { return r.moments.cos_mean; });
  result.std_errors.xl_mean = jackknife([](const WitnessReport& r) { return r.moments.xl_mean; });
  result.margin_std_error = jackknife([](const WitnessReport& r) { return r.margin; });
  if (result.margin_std_error > max_margin_std_error) {
    throw SampleSizeError("thermal_oracle: margin standard error " +
                          std::to_string(result.margin_std_error) + " exceeds requested " +
                          std::to_string(max_margin_std_error) + "; increase samples");
  }
  return result;
}

double poisson_tail_mass(double mean, std::size_t cutoff) {
  if (mean < 0.0) throw DomainError("Poisson mean must be >= 0");
  if (mean == 0.0) return 0.0;
  const double c = static_cast<double>(cutoff);
  if (c < mean) {
    double head = 0.0;
    for (std::size_t n = 0; n <= cutoff; ++n) head += std::exp(log_poisson(mean, static_cast<double>(n)));
    return std::max(0.0, 1.0 - head);
  }
  double tail = 0.0;
  for (double n = c + 1.0;; n += 1.0) {
    const double term = std::exp(log_poisson(mean, n));
    tail += term;
    if (term <= 1e-20 * tail || term < 1e-300) break;
  }
  return tail;
}

std::size_t required_cutoff(double mean, double tolerance) {
  std::size_t lo = static_cast<std::size_t>(std::floor(mean));
  if (poisson_tail_mass(mean, lo) < tolerance) return lo;
  std::size_t step = 1 + static_cast<std::size_t>(std::sqrt(mean));
  std::size_t hi = lo + step;
  while (poisson_tail_mass(mean, hi) >= tolerance) {
    lo = hi;
    step *= 2;
    hi += step;
  }
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (poisson_tail_mass(mean, mid) < tolerance) hi = mid; else lo = mid;
  }
  return hi;
}

std::size_t default_cutoff(double alpha) {
  const double mean = alpha * alpha;
  const auto guess = static_cast<std::size_t>(std::ceil(mean + 10.0 * std::sqrt(mean)));
  return std::max<std::size_t>({guess, 16, required_cutoff(mean)});
}

double min_alpha_squared(double g0_tau) {
  if (!(g0_tau > 0.0 && g0_tau < kMaxG0Tau)) {
    throw DomainError("min_alpha_squared: g0_tau must lie in (0, 0.5)");
  }
  return 1.0 / (16.0 * g0_tau * g0_tau);
}

NoiseThresholds noise_thresholds(double g0_tau, double alpha) {
  if (!(g0_tau > 0.0)) throw DomainError("noise_thresholds: g0_tau must be positive");
  const double strength = 4.0 * g0_tau * alpha;
  if (!(strength * strength > 10.0)) {
    throw RegimeError("noise_thresholds: readout threshold needs (4 g0tau alpha)^2 > 10, got " +
                      std::to_string(strength * strength));
  }
  return {2.0 * g0_tau, std::sqrt(1.5)};
}

std::vector<WitnessReport> witness_time_sweep(WitnessInputs inputs,
                                              const std::vector<double>& times_s,
                                              CommutatorBound bound) {
  std::vector<WitnessReport> out;
  out.reserve(times_s.size());
  for (double t : times_s) {
    inputs.t_s = t;
    out.push_back(witness_analytic(inputs, bound));
  }
  return out;
}

}  // namespace optomech
