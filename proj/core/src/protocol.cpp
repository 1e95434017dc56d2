#include "optomech/protocol.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "optomech/constants.hpp"
#include "optomech/errors.hpp"

namespace optomech {
namespace {

using constants::pi;
using constants::sqrt2;

constexpr std::uint32_t kTagProtocol = 1;
constexpr std::uint32_t kTagSetting1 = 2;
constexpr std::uint32_t kTagSetting2 = 3;
constexpr std::uint32_t kTagSetting3 = 4;

// Neumaier compensated sum.
class Accumulator {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      c_ += (sum_ - t) + v;
    } else {
      c_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Simpson weights on an even number of intervals.
double simpson_weight(std::size_t j, std::size_t n) {
  if (j == 0 || j == n) return 1.0 / 3.0;
  return (j % 2 == 1) ? 4.0 / 3.0 : 2.0 / 3.0;
}

// Inverse-CDF sampler for a Poisson law restricted to the window that
// carries all but ~1e-15 of the mass below `cutoff`.
class PoissonTable {
 public:
  PoissonTable(double mean, std::size_t cutoff) {
    if (mean == 0.0) {
      cdf_ = {1.0};
      return;
    }
    const double sd = std::sqrt(mean);
    const double lo = std::floor(mean - 9.0 * sd - 10.0);
    first_ = lo > 0.0 ? static_cast<std::size_t>(lo) : 0;
    first_ = std::min(first_, cutoff);
    cdf_.reserve(cutoff - first_ + 1);
    double acc = 0.0;
    for (std::size_t n = first_; n <= cutoff; ++n) {
      const double nn = static_cast<double>(n);
      acc += std::exp(nn * std::log(mean) - mean - std::lgamma(nn + 1.0));
      cdf_.push_back(acc);
    }
    for (double& c : cdf_) c /= acc;
  }

  std::size_t draw(double u) const {
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    const auto idx = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - cdf_.begin(), static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
    return first_ + idx;
  }

 private:
  std::size_t first_ = 0;
  std::vector<double> cdf_;
};

}  // namespace

void ProtocolConfig::validate() const {
  params.validate();
  optomech::validate(model);
  if (half_periods < 0) throw DomainError("half_periods must be >= 0");
  if (!std::isfinite(theta)) throw DomainError("theta must be finite");
  if (shots < 1) throw DomainError("shots must be >= 1");
  if (!(delta_x >= 0.0) || !std::isfinite(delta_x)) throw DomainError("delta_x must be >= 0");
  if (!(sigma_lo >= 0.0) || !std::isfinite(sigma_lo)) throw DomainError("sigma_lo must be >= 0");
}

PhaseKernel ProtocolConfig::kernel() const {
  PhaseKernel k;
  k.model = model;
  k.half_periods = static_cast<double>(half_periods);
  k.omega_m = params.omega_m;
  k.g0_tau = params.g0_tau();
  k.x0 = params.x0();
  return k;
}

MomentEstimate estimate_moments(std::span<const double> samples) {
  MomentEstimate e;
  e.shots = samples.size();
  if (samples.empty()) return e;
  const double n = static_cast<double>(samples.size());
  Accumulator s1;
  for (double v : samples) s1.add(v);
  e.mean = s1.value() / n;
  Accumulator c2;
  Accumulator c4;
  for (double v : samples) {
    const double d = v - e.mean;
    c2.add(d * d);
    c4.add(d * d * d * d);
  }
  e.variance = c2.value() / n;
  e.second_moment = e.variance + e.mean * e.mean;
  const double m4 = c4.value() / n;
  e.std_error_mean = std::sqrt(e.variance / n);
  e.std_error_var = std::sqrt(std::max(m4 - e.variance * e.variance, 0.0) / n);
  return e;
}

PhaseSampler PhaseSampler::point_mass() { return PhaseSampler{}; }

PhaseSampler PhaseSampler::gaussian(double stddev) {
  PhaseSampler s;
  s.kind_ = Kind::Gaussian;
  s.stddev_ = stddev;
  s.atom_ = 0.0;
  return s;
}

double PhaseSampler::draw(ShotStream& rng) const {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  switch (kind_) {
    case Kind::PointMass:
      return 0.0;
    case Kind::Gaussian:
      return stddev_ * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
    case Kind::Tabulated:
      break;
  }
  if (u1 < atom_) return 0.0;
  const double u = (u1 - atom_) / (1.0 - atom_);
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  double phi = abs_phi_.back();
  if (it == cdf_.begin()) {
    phi = abs_phi_.front();
  } else if (it != cdf_.end()) {
    const auto i = static_cast<std::size_t>(it - cdf_.begin());
    const double c0 = cdf_[i - 1];
    const double c1 = cdf_[i];
    const double w = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
    phi = abs_phi_[i - 1] + w * (abs_phi_[i] - abs_phi_[i - 1]);
  }
  return u2 < 0.5 ? -phi : phi;
}

PhaseSampler build_phase_sampler(const PhaseKernel& kernel) {
  kernel.validate();
  if (kernel.half_periods == 0.0) return PhaseSampler::point_mass();
  if (const auto c = quadratic_kernel_exponent(kernel)) {
    if (*c == 0.0) return PhaseSampler::point_mass();
    return PhaseSampler::gaussian(std::sqrt(2.0 * *c));
  }

  double atom = 0.0;
  if (const auto sat = saturation_rate(kernel.model)) {
    atom = std::exp(-kernel.half_periods * pi / kernel.omega_m * *sat);
  }
  const double weight = 1.0 - atom;
  if (weight < 1e-12) return PhaseSampler::point_mass();

  // Characteristic function of the continuous part, normalized to r(0) = 1.
  auto r = [&](double eta) { return (xi(kernel, eta) - atom) / weight; };

  constexpr double kTail = 1e-12;
  double eta_max = 1.0;
  int guard = 0;
  while (r(eta_max) < kTail && guard++ < 400) eta_max *= 0.5;
  double lo = 0.0;
  double hi = eta_max;
  guard = 0;
  while (r(hi) > 0.5) {
    if (guard++ > 400) throw ConvergenceError("phase kernel does not decay; cannot tabulate");
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (r(mid) > 0.5 ? lo : hi) = mid;
  }
  const double eta_half = 0.5 * (lo + hi);

  // Slowly decaying (saturating) kernels are cut at kEtaCap * eta_half under a
  // Gaussian taper, i.e. the density is convolved with a narrow Gaussian.
  constexpr double kEtaCap = 1000.0;
  const double eta_cap = kEtaCap * eta_half;
  eta_max = std::max(eta_max, eta_half);
  guard = 0;
  while (eta_max < eta_cap && r(eta_max) >= kTail) {
    if (guard++ > 400) throw ConvergenceError("phase kernel does not decay; cannot tabulate");
    eta_max *= 2.0;
  }
  const bool tapered = eta_max >= eta_cap;
  eta_max = std::min(eta_max, eta_cap);
  const double taper_width = eta_cap / 8.0;

  const double phi_max = 40.0 / eta_half;
  constexpr std::size_t kPhi = 4096;
  std::size_t n_eta = static_cast<std::size_t>(std::ceil(eta_max * phi_max / 0.25));
  n_eta = std::clamp<std::size_t>(n_eta + (n_eta % 2), 8192, std::size_t{1} << 18);
  const double h = eta_max / static_cast<double>(n_eta);
  std::vector<double> weighted(n_eta + 1);
  for (std::size_t j = 0; j <= n_eta; ++j) {
    const double eta = h * static_cast<double>(j);
    double w = simpson_weight(j, n_eta) * h * r(eta);
    if (tapered) w *= std::exp(-0.5 * (eta / taper_width) * (eta / taper_width));
    weighted[j] = w;
  }

  // Quadratically spaced |phi| grid resolves a sharp peak at zero.
  std::vector<double> phi(kPhi + 1);
  std::vector<double> density(kPhi + 1);
  for (std::size_t i = 0; i <= kPhi; ++i) {
    const double t = static_cast<double>(i) / kPhi;
    phi[i] = phi_max * t * t;
  }
  constexpr std::size_t kRestart = 512;
  for (std::size_t i = 0; i <= kPhi; ++i) {
    Accumulator acc;
    const double step = 2.0 * std::cos(h * phi[i]);
    double prev = 0.0;
    double cur = 0.0;
    for (std::size_t j = 0; j <= n_eta; ++j) {
      if (j % kRestart == 0) {
        cur = std::cos(h * static_cast<double>(j) * phi[i]);
        prev = std::cos(h * (static_cast<double>(j) - 1.0) * phi[i]);
      } else {
        const double next = step * cur - prev;
        prev = cur;
        cur = next;
      }
      acc.add(weighted[j] * cur);
    }
    density[i] = acc.value() / pi;
  }
  const double peak = *std::max_element(density.begin(), density.end());
  const double floor = std::min(0.0, *std::min_element(density.begin(), density.end()));
  if (floor < -1e-9 * peak) {
    throw ConvergenceError("phase density from xi(eta) is negative (min " + std::to_string(floor) +
                           ", peak " + std::to_string(peak) + ")");
  }
  std::vector<double> cdf(kPhi + 1, 0.0);
  for (std::size_t i = 1; i <= kPhi; ++i) {
    const double a = std::max(density[i - 1], 0.0);
    const double b = std::max(density[i], 0.0);
    cdf[i] = cdf[i - 1] + 0.5 * (a + b) * (phi[i] - phi[i - 1]);
  }
  const double mass = 2.0 * cdf.back();
  if (std::abs(mass - 1.0) > 1e-3) {
    throw ConvergenceError("phase density integrates to " + std::to_string(mass) +
                           " instead of 1");
  }
  for (double& c : cdf) c /= cdf.back();

  PhaseSampler s;
  s.kind_ = PhaseSampler::Kind::Tabulated;
  s.atom_ = atom;
  s.abs_phi_ = std::move(phi);
  s.cdf_ = std::move(cdf);
  return s;
}

ProtocolRun run_protocol(const ProtocolConfig& config) {
  config.validate();
  require_pulsed_regime(config.params);
  const PhaseSampler sampler = build_phase_sampler(config.kernel());

  const double s = config.params.g0_tau();
  const double alpha = config.params.alpha;
  const double x_sd = std::sqrt(1.0 + 2.0 * config.params.n_th);
  const double sign = (config.half_periods % 2 == 0) ? 1.0 : -1.0;

  ProtocolRun run;
  run.records.resize(config.shots);
  parallel_for(config.shots, config.threads, [&](std::size_t i) {
    ShotStream rng(config.seed, i, kTagProtocol);
    ShotRecord& rec = run.records[i];
    rec.phi_deco = sampler.draw(rng);
    const double x_true = rng.normal(0.0, x_sd);
    const double e_x = rng.normal(0.0, config.delta_x);
    rec.x_meas = x_true + e_x;
    rec.phi_feedback = sign * sqrt2 * s * (e_x / sqrt2);
    const double phi_lo = rng.normal(0.0, config.sigma_lo);
    const double mean =
        sqrt2 * alpha * std::cos(config.theta - rec.phi_deco - rec.phi_feedback - phi_lo);
    rec.quadrature_outcome = rng.normal(mean, std::sqrt(0.5));
  });

  std::vector<double> outcomes(config.shots);
  for (std::size_t i = 0; i < config.shots; ++i) outcomes[i] = run.records[i].quadrature_outcome;
  run.estimate = estimate_moments(outcomes);
  return run;
}

EmpiricalWitness joint_witness_sampling(const ProtocolConfig& config, std::size_t cutoff,
                                        double confidence_sigmas) {
  config.validate();
  if (config.shots < 1000) {
    throw SampleSizeError("joint witness sampling needs at least 1000 shots per setting, got " +
                          std::to_string(config.shots));
  }
  if (!(confidence_sigmas >= 0.0)) throw DomainError("confidence_sigmas must be >= 0");
  const SystemParams& p = config.params;
  const double s = p.g0_tau();
  if (!(s < kMaxG0Tau)) {
    throw RegimeError("g0*tau = " + std::to_string(s) + " outside the pulsed-state model");
  }
  const double alpha = p.alpha;
  const double mean_n = alpha * alpha;
  if (poisson_tail_mass(mean_n, cutoff) > 1e-12) {
    throw DomainError("photon-number cutoff " + std::to_string(cutoff) + " too small; need >= " +
                      std::to_string(required_cutoff(mean_n)));
  }
  const PoissonTable poisson(mean_n, cutoff);
  const double sign = (config.half_periods % 2 == 0) ? 1.0 : -1.0;
  const double mu_sd = std::sqrt(p.n_th / 2.0);
  const double vac_sd = std::sqrt(0.5);
  const double noise_sd = config.delta_x / sqrt2;

  const std::size_t n = config.shots;
  std::vector<double> o1(n), o2(n), cosv(n), xl(n);
  parallel_for(n, config.threads, [&](std::size_t i) {
    {
      ShotStream rng(config.seed, i, kTagSetting1);
      const double mu_im = rng.normal(0.0, mu_sd);
      const auto photons = static_cast<double>(poisson.draw(rng.uniform()));
      const double p_true = rng.normal(sign * sqrt2 * (photons * s + mu_im), vac_sd);
      const double p_meas = p_true + rng.normal(0.0, noise_sd);
      o1[i] = p_meas - sqrt2 * s * photons;
    }
    {
      ShotStream rng(config.seed, i, kTagSetting2);
      const double mu_re = rng.normal(0.0, mu_sd);
      const double x_init = rng.normal(sqrt2 * mu_re, vac_sd);
      const double x_meas = sign * x_init + rng.normal(0.0, noise_sd);
      const double phi_lo = rng.normal(0.0, config.sigma_lo);
      const double p_light = rng.normal(sqrt2 * alpha * std::sin(sqrt2 * s * x_init - phi_lo), vac_sd);
      o2[i] = sqrt2 * alpha * std::sin(sqrt2 * s * x_meas) - p_light;
      cosv[i] = std::cos(sqrt2 * s * x_meas);
    }
    {
      ShotStream rng(config.seed, i, kTagSetting3);
      const double mu_re = rng.normal(0.0, mu_sd);
      const double x_init = rng.normal(sqrt2 * mu_re, vac_sd);
      const double phi_lo = rng.normal(0.0, config.sigma_lo);
      xl[i] = rng.normal(sqrt2 * alpha * std::cos(sqrt2 * s * x_init - phi_lo), vac_sd);
    }
  });

  constexpr std::size_t kBlocks = 50;
  struct Sums {
    double o1 = 0, o1sq = 0, o2 = 0, o2sq = 0, c = 0, xl = 0, count = 0;
  };
  std::vector<Sums> blocks(kBlocks);
  Sums total;
  // Shift by the first sample to keep the variance sums well conditioned.
  const double shift1 = o1[0];
  const double shift2 = o2[0];
  for (std::size_t b = 0; b < kBlocks; ++b) {
    const std::size_t lo = b * n / kBlocks;
    const std::size_t hi = (b + 1) * n / kBlocks;
    std::array<Accumulator, 6> acc;
    for (std::size_t i = lo; i < hi; ++i) {
      const double d1 = o1[i] - shift1;
      const double d2 = o2[i] - shift2;
      acc[0].add(d1);
      acc[1].add(d1 * d1);
      acc[2].add(d2);
      acc[3].add(d2 * d2);
      acc[4].add(cosv[i]);
      acc[5].add(xl[i]);
    }
    Sums& sb = blocks[b];
    sb = {acc[0].value(), acc[1].value(), acc[2].value(), acc[3].value(),
          acc[4].value(), acc[5].value(), static_cast<double>(hi - lo)};
    total.o1 += sb.o1;
    total.o1sq += sb.o1sq;
    total.o2 += sb.o2;
    total.o2sq += sb.o2sq;
    total.c += sb.c;
    total.xl += sb.xl;
    total.count += sb.count;
  }

  auto moments_of = [&](const Sums& t) {
    WitnessMoments m;
    const double m1 = t.o1 / t.count;
    const double m2 = t.o2 / t.count;
    m.mean_o1 = m1 + shift1;
    m.var_o1 = t.o1sq / t.count - m1 * m1;
    m.mean_o2 = m2 + shift2;
    m.var_o2 = t.o2sq / t.count - m2 * m2;
    m.cos_mean = t.c / t.count;
    m.xl_mean = t.xl / t.count;
    return m;
  };

  EmpiricalWitness out;
  out.confidence_sigmas = confidence_sigmas;
  out.report = assemble_report(moments_of(total), s, alpha);

  std::vector<WitnessReport> loo(kBlocks);
  for (std::size_t b = 0; b < kBlocks; ++b) {
    Sums t = total;
    t.o1 -= blocks[b].o1;
    t.o1sq -= blocks[b].o1sq;
    t.o2 -= blocks[b].o2;
    t.o2sq -= blocks[b].o2sq;
    t.c -= blocks[b].c;
    t.xl -= blocks[b].xl;
    t.count -= blocks[b].count;
    loo[b] = assemble_report(moments_of(t), s, alpha);
  }
  auto jackknife = [&](auto get) {
    double mean = 0.0;
    for (const auto& r : loo) mean += get(r);
    mean /= kBlocks;
    double ss = 0.0;
    for (const auto& r : loo) ss += (get(r) - mean) * (get(r) - mean);
    return std::sqrt((kBlocks - 1.0) / kBlocks * ss);
  };
  out.margin_std_error = jackknife([](const WitnessReport& r) { return r.margin; });
  out.std_errors.mean_o1 = jackknife([](const WitnessReport& r) { return r.moments.mean_o1; });
  out.std_errors.var_o1 = jackknife([](const WitnessReport& r) { return r.moments.var_o1; });
  out.std_errors.mean_o2 = jackknife([](const WitnessReport& r) { return r.moments.mean_o2; });
  out.std_errors.var_o2 = jackknife([](const WitnessReport& r) { return r.moments.var_o2; });
  out.std_errors.cos_mean = jackknife([](const WitnessReport& r) { return r.moments.cos_mean; });
  out.std_errors.xl_mean = jackknife([](const WitnessReport& r) { return r.moments.xl_mean; });
  out.report.violated = out.report.margin > confidence_sigmas * out.margin_std_error;
  return out;
}

}  // namespace optomech
