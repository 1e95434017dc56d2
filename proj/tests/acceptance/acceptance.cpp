// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "optomech/decoherence.hpp"
#include "optomech/feasibility.hpp"
#include "optomech/protocol.hpp"
#include "optomech/system.hpp"
#include "optomech/witness.hpp"
#include "support/oracles.hpp"

using namespace optomech;

namespace {

constexpr double kPi = 3.141592653589793;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects sub-checks of one criterion.
class Criterion {
 public:
  explicit Criterion(std::string id) : id_(std::move(id)) {}

  void check(bool ok, const std::string& what) {
    if (!ok) pass_ = false;
    notes_.push_back((ok ? "ok    " : "FAIL  ") + what);
  }
  bool passed() const { return pass_; }

  void print(double elapsed) const {
    std::printf("[%s] %s (%.1f s)\n", pass_ ? "PASS" : "FAIL", id_.c_str(), elapsed);
    for (const auto& n : notes_) std::printf("       %s\n", n.c_str());
    std::fflush(stdout);
  }

 private:
  std::string id_;
  bool pass_ = true;
  std::vector<std::string> notes_;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

bool within_rel(double value, double target, double rel) {
  return std::abs(value / target - 1.0) <= rel;
}

SystemParams trampoline() { return preset("trampoline-60ng"); }

// Criterion 1 ----------------------------------------------------------------
void feasibility(Criterion& c) {
  const auto t0 = Clock::now();
  const SystemParams p = trampoline();
  const auto r = plan(p, {0.4, 1e6}, {});
  const double elapsed = seconds_since(t0);
  const double deg = r.sigma_lo_bound * 180.0 / kPi;
  c.check(within_rel(r.tau, 1.1e-6, 0.05), fmt("tau = %.4g s vs 1.1e-6 (5%%)", r.tau));
  c.check(within_rel(r.alpha_sq_max, 8.6e6, 0.15),
          fmt("alpha^2_max = %.4g vs 8.6e6 (15%%)", r.alpha_sq_max));
  c.check(within_rel(r.drive_power, 1e-6, 0.15),
          fmt("drive power = %.4g W vs 1e-6 (15%%)", r.drive_power));
  c.check(within_rel(r.n_th_bound, 34.0, 0.15),
          fmt("n_th bound = %.4g vs 34 (15%%)", r.n_th_bound));
  c.check(deg >= 0.07 && deg <= 0.11, fmt("sigma bound = %.4g deg in [0.07, 0.11]", deg));
  c.check(within_rel(r.delta_x_bound, 0.24, 0.10),
          fmt("delta_x/x0 bound = %.4g vs 0.24 (10%%)", r.delta_x_bound));
  c.check(within_rel(r.readout_power, 0.38e-6, 0.15),
          fmt("readout power = %.4g W vs 3.8e-7 (15%%)", r.readout_power));
  c.check(within_rel(r.cooling_power, 1.6e-9, 0.20),
          fmt("cooling power = %.4g W vs 1.6e-9 (20%%)", r.cooling_power));
  c.check(elapsed < 1.0, fmt("plan runtime %.3g s < 1 s", elapsed));
}

// Criterion 2 ----------------------------------------------------------------
void witness_threshold(Criterion& c) {
  for (double s : {0.05, 0.1, 0.2}) {
    const auto t0 = Clock::now();
    const double target = 1.0 / (16.0 * s * s);
    auto margin = [&](double a2) {
      WitnessInputs in;
      in.g0_tau = s;
      in.alpha = std::sqrt(a2);
      return witness_fock_oracle(in, 200).margin;
    };
    double lo = 0.05 * target;
    double hi = 3.0 * target;
    const bool bracket = margin(lo) <= 0.0 && margin(hi) > 0.0;
    for (int i = 0; i < 50 && bracket; ++i) {
      const double mid = 0.5 * (lo + hi);
      (margin(mid) > 0.0 ? hi : lo) = mid;
    }
    const double found = 0.5 * (lo + hi);
    const double elapsed = seconds_since(t0);
    c.check(bracket && within_rel(found, target, 0.05),
            fmt("g0tau = %.2g: threshold alpha^2 = %.5g vs %.5g (5%%)", s, found, target));
    c.check(elapsed < 60.0, fmt("g0tau = %.2g: %.2g s < 60 s", s, elapsed));
  }
}

// Criterion 3 ----------------------------------------------------------------
void oracle_equivalence(Criterion& c) {
  double worst = 0.0;
  int points = 0;
  for (double a : {0.5, 1.0, 3.0}) {
    for (double s : {0.05, 0.1, 0.3}) {
      for (double t : {0.0, kPi / 2.0, kPi}) {
        WitnessInputs in;
        in.g0_tau = s;
        in.alpha = a;
        in.t_s = t;
        in.delta_x = 0.3;
        in.sigma_lo = 0.05;
        const auto an = witness_analytic(in).moments;
        const auto fk = witness_fock_oracle(in, default_cutoff(a)).moments;
        const double pairs[6][2] = {{an.mean_o1, fk.mean_o1},   {an.var_o1, fk.var_o1},
                                    {an.mean_o2, fk.mean_o2},   {an.var_o2, fk.var_o2},
                                    {an.cos_mean, fk.cos_mean}, {an.xl_mean, fk.xl_mean}};
        for (const auto& pr : pairs) {
          const double scale = std::max({std::abs(pr[0]), std::abs(pr[1]), 1e-300});
          const double diff = std::abs(pr[0] - pr[1]);
          // Exact zeros (odd moments at t = 0) compare absolutely.
          const double rel = diff <= 1e-13 ? 0.0 : diff / scale;
          worst = std::max(worst, rel);
        }
        ++points;
      }
    }
  }
  c.check(points == 27 && worst <= 1e-6,
          fmt("%g grid points, worst relative deviation %.3g <= 1e-6", points, worst));
}

// Criterion 4 ----------------------------------------------------------------
void kernel_closed_form(Criterion& c) {
  const SystemParams p = trampoline();
  const double lam = standard_lambda(p.mass_kg, p.omega_m, 1e6, 0.4);
  double worst = 0.0;
  for (double k : {1.0, 10.0, 1e3}) {
    PhaseKernel kernel{StandardModel{lam}, k, p.omega_m, p.g0_tau(), p.x0(), Quadrature::Always};
    for (int i = 0; i <= 100; ++i) {
      const double eta = 0.05 * i;
      const double ref = oracle::quadratic_kernel(lam, k, p.omega_m, p.g0_tau(), p.x0(), eta);
      worst = std::max(worst, std::abs(xi(kernel, eta) - ref));
    }
  }
  c.check(worst <= 1e-12, fmt("max |xi_numeric - closed form| = %.3g <= 1e-12", worst));
}

// Criterion 5 ----------------------------------------------------------------
void moment_extremes(Criterion& c) {
  const double alpha = 10.0;
  ProtocolConfig cfg;
  cfg.params = trampoline();
  cfg.params.alpha = alpha;
  cfg.model = StandardModel{1e35};
  cfg.half_periods = 0;
  const auto m0 = quadrature_moments(cfg.kernel(), alpha, kPi / 2.0);
  c.check(m0.variance() == 0.5, fmt("analytic k = 0 variance = %.17g (exact 1/2)", m0.variance()));

  cfg.shots = 1000000;
  cfg.seed = 5;
  const auto e = run_protocol(cfg).estimate;
  c.check(std::abs(e.variance - 0.5) <= 5.0 * e.std_error_var,
          fmt("MC k = 0 variance = %.6f +- %.6f vs 0.5 (5 SE)", e.variance, e.std_error_var));

  cfg.half_periods = 1000000000;
  const auto inf = quadrature_moments(cfg.kernel(), alpha, kPi / 2.0);
  const double target = 0.5 + alpha * alpha;
  c.check(std::abs(inf.variance() - target) <= 1e-9 * target,
          fmt("xi -> 0 variance = %.12g vs %.12g (1e-9)", inf.variance(), target));
}

// Criterion 6 ----------------------------------------------------------------
void doubling_consistency(Criterion& c) {
  const SystemParams p = trampoline();
  auto dp = diosi_penrose_nuclear(p.mass_kg, 28.0);
  std::vector<NamedModel> models{
      {"standard(0.4 K, 1e6)", StandardModel{standard_lambda(p.mass_kg, p.omega_m, 1e6, 0.4)}},
      {"standard(20 mK, 1.5e7)",
       StandardModel{standard_lambda(p.mass_kg, p.omega_m, 1.5e7, 0.02)}},
      {"ellis", EllisQuadratic{calibrate_quadratic(5e-5, p.alpha, p.g0_tau(), p.x0())}},
      {"dp(prefactor 1)", dp}};
  int tested = 0;
  for (const auto& m : models) {
    for (double a : {5.0, 10.0, 50.0, p.alpha}) {
      const auto d = doubling_time(m.model, a, p.g0_tau(), p.x0(), p.omega_m);
      if (d.k_continuous > 1e6) continue;
      ++tested;
      const double ratio = d.exact_s / d.closed_form_s;
      c.check(std::abs(ratio - 1.0) <= 0.10,
              m.name + fmt(", alpha = %.4g: exact/closed = %.5f (k = %.4g)", a, ratio,
                           d.k_continuous));
    }
  }
  c.check(tested >= 4, fmt("%g parameter points with doubling within 1e6 half-periods", tested));
}

// Criterion 7 ----------------------------------------------------------------
void collapse_targets(Criterion& c) {
  const SystemParams p = trampoline();
  const double lam_e = calibrate_quadratic(5e-5, p.alpha, p.g0_tau(), p.x0());
  const double ellis =
      doubling_time(EllisQuadratic{lam_e}, p.alpha, p.g0_tau(), p.x0(), p.omega_m).closed_form_s;
  c.check(within_rel(ellis, 5e-5, 1e-3),
          fmt("Ellis round trip: Lambda_E = %.4g, doubling %.6g s vs 5e-5 (1e-3)", lam_e, ellis));

  const auto dp = diosi_penrose_nuclear(p.mass_kg, 28.0);
  const double bare =
      doubling_time(dp, p.alpha, p.g0_tau(), p.x0(), p.omega_m).closed_form_s;
  const double decades = std::abs(std::log10(bare / 2e-8));
  c.check(decades <= 2.0,
          fmt("DP prefactor 1: doubling %.4g s vs 2e-8 s, %.2f decades (<= 2)", bare, decades));

  auto fitted = dp;
  fitted.prefactor = fit_diosi_penrose_prefactor(dp, 2e-8, p.alpha, p.g0_tau(), p.x0());
  const double fit =
      doubling_time(fitted, p.alpha, p.g0_tau(), p.x0(), p.omega_m).closed_form_s;
  c.check(within_rel(fit, 2e-8, 1e-9),
          fmt("DP fitted prefactor %.5g: doubling %.10g s vs 2e-8", fitted.prefactor, fit));
}

// Criterion 8 ----------------------------------------------------------------
void discriminator(Criterion& c) {
  const SystemParams p = trampoline();
  double worst = 0.0;
  for (double k : {1.0, 100.0, 1e4}) {
    for (const DecoherenceModel& m :
         {DecoherenceModel{StandardModel{standard_lambda(p.mass_kg, p.omega_m, 1e6, 0.4)}},
          DecoherenceModel{EllisQuadratic{4.13e31}}}) {
      PhaseKernel kernel{m, k, p.omega_m, p.g0_tau(), p.x0()};
      worst = std::max(worst, std::abs(dp_discriminator(kernel) - 1.0));
    }
  }
  c.check(worst <= 1e-12, fmt("quadratic models: max |ratio - 1| = %.3g <= 1e-12", worst));

  // Sphere radius comparable to g0 tau x0.
  const double sx0 = p.g0_tau() * p.x0();
  DiosiPenrose dp{sx0, 4.65e-26, 1.29e12, 1.0};
  const double e1_per_k = kPi / p.omega_m * half_period_average(dp, 2.0 * sx0);
  PhaseKernel kernel{dp, std::round(0.5 / e1_per_k), p.omega_m, p.g0_tau(), p.x0()};
  const double ratio = dp_discriminator(kernel);
  c.check(ratio > 1.5, fmt("DP with R0 = g0tau x0 = %.3g m, k = %.0f: ratio = %.4g > 1.5", sx0,
                           kernel.half_periods, ratio));
}

// Criterion 9 ----------------------------------------------------------------
void determinism(Criterion& c) {
  const std::string cfg = std::string(OPTOMECH_PRESET_DIR) + "/ellis-test.ini";
  std::vector<std::string> outputs;
  for (const char* threads : {"1", "4", "16"}) {
    std::ostringstream out, err;
    const int code = cli::run({"simulate", "-c", cfg, "--set", "system.alpha=10", "--set",
                               "run.k=20", "--set", "run.shots=100000", "--set", "run.seed=9",
                               "--set", "run.delta_x_x0=0.3", "--set", "run.sigma_lo_rad=0.01",
                               "--threads", threads},
                              out, err);
    c.check(code == 0, std::string("simulate with ") + threads + " threads exits 0 " + err.str());
    outputs.push_back(out.str());
  }
  c.check(outputs[0] == outputs[1] && outputs[0] == outputs[2],
          fmt("byte-identical output for 1, 4, 16 threads (%g bytes)",
              static_cast<double>(outputs[0].size())));
}

// Criterion 10 ---------------------------------------------------------------
void properties(Criterion& c) {
  const std::size_t shots = 1000000;

  // Separability soundness: dephased (separable) states never violate;
  // neither does an empirically sampled vacuum drive.
  int violations = 0;
  for (double s : {0.05, 0.1, 0.3, 0.45}) {
    for (double a : {0.5, 1.0, 2.0, 4.0, 8.0}) {
      for (double t : {0.0, 0.5, kPi / 2.0, kPi}) {
        WitnessInputs in;
        in.g0_tau = s;
        in.alpha = a;
        in.t_s = t;
        if (witness_fock_oracle(in, default_cutoff(a), true).violated) ++violations;
      }
    }
  }
  c.check(violations == 0, fmt("separable (dephased) states: %g violations in 80", violations));
  {
    ProtocolConfig cfg;
    cfg.params = trampoline();
    cfg.params.omega_c *= 0.1 / cfg.params.g0_tau();
    cfg.params.alpha = 0.0;
    cfg.shots = shots;
    cfg.seed = 31;
    const auto r = joint_witness_sampling(cfg, 16);
    c.check(!r.report.violated, fmt("alpha = 0 sampled margin %.3g +- %.3g: not violated",
                                    r.report.margin, r.margin_std_error));
    cfg.params.alpha = 5.0;
    const auto v = joint_witness_sampling(cfg, 200);
    WitnessInputs in;
    in.g0_tau = 0.1;
    in.alpha = 5.0;
    const double an = witness_analytic(in).margin;
    c.check(v.report.violated && std::abs(v.report.margin - an) <= 5.0 * v.margin_std_error,
            fmt("alpha^2 = 25, g0tau = 0.1: sampled margin %.4f +- %.4f vs analytic %.4f",
                v.report.margin, v.margin_std_error, an));
  }

  // Variance floor 1/2 and agreement with the kernel prediction.
  {
    ProtocolConfig cfg;
    cfg.params = trampoline();
    cfg.params.alpha = 10.0;
    cfg.shots = shots;
    auto dp = diosi_penrose_nuclear(cfg.params.mass_kg, 28.0);
    dp.prefactor = 5e3;
    struct Case {
      const char* name;
      DecoherenceModel model;
      std::int64_t k;
      double dx;
      double sigma;
    };
    const std::vector<Case> cases{{"ideal", StandardModel{0.0}, 0, 0.0, 0.0},
                                  {"standard k=10", StandardModel{1e35}, 10, 0.0, 0.0},
                                  {"dp k=2e4", dp, 20000, 0.0, 0.0},
                                  {"noisy", StandardModel{1e35}, 3, 0.5, 0.02}};
    for (const auto& cs : cases) {
      cfg.model = cs.model;
      cfg.half_periods = cs.k;
      cfg.delta_x = cs.dx;
      cfg.sigma_lo = cs.sigma;
      cfg.seed = 1000 + static_cast<std::uint64_t>(cs.k);
      cfg.theta = kPi / 2.0;
      const auto e = run_protocol(cfg).estimate;
      c.check(e.variance >= 0.5 - 5.0 * e.std_error_var,
              std::string(cs.name) + fmt(": variance %.5f >= 1/2 - 5 SE (SE %.2g)", e.variance,
                                         e.std_error_var));
      if (cs.dx == 0.0 && cs.sigma == 0.0) {
        const double pred = quadrature_moments(cfg.kernel(), 10.0, kPi / 2.0).variance();
        c.check(std::abs(e.variance - pred) <= 5.0 * e.std_error_var,
                std::string(cs.name) + fmt(": variance %.5f vs predicted %.5f", e.variance, pred));
        cfg.theta = 0.0;
        const auto m = run_protocol(cfg).estimate;
        const double mean_pred = std::sqrt(2.0) * 10.0 * xi(cfg.kernel(), 1.0);
        c.check(std::abs(m.mean - mean_pred) <= 5.0 * m.std_error_mean,
                std::string(cs.name) + fmt(": theta = 0 mean %.5f vs %.5f", m.mean, mean_pred));
      }
    }
  }

  // xi multiplicative in k.
  {
    const SystemParams p = trampoline();
    auto dp = diosi_penrose_nuclear(p.mass_kg, 28.0);
    dp.prefactor = 5e3;
    double worst = 0.0;
    for (double eta : {0.5, 1.0, 2.0, 3.0}) {
      for (auto [k1, k2] : {std::pair{1.0, 1.0}, std::pair{3.0, 7.0}, std::pair{100.0, 250.0}}) {
        PhaseKernel a{dp, k1, p.omega_m, p.g0_tau(), p.x0()};
        PhaseKernel b{dp, k2, p.omega_m, p.g0_tau(), p.x0()};
        PhaseKernel ab{dp, k1 + k2, p.omega_m, p.g0_tau(), p.x0()};
        worst = std::max(worst, std::abs(xi(ab, eta) - xi(a, eta) * xi(b, eta)));
      }
    }
    c.check(worst <= 1e-12, fmt("xi(k1 + k2) = xi(k1) xi(k2): max deviation %.3g", worst));
  }

  // Sampler characteristic function.
  {
    const SystemParams p = trampoline();
    auto dp = diosi_penrose_nuclear(p.mass_kg, 28.0);
    dp.prefactor = 5e3;
    const std::vector<std::pair<std::string, PhaseKernel>> kernels{
        {"standard", PhaseKernel{StandardModel{1e35}, 10.0, p.omega_m, p.g0_tau(), p.x0()}},
        {"dp", PhaseKernel{dp, 20000.0, p.omega_m, p.g0_tau(), p.x0()}}};
    for (const auto& [name, kernel] : kernels) {
      const auto sampler = build_phase_sampler(kernel);
      for (double eta : {1.0, 2.0, 3.0}) {
        std::complex<double> acc = 0.0;
        for (std::size_t i = 0; i < shots; ++i) {
          ShotStream rng(4242, i, 9);
          acc += std::polar(1.0, eta * sampler.draw(rng));
        }
        acc /= static_cast<double>(shots);
        const double dev = std::abs(acc - xi(kernel, eta));
        const double gate = 5.0 / std::sqrt(static_cast<double>(shots));
        c.check(dev < gate, name + fmt(": |E e^{i eta phi} - xi(eta)| = %.3g < %.3g at eta = %g",
                                       dev, gate, eta));
      }
    }
  }
}

}  // namespace

int main() {
  const auto start = Clock::now();
  const std::vector<std::pair<std::string, std::function<void(Criterion&)>>> suite{
      {"C1 feasibility reproduction", feasibility},
      {"C2 witness threshold 1/(16 g0tau^2)", witness_threshold},
      {"C3 analytic vs Fock oracle", oracle_equivalence},
      {"C4 standard kernel closed form", kernel_closed_form},
      {"C5 moments at k = 0 and xi -> 0", moment_extremes},
      {"C6 doubling time exact vs closed form", doubling_consistency},
      {"C7 collapse-model targets", collapse_targets},
      {"C8 discriminator xi(2)/xi(1)^4", discriminator},
      {"C9 determinism across threads", determinism},
      {"C10 property suites", properties},
  };
  int failed = 0;
  for (const auto& [name, fn] : suite) {
    Criterion c(name);
    const auto t0 = Clock::now();
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.check(false, std::string("exception: ") + e.what());
    }
    c.print(seconds_since(t0));
    if (!c.passed()) ++failed;
  }
  const double total = seconds_since(start);
  const bool fast = total < 1800.0;
  std::printf("[%s] total runtime %.1f s < 1800 s\n", fast ? "PASS" : "FAIL", total);
  if (!fast) ++failed;
  std::printf("%d of %zu criteria failed\n", failed, suite.size());
  return failed == 0 ? 0 : 1;
}
