#include "optomech/decoherence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <limits>
#include <queue>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "optomech/constants.hpp"
#include "optomech/errors.hpp"

namespace optomech {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kQuadratureTolerance = 1e-9;
constexpr std::size_t kQuadratureMaxEvaluations = 100000;

double sphere_rate_scale(const DiosiPenrose& dp) {
  return dp.prefactor * dp.n_nuclei * constants::G * dp.m_nuc * dp.m_nuc / constants::hbar;
}

}  // namespace

TabulatedModel::TabulatedModel(std::vector<double> x_m, std::vector<double> gamma_s)
    : x_(std::move(x_m)), g_(std::move(gamma_s)) {
  if (x_.size() != g_.size()) throw DomainError("tabulated model: x and gamma sizes differ");
  if (x_.size() < 2) throw DomainError("tabulated model needs at least two samples");
  if (x_.front() < 0.0) throw DomainError("tabulated model: separations must be >= 0");
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (!std::isfinite(x_[i]) || !std::isfinite(g_[i]) || g_[i] < 0.0) {
      throw DomainError("tabulated model: samples must be finite with gamma >= 0");
    }
    if (i > 0 && !(x_[i] > x_[i - 1])) throw DomainError("tabulated model: x must increase strictly");
    if (i > 0 && g_[i] < g_[i - 1]) throw DomainError("tabulated model: gamma must be nondecreasing");
  }
  // Fritsch-Carlson slopes.
  const std::size_t n = x_.size();
  std::vector<double> secant(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) secant[i] = (g_[i + 1] - g_[i]) / (x_[i + 1] - x_[i]);
  slope_.assign(n, 0.0);
  slope_[0] = secant[0];
  slope_[n - 1] = secant[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    slope_[i] = (secant[i - 1] * secant[i] <= 0.0) ? 0.0 : 0.5 * (secant[i - 1] + secant[i]);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (secant[i] == 0.0) {
      slope_[i] = slope_[i + 1] = 0.0;
      continue;
    }
    const double a = slope_[i] / secant[i];
    const double b = slope_[i + 1] / secant[i];
    const double r = a * a + b * b;
    if (r > 9.0) {
      const double t = 3.0 / std::sqrt(r);
      slope_[i] = t * a * secant[i];
      slope_[i + 1] = t * b * secant[i];
    }
  }
}

double TabulatedModel::operator()(double x) const {
  const double ax = std::abs(x);
  if (ax < x_.front() || ax > x_.back()) {
    throw DomainError("tabulated model queried at |x| = " + std::to_string(ax) +
                      " outside its range [" + std::to_string(x_.front()) + ", " +
                      std::to_string(x_.back()) + "]");
  }
  const auto hi_it = std::upper_bound(x_.begin(), x_.end(), ax);
  const std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(hi_it - x_.begin()), x_.size() - 1);
  const std::size_t lo = hi - 1;
  const double h = x_[hi] - x_[lo];
  const double t = (ax - x_[lo]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * g_[lo] + (t3 - 2 * t2 + t) * h * slope_[lo] +
         (-2 * t3 + 3 * t2) * g_[hi] + (t3 - t2) * h * slope_[hi];
}

std::string model_kind(const DecoherenceModel& model) {
  return std::visit(Overloaded{
                        [](const StandardModel&) { return std::string("standard"); },
                        [](const EllisQuadratic&) { return std::string("ellis"); },
                        [](const DiosiPenrose&) { return std::string("diosi-penrose"); },
                        [](const TabulatedModel&) { return std::string("table"); },
                    },
                    model);
}

void validate(const DecoherenceModel& model) {
  std::visit(Overloaded{
                 [](const StandardModel& m) {
                   if (!(m.lambda >= 0.0) || !std::isfinite(m.lambda)) {
                     throw DomainError("standard model: lambda must be >= 0");
                   }
                 },
                 [](const EllisQuadratic& m) {
                   if (!(m.lambda_e >= 0.0) || !std::isfinite(m.lambda_e)) {
                     throw DomainError("ellis model: lambda_e must be >= 0");
                   }
                 },
                 [](const DiosiPenrose& m) {
                   if (!(m.r0 > 0.0)) throw DomainError("diosi-penrose: r0 must be > 0");
                   if (!(m.m_nuc > 0.0)) throw DomainError("diosi-penrose: m_nuc must be > 0");
                   if (!(m.n_nuclei >= 1.0)) throw DomainError("diosi-penrose: n_nuclei must be >= 1");
                   if (!(m.prefactor >= 0.0)) throw DomainError("diosi-penrose: prefactor must be >= 0");
                 },
                 [](const TabulatedModel&) {},
             },
             model);
}

double gamma(const DecoherenceModel& model, double x) {
  if (!std::isfinite(x)) throw DomainError("gamma: separation must be finite");
  return std::visit(Overloaded{
                        [x](const StandardModel& m) { return m.lambda * x * x; },
                        [x](const EllisQuadratic& m) { return m.lambda_e * x * x; },
                        [x](const DiosiPenrose& m) {
                          const double ax = std::abs(x);
                          const double u = ax / (2.0 * m.r0);
                          if (u <= 1.0) {
                            const double u2 = u * u;
                            return sphere_rate_scale(m) / m.r0 *
                                   u2 * (2.0 - 1.5 * u + 0.2 * u2 * u);
                          }
                          return sphere_rate_scale(m) * (1.2 / m.r0 - 1.0 / ax);
                        },
                        [x](const TabulatedModel& m) { return m(x); },
                    },
                    model);
}

std::optional<double> quadratic_coefficient(const DecoherenceModel& model) {
  if (const auto* s = std::get_if<StandardModel>(&model)) return s->lambda;
  if (const auto* e = std::get_if<EllisQuadratic>(&model)) return e->lambda_e;
  return std::nullopt;
}

std::optional<double> saturation_rate(const DecoherenceModel& model) {
  if (const auto* dp = std::get_if<DiosiPenrose>(&model)) return sphere_rate_scale(*dp) * 1.2 / dp->r0;
  return std::nullopt;
}

double standard_lambda(double mass_kg, double omega_m, double quality_factor, double temperature_k) {
  if (!(mass_kg > 0.0 && omega_m > 0.0 && quality_factor > 0.0 && temperature_k >= 0.0)) {
    throw DomainError("standard_lambda: mass, omega_m, Q must be > 0 and T >= 0");
  }
  const double damping = omega_m / quality_factor;
  return 2.0 * mass_kg * damping * constants::k_B * temperature_k / (constants::hbar * constants::hbar);
}

DiosiPenrose diosi_penrose_nuclear(double total_mass_kg, double mass_number, double prefactor) {
  if (!(total_mass_kg > 0.0 && mass_number >= 1.0)) {
    throw DomainError("diosi_penrose_nuclear: mass must be > 0 and A >= 1");
  }
  DiosiPenrose dp;
  dp.r0 = 1.2e-15 * std::cbrt(mass_number);
  dp.m_nuc = mass_number * constants::amu;
  dp.n_nuclei = total_mass_kg / dp.m_nuc;
  dp.prefactor = prefactor;
  return dp;
}

namespace {

// Separations at which gamma changes form; quadrature panels are split there.
std::vector<double> length_scales(const DecoherenceModel& model) {
  if (const auto* dp = std::get_if<DiosiPenrose>(&model)) return {2.0 * dp->r0};
  if (const auto* t = std::get_if<TabulatedModel>(&model)) {
    if (t->x().size() <= 512) return t->x();
  }
  return {};
}

}  // namespace

double half_period_average(const DecoherenceModel& model, double amplitude_m, Quadrature policy) {
  if (!(amplitude_m >= 0.0) || !std::isfinite(amplitude_m)) {
    throw DomainError("half_period_average: amplitude must be finite and >= 0");
  }
  if (policy == Quadrature::Auto) {
    if (auto c = quadratic_coefficient(model)) return 0.5 * *c * amplitude_m * amplitude_m;
  }
  if (amplitude_m == 0.0) return gamma(model, 0.0);

  // Split [0, pi/2] where A sin(phi) crosses a length scale of the model so
  // every panel is smooth.
  std::vector<double> cuts{0.0};
  for (double x : length_scales(model)) {
    if (!(x > 0.0 && x < amplitude_m)) continue;
    // Geometric panels above the crossing resolve the 1/sin(phi) tails.
    for (double phi = std::asin(x / amplitude_m); phi < 0.5 * constants::pi; phi *= 4.0) {
      cuts.push_back(phi);
    }
  }
  cuts.push_back(0.5 * constants::pi);
  std::sort(cuts.begin(), cuts.end());

  std::size_t evaluations = 0;
  auto integrand = [&](double phi) {
    ++evaluations;
    return gamma(model, amplitude_m * std::sin(phi));
  };
  using Integrator = boost::math::quadrature::gauss_kronrod<double, 15>;
  struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  auto rule = [&](double a, double b) {
    double e = 0.0;
    const double v = Integrator::integrate(integrand, a, b, 0, 0.0, &e);
    return Panel{a, b, v, e};
  };
  // Globally adaptive: always bisect the panel with the largest error.
  std::priority_queue<Panel> panels;
  double integral = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (!(cuts[i + 1] > cuts[i])) continue;
    panels.push(rule(cuts[i], cuts[i + 1]));
  }
  auto totals = [&] {
    auto copy = panels;
    integral = 0.0;
    error = 0.0;
    while (!copy.empty()) {
      integral += copy.top().value;
      error += copy.top().error;
      copy.pop();
    }
  };
  totals();
  while (error > kQuadratureTolerance * std::abs(integral) && evaluations < kQuadratureMaxEvaluations) {
    const Panel worst = panels.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    panels.pop();
    const Panel left = rule(worst.a, mid);
    const Panel right = rule(mid, worst.b);
    panels.push(left);
    panels.push(right);
    integral += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
  }
  totals();
  const double scale = std::max(std::abs(integral), std::numeric_limits<double>::min());
  if (error > kQuadratureTolerance * scale || evaluations > kQuadratureMaxEvaluations) {
    char detail[160];
    std::snprintf(detail, sizeof detail, "at amplitude %.6g m (estimated relative error %.3g, %zu evaluations)",
                  amplitude_m, error / scale, evaluations);
    throw ConvergenceError("half_period_average: quadrature did not converge for model '" +
                           model_kind(model) + "' " + detail);
  }
  return 2.0 / constants::pi * integral;
}

void PhaseKernel::validate() const {
  optomech::validate(model);
  if (!(half_periods >= 0.0) || !std::isfinite(half_periods)) throw DomainError("kernel: k must be >= 0");
  if (!(omega_m > 0.0)) throw DomainError("kernel: omega_m must be > 0");
  if (!(g0_tau > 0.0)) throw DomainError("kernel: g0_tau must be > 0");
  if (!(x0 > 0.0)) throw DomainError("kernel: x0 must be > 0");
}

namespace {

// -ln xi(eta)
double kernel_exponent(const PhaseKernel& kernel, double eta) {
  if (kernel.half_periods == 0.0) return 0.0;
  const double amplitude = 2.0 * std::abs(eta) * kernel.g0_tau * kernel.x0;
  return kernel.half_periods * constants::pi / kernel.omega_m *
         half_period_average(kernel.model, amplitude, kernel.policy);
}

}  // namespace

double xi(const PhaseKernel& kernel, double eta) {
  kernel.validate();
  return std::exp(-kernel_exponent(kernel, eta));
}

std::optional<double> quadratic_kernel_exponent(const PhaseKernel& kernel) {
  const auto c = quadratic_coefficient(kernel.model);
  if (!c) return std::nullopt;
  const double scale = kernel.g0_tau * kernel.x0;
  return kernel.half_periods * constants::pi / kernel.omega_m * 2.0 * *c * scale * scale;
}

QuadratureMoments quadrature_moments(const PhaseKernel& kernel, double alpha, double theta) {
  const double xi1 = xi(kernel, 1.0);
  const double xi2 = xi(kernel, 2.0);
  return {constants::sqrt2 * alpha * xi1 * std::cos(theta),
          0.5 + alpha * alpha * (1.0 + std::cos(2.0 * theta) * xi2)};
}

DoublingTime doubling_time(const DecoherenceModel& model, double alpha, double g0_tau, double x0,
                           double omega_m) {
  if (!(alpha >= 1.0)) throw DomainError("doubling_time: alpha must be >= 1");
  PhaseKernel kernel{model, 0.0, omega_m, g0_tau, x0};
  kernel.validate();

  const double rate = half_period_average(model, 4.0 * g0_tau * x0);
  if (!(rate > 0.0)) {
    throw NoDecoherenceError("model '" + model_kind(model) +
                             "' gives no decoherence at separation 4 g0tau x0");
  }
  DoublingTime out;
  out.closed_form_s = 1.0 / (2.0 * alpha * alpha * rate);

  auto excess = [&](double k) {
    kernel.half_periods = k;
    return quadrature_moments(kernel, alpha, 0.5 * constants::pi).variance() - 1.0;
  };
  double hi = std::max(out.closed_form_s * omega_m / constants::pi, 1e-300);
  int expansions = 0;
  while (excess(hi) < 0.0) {
    hi *= 2.0;
    if (++expansions > 2000 || !std::isfinite(hi)) {
      throw ConvergenceError("doubling_time: variance never reaches twice its initial value");
    }
  }
  std::uintmax_t iterations = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      excess, 0.0, hi, -0.5, excess(hi), boost::math::tools::eps_tolerance<double>(50), iterations);
  out.k_continuous = 0.5 * (a + b);
  out.exact_s = out.k_continuous * constants::pi / omega_m;
  out.k_rounded = std::round(out.k_continuous);
  out.rounded_s = out.k_rounded * constants::pi / omega_m;
  return out;
}

double calibrate_quadratic(double doubling_time_s, double alpha, double g0_tau, double x0) {
  if (!(doubling_time_s > 0.0 && alpha > 0.0 && g0_tau > 0.0 && x0 > 0.0)) {
    throw DomainError("calibrate_quadratic: inputs must be positive");
  }
  // <gamma(X sin phi)> = c X^2 / 2 with X = 4 g0tau x0.
  const double separation = 4.0 * g0_tau * x0;
  return 1.0 / (alpha * alpha * separation * separation * doubling_time_s);
}

double fit_diosi_penrose_prefactor(DiosiPenrose model, double doubling_time_s, double alpha,
                                   double g0_tau, double x0) {
  if (!(doubling_time_s > 0.0)) throw DomainError("fit_diosi_penrose_prefactor: target must be > 0");
  if (!(model.prefactor > 0.0)) model.prefactor = 1.0;
  const double rate = half_period_average(model, 4.0 * g0_tau * x0);
  if (!(rate > 0.0)) throw NoDecoherenceError("diosi-penrose model gives no rate to fit");
  const double current = 1.0 / (2.0 * alpha * alpha * rate);
  return model.prefactor * current / doubling_time_s;
}

double dp_discriminator(const PhaseKernel& kernel) {
  kernel.validate();
  const double e1 = kernel_exponent(kernel, 1.0);
  const double e2 = kernel_exponent(kernel, 2.0);
  if (std::exp(-e1) == 0.0) {
    throw DomainError("dp_discriminator: xi(1) underflows (exponent " + std::to_string(e1) + ")");
  }
  return std::exp(4.0 * e1 - e2);
}

XiPair recover_xi(double alpha, double mean_theta0, double second_theta0, double second_theta_pi2) {
  if (!(alpha > 0.0)) throw DomainError("recover_xi: alpha must be > 0");
  return {mean_theta0 / (constants::sqrt2 * alpha),
          (second_theta0 - second_theta_pi2) / (2.0 * alpha * alpha)};
}

}  // namespace optomech
