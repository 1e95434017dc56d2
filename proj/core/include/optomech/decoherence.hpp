#pragma once

// Spatial decoherence: localization rates gamma(x), the half-period averaged
// rate seen by the oscillating mirror, the resulting phase-noise kernel on
// the light, quadrature moments, and doubling times.

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace optomech {

/// gamma(x) = lambda x^2, lambda in m^-2 s^-1.
struct StandardModel {
  double lambda = 0.0;
};

/// gamma(x) = lambda_e x^2. lambda_e is a calibration parameter.
struct EllisQuadratic {
  double lambda_e = 0.0;
};

/// Gravitational self-energy difference of N displaced uniform spheres of
/// radius r0 and mass m_nuc, divided by hbar, times `prefactor`.
struct DiosiPenrose {
  double r0 = 0.0;        // m
  double m_nuc = 0.0;     // kg
  double n_nuclei = 1.0;
  double prefactor = 1.0;
};

/// gamma(|x|) from samples, monotone cubic (Fritsch-Carlson) interpolation.
class TabulatedModel {
 public:
  TabulatedModel(std::vector<double> x_m, std::vector<double> gamma_s);

  double operator()(double x) const;
  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& gamma() const { return g_; }

 private:
  std::vector<double> x_;
  std::vector<double> g_;
  std::vector<double> slope_;
};

using DecoherenceModel = std::variant<StandardModel, EllisQuadratic, DiosiPenrose, TabulatedModel>;

struct NamedModel {
  std::string name;
  DecoherenceModel model;
};

/// "standard", "ellis", "diosi-penrose" or "table".
std::string model_kind(const DecoherenceModel& model);

/// Throws DomainError on invalid parameters.
void validate(const DecoherenceModel& model);

/// Localization rate for separation x, s^-1.
double gamma(const DecoherenceModel& model, double x);

/// Coefficient c of gamma(x) = c x^2 when the model is exactly quadratic.
std::optional<double> quadratic_coefficient(const DecoherenceModel& model);

/// lim_{x -> inf} gamma(x) when finite.
std::optional<double> saturation_rate(const DecoherenceModel& model);

/// Quantum-Brownian localization coefficient 2 M gamma_m k_B T / hbar^2 with
/// gamma_m = omega_m / Q.
double standard_lambda(double mass_kg, double omega_m, double quality_factor, double temperature_k);

/// Nuclei of mass number A as uniform spheres of radius 1.2 fm A^{1/3},
/// N = M / (A amu).
DiosiPenrose diosi_penrose_nuclear(double total_mass_kg, double mass_number, double prefactor = 1.0);

enum class Quadrature {
  Auto,    // closed form for quadratic models
  Always,  // numerical for every model
};

/// (1/pi) int_0^pi gamma(X sin phi) dphi, relative tolerance 1e-9.
double half_period_average(const DecoherenceModel& model, double amplitude_m,
                           Quadrature policy = Quadrature::Auto);

struct PhaseKernel {
  DecoherenceModel model;
  double half_periods = 0.0;  // k, measurement at t = k pi / omega_m
  double omega_m = 0.0;
  double g0_tau = 0.0;
  double x0 = 0.0;
  Quadrature policy = Quadrature::Auto;

  void validate() const;
};

/// xi(eta) = exp(-(k pi / omega_m) <gamma(2 |eta| g0tau x0 sin phi)>).
double xi(const PhaseKernel& kernel, double eta);

/// Exponent of xi for quadratic models: xi(eta) = exp(-c eta^2).
std::optional<double> quadratic_kernel_exponent(const PhaseKernel& kernel);

struct QuadratureMoments {
  double mean = 0.0;
  double second_moment = 0.0;
  double variance() const { return second_moment - mean * mean; }
};

/// <X^theta> = sqrt2 alpha xi(1) cos theta,
/// <(X^theta)^2> = 1/2 + alpha^2 (1 + cos(2 theta) xi(2)).
QuadratureMoments quadrature_moments(const PhaseKernel& kernel, double alpha, double theta);

struct DoublingTime {
  double closed_form_s = 0.0;    // 1 / (2 alpha^2 <gamma(4 g0tau x0 sin phi)>)
  double exact_s = 0.0;          // Var(P_l) = 1 on continuous k
  double k_continuous = 0.0;
  double k_rounded = 0.0;
  double rounded_s = 0.0;        // k_rounded pi / omega_m
};

/// Throws NoDecoherenceError if the model yields no rate at 4 g0tau x0.
DoublingTime doubling_time(const DecoherenceModel& model, double alpha, double g0_tau, double x0,
                           double omega_m);

/// Quadratic coefficient giving the requested closed-form doubling time.
double calibrate_quadratic(double doubling_time_s, double alpha, double g0_tau, double x0);

/// Prefactor that makes the closed-form doubling time equal the target.
double fit_diosi_penrose_prefactor(DiosiPenrose model, double doubling_time_s, double alpha,
                                   double g0_tau, double x0);

/// xi(2) / xi(1)^4; equals one for every quadratic model.
double dp_discriminator(const PhaseKernel& kernel);

struct XiPair {
  double xi1 = 0.0;
  double xi2 = 0.0;
};

/// Inverts the moment formulas: xi(1) from the theta = 0 mean, xi(2) from the
/// difference of second moments at theta = 0 and theta = pi/2.
XiPair recover_xi(double alpha, double mean_theta0, double second_theta0, double second_theta_pi2);

}  // namespace optomech
