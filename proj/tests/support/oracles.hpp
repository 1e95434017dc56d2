#pragma once

// Reference computations that share no code with the library: brute-force
// sums and integrals used to check closed forms and adaptive quadrature.

#include <complex>
#include <cstddef>
#include <functional>

namespace oracle {

/// Gravitational interaction energy change U(d) - U(0) of two uniform
/// spheres (mass m, radius r) from the Fourier representation
///   (2 G m^2 / (pi r)) int_0^inf F(q)^2 (1 - sin(q d/r)/(q d/r)) dq,
///   F(q) = 3 (sin q - q cos q) / q^3.
double sphere_energy_shift(double m, double r, double d);

/// Diosi-Penrose rate for n spheres from the Fourier representation.
double dp_rate_fourier(double m, double r, double n, double d);

/// (1/pi) int_0^pi g(amplitude sin phi) dphi, composite midpoint rule.
double half_period_midpoint(const std::function<double(double)>& g, double amplitude,
                            std::size_t points = 1000000);

/// exp(-k (2 pi / omega) C (g0tau x0)^2 eta^2).
double quadratic_kernel(double lambda, double k, double omega_m, double g0_tau, double x0,
                        double eta);

/// Var(P_l) of the recorded state when the phase kernel is Gaussian with
/// xi(eta) = exp(-c eta^2): 1/2 + alpha^2 (1 - exp(-4c)).
double gaussian_kernel_variance(double alpha, double c);

}  // namespace oracle
