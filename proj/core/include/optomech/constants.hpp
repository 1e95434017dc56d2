#pragma once

// CODATA 2018 values, SI units.
namespace optomech::constants {

inline constexpr double hbar = 1.054571817e-34;     // J s
inline constexpr double G = 6.67430e-11;            // m^3 kg^-1 s^-2
inline constexpr double c = 299792458.0;            // m/s
inline constexpr double k_B = 1.380649e-23;         // J/K
inline constexpr double amu = 1.66053906660e-27;    // kg

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double sqrt2 = 1.414213562373095048801688724209698079;
inline constexpr double ln2 = 0.693147180559945309417232121458176568;

} // namespace optomech::constants
