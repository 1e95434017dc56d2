#pragma once

// Counter-based random streams. Every Monte Carlo draw is a pure function of
// (seed, stream tag, shot index, draw position), so results do not depend on
// how shots are distributed over threads.

#include <array>
#include <cstdint>

namespace optomech {

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

class ShotStream {
 public:
  ShotStream(std::uint64_t seed, std::uint64_t shot, std::uint32_t tag = 0);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  /// Standard normal via Box-Muller; consumes two uniforms per call.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t shot_;
  std::uint32_t tag_;
  std::uint32_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

}  // namespace optomech
