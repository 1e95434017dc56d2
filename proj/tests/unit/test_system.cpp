#include <gtest/gtest.h>

#include <cmath>

#include "optomech/errors.hpp"
#include "optomech/system.hpp"

using namespace optomech;

namespace {
constexpr double kHbar = 1.054571817e-34;
constexpr double kPi = 3.141592653589793;
}  // namespace

TEST(System, PresetZeroPointSpreadAndCoupling) {
  const SystemParams p = preset("trampoline-60ng");
  const double x0 = std::sqrt(kHbar / (2.0 * 60e-12 * 2.0 * kPi * 20e3));
  EXPECT_NEAR(p.x0() / x0, 1.0, 1e-14);
  EXPECT_NEAR(p.x0(), 2.6445e-15, 1e-18);
  EXPECT_NEAR(p.g0(), 2.0 * kPi * 100.0, 1e-9);
  EXPECT_NEAR(p.tau_s, 1.10394e-6, 1e-10);
  EXPECT_NEAR(p.g0_tau(), 6.93627e-4, 1e-9);
  EXPECT_NEAR(coupling_g0(p.omega_c, p.cavity_length_m, p.mass_kg, p.omega_m), p.g0(), 1e-9);
}

TEST(System, PresetSitsOnThePulsedRegimeBoundary) {
  const SystemParams p = preset("trampoline-60ng");
  const auto r = pulsed_regime(p.alpha, p.g0(), p.tau_s, p.omega_m);
  EXPECT_NEAR(r.epsilon, 0.1, 1e-12);
  EXPECT_TRUE(r.valid);
  EXPECT_NO_THROW(require_pulsed_regime(p));
  SystemParams hot = p;
  hot.alpha *= 1.01;
  EXPECT_THROW(require_pulsed_regime(hot), RegimeError);
}

TEST(System, ValidateNamesTheField) {
  SystemParams p = preset("trampoline-60ng");
  p.mass_kg = -1.0;
  try {
    p.validate();
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("mass_kg"), std::string::npos);
  }
  EXPECT_THROW(preset("no-such-platform"), DomainError);
}

TEST(System, PulsedBranchKickAndRotation) {
  const double g0 = 0.1;
  const double tau = 1.0;
  const double w = 1.0;
  const Complex b0 = branch_amplitude(3, g0, w, tau, 0.0);
  EXPECT_NEAR(b0.real(), 0.0, 1e-15);
  EXPECT_NEAR(b0.imag(), 0.3, 1e-15);
  const Complex bpi = branch_amplitude(3, g0, w, tau, kPi);
  EXPECT_NEAR(bpi.real(), 0.0, 1e-14);
  EXPECT_NEAR(bpi.imag(), -0.3, 1e-14);
  const Complex b2pi = branch_amplitude(3, g0, w, tau, 2.0 * kPi);
  EXPECT_NEAR(b2pi.imag(), 0.3, 1e-14);
}

TEST(System, ExactBranchApproachesPulsedForShortPulses) {
  const double g0 = 1e3;
  const double w = 1e5;
  double previous = 1.0;
  for (double tau : {1e-6, 1e-7, 1e-8}) {
    const Complex exact = branch_amplitude(2, g0, w, tau, 0.0, BranchMode::Exact);
    const Complex kick = branch_amplitude(2, g0, w, tau, 0.0, BranchMode::Pulsed);
    const double err = std::abs(exact - kick) / std::abs(kick);
    EXPECT_LT(err, previous);
    EXPECT_NEAR(err, 0.5 * w * tau, 0.1 * w * tau);
    previous = err;
  }
}

TEST(System, SmallHelpers) {
  EXPECT_DOUBLE_EQ(kerr_infidelity(0.1), 0.01);
  EXPECT_DOUBLE_EQ(readout_angle_adjustment(2.0, 0.25), 0.25);
  EXPECT_THROW(position_spread(1.0, 1.0, 0.6, 1e-15), RegimeError);
  EXPECT_GT(position_spread(10.0, 1.0, 0.1, 1e-15), 0.0);
  EXPECT_FALSE(preset_names().empty());
}
