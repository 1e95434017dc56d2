#include <gtest/gtest.h>

#include <cmath>

#include "optomech/errors.hpp"
#include "optomech/witness.hpp"

using namespace optomech;

namespace {

constexpr double kPi = 3.141592653589793;

WitnessInputs ideal(double s, double alpha, double t = 0.0) {
  WitnessInputs in;
  in.g0_tau = s;
  in.alpha = alpha;
  in.t_s = t;
  return in;
}

void expect_moments_close(const WitnessMoments& a, const WitnessMoments& b, double rel) {
  auto close = [rel](double x, double y) {
    return std::abs(x - y) <= rel * std::max(std::abs(x), std::abs(y)) + 1e-13;
  };
  EXPECT_TRUE(close(a.mean_o1, b.mean_o1)) << a.mean_o1 << " vs " << b.mean_o1;
  EXPECT_TRUE(close(a.var_o1, b.var_o1)) << a.var_o1 << " vs " << b.var_o1;
  EXPECT_TRUE(close(a.mean_o2, b.mean_o2)) << a.mean_o2 << " vs " << b.mean_o2;
  EXPECT_TRUE(close(a.var_o2, b.var_o2)) << a.var_o2 << " vs " << b.var_o2;
  EXPECT_TRUE(close(a.cos_mean, b.cos_mean)) << a.cos_mean << " vs " << b.cos_mean;
  EXPECT_TRUE(close(a.xl_mean, b.xl_mean)) << a.xl_mean << " vs " << b.xl_mean;
}

}  // namespace

TEST(Witness, IdealStateAtZeroTimeHasMinimalLhs) {
  for (double s : {0.05, 0.1, 0.3}) {
    for (double a : {0.5, 2.0, 5.0}) {
      const auto r = witness_analytic(ideal(s, a));
      EXPECT_NEAR(r.lhs, 0.5, 1e-12);
      EXPECT_NEAR(r.moments.var_o1, 0.5, 1e-12);
    }
  }
}

TEST(Witness, AnalyticMatchesFockSums) {
  for (double t : {0.0, 0.7, kPi / 2.0, kPi}) {
    for (double a : {0.5, 1.0, 3.0}) {
      for (double s : {0.05, 0.1, 0.3}) {
        WitnessInputs in = ideal(s, a, t);
        in.delta_x = 0.3;
        in.sigma_lo = 0.05;
        const auto an = witness_analytic(in);
        const auto fk = witness_fock_oracle(in, default_cutoff(a));
        expect_moments_close(an.moments, fk.moments, 1e-9);
        EXPECT_NEAR(an.margin, fk.margin, 1e-9);
      }
    }
  }
}

TEST(Witness, ThresholdFollowsInverseSquareCoupling) {
  for (double s : {0.02, 0.05, 0.1}) {
    const double a_th = std::sqrt(min_alpha_squared(s));
    EXPECT_DOUBLE_EQ(min_alpha_squared(s), 1.0 / (16.0 * s * s));
    EXPECT_FALSE(witness_analytic(ideal(s, 0.9 * a_th)).violated);
    EXPECT_TRUE(witness_analytic(ideal(s, 1.1 * a_th)).violated);
  }
}

TEST(Witness, DephasedStateNeverViolates) {
  for (double s : {0.05, 0.1, 0.3, 0.45}) {
    for (double a : {0.5, 1.0, 2.0, 4.0, 6.0}) {
      for (double t : {0.0, 1.0, kPi}) {
        const auto r = witness_fock_oracle(ideal(s, a, t), default_cutoff(a), true);
        EXPECT_FALSE(r.violated) << "s=" << s << " a=" << a << " t=" << t;
        EXPECT_LE(r.margin, 1e-12);
      }
    }
  }
}

TEST(Witness, VacuumLightIsNotEntangled) {
  for (double s : {0.05, 0.3}) {
    const auto r = witness_analytic(ideal(s, 0.0));
    EXPECT_FALSE(r.violated);
    EXPECT_NEAR(r.rhs, 0.0, 1e-15);
  }
}

TEST(Witness, NoiseOnlyShrinksTheMargin) {
  const WitnessInputs base = ideal(0.1, 5.0);
  double prev = witness_analytic(base).margin;
  for (double dx : {0.2, 0.5, 1.0, 1.5}) {
    WitnessInputs in = base;
    in.delta_x = dx;
    const double m = witness_analytic(in).margin;
    EXPECT_LT(m, prev);
    prev = m;
  }
  prev = witness_analytic(base).margin;
  for (double sigma : {0.01, 0.05, 0.1}) {
    WitnessInputs in = base;
    in.sigma_lo = sigma;
    const double m = witness_analytic(in).margin;
    EXPECT_LT(m, prev);
    prev = m;
  }
  prev = witness_analytic(base).margin;
  for (double n : {0.1, 0.5, 2.0}) {
    WitnessInputs in = base;
    in.n_th = n;
    const double m = witness_analytic(in).margin;
    EXPECT_LT(m, prev);
    prev = m;
  }
}

TEST(Witness, ReadoutNoiseThresholdNearOneAndAHalf) {
  // Strong-violation limit (4 g0tau alpha)^2 >> 1: bisect delta_x^2 at
  // which the margin vanishes.
  WitnessInputs in = ideal(0.1, 50.0);
  double lo = 0.0;
  double hi = 3.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    in.delta_x = mid;
    (witness_analytic(in).margin > 0.0 ? lo : hi) = mid;
  }
  const double dx2 = lo * lo;
  EXPECT_NEAR(dx2 / 1.5, 1.0, 0.05);
  EXPECT_NEAR(noise_thresholds(0.1, 50.0).delta_x_ent, std::sqrt(1.5), 1e-15);
  EXPECT_THROW(noise_thresholds(0.1, 1.0), RegimeError);
}

TEST(Witness, OccupationBoundSaturatesTheWitness) {
  // n_th g0tau << 1 regime.
  const double s = 0.01;
  const double a = 100.0;
  WitnessInputs in = ideal(s, a);
  in.n_th = 8.0 * (s * a) * (s * a) - 0.5;
  const auto r = witness_analytic(in);
  EXPECT_LT(std::abs(r.margin), 0.02 * r.rhs);
}

TEST(Witness, LoPhaseNoiseThresholdIsTwiceTheCoupling) {
  const double s = 0.01;
  const double a = 400.0;
  WitnessInputs in = ideal(s, a);
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    in.sigma_lo = mid;
    (witness_analytic(in).margin > 0.0 ? lo : hi) = mid;
  }
  EXPECT_NEAR(lo / noise_thresholds(s, a).sigma_max, 1.0, 0.15);
}

TEST(Witness, ReducedBoundIsSmallerBySqrtTwo) {
  WitnessInputs in = ideal(0.1, 3.0, 0.4);
  in.delta_x = 0.2;
  const auto d = witness_analytic(in, CommutatorBound::Derived);
  const auto p = witness_analytic(in, CommutatorBound::Reduced);
  EXPECT_NEAR(d.rhs / p.rhs, std::sqrt(2.0), 1e-12);
  EXPECT_DOUBLE_EQ(d.lhs, p.lhs);
}

TEST(Witness, ThermalOracleAgreesWithClosedForm) {
  WitnessInputs in = ideal(0.1, 2.5);
  in.n_th = 1.0;
  in.delta_x = 0.2;
  const auto an = witness_analytic(in);
  const auto mc = thermal_oracle(in, default_cutoff(2.5), 4096, 11);
  EXPECT_NEAR(mc.report.margin, an.margin, 5.0 * mc.margin_std_error + 1e-3);
  EXPECT_NEAR(mc.report.moments.var_o1, an.moments.var_o1,
              5.0 * mc.std_errors.var_o1 + 1e-3);
  EXPECT_THROW(thermal_oracle(in, default_cutoff(2.5), 10, 1), SampleSizeError);
}

TEST(Witness, CutoffBookkeeping) {
  EXPECT_LT(poisson_tail_mass(25.0, required_cutoff(25.0)), 1e-12);
  EXPECT_GT(poisson_tail_mass(25.0, required_cutoff(25.0) - 1), 1e-12);
  EXPECT_GE(default_cutoff(5.0), required_cutoff(25.0));
  try {
    witness_fock_oracle(ideal(0.1, 5.0), 30);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find(std::to_string(required_cutoff(25.0))),
              std::string::npos);
  }
  WitnessInputs thermal = ideal(0.1, 1.0);
  thermal.n_th = 0.5;
  EXPECT_THROW(witness_fock_oracle(thermal, 50), DomainError);
}

TEST(Witness, RejectsLargeCoupling) {
  EXPECT_THROW(witness_analytic(ideal(0.5, 1.0)), RegimeError);
  WitnessInputs bad = ideal(0.1, 1.0);
  bad.delta_x = -1.0;
  EXPECT_THROW(witness_analytic(bad), DomainError);
}

TEST(Witness, TimeSweepMatchesPointEvaluations) {
  const WitnessInputs in = ideal(0.1, 3.0);
  const std::vector<double> times{0.0, 0.5, 1.0};
  const auto sweep = witness_time_sweep(in, times);
  ASSERT_EQ(sweep.size(), 3u);
  for (std::size_t i = 0; i < times.size(); ++i) {
    EXPECT_DOUBLE_EQ(sweep[i].margin, witness_analytic(ideal(0.1, 3.0, times[i])).margin);
  }
}
