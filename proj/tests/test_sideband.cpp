#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "twinhet/errors.hpp"
#include "twinhet/sideband.hpp"

using namespace twinhet;
using std::numbers::pi;

namespace {

// Independent oracle: explicit 2x2 matrix product.
std::array<double, 2> matrix_rotate(double a1, double a2, double angle) {
  const double m[2][2] = {{std::cos(angle), -std::sin(angle)}, {std::sin(angle), std::cos(angle)}};
  return {m[0][0] * a1 + m[0][1] * a2, m[1][0] * a1 + m[1][1] * a2};
}

ModeQuadratures random_q(std::mt19937_64& gen) {
  std::normal_distribution<double> n;
  return {n(gen), n(gen), n(gen), n(gen)};
}

SqueezeModeQuadratures random_s(std::mt19937_64& gen) {
  std::normal_distribution<double> n;
  return {n(gen), n(gen), n(gen), n(gen)};
}

}  // namespace

TEST(Sideband, WrapPhase) {
  EXPECT_DOUBLE_EQ(wrap_phase(0.0), 0.0);
  EXPECT_NEAR(wrap_phase(2 * pi + 0.5), 0.5, 1e-15);
  EXPECT_NEAR(wrap_phase(-0.5), 2 * pi - 0.5, 1e-15);
  const PhaseSettings p(-pi / 2, 3 * pi, 5 * pi / 2);
  EXPECT_NEAR(p.theta_lo(), 3 * pi / 2, 1e-12);
  EXPECT_NEAR(p.phi(), pi, 1e-12);
  EXPECT_NEAR(p.theta_sq(), pi / 2, 1e-12);
}

TEST(Sideband, RotateReadoutIdentityAtZero) {
  const ModeQuadratures q{0.3, -1.2, 2.5, 0.7};
  const ModeQuadratures r = rotate_readout(q, PhaseSettings(0.0, 0.0));
  EXPECT_EQ(r.x1_lower, q.x1_lower);
  EXPECT_EQ(r.x2_lower, q.x2_lower);
  EXPECT_EQ(r.x1_upper, q.x1_upper);
  EXPECT_EQ(r.x2_upper, q.x2_upper);
}

TEST(Sideband, QuarterTurnSwapsLowerQuadratures) {
  const ModeQuadratures r = rotate_readout({1.0, 0.0, 0.0, 0.0}, PhaseSettings(pi / 2, pi));
  EXPECT_NEAR(r.x1_lower, 0.0, 1e-15);
  EXPECT_NEAR(r.x2_lower, 1.0, 1e-15);
  EXPECT_EQ(r.x1_upper, 0.0);
  EXPECT_EQ(r.x2_upper, 0.0);
}

TEST(Sideband, UpperCarrierTurnsByPhiMinusThetaLo) {
  const ModeQuadratures r = rotate_readout({0.0, 0.0, 1.0, 0.0}, PhaseSettings(0.3, 0.7));
  EXPECT_NEAR(r.x1_upper, std::cos(0.4), 1e-15);
  EXPECT_NEAR(r.x2_upper, std::sin(0.4), 1e-15);
  const auto oracle = matrix_rotate(1.0, 0.0, 0.4);
  EXPECT_NEAR(r.x1_upper, oracle[0], 1e-15);
  EXPECT_NEAR(r.x2_upper, oracle[1], 1e-15);
}

TEST(Sideband, RotationMatchesMatrixOracle) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> angle(-10.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const ModeQuadratures q = random_q(gen);
    const PhaseSettings p(angle(gen), angle(gen));
    const ModeQuadratures r = rotate_readout(q, p);
    const auto lo = matrix_rotate(q.x1_lower, q.x2_lower, p.theta_lo());
    const auto up = matrix_rotate(q.x1_upper, q.x2_upper, p.phi() - p.theta_lo());
    EXPECT_NEAR(r.x1_lower, lo[0], 1e-12);
    EXPECT_NEAR(r.x2_lower, lo[1], 1e-12);
    EXPECT_NEAR(r.x1_upper, up[0], 1e-12);
    EXPECT_NEAR(r.x2_upper, up[1], 1e-12);
  }
}

TEST(Sideband, RotationPreservesNormPerCarrier) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> angle(0.0, 2 * pi);
  for (int i = 0; i < 200; ++i) {
    const ModeQuadratures q = random_q(gen);
    const ModeQuadratures r = rotate_readout(q, PhaseSettings(angle(gen), angle(gen)));
    EXPECT_NEAR(r.x1_lower * r.x1_lower + r.x2_lower * r.x2_lower,
                q.x1_lower * q.x1_lower + q.x2_lower * q.x2_lower, 1e-12);
    EXPECT_NEAR(r.x1_upper * r.x1_upper + r.x2_upper * r.x2_upper,
                q.x1_upper * q.x1_upper + q.x2_upper * q.x2_upper, 1e-12);
  }
}

TEST(Sideband, SqueezeReadoutIgnoresPhi) {
  const SqueezeModeQuadratures s{0.4, -0.3, 1.1, 0.2};
  const auto a = rotate_squeeze_readout(s, PhaseSettings(0.25, 0.0));
  const auto b = rotate_squeeze_readout(s, PhaseSettings(0.25, pi));
  EXPECT_EQ(a.s1_lower, b.s1_lower);
  EXPECT_EQ(a.s2_upper, b.s2_upper);
  const auto lo = matrix_rotate(s.s1_lower, s.s2_lower, 0.25);
  const auto up = matrix_rotate(s.s1_upper, s.s2_upper, -0.25);
  EXPECT_NEAR(a.s1_lower, lo[0], 1e-15);
  EXPECT_NEAR(a.s2_lower, lo[1], 1e-15);
  EXPECT_NEAR(a.s1_upper, up[0], 1e-15);
  EXPECT_NEAR(a.s2_upper, up[1], 1e-15);
}

TEST(Sideband, DemodulateSumAndDifference) {
  const ModeQuadratures amp{1.0, 0.0, 1.0, 0.0};
  EXPECT_NEAR(demodulate(amp, {}, PhaseSettings(0.0, 0.0)).i_inphase, 1.0, 1e-15);
  EXPECT_NEAR(demodulate(amp, {}, PhaseSettings(0.0, pi)).i_inphase, 0.0, 1e-15);
  const ModeQuadratures phase{0.0, 1.0, 0.0, -1.0};
  EXPECT_NEAR(demodulate(phase, {}, PhaseSettings(0.0, 0.0)).i_quadrature, 1.0, 1e-15);
}

TEST(Sideband, DemodulateIsLinear) {
  std::mt19937_64 gen(3);
  for (int i = 0; i < 100; ++i) {
    const ModeQuadratures q1 = random_q(gen), q2 = random_q(gen);
    const SqueezeModeQuadratures s = random_s(gen);
    const PhaseSettings p(0.1 * i, 0.37 * i, 0.05 * i);
    const double a = 1.7, b = -0.4;
    const ModeQuadratures mix{a * q1.x1_lower + b * q2.x1_lower, a * q1.x2_lower + b * q2.x2_lower,
                              a * q1.x1_upper + b * q2.x1_upper, a * q1.x2_upper + b * q2.x2_upper};
    const auto lhs = demodulate(mix, s, p);
    const auto d1 = demodulate(q1, {}, p), d2 = demodulate(q2, {}, p), ds = demodulate({}, s, p);
    EXPECT_NEAR(lhs.i_inphase, a * d1.i_inphase + b * d2.i_inphase + ds.i_inphase, 1e-12);
    EXPECT_NEAR(lhs.i_quadrature, a * d1.i_quadrature + b * d2.i_quadrature + ds.i_quadrature, 1e-12);
  }
}

TEST(Sideband, DemodulateIsTwoPiPeriodic) {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 50; ++i) {
    const ModeQuadratures q = random_q(gen);
    const SqueezeModeQuadratures s = random_s(gen);
    const double lo = 0.3 * i, phi = 0.11 * i;
    const auto a = demodulate(q, s, PhaseSettings(lo, phi));
    const auto b = demodulate(q, s, PhaseSettings(lo + 2 * pi, phi - 2 * pi));
    EXPECT_NEAR(a.i_inphase, b.i_inphase, 1e-12);
    EXPECT_NEAR(a.i_quadrature, b.i_quadrature, 1e-12);
  }
}

// At theta_lo = 0, i(phi=0)^2 + i(phi=pi)^2 = (X1l^2 + X1u^2) / 2 exactly; the
// ensemble mean of each term alone carries the cross term <X1l X1u> = 0.
TEST(Sideband, QuadratureSumIdentity) {
  std::mt19937_64 gen(17);
  double cross_sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const ModeQuadratures q = random_q(gen);
    const double a = demodulate(q, {}, PhaseSettings(0.0, 0.0)).i_inphase;
    const double b = demodulate(q, {}, PhaseSettings(0.0, pi)).i_inphase;
    ASSERT_NEAR(a * a + b * b, 0.5 * (q.x1_lower * q.x1_lower + q.x1_upper * q.x1_upper), 1e-12);
    cross_sum += a * a - b * b;
  }
  // a^2 - b^2 = X1l X1u; its mean is 0 with standard error 1/sqrt(n).
  EXPECT_LT(std::abs(cross_sum / n), 4.0 / std::sqrt(double(n)));
}

TEST(Sideband, ShotUnitScaling) {
  // Vacuum on all four interferometer quadratures: Var(i_I) = 1/2 raw, 1 in shot units.
  std::mt19937_64 gen(23);
  double acc = 0.0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    acc += std::pow(to_shot_units(demodulate(random_q(gen), {}, PhaseSettings(0.3, 1.1))).i_inphase, 2);
  }
  EXPECT_NEAR(acc / n, 1.0, 4.0 * std::sqrt(2.0 / n));
}

TEST(Sideband, SignalGain) {
  EXPECT_NEAR(signal_gain_db(2, PhaseSettings(0.0, 0.0)), 20 * std::log10(2.0), 1e-12);
  EXPECT_NEAR(signal_gain_db(2, PhaseSettings(0.0, 0.0)), 6.0206, 1e-4);
  for (double phi : {0.0, 0.5, pi, 4.0}) EXPECT_NEAR(signal_gain_db(1, PhaseSettings(0.0, phi)), 0.0, 1e-12);
  EXPECT_EQ(signal_gain_db(2, PhaseSettings(0.0, pi)), -std::numeric_limits<double>::infinity());
  EXPECT_THROW(signal_gain_db(3, PhaseSettings()), NumericError);
  EXPECT_THROW(signal_gain_db(0, PhaseSettings()), NumericError);
}

TEST(Sideband, CarrierLayoutValidation) {
  CarrierLayout c;
  EXPECT_NO_THROW(c.validate());
  c.signal_freq = 5e6;
  EXPECT_THROW(c.validate(), NumericError);
  c = CarrierLayout{};
  c.delta = 0.0;
  EXPECT_THROW(c.validate(), NumericError);
}

TEST(Sideband, Finite) {
  EXPECT_TRUE((ModeQuadratures{1, 2, 3, 4}.finite()));
  EXPECT_FALSE((ModeQuadratures{1, std::nan(""), 3, 4}.finite()));
  EXPECT_FALSE((SqueezeModeQuadratures{1, 2, INFINITY, 4}.finite()));
}
