#include "pathflow/metrics.hpp"
#include "pathflow/oracle.hpp"
#include "pathflow/samplers.hpp"

#include <gtest/gtest.h>

using namespace pathflow;
using Vec = VectorX<double>;
using Particles = ParticleMatrix<double>;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

std::shared_ptr<const GaussianMixture<double>> standard_normal() {
  return std::make_shared<GaussianMixture<double>>(GaussianMixture<double>::isotropic({v1(0)}, {1}, {1}));
}

double variance(const Vec& v) { return (v.array() - v.mean()).square().mean(); }

}  // namespace

TEST(AdaptiveTimeStep, UnitNormsGiveFullStep) {
  const Particles phi = Particles::Constant(10, 1, 0.1);
  EXPECT_DOUBLE_EQ(adaptive_time_step<double>(0, phi, 0.1, std::numeric_limits<double>::infinity()), 1.0);
}

TEST(AdaptiveTimeStep, HandArithmetic) {
  Particles phi(2, 1);
  phi << 1, 3;
  EXPECT_DOUBLE_EQ(adaptive_time_step<double>(0.5, phi, 0.1, 0.1), 0.05);
}

TEST(AdaptiveTimeStep, ZeroFieldGuard) {
  const Particles phi = Particles::Zero(4, 2);
  EXPECT_DOUBLE_EQ(adaptive_time_step<double>(0.7, phi, 0.1, 0.5), 1 - 0.7);
  EXPECT_DOUBLE_EQ(adaptive_time_step<double>(0.2, phi, 0.1, 0.5), 0.5);
}

TEST(AdaptiveTimeStep, MeanDisplacementEqualsPsiBeforeClamping) {
  Particles phi(3, 2);
  phi << 0.3, -0.4, 2, 0, -1, 1;
  const double psi = 0.01;
  const double dt = adaptive_time_step<double>(0, phi, psi, 1);
  EXPECT_NEAR(dt * phi.rowwise().norm().mean(), psi, 1e-15);
}

TEST(LangevinAdjust, ZeroStepsOrDeltaIsIdentity) {
  const Particles x = Particles::Constant(5, 1, 2);
  EXPECT_TRUE(langevin_adjust<double>(x, *standard_normal(), 0.0, 10, 1, 0).isApprox(x));
  EXPECT_TRUE(langevin_adjust<double>(x, *standard_normal(), 0.1, 0, 1, 0).isApprox(x));
}

TEST(LangevinAdjust, NoiselessStep) {
  const Particles x = Particles::Constant(1, 1, 2);
  EXPECT_NEAR(langevin_adjust<double>(x, *standard_normal(), 0.1, 1, 1, 0, false)(0, 0), 1.8, 1e-15);
}

TEST(LangevinAdjust, StationaryVariance) {
  const Particles x = InitialDistribution<double>(Vec::Zero(1), 1).sample(4000, 3);
  const Vec out = langevin_adjust<double>(x, *standard_normal(), 0.01, 300, 3, 0).col(0);
  EXPECT_GT(variance(out), 0.9);
  EXPECT_LT(variance(out), 1.12);
}

TEST(LangevinAdjust, NonFinitePositionIsASamplerError) {
  const auto bad = FunctionTarget<double>(
      1, [](const auto&) { return 0.0; }, [](const auto&) { return v1(std::numeric_limits<double>::infinity()); });
  EXPECT_THROW(langevin_adjust<double>(Particles::Zero(2, 1), bad, 0.1, 1, 0, 0), SamplerError);
}

TEST(Pgps, ConstantPathLeavesInitialDistribution) {
  const auto p0 = std::make_shared<InitialDistribution<double>>(Vec::Zero(1), 1.0);
  const LwsPath<double> path(p0, standard_normal(), 0, 1);
  PgpsConfig<double> config;
  config.seed = 4;
  const Particles x0 = p0->sample(256, 4);
  const auto out = pgps_run<double>(path, config, x0);
  EXPECT_EQ(out.positions.rows(), 256);
  EXPECT_GT(energy_test_pvalue<double>(out.positions, p0->sample(256, 99), 199, 1), 0.01);
}

TEST(Pgps, OracleEndpointMoments) {
  const GaussianPathOracle<double> oracle(1.0, 4.0, 1.0);
  const LwsPath<double> path = oracle.path();
  PgpsConfig<double> config;
  config.psi = 0.05;
  config.train.optimizer = Optimizer::kAdam;
  config.train.learning_rate = 1e-2;
  config.train.max_steps = 100;
  config.seed = 2;
  const auto out = pgps_run<double>(path, config, oracle.initial()->sample(512, 2));
  const Vec xs = out.positions.col(0);
  EXPECT_NEAR(xs.mean(), 4, 0.15);
  EXPECT_NEAR(variance(xs), 1, 0.2);
}

TEST(Pgps, TimeIncreasesToExactlyOneWithinBudget) {
  const auto p0 = std::make_shared<InitialDistribution<double>>(Vec::Zero(1), 3.0);
  const auto p1 = std::make_shared<GaussianMixture<double>>(
      GaussianMixture<double>::isotropic({v1(0), v1(8)}, {1, 1}, {0.5, 0.5}));
  const LwsPath<double> path(p0, p1, 1, 0.8);
  PgpsConfig<double> config;
  config.psi = 0.01;
  config.adjust_steps = 3;
  config.iteration_budget = 60;
  config.train.optimizer = Optimizer::kAdam;
  config.train.learning_rate = 1e-2;
  config.train.max_steps = 5;
  const auto out = pgps_run<double>(path, config, p0->sample(50, 0));
  ASSERT_FALSE(out.history.empty());
  double previous = 0;
  for (const auto& row : out.history) {
    EXPECT_GT(row.t, previous);
    previous = row.t;
  }
  EXPECT_EQ(out.history.back().t, 1.0);
  EXPECT_LE(out.iterations, 60);
  EXPECT_EQ(out.iterations, static_cast<long>(out.history.size()) * 4);
  EXPECT_EQ(out.positions.rows(), 50);
}

TEST(Pgps, SeedDeterminismAndShiftInvariance) {
  const auto p0 = std::make_shared<InitialDistribution<double>>(Vec::Zero(1), 2.0);
  const auto p1 = std::make_shared<GaussianMixture<double>>(
      GaussianMixture<double>::isotropic({v1(-1), v1(3)}, {1, 0.5}, {0.3, 0.7}));
  PgpsConfig<double> config;
  config.adjust_steps = 2;
  config.train.max_steps = 10;
  config.seed = 8;
  const LwsPath<double> path(p0, p1, 0.5, 0.7);
  const LwsPath<double> shifted(p0, std::make_shared<ShiftedTarget<double>>(p1, 1e3), 0.5, 0.7);
  const Particles x0 = p0->sample(40, 8);
  const auto a = pgps_run<double>(path, config, x0);
  const auto b = pgps_run<double>(path, config, x0);
  EXPECT_TRUE((a.positions.array() == b.positions.array()).all());
  // The shift only moves the loss through rounding of the centered residual.
  const auto c = pgps_run<double>(shifted, config, x0);
  EXPECT_LT((a.positions - c.positions).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(TfPgps, SingleGridPointIsLangevinOnTarget) {
  const auto p0 = std::make_shared<InitialDistribution<double>>(Vec::Zero(1), 3.0);
  const auto p1 = standard_normal();
  const LwsPath<double> path(p0, p1, 1, 0.5);
  PgpsConfig<double> config;
  config.tf_time_step = 1;
  config.adjust_steps = 25;
  config.seed = 6;
  const Particles x0 = p0->sample(30, 6);
  const auto tf = tf_pgps_run<double>(path, config, x0);
  const auto ld = ld_run<double>(*p1, LangevinConfig<double>{config.adjust_delta, 25, 6}, x0);
  EXPECT_EQ(tf.iterations, 25);
  EXPECT_TRUE(tf.positions.isApprox(ld.positions, 1e-12));
}

TEST(TfPgps, UniformGridAccounting) {
  const auto p0 = std::make_shared<InitialDistribution<double>>(Vec::Zero(1), 3.0);
  const LwsPath<double> path(p0, standard_normal(), 1, 0.5);
  PgpsConfig<double> config;
  config.tf_time_step = 0.01;
  config.adjust_steps = 30;
  const auto out = tf_pgps_run<double>(path, config, p0->sample(5, 0));
  EXPECT_EQ(out.history.size(), 100u);
  EXPECT_EQ(out.iterations, 3000);
  EXPECT_EQ(out.history.back().t, 1.0);
  config.adjust_steps = 0;
  EXPECT_THROW(tf_pgps_run<double>(path, config, p0->sample(5, 0)), ConfigError);
}

TEST(Ld, ZeroIterationsIsIdentity) {
  const Particles x = InitialDistribution<double>(Vec::Zero(2), 1).sample(7, 1);
  const auto target = GaussianMixture<double>::isotropic({Vec::Zero(2)}, {1}, {1});
  EXPECT_TRUE(ld_run<double>(target, LangevinConfig<double>{0.01, 0, 1}, x).positions.isApprox(x));
}

TEST(Ld, LongRunMoments) {
  const Particles x = InitialDistribution<double>(Vec::Zero(1), 3).sample(3000, 2);
  const Vec out = ld_run<double>(*standard_normal(), LangevinConfig<double>{0.01, 800, 2}, x).positions.col(0);
  EXPECT_NEAR(out.mean(), 0, 0.06);
  EXPECT_GT(variance(out), 0.9);
  EXPECT_LT(variance(out), 1.12);
}

TEST(Svgd, SingleParticleFollowsScore) {
  const Particles x = Particles::Constant(1, 1, 2);
  const auto out = svgd_run<double>(*standard_normal(), SvgdConfig<double>{0.1, 1}, x);
  EXPECT_NEAR(out.positions(0, 0), 2 + 0.1 * -2, 1e-15);
}

TEST(Svgd, CoincidentParticlesMoveTogether) {
  const Particles x = Particles::Constant(2, 1, 1.5);
  const Particles dir = svgd_direction<double>(*standard_normal(), x);
  EXPECT_DOUBLE_EQ(dir(0, 0), dir(1, 0));
  EXPECT_DOUBLE_EQ(dir(0, 0), -1.5);
}

TEST(Svgd, UnderdispersedButCloseOnStandardNormal) {
  const Particles x = InitialDistribution<double>(Vec::Zero(1), 2).sample(100, 3);
  const Vec out = svgd_run<double>(*standard_normal(), SvgdConfig<double>{0.05, 2000}, x).positions.col(0);
  EXPECT_GT(variance(out), 0.5);
  EXPECT_LT(variance(out), 1.0);
}

TEST(Svgd, BandwidthFallsBackWhenDegenerate) {
  EXPECT_EQ(svgd_bandwidth<double>(MatrixX<double>::Zero(3, 3)), 1.0);
  MatrixX<double> sq(2, 2);
  sq << 0, 4, 4, 0;
  EXPECT_NEAR(svgd_bandwidth<double>(sq), 4 / std::log(3.0), 1e-15);
}

TEST(Samplers, ParticleCountConserved) {
  const Particles x = InitialDistribution<double>(Vec::Zero(1), 1).sample(13, 0);
  EXPECT_EQ(ld_run<double>(*standard_normal(), LangevinConfig<double>{0.01, 5, 0}, x).positions.rows(), 13);
  EXPECT_EQ(svgd_run<double>(*standard_normal(), SvgdConfig<double>{0.01, 5}, x).positions.rows(), 13);
}
