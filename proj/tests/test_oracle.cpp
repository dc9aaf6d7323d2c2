#include "pathflow/oracle.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace pathflow;
using Vec = VectorX<double>;
using Oracle = GaussianPathOracle<double>;

TEST(Oracle, Endpoints) {
  const Oracle o(1.5, 2.0, 0.5);
  EXPECT_DOUBLE_EQ(o.mean(0), 0);
  EXPECT_NEAR(o.std(0), 1.5, 1e-15);
  EXPECT_NEAR(o.mean(1), 2, 1e-15);
  EXPECT_NEAR(o.std(1), 0.5, 1e-15);
  EXPECT_EQ(o.flow_map(0.7, 0), 0.7);
}

TEST(Oracle, IdenticalEndpointsGiveZeroField) {
  const Oracle o(1.0, 0.0, 1.0);
  for (double t : {0.0, 0.4, 1.0}) {
    for (double x : {-2.0, 0.5, 3.0}) EXPECT_EQ(o.field(x, t), 0);
    EXPECT_EQ(o.expected_dt(t), 0);
  }
}

TEST(Oracle, EqualWidthsGiveTranslation) {
  const Oracle o(1.0, 4.0, 1.0);
  for (double t : {0.0, 0.25, 1.0}) {
    EXPECT_NEAR(o.mean(t), 4 * t, 1e-14);
    EXPECT_NEAR(o.field(-3.0, t), 4, 1e-14);
    EXPECT_NEAR(o.field(7.0, t), 4, 1e-14);
  }
}

TEST(Oracle, ExactFieldSatisfiesResidualIdentity) {
  for (const auto& [s0, m1, s1] : {std::tuple{1.5, 2.0, 0.5}, {2.0, 3.0, 0.7}, {0.5, -1.0, 2.0}}) {
    const Oracle o(s0, m1, s1);
    const double err = residual_identity_check<double>(
        o, [&](double x, double t) { return o.field(x, t); }, [&](double, double t) { return o.field_divergence(t); },
        -6, 6, 40, 40);
    EXPECT_LT(err, 1e-8);
  }
}

TEST(Oracle, WrongFieldsViolateTheIdentity) {
  const Oracle o(1.5, 2.0, 0.5);
  const double zero = residual_identity_check<double>(
      o, [](double, double) { return 0.0; }, [](double, double) { return 0.0; }, -6, 6, 40, 40);
  EXPECT_GT(zero, 0.1);
  const double bumped = residual_identity_check<double>(
      o, [&](double x, double t) { return o.field(x, t) + 0.1; },
      [&](double, double t) { return o.field_divergence(t); }, -6, 6, 40, 40);
  EXPECT_GT(bumped, 0.05);
}

TEST(Oracle, ExpectedTimeDerivativeMatchesMonteCarlo) {
  const Oracle o(1.5, 2.0, 0.5);
  const LwsPath<double> path = o.path();
  std::mt19937_64 gen(1);
  for (double t : {0.1, 0.5, 0.9}) {
    std::normal_distribution<double> normal(o.mean(t), o.std(t));
    double sum = 0;
    const int n = 200000;
    Vec x(1);
    for (int i = 0; i < n; ++i) {
      x(0) = normal(gen);
      sum += path.dt_log_t(x, t);
    }
    EXPECT_NEAR(sum / n, o.expected_dt(t), 0.02) << "t=" << t;
  }
}

TEST(Oracle, FlowMapPushesMomentsAndFollowsField) {
  const Oracle o(1.5, 2.0, 0.5);
  std::mt19937_64 gen(2);
  std::normal_distribution<double> normal(0, 1.5);
  const int n = 100000;
  for (double t : {0.3, 0.8}) {
    double s = 0;
    double ss = 0;
    for (int i = 0; i < n; ++i) {
      const double y = o.flow_map(normal(gen), t);
      s += y;
      ss += y * y;
    }
    const double mean = s / n;
    EXPECT_NEAR(mean, o.mean(t), 0.02);
    EXPECT_NEAR(std::sqrt(ss / n - mean * mean), o.std(t), 0.02);
    for (double x0 : {-2.0, 1.0}) {
      const double velocity = fd_derivative<double>([&](double s) { return o.flow_map(x0, s); }, t, 1e-5, 0, 1);
      EXPECT_NEAR(velocity, o.field(o.flow_map(x0, t), t), 1e-7);
    }
  }
}

TEST(Oracle, RejectsNonPositiveWidths) {
  EXPECT_THROW(Oracle(0, 1, 1), ContractViolation);
  EXPECT_THROW(Oracle(1, 1, -1), ContractViolation);
}

TEST(FdCheck, Examples) {
  const auto square = [](const Vec& x) { return x.squaredNorm(); };
  Vec x(2);
  x << 1, -0.5;
  EXPECT_LT(fd_check<double>(square, [](const Vec& p) { return Vec(2 * p); }, x, 1e-5), 1e-8);
  const auto cubic = [](const Vec& p) { return p.array().cube().sum(); };
  EXPECT_LT(fd_check<double>(cubic, [](const Vec& p) { return Vec(3 * p.array().square()); }, x, 1e-4), 1e-7);
  Vec one(1);
  one << 1;
  EXPECT_NEAR(fd_check<double>(square, [](const Vec& p) { return p; }, one, 1e-5), 0.5, 1e-8);
}

TEST(FdDerivative, OneSidedAtEnds) {
  const auto f = [](double t) { return t * t; };
  EXPECT_NEAR(fd_derivative<double>(f, 0.0, 1e-4, 0, 1), 0, 1e-10);
  EXPECT_NEAR(fd_derivative<double>(f, 1.0, 1e-4, 0, 1), 2, 1e-10);
  EXPECT_NEAR(fd_derivative<double>(f, 0.5, 1e-4, 0, 1), 1, 1e-10);
}
