#include "pathflow/oracle.hpp"
#include "pathflow/path.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace pathflow;
using Vec = VectorX<double>;
using Mixture = GaussianMixture<double>;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

std::shared_ptr<const InitialDistribution<double>> initial(Eigen::Index dim, double std) {
  return std::make_shared<InitialDistribution<double>>(Vec::Zero(dim), std);
}

std::shared_ptr<const Mixture> two_modes() {
  return std::make_shared<Mixture>(Mixture::isotropic({v1(0), v1(8)}, {1, 1}, {0.5, 0.5}));
}

}  // namespace

TEST(LwsPath, EndpointsRecoverInitialAndTarget) {
  const auto p0 = initial(1, 3);
  const auto p1 = two_modes();
  const LwsPath<double> path(p0, p1, 1, 0.8);
  for (double x : {-3.0, 0.0, 2.5, 8.0}) {
    EXPECT_NEAR(path.log_t(v1(x), 0), p0->log_unnorm(v1(x)), 1e-12);
    EXPECT_NEAR(path.log_t(v1(x), 1), p1->log_unnorm(v1(x)), 1e-12);
    EXPECT_NEAR(path.grad_log_t(v1(x), 1)(0), p1->grad_log_unnorm(v1(x))(0), 1e-12);
  }
}

TEST(LwsPath, NoShrinkageTimeDerivativeIsLogRatio) {
  const auto p0 = initial(1, 2);
  const auto p1 = two_modes();
  const LwsPath<double> path(p0, p1, 0, 1);
  for (double t : {0.0, 0.3, 1.0}) {
    for (double x : {-1.0, 4.0}) {
      EXPECT_NEAR(path.dt_log_t(v1(x), t), p1->log_unnorm(v1(x)) - p0->log_unnorm(v1(x)), 1e-12);
    }
  }
}

TEST(LwsPath, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> unit(0, 1);
  std::normal_distribution<double> normal(0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index dim = 1 + trial % 4;
    std::vector<Vec> means;
    for (int j = 0; j < 3; ++j) {
      Vec m(dim);
      for (Eigen::Index i = 0; i < dim; ++i) m(i) = normal(gen);
      means.push_back(m);
    }
    const auto p1 = std::make_shared<Mixture>(Mixture::isotropic(means, {0.8, 1.2, 0.6}, {0.2, 0.3, 0.5}));
    const LwsPath<double> path(initial(dim, 0.5 + 2 * unit(gen)), p1, unit(gen), 0.05 + 0.95 * unit(gen));
    Vec x(dim);
    for (Eigen::Index i = 0; i < dim; ++i) x(i) = normal(gen);
    const double t = trial < 2 ? static_cast<double>(trial) : unit(gen);
    EXPECT_LT(fd_check<double>([&](const Vec& p) { return path.log_t(p, t); },
                               [&](const Vec& p) { return path.grad_log_t(p, t); }, x, 1e-5),
              1e-5);
    const double analytic = path.dt_log_t(x, t);
    const double numeric = fd_derivative<double>([&](double s) { return path.log_t(x, s); }, t, 1e-5, 0, 1);
    EXPECT_LT(std::abs(analytic - numeric) / (1 + std::abs(analytic)), 1e-5) << "trial " << trial;
  }
}

TEST(LwsPath, TermsAgreeWithSeparateCalls) {
  const LwsPath<double> path(initial(2, 1.5), std::make_shared<Mixture>(Mixture::isotropic({Vec::Ones(2)}, {0.7}, {1})),
                             0.4, 0.6);
  Vec x(2);
  x << 0.3, -1.1;
  const PathTerms<double> terms = path.terms(x, 0.35);
  EXPECT_DOUBLE_EQ(terms.log, path.log_t(x, 0.35));
  EXPECT_TRUE(terms.grad.isApprox(path.grad_log_t(x, 0.35)));
  EXPECT_DOUBLE_EQ(terms.dt, path.dt_log_t(x, 0.35));
}

TEST(LwsPath, RejectsInvalidParameters) {
  EXPECT_THROW(LwsPath<double>(initial(1, 1), two_modes(), 1.5, 0.5), ContractViolation);
  EXPECT_THROW(LwsPath<double>(initial(1, 1), two_modes(), 0.5, 0), ContractViolation);
  EXPECT_THROW(LwsPath<double>(initial(2, 1), two_modes(), 0.5, 0.5), ContractViolation);
  const LwsPath<double> path(initial(1, 1), two_modes(), 0.5, 0.5);
  EXPECT_THROW(path.log_t(v1(0), 1.5), ContractViolation);
  EXPECT_THROW(path.grad_log_t(v1(0), -0.1), ContractViolation);
}

TEST(LwsPath, PartitionFreeUnderTargetShift) {
  const auto p1 = two_modes();
  const auto shifted = std::make_shared<ShiftedTarget<double>>(p1, -42.0);
  const LwsPath<double> a(initial(1, 3), p1, 1, 0.8);
  const LwsPath<double> b(initial(1, 3), shifted, 1, 0.8);
  for (double t : {0.1, 0.6}) {
    EXPECT_TRUE((a.grad_log_t(v1(2.5), t).array() == b.grad_log_t(v1(2.5), t).array()).all());
    EXPECT_NEAR(b.log_t(v1(2.5), t) - a.log_t(v1(2.5), t), -42.0 * t, 1e-10);
  }
}

TEST(PathGrid, SlicesSumToOneAndStartAtInitial) {
  const auto p0 = initial(1, 1.5);
  const LwsPath<double> path(p0, two_modes(), 1, 0.5);
  const PathGrid<double> grid = path_grid<double>(path, -6, 12, 181, 11);
  EXPECT_EQ(grid.t(10), 1.0);
  for (Eigen::Index i = 0; i < grid.t.size(); ++i) EXPECT_NEAR(grid.density.row(i).sum(), 1, 1e-12);
  Vec p(grid.x.size());
  for (Eigen::Index j = 0; j < grid.x.size(); ++j) p(j) = std::exp(p0->log_unnorm(v1(grid.x(j))));
  p /= p.sum();
  EXPECT_LT((grid.density.row(0).transpose() - p).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(PathGrid, ShrinkageRevealsRightModeEarly) {
  const auto p0 = initial(1, 1.5);
  auto slice = [&](double alpha, double beta) {
    const LwsPath<double> path(p0, two_modes(), alpha, beta);
    return path_grid<double>(path, -6, 12, 361, 6);  // t = 0, 0.2, ...
  };
  auto right_mass = [](const PathGrid<double>& g, Eigen::Index row) {
    return (g.x.array() > 4).select(g.density.row(row).transpose().array(), 0).sum();
  };
  auto local_maxima = [](const PathGrid<double>& g, Eigen::Index row) {
    int count = 0;
    for (Eigen::Index j = 1; j + 1 < g.x.size(); ++j) {
      count += g.density(row, j) > g.density(row, j - 1) && g.density(row, j) > g.density(row, j + 1);
    }
    return count;
  };
  const auto a = slice(0, 1);
  const auto b = slice(1, 0.5);
  EXPECT_LT(right_mass(a, 1), 0.01);
  EXPECT_EQ(local_maxima(a, 1), 1);
  EXPECT_EQ(local_maxima(b, 1), 2);
  EXPECT_GT(right_mass(b, 1), right_mass(a, 1));
}

TEST(PathGrid, OnlyOneDimensional) {
  const LwsPath<double> path(initial(2, 1), std::make_shared<Mixture>(Mixture::isotropic({Vec::Ones(2)}, {1}, {1})), 0,
                             1);
  EXPECT_THROW(path_grid<double>(path, -1, 1, 5, 5), Unsupported);
}

TEST(PathSlice, FreezesTime) {
  const LwsPath<double> path(initial(1, 3), two_modes(), 1, 0.8);
  const PathSlice<double> slice(path, 0.4);
  EXPECT_EQ(slice.log_unnorm(v1(1.3)), path.log_t(v1(1.3), 0.4));
  EXPECT_EQ(slice.grad_log_unnorm(v1(1.3))(0), path.grad_log_t(v1(1.3), 0.4)(0));
}
