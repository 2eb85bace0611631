#include <gtest/gtest.h>

#include <sstream>

#include "skewlie/errors.hpp"
#include "skewlie/lie_core.hpp"
#include "skewlie/paths.hpp"
#include "skewlie/registry.hpp"
#include "support.hpp"

using namespace skewlie;
using testing_support::max_abs;

TEST(TimeGrid, ValidatesAndIndexes) {
  EXPECT_THROW(TimeGrid(1.0, 1), ConfigError);
  EXPECT_THROW(TimeGrid(0.0, 10), ConfigError);
  const TimeGrid g(2.0, 8);
  EXPECT_DOUBLE_EQ(g.dt(), 0.25);
  EXPECT_EQ(g.index_of(1.5), 6);
  EXPECT_EQ(g.index_of(2.0), 8);
  EXPECT_THROW(g.index_of(0.3), PreconditionError);
}

TEST(FlatBrownian, FrameIsOrthonormalForTheMetric) {
  Eigen::MatrixXd metric(3, 3);
  metric << 2, 0.3, 0, 0.3, 1, 0.1, 0, 0.1, 0.5;
  const Group g = make_so3().with_metric(metric, false);
  const Eigen::MatrixXd f = orthonormal_frame(g);
  EXPECT_LT(max_abs(f.transpose() * metric * f - Eigen::MatrixXd::Identity(3, 3)), 1e-14);
}

TEST(FlatBrownian, VarianceFollowsTheInverseMetric) {
  Eigen::MatrixXd metric = Eigen::Vector2d(4.0, 1.0).asDiagonal();
  const Group g = make_rn(2).with_metric(metric, true);
  const TimeGrid grid(2.0, 50);
  const int paths = 20000;
  Eigen::MatrixXd terminal(paths, 2);
  for (int p = 0; p < paths; ++p) terminal.row(p) = sample_flat_bm(g, grid, {17, static_cast<std::uint64_t>(p)}).values.col(50);
  const Eigen::RowVector2d mean = terminal.colwise().mean();
  const Eigen::MatrixXd centered = terminal.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / (paths - 1);
  // Var = T / 4 and T; standard error of a variance estimate ~ var * sqrt(2 / P).
  EXPECT_NEAR(cov(0, 0), 0.5, 4 * 0.5 * std::sqrt(2.0 / paths));
  EXPECT_NEAR(cov(1, 1), 2.0, 4 * 2.0 * std::sqrt(2.0 / paths));
  EXPECT_NEAR(cov(0, 1), 0.0, 4 * 1.0 * std::sqrt(1.0 / paths));
}

TEST(FlatBrownian, DeterministicAndStartsAtZero) {
  const Group g = make_so3();
  const TimeGrid grid(1.0, 100);
  const AlgebraPath a = sample_flat_bm(g, grid, {3, 9});
  const AlgebraPath b = sample_flat_bm(g, grid, {3, 9});
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.values.col(0), Eigen::VectorXd::Zero(3));
  EXPECT_NE(a.values, sample_flat_bm(g, grid, {3, 10}).values);
}

TEST(FlatBrownian, DriftedMartingaleAddsLinearDrift) {
  const Group g = make_rn(3);
  const TimeGrid grid(1.0, 10);
  const Eigen::VectorXd drift = Eigen::Vector3d(0.5, 0, -1);
  const AlgebraPath a = sample_flat_bm(g, grid, {1, 2});
  const AlgebraPath b = sample_drifted_martingale(g, grid, {1, 2}, drift);
  for (std::int64_t k = 0; k <= 10; ++k) EXPECT_LT((b.at(k) - a.at(k) - grid.time(k) * drift).norm(), 1e-14);
}

TEST(WienerTree, LevelsRefinePathwise) {
  const Group g = make_so3();
  const WienerTree tree(g, 1.0, 8, {4, 0});
  for (int l = 0; l < 8; ++l) {
    const Eigen::MatrixXd coarse = tree.increments(l), fine = tree.increments(l + 1);
    ASSERT_EQ(fine.cols(), 2 * coarse.cols());
    for (Eigen::Index k = 0; k < coarse.cols(); ++k) {
      EXPECT_LT((fine.col(2 * k) + fine.col(2 * k + 1) - coarse.col(k)).norm(), 1e-14);
    }
  }
  const AlgebraPath p4 = tree.path(4), p8 = tree.path(8);
  for (std::int64_t k = 0; k <= 16; ++k) EXPECT_LT((p4.at(k) - p8.at(16 * k)).norm(), 1e-13);
}

TEST(WienerTree, IncrementsAreStationaryAndHaveTheRightVariance) {
  // Two-sample KS between the first and second half of the finest increments,
  // pooled over trees, plus the variance h at that level.
  const Group g = make_rn(1);
  std::vector<double> first, second;
  double sum_sq = 0;
  int count = 0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    const WienerTree tree(g, 1.0, 6, {8, t});
    const Eigen::MatrixXd inc = tree.increments(6);
    for (Eigen::Index k = 0; k < inc.cols(); ++k) {
      (k < inc.cols() / 2 ? first : second).push_back(inc(0, k));
      sum_sq += inc(0, k) * inc(0, k);
      ++count;
    }
  }
  EXPECT_LT(testing_support::ks_two_sample(first, second), testing_support::ks_critical_001(first.size(), second.size()));
  const double h = 1.0 / 64.0;
  EXPECT_NEAR(sum_sq / count, h, 4 * h * std::sqrt(2.0 / count));
}

TEST(WienerTree, RejectsBadDepth) {
  EXPECT_THROW(WienerTree(make_so3(), 1.0, 0, {}), ConfigError);
  EXPECT_THROW(WienerTree(make_so3(), 1.0, 25, {}), ConfigError);
}

TEST(StochasticExponential, LogarithmInvertsItOnTheSameGrid) {
  for (const auto& name : {"so3", "su2", "heis3", "r3", "torus2"}) {
    SCOPED_TRACE(name);
    const Group g = make_group(name);
    const AlgebraPath y = sample_flat_bm(g, TimeGrid(1.0, 500), {6, 1});
    const GroupPath x = stochastic_exponential(g, y);
    EXPECT_LT(max_abs(stochastic_logarithm(g, x).values - y.values), 1e-11);
    double worst = 0;
    for (const auto& m : x.values) worst = std::max(worst, membership_residual(g, m));
    EXPECT_LT(worst, 1e-12);
  }
}

TEST(StochasticExponential, SchemesAgreeOnAbelianGroups) {
  const Group g = make_rn(2);
  const GroupPath x = stochastic_exponential(g, sample_flat_bm(g, TimeGrid(1.0, 200), {2, 2}));
  EXPECT_LT(max_abs(stochastic_logarithm(g, x, LogScheme::group_log).values -
                    stochastic_logarithm(g, x, LogScheme::midpoint).values),
            1e-13);
}

TEST(StochasticExponential, MidpointSchemeIsFirstOrderAccurate) {
  const Group g = make_so3();
  const AlgebraPath y = sample_flat_bm(g, TimeGrid(1.0, 1000), {7, 7});
  const GroupPath x = stochastic_exponential(g, y);
  const double err = max_abs(stochastic_logarithm(g, x, LogScheme::midpoint).values - y.values);
  EXPECT_GT(err, 0.0);
  EXPECT_LT(err, 0.05);
}

TEST(StochasticExponential, PreconditionsAreEnforced) {
  const Group g = make_so3();
  AlgebraPath y = sample_flat_bm(g, TimeGrid(1.0, 10), {1, 1});
  y.values.col(0).setConstant(0.1);
  EXPECT_THROW(stochastic_exponential(g, y), PreconditionError);
  GroupPath x = stochastic_exponential(g, sample_flat_bm(g, TimeGrid(1.0, 10), {1, 1}));
  x.values[0] = exp_group(g, Eigen::VectorXd(Eigen::Vector3d(0.1, 0, 0)));
  EXPECT_THROW(stochastic_logarithm(g, x), PreconditionError);
  EXPECT_THROW(stochastic_exponential(make_su2(), sample_flat_bm(g, TimeGrid(1.0, 10), {1, 1})), ConfigError);
}

TEST(StochasticExponential, IncrementAtTheCutLocusRaisesBranchError) {
  const Group g = make_so3();
  GroupPath x{TimeGrid(1.0, 2), {}, "so3", {}};
  x.values = {identity_element(g), exp_group(g, Eigen::VectorXd(Eigen::Vector3d(0.1, 0, 0))),
              exp_group(g, Eigen::VectorXd(Eigen::Vector3d(0.1 + EIGEN_PI, 0, 0)))};
  EXPECT_THROW(stochastic_logarithm(g, x), BranchError);
}

TEST(GroupBrownian, NeedsABiinvariantMetric) {
  EXPECT_THROW(sample_group_bm(make_heis3(), TimeGrid(1.0, 10), {}), UnsupportedGroupError);
  const GroupPath x = sample_group_bm(make_su2(), TimeGrid(1.0, 1000), {1, 1});
  EXPECT_LT(membership_residual(make_su2(), x.values.back()), 1e-12);
}

TEST(Serialization, CsvAndBinaryRoundTrip) {
  const Group g = make_so3();
  const AlgebraPath y = sample_flat_bm(g, TimeGrid(1.0, 64), {12345, 77});
  std::stringstream csv;
  write_csv(csv, y);
  const AlgebraPath back = read_algebra_csv(csv);
  EXPECT_EQ(back.values, y.values);
  EXPECT_EQ(back.noise.seed, 12345u);
  EXPECT_EQ(back.noise.path_index, 77u);
  EXPECT_EQ(back.grid, y.grid);

  std::stringstream bin;
  write_binary(bin, y);
  const AlgebraPath bback = read_algebra_binary(bin);
  EXPECT_EQ(bback.values, y.values);
  EXPECT_EQ(bback.group, "so3");

  const GroupPath x = stochastic_exponential(g, y);
  std::stringstream gbin;
  write_binary(gbin, x);
  const GroupPath xback = read_group_binary(gbin);
  ASSERT_EQ(xback.values.size(), x.values.size());
  for (std::size_t k = 0; k < x.values.size(); ++k) EXPECT_EQ(xback.values[k], x.values[k]);

  std::stringstream junk("not a frame");
  EXPECT_ANY_THROW(read_algebra_binary(junk));
}
