#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "stpod/errors.hpp"
#include "stpod/interp.hpp"
#include "test_util.hpp"

using namespace stpod;
using stpod::testing::gaussian;
using stpod::testing::random_stiefel;

namespace {

TrainingSet worked_example() {
  const double a = std::sqrt(3.0) / 3.0;
  const double b = std::sqrt(6.0);
  Eigen::MatrixXd y1 = Eigen::MatrixXd::Zero(5, 2), y2(5, 2), y3(5, 2);
  y1(0, 0) = 1.0;
  y1(1, 1) = 1.0;
  y2 << a, a, 0, a, a, 0, -a, a, 0, 0;
  y3 << a, -b / 6, 0, b / 4, a, b / 12, 0, b / 4, a, b / 12;
  TrainingSet t;
  t.params = {15.0, 22.0, 27.0};
  t.points = {StiefelPoint(y1), StiefelPoint(y2), StiefelPoint(y3)};
  t.ref_index = 0;
  return t;
}

// Snapshot matrices with well separated singular values that vary smoothly
// with the parameter.
std::vector<SnapshotMatrix> smooth_family(std::mt19937& rng, const std::vector<double>& params,
                                          Eigen::Index n, Eigen::Index m) {
  const Eigen::MatrixXd a = gaussian(rng, n, m), b = gaussian(rng, n, m);
  std::vector<SnapshotMatrix> out;
  for (double lam : params) {
    SnapshotMatrix s;
    s.kind = FieldKind::Velocity;
    s.parameter = lam;
    s.values = a + lam * b;
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST(Weights, LagrangeIsPartitionOfUnityAndCardinal) {
  const std::vector<double> p{0.1, 0.5, 0.9};
  for (std::size_t k = 0; k < p.size(); ++k) {
    const auto w = lagrange_weights(p, p[k]);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(w[i], i == k ? 1.0 : 0.0, 1e-15);
  }
  // Three nodes reproduce quadratics exactly.
  for (double lam : {0.3, 0.8, 1.2}) {
    const auto w = lagrange_weights(p, lam);
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      sum += w[i];
      sq += w[i] * p[i] * p[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-14);
    EXPECT_NEAR(sq, lam * lam, 1e-14);
  }
}

TEST(Weights, PiecewiseLinearHats) {
  const std::vector<double> p{0.0, 1.0, 3.0};
  const auto w = piecewise_linear_weights(p, 2.0);
  EXPECT_DOUBLE_EQ(w[0], 0.0);
  EXPECT_DOUBLE_EQ(w[1], 0.5);
  EXPECT_DOUBLE_EQ(w[2], 0.5);
  const auto e = piecewise_linear_weights(p, 4.0);
  EXPECT_DOUBLE_EQ(e[1], -0.5);
  EXPECT_DOUBLE_EQ(e[2], 1.5);
}

TEST(Weights, RejectUnorderedParameters) {
  const std::vector<double> dup{0.1, 0.1, 0.9};
  const std::vector<double> nan{0.1, std::nan(""), 0.9};
  EXPECT_THROW(lagrange_weights(dup, 0.3), InvalidArgumentError);
  EXPECT_THROW(lagrange_weights(nan, 0.3), InvalidArgumentError);
  EXPECT_THROW(piecewise_linear_weights(dup, 0.3), InvalidArgumentError);
}

TEST(Weights, DefaultReferenceIsNearestMedian) {
  const std::vector<double> odd{0.1, 0.5, 0.9};
  const std::vector<double> even{0.0, 1.0, 1.5, 4.0};
  EXPECT_EQ(default_reference_index(odd), 1u);
  EXPECT_EQ(default_reference_index(even), 1u);
}

TEST(StiefelCurve, WorkedExampleMatchesPrintedMatrices) {
  const StiefelCurve curve(worked_example());
  Eigen::MatrixXd want22(5, 2), want27(5, 2);
  want22 << 0.77460, 0.25820, 0.25820, 0.51640, 0.51640, -0.25820, -0.25820, 0.77460, 0, 0;
  want27 << 0.67860, -0.19876, -0.19876, 0.57922, 0.47984, 0.38046, -0.19876, 0.57922, 0.47984,
      0.38046;
  EXPECT_LE((curve.at(22.0).matrix() - want22).cwiseAbs().maxCoeff(), 1e-5);
  EXPECT_LE((curve.at(27.0).matrix() - want27).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(StiefelCurve, ReferenceExactOthersSameSubspace) {
  const TrainingSet t = worked_example();
  const StiefelCurve curve(t);
  EXPECT_EQ(curve.at(15.0).matrix(), t.points[0].matrix());
  EXPECT_TRUE(same_subspace(curve.at(22.0), t.points[1], 1e-12));
  EXPECT_TRUE(same_subspace(curve.at(27.0), t.points[2], 1e-12));
  // Y(22) is a different representative of that subspace.
  EXPECT_GT((curve.at(22.0).matrix() - t.points[1].matrix()).cwiseAbs().maxCoeff(), 0.1);
}

TEST(StiefelCurve, SquareFramesGiveConstantCurve) {
  std::mt19937 rng(47);
  TrainingSet t;
  t.params = {0.1, 0.5, 0.9};
  for (int k = 0; k < 3; ++k) t.points.push_back(random_stiefel(rng, 4, 4));
  t.ref_index = 1;
  const StiefelCurve curve(t);
  EXPECT_TRUE(curve.degenerate());
  for (double lam : {0.0, 0.3, 0.5, 2.0}) EXPECT_EQ(curve.at(lam).matrix(), t.points[1].matrix());
}

TEST(StiefelCurve, TrainingSetValidation) {
  TrainingSet t = worked_example();
  t.ref_index = 3;
  EXPECT_THROW(StiefelCurve{t}, InvalidArgumentError);
  t = worked_example();
  t.points.pop_back();
  EXPECT_THROW(StiefelCurve{t}, DimensionError);
}

TEST(BuildDatabase, SortsAndChecksInputs) {
  std::mt19937 rng(53);
  auto snaps = smooth_family(rng, {0.9, 0.1, 0.5}, 12, 5);
  const RomDatabase db = build_database(snaps, 2);
  EXPECT_EQ(db.params, (std::vector<double>{0.1, 0.5, 0.9}));
  EXPECT_EQ(db.ref_index, 1u);
  EXPECT_THROW(build_database(snaps, 6), InvalidArgumentError);
  EXPECT_THROW(build_database(snaps, 2, 0.4), InvalidArgumentError);

  auto bad = snaps;
  bad[0].values = Eigen::MatrixXd::Random(11, 5);
  EXPECT_THROW(build_database(bad, 2), DimensionError);
  auto mixed = snaps;
  mixed[1].kind = FieldKind::Temperature;
  EXPECT_THROW(build_database(mixed, 2), InvalidArgumentError);

  // Rank-2 member caps the admissible mode.
  auto low = snaps;
  low[2].values = gaussian(rng, 12, 2) * gaussian(rng, 2, 5);
  EXPECT_NO_THROW(build_database(low, 2));
  EXPECT_THROW(build_database(low, 3), InvalidArgumentError);
}

TEST(SpaceTime, ReproducesTruncatedSnapshotsAtNodes) {
  std::mt19937 rng(59);
  for (int trial = 0; trial < 20; ++trial) {
    const auto snaps = smooth_family(rng, {0.1, 0.5, 0.9}, 12, 5);
    const RomDatabase db = build_database(snaps, 2);
    const SpaceTimeInterpolator interp(db);
    for (std::size_t k = 0; k < 3; ++k) {
      const Eigen::MatrixXd want = db.factors[k].reconstruct();
      const SnapshotMatrix got = interp(db.params[k]);
      EXPECT_LE((got.values - want).norm() / want.norm(), 1e-9);
      EXPECT_EQ(got.mode, 2);
      EXPECT_EQ(got.parameter, db.params[k]);
    }
  }
}

TEST(SpaceTime, FullModeAffineFamilyIsReproducedBetweenNodes) {
  // With p = m the reconstruction is exact at the nodes; for an affine family
  // the interpolant between nodes stays close.
  std::mt19937 rng(61);
  const auto snaps = smooth_family(rng, {0.1, 0.5, 0.9}, 20, 4);
  const RomDatabase db = build_database(snaps, 4);
  const SnapshotMatrix got = st_interpolate(db, 0.3);
  const Eigen::MatrixXd want = snaps[0].values + 0.5 * (snaps[2].values - snaps[0].values) * 0.5;
  EXPECT_LT((got.values - want).norm() / want.norm(), 0.05);
}

TEST(SpaceTime, FlagsExtrapolation) {
  std::mt19937 rng(67);
  const RomDatabase db = build_database(smooth_family(rng, {0.1, 0.5, 0.9}, 10, 4), 2);
  InterpolationStatus status;
  st_interpolate(db, 0.3, {}, &status);
  EXPECT_FALSE(status.extrapolated);
  st_interpolate(db, 1.2, {}, &status);
  EXPECT_TRUE(status.extrapolated);
  EXPECT_THROW(st_interpolate(db, std::nan(""), {}), InvalidArgumentError);
}

TEST(SpaceTime, DegenerateTemporalCurveIsReference) {
  std::mt19937 rng(71);
  const RomDatabase db = build_database(smooth_family(rng, {0.1, 0.5, 0.9}, 30, 7), 7);
  const SpaceTimeInterpolator interp(db);
  EXPECT_TRUE(interp.temporal_curve().degenerate());
  for (double lam : {0.1, 0.3, 0.5, 0.8, 0.9}) {
    EXPECT_EQ(interp.temporal_curve().at(lam).matrix(), db.factors[1].psi_p.matrix());
  }
}

TEST(SpaceTime, DeterministicOutput) {
  std::mt19937 rng(73);
  const RomDatabase db = build_database(smooth_family(rng, {0.1, 0.5, 0.9}, 16, 5), 3);
  const Eigen::MatrixXd a = st_interpolate(db, 0.37).values;
  const Eigen::MatrixXd b = st_interpolate(db, 0.37).values;
  EXPECT_EQ(a, b);
}
