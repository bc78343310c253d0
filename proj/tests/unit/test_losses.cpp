#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "claa/classifier.hpp"
#include "claa/contrastive.hpp"
#include "claa/error.hpp"
#include "claa/losses.hpp"
#include "claa/util.hpp"
#include "fixtures.hpp"

namespace claa {
namespace {

using testing::numeric_gradient;
using testing::random_unit_rows;
using testing::relative_error;

Matrix rows(std::initializer_list<std::initializer_list<double>> r) {
  Matrix m(r.size(), r.begin()->size());
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

TEST(SupCon, FourVectorExample) {
  const Matrix z = rows({{1, 0}, {1, 0}, {0, 1}, {0, 1}});
  const std::vector<int> y{1, 1, 0, 0};
  const auto r = supcon_loss(z, y, 1.0);
  EXPECT_NEAR(r.value, std::log(1 + 2 / std::exp(1.0)), 1e-12);
  EXPECT_EQ(r.anchors_used, 4u);
}

TEST(SupCon, IdenticalRowsGiveLogThree) {
  const Matrix z = rows({{0.6, 0.8}, {0.6, 0.8}, {0.6, 0.8}, {0.6, 0.8}});
  const std::vector<int> y{1, 1, 0, 0};
  for (double tau : {0.05, 0.1, 1.0, 7.0}) EXPECT_NEAR(supcon_loss(z, y, tau).value, std::log(3.0), 1e-9);
}

TEST(SupCon, SingleCandidateIsZero) {
  const Matrix z = rows({{1, 0}, {0, 1}});
  EXPECT_NEAR(supcon_loss(z, std::vector<int>{1, 1}, 1.0).value, 0.0, 1e-12);
}

TEST(SupCon, RejectsBatchWithoutPartners) {
  const Matrix z = rows({{1, 0}, {0, 1}});
  EXPECT_THROW(supcon_loss(z, std::vector<int>{1, 0}, 1.0), ValidationError);
}

TEST(SupCon, RejectsUnnormalizedRows) {
  const Matrix z = rows({{2, 0}, {0, 1}});
  EXPECT_THROW(supcon_loss(z, std::vector<int>{1, 1}, 1.0), ValidationError);
}

TEST(SupCon, SkipsAnchorsWithoutPartner) {
  const Matrix z = rows({{1, 0}, {1, 0}, {0, 1}});
  const auto r = supcon_loss(z, std::vector<int>{1, 1, 0}, 1.0);
  EXPECT_EQ(r.anchors_used, 2u);
  EXPECT_EQ(r.anchors_skipped, 1u);
}

TEST(SupCon, InvariantUnderRowPermutation) {
  const Matrix z = random_unit_rows(6, 4, 3);
  const std::vector<int> y{1, 0, 1, 0, 0, 1};
  const std::vector<int> perm{4, 2, 0, 5, 1, 3};
  Matrix zp(6, 4);
  std::vector<int> yp(6);
  for (int i = 0; i < 6; ++i) {
    zp.row(i) = z.row(perm[i]);
    yp[i] = y[perm[i]];
  }
  EXPECT_NEAR(supcon_loss(z, y, 0.1).value, supcon_loss(zp, yp, 0.1).value, 1e-12);
}

TEST(Triplet, HandValues) {
  // d(a,p) = 1, d(a,n) = 3
  const Matrix z = rows({{0, 0}, {1, 0}, {3, 0}});
  const std::vector<Triplet> t{{0, 1, 2}};
  EXPECT_EQ(triplet_loss(z, t, 1.0).value, 0.0);
  // d(a,p) = 2, d(a,n) = 1
  const Matrix z2 = rows({{0, 0}, {2, 0}, {0, 1}});
  EXPECT_EQ(triplet_loss(z2, t, 0.5).value, 1.5);
  // a = p
  const Matrix z3 = rows({{0, 0}, {0, 0}, {2, 0}});
  EXPECT_EQ(triplet_loss(z3, t, 1.0).value, 0.0);
}

TEST(Triplet, AlignedFormMatchesIndexedForm) {
  const Matrix z = random_unit_rows(6, 3, 9);
  const std::vector<Triplet> t{{0, 1, 2}, {3, 4, 5}};
  Matrix a(2, 3), p(2, 3), n(2, 3);
  a << z.row(0), z.row(3);
  p << z.row(1), z.row(4);
  n << z.row(2), z.row(5);
  EXPECT_NEAR(triplet_loss(a, p, n, 1.0).value, triplet_loss(z, t, 1.0).value, 1e-15);
}

TEST(Pairwise, HandValues) {
  const Matrix same = rows({{1, 1}, {1, 1}});
  EXPECT_EQ(pairwise_contrastive_loss(same, std::vector<Pair>{{0, 1, true}}, 1.0).value, 0.0);
  const Matrix far = rows({{0, 0}, {1.5, 0}});
  EXPECT_EQ(pairwise_contrastive_loss(far, std::vector<Pair>{{0, 1, false}}, 1.0).value, 0.0);
  const Matrix mix = rows({{0, 0}, {0.5, 0}, {1, 0}, {1.2, 0}});
  const std::vector<Pair> pairs{{0, 1, true}, {2, 3, false}};
  EXPECT_NEAR(pairwise_contrastive_loss(mix, pairs, 1.0).value, 0.445, 1e-12);
}

TEST(Mining, PairsAndTriplets) {
  const auto m = mine_pairs_and_triplets(std::vector<int>{1, 1, 0}, 1);
  EXPECT_EQ(m.triplets.triplets.size(), 2u);
  const auto pairs = mine_pairs(std::vector<int>{1, 0});
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_FALSE(pairs[0].similar);
  EXPECT_TRUE(mine_triplets(std::vector<int>{1, 0}, 1).triplets.empty());
  for (const auto& p : mine_pairs(std::vector<int>{1, 1, 1})) EXPECT_TRUE(p.similar);
  EXPECT_THROW(mine_triplets(std::vector<int>{1, 1, 1}, 1), ValidationError);
}

TEST(Bce, HandValues) {
  EXPECT_NEAR(bce_loss(1.0, 1), 0.0, 1e-6);
  EXPECT_NEAR(bce_loss(0.5, 1), std::log(2.0), 1e-12);
  EXPECT_NEAR(bce_loss(0.9, 0), -std::log(0.1), 1e-12);
  EXPECT_TRUE(std::isfinite(bce_loss(0.0, 1)));
}

// Finite-difference checks on random small batches.

constexpr int kBatches = 50;
constexpr double kTolerance = 1e-4;

std::vector<int> random_labels(std::size_t n, Rng& rng) {
  std::vector<int> y(n);
  for (auto& v : y) v = static_cast<int>(uniform_index(rng, 2));
  y[0] = 1;
  y[1] = 1;
  y[2] = 0;
  return y;
}

TEST(GradientCheck, SupCon) {
  Rng rng(1);
  for (int b = 0; b < kBatches; ++b) {
    const std::size_t n = 4 + uniform_index(rng, 5);
    const Matrix z = random_unit_rows(n, 3 + uniform_index(rng, 4), 100 + b);
    const auto y = random_labels(n, rng);
    const double tau = 0.1 + uniform_unit(rng);
    const auto r = supcon_loss(z, y, tau, false);
    const auto f = [&](const Matrix& x) { return supcon_loss(x, y, tau, false).value; };
    EXPECT_LT(relative_error(r.grad, numeric_gradient(f, z)), kTolerance) << "batch " << b;
  }
}

TEST(GradientCheck, Triplet) {
  Rng rng(2);
  for (int b = 0; b < kBatches; ++b) {
    const std::size_t n = 4 + uniform_index(rng, 5);
    const Matrix z = random_unit_rows(n, 3 + uniform_index(rng, 4), 200 + b);
    const auto y = random_labels(n, rng);
    const auto t = mine_triplets(y, b).triplets;
    // Margin large enough that every hinge is active and away from its kink.
    const double margin = 3.0;
    const auto r = triplet_loss(z, t, margin);
    const auto f = [&](const Matrix& x) { return triplet_loss(x, t, margin).value; };
    EXPECT_LT(relative_error(r.grad, numeric_gradient(f, z)), kTolerance) << "batch " << b;
  }
}

TEST(GradientCheck, Pairwise) {
  Rng rng(3);
  for (int b = 0; b < kBatches; ++b) {
    const std::size_t n = 4 + uniform_index(rng, 5);
    const Matrix z = random_unit_rows(n, 3 + uniform_index(rng, 4), 300 + b);
    const auto y = random_labels(n, rng);
    const auto pairs = mine_pairs(y);
    const double margin = 2.5;
    const auto r = pairwise_contrastive_loss(z, pairs, margin);
    const auto f = [&](const Matrix& x) { return pairwise_contrastive_loss(x, pairs, margin).value; };
    EXPECT_LT(relative_error(r.grad, numeric_gradient(f, z)), kTolerance) << "batch " << b;
  }
}

TEST(GradientCheck, Bce) {
  Rng rng(4);
  for (int b = 0; b < kBatches; ++b) {
    const double p = 0.02 + 0.96 * uniform_unit(rng);
    const int y = static_cast<int>(uniform_index(rng, 2));
    const double h = 1e-5;
    const double numeric = (bce_loss(p + h, y) - bce_loss(p - h, y)) / (2 * h);
    const double analytic = bce_loss_grad(p, y);
    EXPECT_LT(std::abs(analytic - numeric) / std::max(std::abs(numeric), 1e-8), kTolerance);
  }
}

}  // namespace
}  // namespace claa
