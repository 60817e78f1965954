#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "groundcal/ground.hpp"
#include "groundcal/local_map.hpp"

using namespace groundcal;

namespace {

TEST(LocalMapTest, InsertThenQuerySamePoint) {
  LocalMap map(0.1);
  const Vec3 p(1.234, -0.567, 0.89);
  map.insert(p);
  const auto nn = map.knn(p, 1);
  ASSERT_EQ(nn.size(), 1u);
  EXPECT_LT((nn[0] - p).norm(), 1e-15);
}

TEST(LocalMapTest, VoxelDownsamplingKeepsFirstPoint) {
  LocalMap map(0.1);
  const Vec3 first(0.51, 0.52, 0.53);
  map.insert(first);
  for (int i = 0; i < 100; ++i) {
    map.insert(Vec3(0.51 + 0.0001 * i, 0.52, 0.53));  // same voxel
  }
  EXPECT_EQ(map.size(), 1u);
  const auto nn = map.knn(first, 5);
  ASSERT_EQ(nn.size(), 1u);
  EXPECT_LT((nn[0] - first).norm(), 1e-15);
}

TEST(LocalMapTest, NeighborsComeFromLocalPlane) {
  // Two horizontal planes 2 m apart; 5-NN near one must not mix in the
  // other, and the neighbor plane fit must recover the normal.
  LocalMap map(0.1);
  std::vector<Vec3> pts;
  for (int ix = -30; ix <= 30; ++ix) {
    for (int iy = -30; iy <= 30; ++iy) {
      pts.push_back(Vec3(0.07 * ix, 0.07 * iy, 0.0));
      pts.push_back(Vec3(0.07 * ix, 0.07 * iy, 2.0));
    }
  }
  map.insert(pts);
  const auto nn = map.knn(Vec3(0.1, 0.1, 0.01), 5);
  ASSERT_EQ(nn.size(), 5u);
  for (const auto& q : nn) EXPECT_LT(std::abs(q.z()), 1e-12);
  const GroundPlane fit = fit_plane_pca(nn);
  EXPECT_GT(std::abs(fit.normal.z()), std::cos(deg_to_rad(0.5)));
}

TEST(LocalMapTest, SortedByDistanceDeterministic) {
  LocalMap map(0.5);
  map.insert(Vec3(0.1, 0, 0));
  map.insert(Vec3(0.6, 0, 0));
  map.insert(Vec3(-0.4, 0, 0));
  const auto nn = map.knn(Vec3(0, 0, 0), 3);
  ASSERT_EQ(nn.size(), 3u);
  EXPECT_NEAR(nn[0].x(), 0.1, 1e-15);
  EXPECT_NEAR(nn[1].x(), -0.4, 1e-15);
  EXPECT_NEAR(nn[2].x(), 0.6, 1e-15);
}

TEST(LocalMapTest, BulkInsertAndQueryUnderOneSecond) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  std::vector<Vec3> pts;
  pts.reserve(100000);
  for (int i = 0; i < 100000; ++i) pts.push_back(Vec3(u(rng), u(rng), u(rng)));

  const auto t0 = std::chrono::steady_clock::now();
  LocalMap map(0.1);
  map.insert(pts);
  std::size_t hits = 0;
  for (int i = 0; i < 10000; ++i) {
    hits += map.knn(pts[i * 10], 5).size();
  }
  const auto t1 = std::chrono::steady_clock::now();
  EXPECT_GT(hits, 10000u);
  EXPECT_LT(std::chrono::duration<double>(t1 - t0).count(), 1.0);
}

}  // namespace
