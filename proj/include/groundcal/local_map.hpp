#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "groundcal/geometry.hpp"

namespace groundcal {

// Voxel-hashed point map with one representative point per voxel
// (first insertion wins). Nearest-neighbor queries gather candidates from
// the 3x3x3 voxel neighborhood of the query and rank them by distance.
class LocalMap {
 public:
  explicit LocalMap(double voxel_size_m = 0.1);

  void insert(const Vec3& point);
  void insert(const std::vector<Vec3>& points);

  // Up to k nearest stored points (may return fewer near empty regions).
  // Sorted by ascending distance; deterministic tie-breaking.
  std::vector<Vec3> knn(const Vec3& query, int k) const;

  std::size_t size() const { return voxels_.size(); }
  double voxel_size() const { return voxel_; }

 private:
  std::int64_t key_of(const Vec3& p) const;

  double voxel_;
  std::unordered_map<std::int64_t, Vec3> voxels_;
};

}  // namespace groundcal
