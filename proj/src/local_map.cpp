#include "groundcal/local_map.hpp"

#include <algorithm>
#include <cmath>

namespace groundcal {

namespace {
constexpr std::int64_t kOffset = 1 << 20;  // supports +-100 km at 0.1 m
constexpr std::int64_t kMask = (1 << 21) - 1;
}  // namespace

LocalMap::LocalMap(double voxel_size_m) : voxel_(voxel_size_m) {
  if (voxel_ <= 0.0) {
    throw Error("LocalMap: voxel size must be positive");
  }
}

std::int64_t LocalMap::key_of(const Vec3& p) const {
  const std::int64_t ix =
      static_cast<std::int64_t>(std::floor(p.x() / voxel_)) + kOffset;
  const std::int64_t iy =
      static_cast<std::int64_t>(std::floor(p.y() / voxel_)) + kOffset;
  const std::int64_t iz =
      static_cast<std::int64_t>(std::floor(p.z() / voxel_)) + kOffset;
  return (ix & kMask) | ((iy & kMask) << 21) | ((iz & kMask) << 42);
}

void LocalMap::insert(const Vec3& point) {
  voxels_.emplace(key_of(point), point);  // keeps the first point per voxel
}

void LocalMap::insert(const std::vector<Vec3>& points) {
  for (const auto& p : points) insert(p);
}

std::vector<Vec3> LocalMap::knn(const Vec3& query, int k) const {
  std::vector<std::pair<double, Vec3>> cand;
  cand.reserve(27);
  const std::int64_t cx =
      static_cast<std::int64_t>(std::floor(query.x() / voxel_));
  const std::int64_t cy =
      static_cast<std::int64_t>(std::floor(query.y() / voxel_));
  const std::int64_t cz =
      static_cast<std::int64_t>(std::floor(query.z() / voxel_));
  for (std::int64_t dx = -1; dx <= 1; ++dx) {
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
      for (std::int64_t dz = -1; dz <= 1; ++dz) {
        const std::int64_t key = ((cx + dx + kOffset) & kMask) |
                                 (((cy + dy + kOffset) & kMask) << 21) |
                                 (((cz + dz + kOffset) & kMask) << 42);
        const auto it = voxels_.find(key);
        if (it != voxels_.end()) {
          cand.emplace_back((it->second - query).squaredNorm(), it->second);
        }
      }
    }
  }
  std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    if (a.second.x() != b.second.x()) return a.second.x() < b.second.x();
    if (a.second.y() != b.second.y()) return a.second.y() < b.second.y();
    return a.second.z() < b.second.z();
  });
  std::vector<Vec3> out;
  const int take = std::min<int>(k, static_cast<int>(cand.size()));
  out.reserve(take);
  for (int i = 0; i < take; ++i) out.push_back(cand[i].second);
  return out;
}

}  // namespace groundcal
