#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gnrf/core/geometry.hpp"

namespace gnrf {

struct VoxelIndex {
  int i = 0, j = 0, k = 0;  // x, y, z
  bool operator==(const VoxelIndex&) const = default;
};

// Cubic voxelization of the workspace. Grid point (i,j,k) sits at the voxel
// center: origin + (index + 0.5) * voxel_size.
struct WorkspaceGrid {
  Vec3 origin = Vec3::Zero();
  double side = 0.3;
  int resolution = 40;

  WorkspaceGrid() = default;
  WorkspaceGrid(const Vec3& o, double side_len, int res);

  double voxel_size() const { return side / resolution; }
  Vec3 grid_point(int i, int j, int k) const {
    double vs = voxel_size();
    return origin + Vec3((i + 0.5) * vs, (j + 0.5) * vs, (k + 0.5) * vs);
  }
  Vec3 min_corner() const { return origin; }
  Vec3 max_corner() const { return origin + Vec3(side, side, side); }
  Vec3 center() const { return origin + 0.5 * Vec3(side, side, side); }
  bool contains(const Vec3& p) const;

  // The 30 cm / 40-voxel tabletop workspace anchored at the world origin.
  static WorkspaceGrid standard(int res = 40) { return WorkspaceGrid(Vec3::Zero(), 0.3, res); }
};

// floor((p - origin) / voxel_size); nullopt when any component falls outside
// the half-open [0, S) range.
std::optional<VoxelIndex> voxel_index(const Vec3& p, const WorkspaceGrid& grid);

// S^3 scalar field in x-fastest linear order: flat = i + S*j + S^2*k.
struct ScalarVolume {
  WorkspaceGrid grid;
  std::vector<float> values;

  ScalarVolume() = default;
  explicit ScalarVolume(const WorkspaceGrid& g, float fill = 0.0f)
      : grid(g), values(static_cast<size_t>(g.resolution) * g.resolution * g.resolution, fill) {}

  int res() const { return grid.resolution; }
  size_t flat(int i, int j, int k) const {
    int s = grid.resolution;
    return static_cast<size_t>(i) + static_cast<size_t>(s) * (static_cast<size_t>(j) + static_cast<size_t>(s) * k);
  }
  float& at(int i, int j, int k) { return values[flat(i, j, k)]; }
  float at(int i, int j, int k) const { return values[flat(i, j, k)]; }

  // Trilinear interpolation in grid-point space with border clamping.
  double trilinear(const Vec3& p) const;
};

// Per-grid-point feature storage; per-view volumes hold S^3 x N x C values
// (view-major per grid point), aggregated ones S^3 x C.
struct FeatureVolume {
  WorkspaceGrid grid;
  int channels = 0;
  int views = 0;  // 0 => aggregated
  std::vector<float> values;

  FeatureVolume() = default;
  FeatureVolume(const WorkspaceGrid& g, int c, int n_views);

  bool per_view() const { return views > 0; }
  size_t point_count() const {
    return static_cast<size_t>(grid.resolution) * grid.resolution * grid.resolution;
  }
  float* at(size_t point, int view = 0) {
    size_t per_point = static_cast<size_t>(channels) * (per_view() ? views : 1);
    return values.data() + point * per_point + static_cast<size_t>(view) * channels;
  }
  const float* at(size_t point, int view = 0) const {
    size_t per_point = static_cast<size_t>(channels) * (per_view() ? views : 1);
    return values.data() + point * per_point + static_cast<size_t>(view) * channels;
  }
};

}  // namespace gnrf
