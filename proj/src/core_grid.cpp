#include "gnrf/core/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace gnrf {

WorkspaceGrid::WorkspaceGrid(const Vec3& o, double side_len, int res) : origin(o), side(side_len), resolution(res) {
  if (side <= 0 || resolution <= 0) throw std::invalid_argument("WorkspaceGrid: side and resolution must be positive");
}

bool WorkspaceGrid::contains(const Vec3& p) const {
  for (int a = 0; a < 3; ++a) {
    if (p[a] < origin[a] || p[a] >= origin[a] + side) return false;
  }
  return true;
}

std::optional<VoxelIndex> voxel_index(const Vec3& p, const WorkspaceGrid& grid) {
  double vs = grid.voxel_size();
  VoxelIndex idx;
  int* out[3] = {&idx.i, &idx.j, &idx.k};
  for (int a = 0; a < 3; ++a) {
    int v = static_cast<int>(std::floor((p[a] - grid.origin[a]) / vs));
    if (v < 0 || v >= grid.resolution) return std::nullopt;
    *out[a] = v;
  }
  return idx;
}

double ScalarVolume::trilinear(const Vec3& p) const {
  const int s = res();
  const double vs = grid.voxel_size();
  double g[3];
  for (int a = 0; a < 3; ++a) {
    g[a] = (p[a] - grid.origin[a]) / vs - 0.5;  // continuous grid-point coords
    if (g[a] < 0) g[a] = 0;
    if (g[a] > s - 1) g[a] = s - 1;
  }
  int i0 = std::min(static_cast<int>(g[0]), s - 2 >= 0 ? s - 2 : 0);
  int j0 = std::min(static_cast<int>(g[1]), s - 2 >= 0 ? s - 2 : 0);
  int k0 = std::min(static_cast<int>(g[2]), s - 2 >= 0 ? s - 2 : 0);
  double fx = g[0] - i0, fy = g[1] - j0, fz = g[2] - k0;
  int i1 = std::min(i0 + 1, s - 1), j1 = std::min(j0 + 1, s - 1), k1 = std::min(k0 + 1, s - 1);
  auto lerp = [](double a, double b, double t) { return a + (b - a) * t; };
  double c00 = lerp(at(i0, j0, k0), at(i1, j0, k0), fx);
  double c10 = lerp(at(i0, j1, k0), at(i1, j1, k0), fx);
  double c01 = lerp(at(i0, j0, k1), at(i1, j0, k1), fx);
  double c11 = lerp(at(i0, j1, k1), at(i1, j1, k1), fx);
  return lerp(lerp(c00, c10, fy), lerp(c01, c11, fy), fz);
}

FeatureVolume::FeatureVolume(const WorkspaceGrid& g, int c, int n_views) : grid(g), channels(c), views(n_views) {
  if (c <= 0) throw std::invalid_argument("FeatureVolume: channels must be positive");
  size_t n = point_count() * static_cast<size_t>(c) * (n_views > 0 ? static_cast<size_t>(n_views) : 1);
  values.assign(n, 0.0f);
}

}  // namespace gnrf
