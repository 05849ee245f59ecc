#pragma once

#include <string>
#include <vector>

#include "gnrf/core/grid.hpp"
#include "gnrf/core/rng.hpp"
#include "gnrf/core/types.hpp"

namespace gnrf::synth {

enum class PrimitiveType { Sphere, Box, Cylinder, Capsule };

// size meaning: Sphere r = size.x; Box = half extents; Cylinder r = size.x,
// half height = size.y (local z axis); Capsule r = size.x, segment half
// length = size.y.
struct Primitive {
  PrimitiveType type = PrimitiveType::Sphere;
  Vec3 size = Vec3(0.02, 0.02, 0.02);
};

enum class MaterialClass { Diffuse, Specular, Transparent };

struct MaterialSpec {
  MaterialClass cls = MaterialClass::Diffuse;
  Vec3 albedo = Vec3(0.6, 0.6, 0.6);
  double reflectivity = 0.5;  // specular mirror mix
  double ior = 1.5;           // transparent refraction index
};

struct ObjectSpec {
  int id = 0;
  Primitive primitive;
  Mat3 rotation = Mat3::Identity();  // local -> world
  Vec3 translation = Vec3::Zero();
  MaterialSpec material;

  Vec3 to_local(const Vec3& p) const { return rotation.transpose() * (p - translation); }
};

struct BackgroundSpec {
  int family = 0;  // 0 solid, 1 checker, 2 stripes, 3 rings, 4 noise, 5 gradient
  Vec3 color_a = Vec3(0.5, 0.5, 0.5);
  Vec3 color_b = Vec3(0.3, 0.3, 0.3);
  double scale = 20.0;
  double phase = 0.0;
};

struct LightSpec {
  Vec3 direction = Vec3(0.3, 0.2, -1).normalized();  // travel direction of the light
  double intensity = 0.8;
  Vec3 color = Vec3(1, 1, 1);
  double ambient = 0.35;
};

enum class SceneMode { Single, Pile, Packed };
enum class MaterialMix { TsOnly, Mixed };

struct SceneSpec {
  std::vector<ObjectSpec> objects;
  BackgroundSpec background;
  LightSpec light;
  uint64_t seed = 0;
  SceneMode mode = SceneMode::Pile;
  MaterialMix mix = MaterialMix::Mixed;

  SceneSpec without_object(int id) const {
    SceneSpec s = *this;
    s.objects.clear();
    for (const auto& o : objects)
      if (o.id != id) s.objects.push_back(o);
    return s;
  }
};

struct GraspLabel {
  Grasp grasp;  // quality in {0,1}
  int object_id = -1;
};

// Exact signed distances (meters).
double primitive_sdf(const Primitive& prim, const Vec3& p_local);
double object_sdf(const ObjectSpec& obj, const Vec3& p);
// min over all object SDFs and the table plane z = 0.
double scene_sdf(const SceneSpec& spec, const Vec3& p);
// min over objects only (no table); returns +inf for an empty scene.
double objects_sdf(const SceneSpec& spec, const Vec3& p, int* nearest_id = nullptr);
// central differences, h in meters
Vec3 scene_sdf_gradient(const SceneSpec& spec, const Vec3& p, double h = 1e-5);

// Deterministic quasi-uniform surface samples in world coordinates.
std::vector<Vec3> object_surface_samples(const ObjectSpec& obj, int count = 64);

// Worst-case interpenetration depth between two objects, estimated from
// surface samples (0 when separated).
double penetration_depth(const ObjectSpec& a, const ObjectSpec& b, int samples = 64);

struct SceneSampler {
  WorkspaceGrid grid = WorkspaceGrid::standard();
  double placement_margin = 0.05;   // keep object centers this far from walls
  double contact_gap = 0.0015;      // resting clearance target
  double max_penetration = 0.002;   // accept threshold, well under one voxel

  SceneSpec sample(SceneMode mode, MaterialMix mix, uint64_t seed) const;
};

inline SceneSpec sample_scene(SceneMode mode, MaterialMix mix, uint64_t seed) {
  return SceneSampler{}.sample(mode, mix, seed);
}

// value(k) = clamp(scene_sdf(grid point k) / tau, -1, 1)
ScalarVolume ground_truth_tsdf(const SceneSpec& spec, const WorkspaceGrid& grid, double tau);

constexpr double kDefaultTsdfTruncation = 0.03;  // 4 voxels at the standard grid

// Background texture color at a table point (x, y); also used for the
// environment dome via direction mapping.
Vec3 background_color(const BackgroundSpec& bg, double x, double y);

std::string to_string(SceneMode m);
std::string to_string(MaterialMix m);
std::string to_string(MaterialClass c);
std::string to_string(PrimitiveType t);
SceneMode scene_mode_from_string(const std::string& s);
MaterialMix material_mix_from_string(const std::string& s);

}  // namespace gnrf::synth
