#include "gnrf/scene_synth/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gnrf::synth {

double primitive_sdf(const Primitive& prim, const Vec3& p) {
  switch (prim.type) {
    case PrimitiveType::Sphere:
      return p.norm() - prim.size.x();
    case PrimitiveType::Box: {
      Vec3 q = p.cwiseAbs() - prim.size;
      Vec3 qpos = q.cwiseMax(0.0);
      double outside = qpos.norm();
      double inside = std::min(q.maxCoeff(), 0.0);
      return outside + inside;
    }
    case PrimitiveType::Cylinder: {
      double r = prim.size.x(), h = prim.size.y();
      double dr = std::sqrt(p.x() * p.x() + p.y() * p.y()) - r;
      double dz = std::abs(p.z()) - h;
      double outside = std::sqrt(std::pow(std::max(dr, 0.0), 2) + std::pow(std::max(dz, 0.0), 2));
      double inside = std::min(std::max(dr, dz), 0.0);
      return outside + inside;
    }
    case PrimitiveType::Capsule: {
      double r = prim.size.x(), h = prim.size.y();
      Vec3 q(p.x(), p.y(), p.z() - std::clamp(p.z(), -h, h));
      return q.norm() - r;
    }
  }
  return std::numeric_limits<double>::infinity();
}

double object_sdf(const ObjectSpec& obj, const Vec3& p) { return primitive_sdf(obj.primitive, obj.to_local(p)); }

double objects_sdf(const SceneSpec& spec, const Vec3& p, int* nearest_id) {
  double best = std::numeric_limits<double>::infinity();
  int best_id = -1;
  for (const auto& obj : spec.objects) {
    double d = object_sdf(obj, p);
    if (d < best) {
      best = d;
      best_id = obj.id;
    }
  }
  if (nearest_id) *nearest_id = best_id;
  return best;
}

double scene_sdf(const SceneSpec& spec, const Vec3& p) { return std::min(p.z(), objects_sdf(spec, p)); }

Vec3 scene_sdf_gradient(const SceneSpec& spec, const Vec3& p, double h) {
  Vec3 g;
  for (int a = 0; a < 3; ++a) {
    Vec3 hi = p, lo = p;
    hi[a] += h;
    lo[a] -= h;
    g[a] = (scene_sdf(spec, hi) - scene_sdf(spec, lo)) / (2 * h);
  }
  return g;
}

namespace {

// Fibonacci directions; stable across runs.
std::vector<Vec3> fibonacci_directions(int count) {
  std::vector<Vec3> dirs;
  dirs.reserve(count);
  const double ga = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    double z = 1.0 - 2.0 * (i + 0.5) / count;
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double th = ga * i;
    dirs.emplace_back(r * std::cos(th), r * std::sin(th), z);
  }
  return dirs;
}

// All primitives are convex and contain the local origin, so the SDF along
// an outward ray crosses zero exactly once.
double surface_distance_along(const Primitive& prim, const Vec3& dir) {
  double lo = 0.0, hi = prim.size.maxCoeff() * 2.0 + 0.05;
  for (int it = 0; it < 48; ++it) {
    double mid = 0.5 * (lo + hi);
    if (primitive_sdf(prim, mid * dir) < 0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double support_height(const Primitive& prim) {
  switch (prim.type) {
    case PrimitiveType::Sphere:
      return prim.size.x();
    case PrimitiveType::Box:
      return prim.size.z();
    case PrimitiveType::Cylinder:
      return prim.size.y();
    case PrimitiveType::Capsule:
      return prim.size.x() + prim.size.y();
  }
  return 0.0;
}

}  // namespace

std::vector<Vec3> object_surface_samples(const ObjectSpec& obj, int count) {
  std::vector<Vec3> out;
  out.reserve(count);
  for (const Vec3& d : fibonacci_directions(count)) {
    double s = surface_distance_along(obj.primitive, d);
    out.push_back(obj.rotation * (s * d) + obj.translation);
  }
  return out;
}

double penetration_depth(const ObjectSpec& a, const ObjectSpec& b, int samples) {
  double depth = 0.0;
  for (const Vec3& p : object_surface_samples(a, samples)) depth = std::max(depth, -object_sdf(b, p));
  for (const Vec3& p : object_surface_samples(b, samples)) depth = std::max(depth, -object_sdf(a, p));
  return depth;
}

namespace {

Primitive random_primitive(Pcg32& rng) {
  Primitive prim;
  switch (rng.uniform_int(0, 3)) {
    case 0:
      prim.type = PrimitiveType::Sphere;
      prim.size = Vec3::Constant(rng.uniform(0.018, 0.031));
      break;
    case 1: {
      prim.type = PrimitiveType::Box;
      // at least two axes graspable inside the jaw opening
      double hx = rng.uniform(0.014, 0.028), hy = rng.uniform(0.014, 0.028), hz = rng.uniform(0.015, 0.04);
      prim.size = Vec3(hx, hy, hz);
      break;
    }
    case 2:
      prim.type = PrimitiveType::Cylinder;
      prim.size = Vec3(rng.uniform(0.014, 0.028), rng.uniform(0.02, 0.045), 0);
      break;
    default:
      prim.type = PrimitiveType::Capsule;
      prim.size = Vec3(rng.uniform(0.012, 0.024), rng.uniform(0.012, 0.034), 0);
      break;
  }
  return prim;
}

MaterialSpec random_material(Pcg32& rng, MaterialMix mix) {
  MaterialSpec m;
  int cls = mix == MaterialMix::TsOnly ? rng.uniform_int(1, 2) : rng.uniform_int(0, 2);
  m.cls = static_cast<MaterialClass>(cls);
  m.albedo = Vec3(rng.uniform(0.15, 0.95), rng.uniform(0.15, 0.95), rng.uniform(0.15, 0.95));
  m.reflectivity = rng.uniform(0.35, 0.75);
  m.ior = rng.uniform(1.4, 1.6);
  return m;
}

BackgroundSpec random_background(Pcg32& rng) {
  BackgroundSpec bg;
  bg.family = rng.uniform_int(0, 5);
  bg.color_a = Vec3(rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9));
  bg.color_b = Vec3(rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9));
  bg.scale = rng.uniform(8.0, 45.0);
  bg.phase = rng.uniform(0.0, 1.0);
  return bg;
}

LightSpec random_light(Pcg32& rng) {
  LightSpec l;
  double az = rng.uniform(0, 2 * M_PI);
  double el = rng.uniform(0.6, 1.4);  // elevation above horizon
  l.direction = Vec3(std::cos(az) * std::cos(el), std::sin(az) * std::cos(el), -std::sin(el)).normalized();
  l.intensity = rng.uniform(0.4, 1.1);
  l.ambient = rng.uniform(0.25, 0.55);
  double tint = rng.uniform(0.9, 1.0);
  l.color = Vec3(1.0, tint, rng.uniform(0.85, 1.0));
  return l;
}

Mat3 random_rotation(Pcg32& rng) {
  Vec3 axis(rng.normal(), rng.normal(), rng.normal());
  while (axis.norm() < 1e-6) axis = Vec3(rng.normal(), rng.normal(), rng.normal());
  return Quat::from_axis_angle(axis.normalized(), rng.uniform(0, 2 * M_PI)).to_matrix();
}

// Lowest center height at which the candidate rests on the table or the
// already placed clutter with ~gap clearance. The candidate's surface
// clearance is monotone in height, so bisect.
double drop_height(const SceneSpec& placed, ObjectSpec obj, double gap) {
  auto clearance = [&](double h) {
    obj.translation.z() = h;
    double c = std::numeric_limits<double>::infinity();
    for (const Vec3& p : object_surface_samples(obj, 48)) c = std::min(c, std::min(p.z(), objects_sdf(placed, p)));
    return c;
  };
  double lo = -0.1, hi = 0.45;
  for (int it = 0; it < 44; ++it) {
    double mid = 0.5 * (lo + hi);
    if (clearance(mid) < gap)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

}  // namespace

SceneSpec SceneSampler::sample(SceneMode mode, MaterialMix mix, uint64_t seed) const {
  for (uint64_t attempt = 0;; ++attempt) {
    Pcg32 rng(Pcg32::mix(seed, attempt));
    SceneSpec spec;
    spec.seed = seed;
    spec.mode = mode;
    spec.mix = mix;
    spec.background = random_background(rng);
    spec.light = random_light(rng);
    int count = mode == SceneMode::Single ? 1 : rng.uniform_int(4, 6);
    Vec3 center = grid.center();

    bool scene_ok = true;
    for (int i = 0; i < count && scene_ok; ++i) {
      bool placed = false;
      for (int tries = 0; tries < 100 && !placed; ++tries) {
        ObjectSpec obj;
        obj.id = i;
        obj.primitive = random_primitive(rng);
        obj.material = random_material(rng, mix);
        if (mode == SceneMode::Single) {
          obj.rotation = Quat::from_axis_angle(Vec3(0, 0, 1), rng.uniform(0, 2 * M_PI)).to_matrix();
          obj.translation = Vec3(center.x(), center.y(), support_height(obj.primitive) + contact_gap);
        } else {
          double lo = grid.origin.x() + placement_margin, hi = grid.origin.x() + grid.side - placement_margin;
          double x = rng.uniform(lo, hi), y = rng.uniform(lo, hi);
          if (mode == SceneMode::Packed) {
            obj.rotation = Quat::from_axis_angle(Vec3(0, 0, 1), rng.uniform(0, 2 * M_PI)).to_matrix();
            obj.translation = Vec3(x, y, support_height(obj.primitive) + contact_gap);
          } else {
            obj.rotation = random_rotation(rng);
            obj.translation = Vec3(x, y, 0.15);
            obj.translation.z() = drop_height(spec, obj, contact_gap);
          }
        }
        // containment + penetration acceptance
        bool ok = true;
        for (const Vec3& p : object_surface_samples(obj, 48)) {
          if (p.x() < grid.origin.x() + 0.01 || p.x() > grid.origin.x() + grid.side - 0.01 ||
              p.y() < grid.origin.y() + 0.01 || p.y() > grid.origin.y() + grid.side - 0.01 || p.z() < -1e-6 ||
              p.z() > grid.origin.z() + grid.side - 0.02) {
            ok = false;
            break;
          }
        }
        if (ok) {
          for (const auto& other : spec.objects) {
            if (penetration_depth(obj, other, 48) > max_penetration) {
              ok = false;
              break;
            }
          }
        }
        if (ok) {
          spec.objects.push_back(obj);
          placed = true;
        }
      }
      if (!placed) scene_ok = false;  // regenerate the whole scene with a sub-seed
    }
    if (scene_ok) return spec;
  }
}

ScalarVolume ground_truth_tsdf(const SceneSpec& spec, const WorkspaceGrid& grid, double tau) {
  if (tau <= 0) throw std::invalid_argument("ground_truth_tsdf: truncation must be positive");
  ScalarVolume vol(grid);
  const int s = grid.resolution;
  for (int k = 0; k < s; ++k)
    for (int j = 0; j < s; ++j)
      for (int i = 0; i < s; ++i) {
        double d = scene_sdf(spec, grid.grid_point(i, j, k)) / tau;
        vol.at(i, j, k) = static_cast<float>(std::clamp(d, -1.0, 1.0));
      }
  return vol;
}

namespace {
double value_noise(double x, double y, double phase) {
  auto hash = [](int xi, int yi) {
    uint32_t h = static_cast<uint32_t>(xi) * 374761393u + static_cast<uint32_t>(yi) * 668265263u;
    h = (h ^ (h >> 13)) * 1274126177u;
    return static_cast<double>(h & 0xffffffu) / static_cast<double>(0x1000000);
  };
  x += phase * 97.0;
  y += phase * 57.0;
  int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
  double fx = x - x0, fy = y - y0;
  double sx = fx * fx * (3 - 2 * fx), sy = fy * fy * (3 - 2 * fy);
  double v00 = hash(x0, y0), v10 = hash(x0 + 1, y0), v01 = hash(x0, y0 + 1), v11 = hash(x0 + 1, y0 + 1);
  return (v00 * (1 - sx) + v10 * sx) * (1 - sy) + (v01 * (1 - sx) + v11 * sx) * sy;
}
}  // namespace

Vec3 background_color(const BackgroundSpec& bg, double x, double y) {
  double s = bg.scale;
  switch (bg.family) {
    case 1: {  // checker
      int cx = static_cast<int>(std::floor(x * s + bg.phase));
      int cy = static_cast<int>(std::floor(y * s + bg.phase));
      return ((cx + cy) & 1) ? bg.color_b : bg.color_a;
    }
    case 2: {  // stripes
      double t = std::sin((x + 0.37 * y) * s * M_PI + bg.phase * 2 * M_PI) > 0 ? 1.0 : 0.0;
      return bg.color_a * t + bg.color_b * (1 - t);
    }
    case 3: {  // rings around the workspace center
      double r = std::hypot(x - 0.15, y - 0.15);
      double t = std::sin(r * s * 2 * M_PI + bg.phase * 2 * M_PI) * 0.5 + 0.5;
      return bg.color_a * t + bg.color_b * (1 - t);
    }
    case 4: {  // smooth value noise
      double t = value_noise(x * s, y * s, bg.phase);
      return bg.color_a * t + bg.color_b * (1 - t);
    }
    case 5: {  // linear gradient
      double t = std::clamp((x * std::cos(bg.phase * 2 * M_PI) + y * std::sin(bg.phase * 2 * M_PI)) / 0.3 + 0.5, 0.0, 1.0);
      return bg.color_a * t + bg.color_b * (1 - t);
    }
    default:
      return bg.color_a;
  }
}

std::string to_string(SceneMode m) {
  switch (m) {
    case SceneMode::Single: return "single";
    case SceneMode::Pile: return "pile";
    case SceneMode::Packed: return "packed";
  }
  return "?";
}
std::string to_string(MaterialMix m) { return m == MaterialMix::TsOnly ? "ts_only" : "mixed"; }
std::string to_string(MaterialClass c) {
  switch (c) {
    case MaterialClass::Diffuse: return "diffuse";
    case MaterialClass::Specular: return "specular";
    case MaterialClass::Transparent: return "transparent";
  }
  return "?";
}
std::string to_string(PrimitiveType t) {
  switch (t) {
    case PrimitiveType::Sphere: return "sphere";
    case PrimitiveType::Box: return "box";
    case PrimitiveType::Cylinder: return "cylinder";
    case PrimitiveType::Capsule: return "capsule";
  }
  return "?";
}
SceneMode scene_mode_from_string(const std::string& s) {
  if (s == "single") return SceneMode::Single;
  if (s == "pile") return SceneMode::Pile;
  if (s == "packed") return SceneMode::Packed;
  throw std::invalid_argument("unknown scene mode: " + s);
}
MaterialMix material_mix_from_string(const std::string& s) {
  if (s == "ts_only") return MaterialMix::TsOnly;
  if (s == "mixed") return MaterialMix::Mixed;
  throw std::invalid_argument("unknown material mix: " + s);
}

}  // namespace gnrf::synth
