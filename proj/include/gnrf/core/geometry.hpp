#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>

namespace gnrf {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

// Unit quaternion, stored (w, x, y, z), normalized on construction.
struct Quat {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  Quat() = default;
  Quat(double w_, double x_, double y_, double z_);

  static Quat identity() { return Quat(); }
  static Quat from_matrix(const Mat3& m);
  static Quat from_axis_angle(const Vec3& axis, double angle);

  Mat3 to_matrix() const;
  Quat operator*(const Quat& o) const;  // composition, this applied after o
  double dot(const Quat& o) const { return w * o.w + x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
  Vec3 rotate(const Vec3& v) const { return to_matrix() * v; }
};

// |a.b| for unit quaternions; 1 for identical rotations (double cover), 0 for
// maximally distant ones.
double quaternion_geodesic_abs_dot(const Quat& a, const Quat& b);

struct CameraIntrinsics {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;

  CameraIntrinsics() = default;
  CameraIntrinsics(double fx_, double fy_, double cx_, double cy_, int w, int h);
};

// Rigid world->camera transform. Camera convention: x right, y down,
// z forward; p_cam = rotation * p_world + translation.
struct CameraPose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  CameraPose() = default;
  CameraPose(const Mat3& r, const Vec3& t);

  Vec3 world_to_camera(const Vec3& p) const { return rotation * p + translation; }
  Vec3 camera_to_world(const Vec3& p) const { return rotation.transpose() * (p - translation); }
  Vec3 camera_center() const { return -(rotation.transpose() * translation); }

  // Camera at `eye` with optical axis through `target`. `up` is the world
  // direction that should map to image-up (-y); must not be parallel to the
  // viewing direction.
  static CameraPose look_at(const Vec3& eye, const Vec3& target, const Vec3& up = Vec3(0, 0, 1));
};

struct Projection {
  double u = 0, v = 0;
  double depth = 0;      // camera-frame z, meters
  bool in_front = false; // depth > 0
};

Projection project(const Vec3& point, const CameraIntrinsics& intr, const CameraPose& pose);

// Inverse of project for in-front points.
Vec3 unproject(double u, double v, double depth, const CameraIntrinsics& intr, const CameraPose& pose);

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();  // unit length
  double t_near = 0, t_far = 0;

  Ray() = default;
  Ray(const Vec3& o, const Vec3& d, double tn, double tf);
  Vec3 at(double t) const { return origin + t * direction; }
};

// Slab intersection with an axis-aligned box; returns entry/exit parameters
// along `dir` from `origin`, clipped to [t_min, +inf).
std::optional<std::pair<double, double>> intersect_aabb(const Vec3& origin, const Vec3& dir,
                                                        const Vec3& box_min, const Vec3& box_max,
                                                        double t_min = 0.0);

}  // namespace gnrf
