#include "gnrf/core/geometry.hpp"

#include <cmath>
#include <sstream>

namespace gnrf {

Quat::Quat(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {
  double n = norm();
  if (n < 1e-12) throw std::invalid_argument("Quat: zero-norm quaternion");
  w /= n;
  x /= n;
  y /= n;
  z /= n;
}

Quat Quat::from_matrix(const Mat3& m) {
  Eigen::Quaterniond q(m);
  q.normalize();
  return Quat(q.w(), q.x(), q.y(), q.z());
}

Quat Quat::from_axis_angle(const Vec3& axis, double angle) {
  Vec3 a = axis.normalized();
  double h = 0.5 * angle;
  double s = std::sin(h);
  return Quat(std::cos(h), a.x() * s, a.y() * s, a.z() * s);
}

Mat3 Quat::to_matrix() const {
  return Eigen::Quaterniond(w, x, y, z).toRotationMatrix();
}

Quat Quat::operator*(const Quat& o) const {
  Eigen::Quaterniond a(w, x, y, z), b(o.w, o.x, o.y, o.z);
  Eigen::Quaterniond c = a * b;
  return Quat(c.w(), c.x(), c.y(), c.z());
}

double quaternion_geodesic_abs_dot(const Quat& a, const Quat& b) {
  double d = std::abs(a.dot(b));
  return d > 1.0 ? 1.0 : d;
}

CameraIntrinsics::CameraIntrinsics(double fx_, double fy_, double cx_, double cy_, int w, int h)
    : fx(fx_), fy(fy_), cx(cx_), cy(cy_), width(w), height(h) {
  if (fx <= 0 || fy <= 0) throw std::invalid_argument("CameraIntrinsics: focal lengths must be positive");
  if (cx < 0 || cx >= width || cy < 0 || cy >= height)
    throw std::invalid_argument("CameraIntrinsics: principal point outside image");
}

CameraPose::CameraPose(const Mat3& r, const Vec3& t) : rotation(r), translation(t) {
  Mat3 rtr = r.transpose() * r;
  if ((rtr - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6)
    throw std::invalid_argument("CameraPose: rotation is not orthonormal");
  if (std::abs(r.determinant() - 1.0) > 1e-6)
    throw std::invalid_argument("CameraPose: rotation determinant is not +1");
}

CameraPose CameraPose::look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
  Vec3 fwd = target - eye;
  double n = fwd.norm();
  if (n < 1e-12) throw std::invalid_argument("look_at: eye coincides with target");
  fwd /= n;
  // Image-down axis: -up projected orthogonal to the viewing direction.
  Vec3 down = -up - (-up).dot(fwd) * fwd;
  if (down.norm() < 1e-9) {
    // Viewing direction parallel to up; fall back to a fixed hint.
    Vec3 hint(1, 0, 0);
    down = hint - hint.dot(fwd) * fwd;
  }
  down.normalize();
  Vec3 right = down.cross(fwd);
  Mat3 r;
  r.row(0) = right;
  r.row(1) = down;
  r.row(2) = fwd;
  return CameraPose(r, -(r * eye));
}

Projection project(const Vec3& point, const CameraIntrinsics& intr, const CameraPose& pose) {
  Vec3 pc = pose.world_to_camera(point);
  Projection pr;
  pr.depth = pc.z();
  pr.in_front = pc.z() > 0.0;
  if (pr.in_front) {
    pr.u = intr.cx + intr.fx * pc.x() / pc.z();
    pr.v = intr.cy + intr.fy * pc.y() / pc.z();
  }
  return pr;
}

Vec3 unproject(double u, double v, double depth, const CameraIntrinsics& intr, const CameraPose& pose) {
  Vec3 pc((u - intr.cx) / intr.fx * depth, (v - intr.cy) / intr.fy * depth, depth);
  return pose.camera_to_world(pc);
}

Ray::Ray(const Vec3& o, const Vec3& d, double tn, double tf) : origin(o), direction(d), t_near(tn), t_far(tf) {
  if (std::abs(direction.norm() - 1.0) > 1e-6) throw std::invalid_argument("Ray: direction must be unit length");
  if (!(0 < t_near && t_near < t_far)) throw std::invalid_argument("Ray: need 0 < t_near < t_far");
}

std::optional<std::pair<double, double>> intersect_aabb(const Vec3& origin, const Vec3& dir,
                                                        const Vec3& box_min, const Vec3& box_max,
                                                        double t_min) {
  double t0 = t_min, t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dir[a]) < 1e-15) {
      if (origin[a] < box_min[a] || origin[a] > box_max[a]) return std::nullopt;
      continue;
    }
    double inv = 1.0 / dir[a];
    double ta = (box_min[a] - origin[a]) * inv;
    double tb = (box_max[a] - origin[a]) * inv;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::nullopt;
  }
  return std::make_pair(t0, t1);
}

}  // namespace gnrf
