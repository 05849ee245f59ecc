#pragma once

#include <stdexcept>
#include <vector>

#include "gnrf/core/geometry.hpp"
#include "gnrf/core/image.hpp"

namespace gnrf {

// Parallel-jaw grasp: position t, rotation R (unit quaternion), opening
// width w in meters, quality q in [0,1]. Grasp frame: x = closing axis
// (between the fingers), z = approach/wrist axis, y = z cross x.
struct Grasp {
  Vec3 position = Vec3::Zero();
  Quat rotation;
  double width = 0.0;
  double quality = 0.0;

  Grasp() = default;
  Grasp(const Vec3& t, const Quat& r, double w, double q) : position(t), rotation(r), width(w), quality(q) {
    if (w < 0) throw std::invalid_argument("Grasp: width must be non-negative");
  }

  Vec3 closing_axis() const { return rotation.to_matrix().col(0); }
  Vec3 approach_axis() const { return rotation.to_matrix().col(2); }

  // Physically identical twin: fingers swapped by a pi rotation about the
  // wrist (approach) axis.
  Grasp wrist_flipped() const {
    return Grasp(position, rotation * Quat::from_axis_angle(Vec3(0, 0, 1), M_PI), width, quality);
  }
};

struct View {
  Image image;  // H x W x 3, [0,1]
  CameraIntrinsics intrinsics;
  CameraPose pose;
};

struct MultiviewObservation {
  std::vector<View> views;

  MultiviewObservation() = default;
  explicit MultiviewObservation(std::vector<View> v) : views(std::move(v)) { validate(); }

  int count() const { return static_cast<int>(views.size()); }
  void validate() const {
    if (views.size() < 2) throw std::invalid_argument("MultiviewObservation: need at least 2 views");
    for (const auto& v : views) {
      if (v.image.height != views[0].image.height || v.image.width != views[0].image.width ||
          v.image.channels != views[0].image.channels)
        throw std::invalid_argument("MultiviewObservation: all images must share dimensions");
    }
  }
};

}  // namespace gnrf
