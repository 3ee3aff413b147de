#pragma once

#include <Eigen/Dense>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "verikit/core/flow.hpp"
#include "verikit/core/image.hpp"
#include "verikit/geometry/fundamental.hpp"
#include "verikit/util/rng.hpp"

namespace verikit::testing {

/// Two pinhole cameras looking at a cloud of points in front of both, with
/// the true fundamental matrix K2^-T [t]x R K1^-1.
struct CameraPair {
  Eigen::Matrix3d f_true;
  std::vector<Correspondence> matches;
};

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

inline Eigen::Matrix3d random_rotation(Rng& rng, double max_angle) {
  Eigen::Vector3d axis(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  axis.normalize();
  return Eigen::AngleAxisd(rng.uniform(-max_angle, max_angle), axis).toRotationMatrix();
}

inline CameraPair random_camera_pair(std::uint64_t seed, int points = 60) {
  Rng rng(seed);
  auto intrinsics = [&] {
    Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
    k(0, 0) = rng.uniform(300, 900);
    k(1, 1) = k(0, 0) * rng.uniform(0.9, 1.1);
    k(0, 2) = rng.uniform(200, 440);
    k(1, 2) = rng.uniform(150, 330);
    return k;
  };
  const Eigen::Matrix3d k1 = intrinsics(), k2 = intrinsics();
  const Eigen::Matrix3d r = random_rotation(rng, 0.4);
  Eigen::Vector3d t(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-0.3, 0.3));
  t = t.normalized() * rng.uniform(0.3, 1.0);
  CameraPair out;
  out.f_true = k2.inverse().transpose() * skew(t) * r * k1.inverse();
  while (static_cast<int>(out.matches.size()) < points) {
    const Eigen::Vector3d x(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(4, 10));
    const Eigen::Vector3d x2 = r * x + t;
    if (x2.z() < 1.0) continue;
    const Eigen::Vector3d p1 = k1 * x, p2 = k2 * x2;
    out.matches.push_back({Vec2(p1.x() / p1.z(), p1.y() / p1.z()), Vec2(p2.x() / p2.z(), p2.y() / p2.z())});
  }
  return out;
}

inline Eigen::Matrix3d unit_frobenius(const Eigen::Matrix3d& m) { return m / m.norm(); }

/// min over the sign of ||a - s b||_F after normalizing both.
inline double sign_free_distance(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  const Eigen::Matrix3d an = unit_frobenius(a), bn = unit_frobenius(b);
  return std::min((an - bn).norm(), (an + bn).norm());
}

/// Exact two-view geometric error: min ||x - y||^2 + ||x' - y'||^2 over
/// pairs with y'^T F y = 0, found by a 2D pattern search over y with y'
/// the projection of x' onto the epipolar line F y.
inline double geometric_error(const Eigen::Matrix3d& f, const Correspondence& c, double radius) {
  auto cost = [&](const Vec2& y) {
    const Eigen::Vector3d l = f * Eigen::Vector3d(y.x(), y.y(), 1.0);
    const double n2 = l.x() * l.x() + l.y() * l.y();
    const double d = l.dot(Eigen::Vector3d(c.dst.x(), c.dst.y(), 1.0));
    return (y - c.src).squaredNorm() + d * d / n2;
  };
  Vec2 best = c.src;
  double best_cost = cost(best);
  // coarse grid, then shrinking pattern search
  const int n = 40;
  for (int i = -n; i <= n; ++i)
    for (int j = -n; j <= n; ++j) {
      const Vec2 y = c.src + Vec2(i, j) * (radius / n);
      const double v = cost(y);
      if (v < best_cost) {
        best_cost = v;
        best = y;
      }
    }
  double step = radius / n;
  while (step > 1e-13 * std::max(1.0, c.src.norm())) {
    bool moved = false;
    for (const Vec2& d : {Vec2(1, 0), Vec2(-1, 0), Vec2(0, 1), Vec2(0, -1), Vec2(1, 1), Vec2(-1, -1),
                          Vec2(1, -1), Vec2(-1, 1)}) {
      const Vec2 y = best + d * step;
      const double v = cost(y);
      if (v < best_cost) {
        best_cost = v;
        best = y;
        moved = true;
      }
    }
    if (!moved) step *= 0.5;
  }
  return std::sqrt(best_cost);
}

inline Image random_image(Rng& rng, int w, int h, int channels) {
  Image img(w, h, channels);
  for (float& v : img.data()) v = static_cast<float>(rng.uniform());
  return img;
}

/// Flow of a template of size w x h under the homography h (3x3, src -> dst).
inline FlowField homography_flow(const Eigen::Matrix3d& h, int w, int hgt) {
  FlowField flow(w, hgt);
  for (int y = 0; y < hgt; ++y)
    for (int x = 0; x < w; ++x) {
      const Eigen::Vector3d p = h * Eigen::Vector3d(x, y, 1.0);
      flow.set(x, y, p.x() / p.z(), p.y() / p.z());
    }
  return flow;
}

inline FlowField random_flow(Rng& rng, int w, int h, double target_w, double target_h) {
  FlowField flow(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) flow.set(x, y, rng.uniform(0, target_w), rng.uniform(0, target_h));
  return flow;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("verikit_" + tag + "_" + std::to_string(Rng(std::hash<std::string>{}(tag)).next() ^
                                                     static_cast<std::uint64_t>(::getpid())));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace verikit::testing
