#include "verikit/geometry/homography.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "verikit/util/error.hpp"

namespace verikit {

namespace {
constexpr double kTiny = 1e-12;
}

Homography::Homography(const Eigen::Matrix3d& h) : h_(h) {
  if (!h.allFinite()) throw ValidationError("homography has non-finite entries");
  if (std::abs(h(2, 2)) > kTiny) h_ /= h(2, 2);
  const double scale = h_.cwiseAbs().maxCoeff();
  if (scale == 0.0 || std::abs(h_.determinant()) < kTiny * scale * scale * scale)
    throw ValidationError("homography is singular");
}

Homography Homography::translation(double tx, double ty) {
  Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
  h(0, 2) = tx;
  h(1, 2) = ty;
  return Homography(h);
}

Homography Homography::scaling(double sx, double sy) {
  Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
  h(0, 0) = sx;
  h(1, 1) = sy;
  return Homography(h);
}

Homography Homography::similarity(double rotation, double scale, const Vec2& center,
                                  const Vec2& translation) {
  const double c = std::cos(rotation) * scale;
  const double s = std::sin(rotation) * scale;
  Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
  h(0, 0) = c;
  h(0, 1) = -s;
  h(1, 0) = s;
  h(1, 1) = c;
  const Vec2 t = center + translation - h.topLeftCorner<2, 2>() * center;
  h(0, 2) = t.x();
  h(1, 2) = t.y();
  return Homography(h);
}

Homography Homography::from_correspondences(const std::array<Vec2, 4>& src,
                                            const std::array<Vec2, 4>& dst) {
  Eigen::Matrix<double, 8, 9> a;
  for (int i = 0; i < 4; ++i) {
    const double x = src[i].x(), y = src[i].y();
    const double u = dst[i].x(), v = dst[i].y();
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, 8, 9>> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(7) < 1e-10 * sv(0)) throw ValidationError("degenerate quadrilateral");
  const Eigen::Matrix<double, 9, 1> v = svd.matrixV().col(8);
  Eigen::Matrix3d h;
  h << v(0), v(1), v(2), v(3), v(4), v(5), v(6), v(7), v(8);
  return Homography(h);
}

Vec2 Homography::apply(const Vec2& p) const {
  const auto q = try_apply(p);
  if (!q) throw ValidationError("point at infinity");
  return *q;
}

std::optional<Vec2> Homography::try_apply(const Vec2& p) const noexcept {
  const Eigen::Vector3d q = h_ * Eigen::Vector3d(p.x(), p.y(), 1.0);
  if (std::abs(q.z()) < kTiny) return std::nullopt;
  return Vec2(q.x() / q.z(), q.y() / q.z());
}

Homography Homography::inverse() const { return Homography(h_.inverse()); }

}  // namespace verikit
