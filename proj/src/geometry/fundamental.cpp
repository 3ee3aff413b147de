#include "verikit/geometry/fundamental.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "verikit/util/error.hpp"

namespace verikit {

namespace {

// Translate to the centroid and scale so the mean distance is sqrt(2).
std::optional<Eigen::Matrix3d> hartley_transform(std::span<const Correspondence> corrs,
                                                 bool use_dst) {
  Vec2 centroid = Vec2::Zero();
  for (const Correspondence& c : corrs) centroid += use_dst ? c.dst : c.src;
  centroid /= static_cast<double>(corrs.size());
  double mean_dist = 0.0;
  for (const Correspondence& c : corrs) mean_dist += ((use_dst ? c.dst : c.src) - centroid).norm();
  mean_dist /= static_cast<double>(corrs.size());
  if (!(mean_dist > 1e-12) || !std::isfinite(mean_dist)) return std::nullopt;
  const double s = std::sqrt(2.0) / mean_dist;
  Eigen::Matrix3d t;
  t << s, 0, -s * centroid.x(), 0, s, -s * centroid.y(), 0, 0, 1;
  return t;
}

// Minimum numerical rank accepted for the 9-column design matrix. Correspondences
// induced by a homography have rank exactly 6 and still determine a valid F.
constexpr int kMinDesignRank = 6;
constexpr double kRankTolerance = 1e-10;

}  // namespace

FundamentalMatrix FundamentalMatrix::from_matrix(const Eigen::Matrix3d& m) {
  if (!m.allFinite() || m.norm() == 0.0) throw ValidationError("fundamental matrix is zero");
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d s = svd.singularValues();
  s(2) = 0.0;
  Eigen::Matrix3d f = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
  const double norm = f.norm();
  if (norm == 0.0) throw ValidationError("fundamental matrix is zero");
  f /= norm;
  Eigen::Index r = 0, c = 0;
  f.cwiseAbs().maxCoeff(&r, &c);
  if (f(r, c) < 0.0) f = -f;
  return FundamentalMatrix(f);
}

std::optional<FundamentalMatrix> try_eight_point(std::span<const Correspondence> corrs) noexcept {
  if (corrs.size() < 8) return std::nullopt;
  const auto t1 = hartley_transform(corrs, false);
  const auto t2 = hartley_transform(corrs, true);
  if (!t1 || !t2) return std::nullopt;

  const Eigen::Index n = static_cast<Eigen::Index>(corrs.size());
  Eigen::MatrixXd a(n, 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Correspondence& c = corrs[static_cast<std::size_t>(i)];
    const Eigen::Vector3d x = *t1 * Eigen::Vector3d(c.src.x(), c.src.y(), 1.0);
    const Eigen::Vector3d xp = *t2 * Eigen::Vector3d(c.dst.x(), c.dst.y(), 1.0);
    a.row(i) << xp.x() * x.x(), xp.x() * x.y(), xp.x(), xp.y() * x.x(), xp.y() * x.y(), xp.y(),
        x.x(), x.y(), 1.0;
  }
  if (!a.allFinite()) return std::nullopt;

  Eigen::Matrix<double, 9, 1> null_vec;
  int rank = 0;
  if (n == 8) {
    // Minimal sample: the last Householder vector of A^T spans a direction
    // orthogonal to every row of A, which is all the solve needs.
    Eigen::ColPivHouseholderQR<Eigen::Matrix<double, 9, 8>> qr(a.transpose());
    qr.setThreshold(kRankTolerance);
    rank = static_cast<int>(qr.rank());
    const Eigen::Matrix<double, 9, 9> q = qr.householderQ();
    null_vec = q.col(8);
  } else {
    // Same singular values and right singular vectors as A, at fixed size.
    Eigen::Matrix<double, 9, 9> square = Eigen::Matrix<double, 9, 9>::Zero();
    if (n == 9) {
      square = a;
    } else {
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
      square = qr.matrixQR().topRows(9).triangularView<Eigen::Upper>();
    }
    Eigen::JacobiSVD<Eigen::Matrix<double, 9, 9>> svd(square, Eigen::ComputeFullV);
    const Eigen::Matrix<double, 9, 1> sv = svd.singularValues();
    null_vec = svd.matrixV().col(8);
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > kRankTolerance * sv(0)) ++rank;
  }
  if (rank < kMinDesignRank) return std::nullopt;

  Eigen::Matrix3d fn;
  fn << null_vec(0), null_vec(1), null_vec(2), null_vec(3), null_vec(4), null_vec(5), null_vec(6),
      null_vec(7), null_vec(8);
  // Rank-2 projection in normalized coordinates, then denormalize.
  Eigen::JacobiSVD<Eigen::Matrix3d> svd3(fn, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d s = svd3.singularValues();
  s(2) = 0.0;
  fn = svd3.matrixU() * s.asDiagonal() * svd3.matrixV().transpose();
  const Eigen::Matrix3d f = t2->transpose() * fn * *t1;
  if (!f.allFinite() || f.norm() == 0.0) return std::nullopt;
  try {
    return FundamentalMatrix::from_matrix(f);
  } catch (...) {
    return std::nullopt;
  }
}

FundamentalMatrix eight_point(std::span<const Correspondence> corrs) {
  if (corrs.size() < 8) throw ValidationError("underdetermined");
  auto f = try_eight_point(corrs);
  if (!f) throw ValidationError("degenerate configuration");
  return *f;
}

double epipolar_distance(const FundamentalMatrix& f, const Correspondence& c) noexcept {
  const Eigen::Matrix3d& m = f.matrix();
  const Eigen::Vector3d x(c.src.x(), c.src.y(), 1.0);
  const Eigen::Vector3d xp(c.dst.x(), c.dst.y(), 1.0);
  const Eigen::Vector3d fx = m * x;
  const Eigen::Vector3d ftxp = m.transpose() * xp;
  const double r = xp.dot(fx);
  const double den = fx.x() * fx.x() + fx.y() * fx.y() + ftxp.x() * ftxp.x() + ftxp.y() * ftxp.y();
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(r * r / den);
}

}  // namespace verikit
