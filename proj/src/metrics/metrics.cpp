#include "verikit/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "verikit/util/error.hpp"

namespace verikit {

NccResult ncc(const Image& a, const Image& b, const Mask* mask) {
  if (!a.same_shape(b)) throw ValidationError("ncc: image shapes differ");
  if (mask != nullptr && (mask->width() != a.width() || mask->height() != a.height()))
    throw ValidationError("ncc: mask shape differs from images");

  const int channels = a.channels();
  double sum_a = 0.0, sum_b = 0.0;
  std::size_t pixels = 0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      if (mask != nullptr && !mask->at(x, y)) continue;
      ++pixels;
      for (int c = 0; c < channels; ++c) {
        sum_a += a.at(x, y, c);
        sum_b += b.at(x, y, c);
      }
    }
  if (pixels < 2) return {};
  const double n = static_cast<double>(pixels) * channels;
  const double mean_a = sum_a / n;
  const double mean_b = sum_b / n;

  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      if (mask != nullptr && !mask->at(x, y)) continue;
      for (int c = 0; c < channels; ++c) {
        const double da = a.at(x, y, c) - mean_a;
        const double db = b.at(x, y, c) - mean_b;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
      }
    }
  // Variance below float resolution counts as flat.
  constexpr double kFlat = 1e-12;
  if (saa / n < kFlat || sbb / n < kFlat) return {};
  return {std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0), true};
}

DistanceMetric DistanceMetric::l_p(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw ValidationError("l_p metric requires p >= 1");
  return DistanceMetric(Kind::l_p, p);
}

DistanceMetric DistanceMetric::parse(const std::string& text) {
  if (text == "linf" || text == "l_inf") return l_inf();
  if (text == "ncc" || text == "ncc_distance") return ncc_distance();
  if (text == "l1") return l_p(1.0);
  if (text == "l2") return l_p(2.0);
  for (const std::string prefix : {"lp:", "l_p:"}) {
    if (text.rfind(prefix, 0) == 0) {
      try {
        return l_p(std::stod(text.substr(prefix.size())));
      } catch (const std::logic_error&) {
        break;
      }
    }
  }
  throw ValidationError("unknown distance metric '" + text + "'");
}

std::string DistanceMetric::name() const {
  switch (kind_) {
    case Kind::l_inf:
      return "linf";
    case Kind::ncc_distance:
      return "ncc";
    case Kind::l_p: {
      std::ostringstream os;
      os << "lp:" << p_;
      return os.str();
    }
  }
  return "unknown";
}

double image_distance(const DistanceMetric& metric, const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw ValidationError("image_distance: image shapes differ");
  const auto da = a.data();
  const auto db = b.data();
  switch (metric.kind()) {
    case DistanceMetric::Kind::l_inf: {
      double m = 0.0;
      for (std::size_t i = 0; i < da.size(); ++i)
        m = std::max(m, std::abs(static_cast<double>(da[i]) - db[i]));
      return m;
    }
    case DistanceMetric::Kind::l_p: {
      const double p = metric.p();
      double s = 0.0;
      if (p == 1.0) {
        for (std::size_t i = 0; i < da.size(); ++i) s += std::abs(static_cast<double>(da[i]) - db[i]);
        return s;
      }
      if (p == 2.0) {
        for (std::size_t i = 0; i < da.size(); ++i) {
          const double d = static_cast<double>(da[i]) - db[i];
          s += d * d;
        }
        return std::sqrt(s);
      }
      for (std::size_t i = 0; i < da.size(); ++i)
        s += std::pow(std::abs(static_cast<double>(da[i]) - db[i]), p);
      return std::pow(s, 1.0 / p);
    }
    case DistanceMetric::Kind::ncc_distance:
      return 1.0 - ncc(a, b).score;
  }
  return 0.0;
}

}  // namespace verikit
