#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "verikit/core/detection.hpp"
#include "verikit/core/flow.hpp"
#include "verikit/core/image.hpp"
#include "verikit/geometry/homography.hpp"
#include "verikit/metrics/metrics.hpp"
#include "verikit/synth/transform.hpp"

namespace verikit {

/// The eight symmetries of an n x n pixel grid (rotations by multiples of 90
/// degrees and the four reflections). Each is an exact pixel permutation and
/// a homography, so the family is closed under composition and inversion.
class SquareSymmetries {
 public:
  static constexpr int kCount = 8;

  explicit SquareSymmetries(int side);

  int side() const noexcept { return side_; }
  Homography homography(int g) const;
  /// Scene index of template pixel `index` under symmetry g.
  std::uint32_t target(int g, std::size_t index) const noexcept {
    return targets_[static_cast<std::size_t>(g)][index];
  }
  /// g(image): out(g(p)) = image(p).
  Image apply(const Image& image, int g) const;
  FlowField flow(int g) const;
  /// max over pixels of |g(a) - b|, stopping early once `bound` is exceeded.
  double linf_after(const Image& a, int g, const Image& b, double bound) const noexcept;

 private:
  int side_;
  std::array<std::vector<std::uint32_t>, kCount> targets_;
};

struct AssumptionDatasetSpec {
  double gamma = 0.02;
  int num_classes = 4;
  int templates_per_class = 4;
  int image_size = 64;
  int channels = 3;
  double lighting_bound = 0.02;  ///< <= gamma
  double min_band_width = 0.1;   ///< narrowest per-class intensity band allowed

  void validate() const;
};

struct AssumptionQuery {
  Image crop;
  int class_id = 0;
  int template_index = 0;
  int symmetry = 0;  ///< the true rigid map, an index into SquareSymmetries
  Lighting lighting;
  FlowField flow;    ///< ground-truth flow of the true template into the crop
};

/// Templates whose intensities lie in disjoint per-class bands. Bands are
/// separated by at least 5 gamma, start at least 5 gamma above 0 and end
/// gamma below 1, so a gamma-bounded lighting change never clips and any two
/// classes differ by at least 4 gamma in l_inf everywhere.
class AssumptionDataset {
 public:
  AssumptionDataset(const AssumptionDatasetSpec& spec, std::uint64_t seed);

  const AssumptionDatasetSpec& spec() const noexcept { return spec_; }
  const std::vector<TemplateSet>& templates() const noexcept { return templates_; }
  const SquareSymmetries& symmetries() const noexcept { return *family_; }
  std::pair<double, double> band(int class_id) const { return bands_.at(static_cast<std::size_t>(class_id)); }

  /// A lighting-changed symmetry of one template of `class_id`.
  AssumptionQuery make_query(int class_id, std::uint64_t seed) const;

  /// c(I, D) = 1 - min over the family of d_inf(g(I), D).
  double classify(const Image& templ, const Image& crop) const;
  /// Lipschitz constant of classify in its first argument under l_inf.
  double lipschitz() const noexcept { return 1.0; }
  /// Smallest margin with |c(I1,D) - c(I2,D)| < delta whenever
  /// d(g(I1), I2) <= 2 gamma; the factor keeps the inequality strict.
  double smoothness_delta() const noexcept { return 2.0 * spec_.gamma * lipschitz() * (1.0 + 1e-9); }
  /// Symmetry of `templ` closest to `crop` in l_inf (lowest index on ties).
  int best_symmetry(const Image& templ, const Image& crop) const;

 private:
  AssumptionDatasetSpec spec_;
  std::shared_ptr<const SquareSymmetries> family_;
  std::vector<std::pair<double, double>> bands_;
  std::vector<TemplateSet> templates_;
};

struct AuditResult {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double worst = 0.0;  ///< largest observed violation statistic
  bool passed() const noexcept { return violations == 0; }
};

/// Dataset density for one query: some template of the query's class and some
/// symmetry come within gamma of the crop under `metric`.
bool audit_dense_dataset(const AssumptionDataset& data, const AssumptionQuery& query,
                         const DistanceMetric& metric, double* best_distance = nullptr);

/// Monte-Carlo check of classifier smoothness: pairs (I1, I2) with d(g(I1), I2) <= 2 gamma
/// and random queries D must satisfy |c(I1,D) - c(I2,D)| < delta. `worst`
/// holds the largest |c(I1,D) - c(I2,D)|.
AuditResult audit_classifier_smoothness(const AssumptionDataset& data, std::size_t samples,
                                        double delta, const DistanceMetric& metric,
                                        std::uint64_t seed);

struct MetricAudit {
  AuditResult triangle;
  AuditResult permutation;
  bool passed() const noexcept { return triangle.passed() && permutation.passed(); }
};

/// Triangle inequality and permutation invariance of `metric` on triples drawn
/// from templates, queries and their pixelwise mixtures.
MetricAudit audit_metric_axioms(const AssumptionDataset& data, const DistanceMetric& metric,
                                std::size_t samples, std::uint64_t seed);

}  // namespace verikit
