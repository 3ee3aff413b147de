#include "verikit/synth/assumption.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "verikit/util/error.hpp"
#include "verikit/util/rng.hpp"

namespace verikit {

namespace {

// Affine part (a, b, c; d, e, f) of each symmetry for side length s = n - 1,
// applied as (x, y) -> (a x + b y + c s, d x + e y + f s).
constexpr int kMaps[SquareSymmetries::kCount][6] = {
    {1, 0, 0, 0, 1, 0},    // identity
    {0, -1, 1, 1, 0, 0},   // rotate 90
    {-1, 0, 1, 0, -1, 1},  // rotate 180
    {0, 1, 0, -1, 0, 1},   // rotate 270
    {-1, 0, 1, 0, 1, 0},   // mirror x
    {1, 0, 0, 0, -1, 1},   // mirror y
    {0, 1, 0, 1, 0, 0},    // transpose
    {0, -1, 1, -1, 0, 1},  // anti-transpose
};

}  // namespace

SquareSymmetries::SquareSymmetries(int side) : side_(side) {
  if (side < 2) throw ValidationError("symmetry grid side must be >= 2");
  const int s = side - 1;
  const std::size_t n = static_cast<std::size_t>(side) * static_cast<std::size_t>(side);
  for (int g = 0; g < kCount; ++g) {
    const int* m = kMaps[g];
    targets_[static_cast<std::size_t>(g)].resize(n);
    for (int y = 0; y < side; ++y)
      for (int x = 0; x < side; ++x) {
        const int tx = m[0] * x + m[1] * y + m[2] * s;
        const int ty = m[3] * x + m[4] * y + m[5] * s;
        targets_[static_cast<std::size_t>(g)][static_cast<std::size_t>(y) * side + x] =
            static_cast<std::uint32_t>(ty * side + tx);
      }
  }
}

Homography SquareSymmetries::homography(int g) const {
  if (g < 0 || g >= kCount) throw ValidationError("symmetry index out of range");
  const int* m = kMaps[g];
  const double s = side_ - 1;
  Eigen::Matrix3d h;
  h << m[0], m[1], m[2] * s, m[3], m[4], m[5] * s, 0.0, 0.0, 1.0;
  return Homography(h);
}

Image SquareSymmetries::apply(const Image& image, int g) const {
  if (image.width() != side_ || image.height() != side_)
    throw ValidationError("image does not match the symmetry grid");
  const int ch = image.channels();
  std::vector<float> out(image.data().size());
  const auto src = image.data();
  const auto& t = targets_[static_cast<std::size_t>(g)];
  for (std::size_t i = 0; i < t.size(); ++i)
    for (int c = 0; c < ch; ++c) out[t[i] * ch + c] = src[i * ch + c];
  return Image(side_, side_, ch, std::move(out));
}

FlowField SquareSymmetries::flow(int g) const {
  FlowField f(side_, side_);
  const auto& t = targets_[static_cast<std::size_t>(g)];
  for (std::size_t i = 0; i < t.size(); ++i) {
    const int x = static_cast<int>(i % side_), y = static_cast<int>(i / side_);
    f.set(x, y, static_cast<double>(t[i] % side_), static_cast<double>(t[i] / side_));
  }
  return f;
}

double SquareSymmetries::linf_after(const Image& a, int g, const Image& b,
                                    double bound) const noexcept {
  const int ch = a.channels();
  const auto pa = a.data();
  const auto pb = b.data();
  const auto& t = targets_[static_cast<std::size_t>(g)];
  double m = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (int c = 0; c < ch; ++c)
      m = std::max(m, std::abs(static_cast<double>(pa[i * ch + c]) - pb[t[i] * ch + c]));
    if (m > bound) return m;
  }
  return m;
}

void AssumptionDatasetSpec::validate() const {
  if (!(gamma > 0.0)) throw ValidationError("gamma must be > 0");
  if (num_classes < 2) throw ValidationError("num_classes must be >= 2");
  if (templates_per_class < 1) throw ValidationError("templates_per_class must be >= 1");
  if (image_size < 4) throw ValidationError("image_size must be >= 4");
  if (channels != 1 && channels != 3) throw ValidationError("channels must be 1 or 3");
  if (!(lighting_bound >= 0.0 && lighting_bound <= gamma))
    throw ValidationError("lighting_bound must lie in [0, gamma]");
  if (!(min_band_width > 0.0)) throw ValidationError("min_band_width must be > 0");
}

AssumptionDataset::AssumptionDataset(const AssumptionDatasetSpec& spec, std::uint64_t seed)
    : spec_(spec) {
  spec_.validate();
  const double g = spec_.gamma;
  const int k = spec_.num_classes;
  const double width = (1.0 - 6.0 * g - 5.0 * g * (k - 1)) / k;
  if (width < spec_.min_band_width)
    throw ValidationError("class separation unachievable: " + std::to_string(k) +
                          " classes at gamma " + std::to_string(g));
  family_ = std::make_shared<const SquareSymmetries>(spec_.image_size);
  double lo = 5.0 * g;
  for (int c = 0; c < k; ++c) {
    bands_.emplace_back(lo, lo + width);
    lo += width + 5.0 * g;
  }
  const int n = spec_.image_size;
  const std::size_t values = static_cast<std::size_t>(n) * n * spec_.channels;
  for (int c = 0; c < k; ++c) {
    TemplateSet set;
    set.class_id = c;
    const auto [blo, bhi] = bands_[static_cast<std::size_t>(c)];
    for (int m = 0; m < spec_.templates_per_class; ++m) {
      Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(m)}));
      std::vector<float> data(values);
      for (float& v : data) v = static_cast<float>(rng.uniform(blo, bhi));
      set.templates.emplace_back(n, n, spec_.channels, std::move(data));
    }
    templates_.push_back(std::move(set));
  }
}

AssumptionQuery AssumptionDataset::make_query(int class_id, std::uint64_t seed) const {
  if (class_id < 0 || class_id >= spec_.num_classes) throw ValidationError("unknown class");
  Rng rng(seed);
  AssumptionQuery q;
  q.class_id = class_id;
  q.template_index = static_cast<int>(rng.index(static_cast<std::uint64_t>(spec_.templates_per_class)));
  q.symmetry = static_cast<int>(rng.index(SquareSymmetries::kCount));
  const double budget = spec_.lighting_bound;
  for (int c = 0; c < 3; ++c) {
    const double a = rng.uniform(-budget, budget);
    const double rest = budget - std::abs(a);
    q.lighting.gain[c] = 1.0 + a;
    q.lighting.bias[c] = rng.uniform(-rest, rest);
  }
  const Image& templ = templates_[static_cast<std::size_t>(class_id)].templates[static_cast<std::size_t>(q.template_index)];
  Image moved = family_->apply(templ, q.symmetry);
  const int ch = moved.channels();
  auto data = moved.data();
  for (std::size_t i = 0; i < data.size(); ++i)
    data[i] = q.lighting.apply(data[i], static_cast<int>(i % static_cast<std::size_t>(ch)));
  q.crop = std::move(moved);
  q.flow = family_->flow(q.symmetry);
  return q;
}

double AssumptionDataset::classify(const Image& templ, const Image& crop) const {
  if (!templ.same_shape(crop)) throw ValidationError("classifier inputs differ in shape");
  double best = std::numeric_limits<double>::infinity();
  for (int g = 0; g < SquareSymmetries::kCount; ++g)
    best = std::min(best, family_->linf_after(templ, g, crop, best));
  return std::clamp(1.0 - best, 0.0, 1.0);
}

int AssumptionDataset::best_symmetry(const Image& templ, const Image& crop) const {
  double best = std::numeric_limits<double>::infinity();
  int arg = 0;
  for (int g = 0; g < SquareSymmetries::kCount; ++g) {
    const double d = family_->linf_after(templ, g, crop, best);
    if (d < best) {
      best = d;
      arg = g;
    }
  }
  return arg;
}

bool audit_dense_dataset(const AssumptionDataset& data, const AssumptionQuery& query,
                         const DistanceMetric& metric, double* best_distance) {
  const TemplateSet& set = data.templates().at(static_cast<std::size_t>(query.class_id));
  double best = std::numeric_limits<double>::infinity();
  for (const Image& t : set.templates) {
    for (int g = 0; g < SquareSymmetries::kCount; ++g) {
      const double d = metric.kind() == DistanceMetric::Kind::l_inf
                           ? data.symmetries().linf_after(t, g, query.crop, best)
                           : image_distance(metric, data.symmetries().apply(t, g), query.crop);
      best = std::min(best, d);
    }
  }
  if (best_distance) *best_distance = best;
  return best <= data.spec().gamma;
}

namespace {

Image perturb(const Image& image, double amount, Rng& rng) {
  std::vector<float> out(image.data().begin(), image.data().end());
  for (float& v : out) {
    // Half the samples sit on the bound itself.
    const double step = rng.bernoulli(0.5) ? (rng.bernoulli(0.5) ? amount : -amount)
                                           : rng.uniform(-amount, amount);
    v = clamp_intensity(v + step);
  }
  return Image(image.width(), image.height(), image.channels(), std::move(out));
}

Image mixture(const Image& a, const Image& b, double t) {
  std::vector<float> out(a.data().size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = clamp_intensity((1.0 - t) * a.data()[i] + t * b.data()[i]);
  return Image(a.width(), a.height(), a.channels(), std::move(out));
}

Image permute(const Image& image, const std::vector<std::size_t>& perm) {
  const int ch = image.channels();
  std::vector<float> out(image.data().size());
  for (std::size_t i = 0; i < perm.size(); ++i)
    for (int c = 0; c < ch; ++c) out[perm[i] * ch + c] = image.data()[i * ch + c];
  return Image(image.width(), image.height(), ch, std::move(out));
}

}  // namespace

AuditResult audit_classifier_smoothness(const AssumptionDataset& data, std::size_t samples,
                                        double delta, const DistanceMetric& metric,
                                        std::uint64_t seed) {
  AuditResult r;
  const auto& sets = data.templates();
  const double gamma = data.spec().gamma;
  for (std::size_t s = 0; s < samples; ++s) {
    Rng rng(derive_seed(seed, {s}));
    const TemplateSet& set = sets[rng.index(sets.size())];
    const Image& i1 = set.templates[rng.index(set.templates.size())];
    const int g = static_cast<int>(rng.index(SquareSymmetries::kCount));
    const Image moved = data.symmetries().apply(i1, g);
    const Image i2 = perturb(moved, 2.0 * gamma * rng.uniform(), rng);
    if (image_distance(metric, moved, i2) > 2.0 * gamma) continue;  // premise not met
    const int query_class = static_cast<int>(rng.index(sets.size()));
    const AssumptionQuery d = data.make_query(query_class, rng.next());
    const double gap = std::abs(data.classify(i1, d.crop) - data.classify(i2, d.crop));
    ++r.samples;
    r.worst = std::max(r.worst, gap);
    if (!(gap < delta)) ++r.violations;
  }
  return r;
}

MetricAudit audit_metric_axioms(const AssumptionDataset& data, const DistanceMetric& metric,
                                std::size_t samples, std::uint64_t seed) {
  std::vector<Image> pool;
  for (const TemplateSet& set : data.templates())
    for (const Image& t : set.templates) pool.push_back(t);
  for (int c = 0; c < data.spec().num_classes; ++c)
    pool.push_back(data.make_query(c, derive_seed(seed, {0xa0, static_cast<std::uint64_t>(c)})).crop);

  MetricAudit out;
  const std::size_t n = pool.front().pixel_count();
  for (std::size_t s = 0; s < samples; ++s) {
    Rng rng(derive_seed(seed, {s}));
    const Image& a = pool[rng.index(pool.size())];
    const Image& b = pool[rng.index(pool.size())];
    // Every other triple puts c on the segment between a and b, where
    // correlation-based distances break the triangle inequality.
    const Image c = s % 2 == 0 ? mixture(a, b, rng.uniform(0.25, 0.75)) : pool[rng.index(pool.size())];
    const double ab = image_distance(metric, a, b);
    const double ac = image_distance(metric, a, c);
    const double cb = image_distance(metric, c, b);
    const double excess = ab - (ac + cb);
    ++out.triangle.samples;
    out.triangle.worst = std::max(out.triangle.worst, excess);
    if (excess > 1e-9 * std::max(1.0, ab)) ++out.triangle.violations;

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.index(i + 1)]);
    const double moved = image_distance(metric, permute(a, perm), permute(b, perm));
    const double diff = std::abs(moved - ab);
    ++out.permutation.samples;
    out.permutation.worst = std::max(out.permutation.worst, diff);
    if (diff > 1e-9 * std::max(1.0, ab)) ++out.permutation.violations;
  }
  return out;
}

}  // namespace verikit
