#include "verikit/eval/sift.hpp"

namespace verikit {

SiftResult sift_verify(std::span<const std::vector<Correspondence>> matches_per_template,
                       const Box& box_in_crop, const SiftThresholds& thresholds) {
  SiftResult out;
  for (std::size_t t = 0; t < matches_per_template.size(); ++t) {
    const auto& matches = matches_per_template[t];
    SiftTemplateScore s;
    s.matches = matches.size();
    std::size_t inside = 0;
    for (const Correspondence& c : matches) inside += box_in_crop.contains(c.dst.x(), c.dst.y()) ? 1 : 0;
    s.precision = matches.empty() ? 0.0 : static_cast<double>(inside) / static_cast<double>(matches.size());
    s.passed = s.matches > thresholds.s_matches_min && s.precision > thresholds.s_precision_min;
    if (s.passed && (!out.best_template || s.matches > out.templates[*out.best_template].matches))
      out.best_template = t;
    out.templates.push_back(s);
  }
  out.accepted = out.best_template.has_value();
  return out;
}

}  // namespace verikit
