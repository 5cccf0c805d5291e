#ifndef LORADEX_ANALYTICS_SCALE_CURVE_HPP
#define LORADEX_ANALYTICS_SCALE_CURVE_HPP

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "loradex/error.hpp"
#include "loradex/index.hpp"

namespace loradex {

struct ScalePoint {
  double scale = 0.0;
  double strength = 0.0;
};

/// Strength of one adapter across indices built at different LoRA scales.
/// No monotonicity is assumed.
struct ScaleCurve {
  std::string adapter_id;
  std::vector<ScalePoint> points;  ///< strictly increasing scale
  std::vector<std::string> notes;  ///< skipped scales
};

/// `indices` maps the generation scale to the index built at that scale.
inline ScaleCurve scale_curve(const std::map<double, const CorpusIndex*>& indices, const std::string& adapter_id) {
  ScaleCurve curve;
  curve.adapter_id = adapter_id;
  for (const auto& [scale, index] : indices) {
    auto it = index->signatures.find(adapter_id);
    if (it == index->signatures.end()) {
      curve.notes.push_back("adapter '" + adapter_id + "' absent from index at scale " + std::to_string(scale));
      continue;
    }
    curve.points.push_back({scale, it->second.strength});
  }
  if (curve.points.size() < 2) {
    throw data_error("scale curve for '" + adapter_id + "' needs at least 2 points, found " +
                     std::to_string(curve.points.size()));
  }
  return curve;
}

inline void write_scale_curve(std::ostream& out, const ScaleCurve& curve) {
  out << "scale\tstrength\n";
  out.precision(17);
  for (const auto& p : curve.points) out << p.scale << '\t' << p.strength << '\n';
}

}  // namespace loradex

#endif  // LORADEX_ANALYTICS_SCALE_CURVE_HPP
