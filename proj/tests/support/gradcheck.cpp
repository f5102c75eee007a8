#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

using tsrkit::RasterMap;
using tsrkit::RawNetworkOutput;

GradCheck check_gradient(const LossFn& loss, const RawNetworkOutput& point, const RawNetworkOutput& analytic,
                         const std::vector<Coordinate>& coords, double step, double kink_radius) {
  GradCheck out;
  RawNetworkOutput x = point;
  const double f0 = loss(x);
  double diff2 = 0.0;
  double a2 = 0.0;
  double n2 = 0.0;
  for (const auto& c : coords) {
    double& v = (x.*c.field).data()[c.index];
    const double orig = v;
    auto at = [&](double delta) {
      v = orig + delta;
      const double f = loss(x);
      v = orig;
      return f;
    };
    const double right = (at(kink_radius) - f0) / kink_radius;
    const double left = (f0 - at(-kink_radius)) / kink_radius;
    // Curvature alone moves the one-sided slopes by O(radius); a kink moves
    // them by a finite jump.
    if (std::abs(right - left) > 0.05 * std::max(std::abs(right), std::abs(left)) + 1e-9) {
      ++out.skipped_near_kink;
      continue;
    }
    const double numeric = (at(step) - at(-step)) / (2.0 * step);
    const double a = (analytic.*c.field).data()[c.index];
    diff2 += (a - numeric) * (a - numeric);
    a2 += a * a;
    n2 += numeric * numeric;
    ++out.checked;
  }
  const double scale = std::sqrt(std::max(a2, n2));
  out.relative_error = scale > 0.0 ? std::sqrt(diff2) / scale : std::sqrt(diff2);
  return out;
}

std::vector<Coordinate> all_coordinates(const RawNetworkOutput& raw, const std::vector<RasterField>& fields) {
  std::vector<Coordinate> out;
  for (auto f : fields)
    for (std::size_t i = 0; i < (raw.*f).data().size(); ++i) out.push_back({f, i});
  return out;
}

std::vector<Coordinate> active_coordinates(const RawNetworkOutput& grad, const std::vector<RasterField>& fields,
                                           tsrkit::Rng& rng, int extra) {
  std::vector<Coordinate> out;
  std::vector<Coordinate> idle;
  for (auto f : fields) {
    const auto d = (grad.*f).data();
    for (std::size_t i = 0; i < d.size(); ++i) (d[i] != 0.0 ? out : idle).push_back({f, i});
  }
  for (int k = 0; k < extra && !idle.empty(); ++k) {
    const int j = rng.uniform_int(0, static_cast<int>(idle.size()) - 1);
    out.push_back(idle[j]);
    idle.erase(idle.begin() + j);
  }
  return out;
}

RawNetworkOutput perturbed(const RawNetworkOutput& exact, tsrkit::Rng& rng) {
  RawNetworkOutput p = exact;
  for (double& v : p.heatmap.data()) v = rng.uniform(0.05, 0.95);
  for (RasterMap* m : {&p.offsets, &p.center2corners, &p.corners2center, &p.spans, &p.row_map, &p.col_map}) {
    for (double& v : m->data()) {
      const double mag = rng.uniform(0.02, 0.2);
      v += rng.bernoulli(0.5) ? mag : -mag;
    }
  }
  return p;
}

}  // namespace oracle
