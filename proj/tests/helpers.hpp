// Shared helpers for the test suite.
#pragma once

#include "minitwistor/nodal_curve.hpp"
#include "minitwistor/surface_config.hpp"

namespace mtwtest {

// Standard member construction: smooth one node of the reducible seed curve,
// keeping the rest, then pass to the map model.
inline mtw::ParamCurve make_member(const mtw::PointConfig& config,
                                   double step = 0.5, int omit = 0) {
  auto seed_curve = mtw::reducible_seed(config);
  std::vector<int> keep;
  for (size_t i = 0; i < seed_curve.nodes.size(); ++i)
    if (static_cast<int>(i) != omit) keep.push_back(static_cast<int>(i));
  auto smoothed = mtw::smooth_one_node(seed_curve, keep, config, step);
  return mtw::parametrize(smoothed, config);
}

}  // namespace mtwtest
