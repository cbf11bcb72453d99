#pragma once

#include <string>

#include "arg/data.hpp"
#include "arg/model.hpp"

namespace arg {

/// Standalone SVG 1.1 document: one rectangle per actor box colored by
/// predicted action class, an action label at each box top-left, and the
/// predicted activity caption at the canvas top.
std::string render_svg(const ClipSample& clip, const Prediction& pred,
                       const std::vector<std::string>& action_names,
                       const std::vector<std::string>& activity_names);

}  // namespace arg
