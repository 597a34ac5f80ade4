#pragma once

#include <array>

#include "shadowrl/env.hpp"

namespace shadowrl {

// Scripted expert: componentwise clamp(goal - agent, -1, 1). When a delta is
// shorter than the maximum step the exact delta is used, so the policy lands
// on the goal coordinate instead of oscillating around it. Stateless.
std::array<double, 2> baseline_action(const Observation& obs);

}  // namespace shadowrl
