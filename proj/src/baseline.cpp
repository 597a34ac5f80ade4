#include "shadowrl/baseline.hpp"

#include <algorithm>

namespace shadowrl {

std::array<double, 2> baseline_action(const Observation& obs) {
    return {std::clamp(obs.goal.x - obs.agent.x, -1.0, 1.0),
            std::clamp(obs.goal.y - obs.agent.y, -1.0, 1.0)};
}

}  // namespace shadowrl
