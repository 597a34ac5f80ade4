#pragma once

#include <array>
#include <optional>
#include <string>

#include "shadowrl/geometry.hpp"

namespace shadowrl {

class Rng;

inline constexpr int kObsDim = 8;
inline constexpr double kArenaLo = 0.0;
inline constexpr double kArenaHi = 10.0;

// One random problem instance: start on the left half, goal on the right
// half, and (usually) a blocking obstacle segment.
struct Scenario {
    Point2 start;
    Point2 goal;
    std::optional<Segment2> obstacle;
};

// Flattened policy input. Obstacle endpoints use the (-1,-1) sentinel when
// the scenario has none; the sentinel lies outside the arena, so it is
// unambiguous to the networks.
struct Observation {
    Point2 agent, goal, obs_p, obs_q;

    std::array<double, kObsDim> flat() const {
        return {agent.x, agent.y, goal.x, goal.y, obs_p.x, obs_p.y, obs_q.x, obs_q.y};
    }
    friend bool operator==(const Observation&, const Observation&) = default;
};

enum class RewardMode { sparse, dense };

struct EnvConfig {
    double epsilon = 0.5;
    int horizon = 100;
    RewardMode reward_mode = RewardMode::sparse;
    double obstacle_probability = 0.95;
    double goal_bonus = 500.0;
    double step_penalty = 1.0;
    double collision_penalty = 2.0;
    double distance_coeff = 2.0;
};

struct StepResult {
    Observation observation;
    double reward = 0.0;
    bool terminated = false;  // goal reached (wins over truncation)
    bool truncated = false;   // horizon hit without reaching the goal
    bool collided = false;
};

double reward_sparse(bool reached, const EnvConfig& cfg);
double reward_dense(bool reached, bool collided, double dist_prev, double dist_now,
                    const EnvConfig& cfg);

// start uniform in [0,5) x [0,10]; goal uniform in (5,10] x [0,10]; with
// probability cfg-given p an obstacle segment: center uniform in [3,7] x
// [1,9], orientation uniform in [0,pi), length uniform in [2,5], endpoints
// clamped to the arena. Consumes a fixed number of draws per branch, so
// sequences are stable across runs.
Scenario sample_scenario(Rng& rng, double obstacle_probability = 0.95);

// One-line record `start_x start_y goal_x goal_y has_obstacle p_x p_y q_x q_y`
// (sentinel -1 for the obstacle fields when absent). Round-trips bit-exactly.
std::string scenario_record(const Scenario& s);
Scenario parse_scenario_record(const std::string& line);

class ReachAvoidEnv {
public:
    explicit ReachAvoidEnv(EnvConfig cfg) : cfg_(cfg) {}

    Observation reset(const Scenario& scenario);

    // Throws std::invalid_argument if the action leaves [-1,1]^2 and
    // std::logic_error when the episode is already over.
    StepResult step(const std::array<double, 2>& action);

    bool done() const { return done_; }
    int t() const { return t_; }
    Point2 agent() const { return pos_; }
    const Scenario& scenario() const { return scn_; }
    const EnvConfig& config() const { return cfg_; }
    Observation observation() const;

private:
    EnvConfig cfg_;
    Scenario scn_;
    Point2 pos_;
    int t_ = 0;
    bool done_ = true;
};

}  // namespace shadowrl
