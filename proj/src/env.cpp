#include "shadowrl/env.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "shadowrl/rng.hpp"

namespace shadowrl {

double reward_sparse(bool reached, const EnvConfig& cfg) {
    return reached ? cfg.goal_bonus : -cfg.step_penalty;
}

double reward_dense(bool reached, bool collided, double dist_prev, double dist_now,
                    const EnvConfig& cfg) {
    return (reached ? cfg.goal_bonus : 0.0) +
           cfg.distance_coeff * (dist_prev - dist_now) -
           (collided ? cfg.collision_penalty : 0.0) - cfg.step_penalty;
}

Scenario sample_scenario(Rng& rng, double obstacle_probability) {
    Scenario s;
    s.start.x = rng.uniform() * 5.0;         // [0, 5)
    s.start.y = rng.uniform() * 10.0;
    s.goal.x = 10.0 - rng.uniform() * 5.0;   // (5, 10]
    s.goal.y = rng.uniform() * 10.0;
    if (rng.uniform() < obstacle_probability) {
        const double cx = rng.uniform(3.0, 7.0);
        const double cy = rng.uniform(1.0, 9.0);
        const double theta = rng.uniform(0.0, std::numbers::pi);
        const double len = rng.uniform(2.0, 5.0);
        const double hx = 0.5 * len * std::cos(theta);
        const double hy = 0.5 * len * std::sin(theta);
        const Point2 p = clamp_to_arena({cx - hx, cy - hy}, kArenaLo, kArenaHi);
        const Point2 q = clamp_to_arena({cx + hx, cy + hy}, kArenaLo, kArenaHi);
        s.obstacle = make_segment(p, q);
    }
    return s;
}

namespace {

void append_double(std::string& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

}  // namespace

std::string scenario_record(const Scenario& s) {
    std::string line;
    append_double(line, s.start.x);
    line += ' ';
    append_double(line, s.start.y);
    line += ' ';
    append_double(line, s.goal.x);
    line += ' ';
    append_double(line, s.goal.y);
    line += s.obstacle ? " 1 " : " 0 ";
    const Point2 p = s.obstacle ? s.obstacle->p : Point2{-1.0, -1.0};
    const Point2 q = s.obstacle ? s.obstacle->q : Point2{-1.0, -1.0};
    append_double(line, p.x);
    line += ' ';
    append_double(line, p.y);
    line += ' ';
    append_double(line, q.x);
    line += ' ';
    append_double(line, q.y);
    return line;
}

Scenario parse_scenario_record(const std::string& line) {
    std::istringstream in(line);
    double f[4];
    int has_obstacle = -1;
    double o[4];
    if (!(in >> f[0] >> f[1] >> f[2] >> f[3] >> has_obstacle >> o[0] >> o[1] >> o[2] >> o[3]))
        throw std::invalid_argument("malformed scenario record: " + line);
    std::string rest;
    if (in >> rest) throw std::invalid_argument("trailing fields in scenario record: " + line);
    if (has_obstacle != 0 && has_obstacle != 1)
        throw std::invalid_argument("bad has_obstacle flag in scenario record: " + line);
    Scenario s;
    s.start = {f[0], f[1]};
    s.goal = {f[2], f[3]};
    if (has_obstacle) s.obstacle = make_segment({o[0], o[1]}, {o[2], o[3]});
    return s;
}

Observation ReachAvoidEnv::observation() const {
    Observation obs;
    obs.agent = pos_;
    obs.goal = scn_.goal;
    obs.obs_p = scn_.obstacle ? scn_.obstacle->p : Point2{-1.0, -1.0};
    obs.obs_q = scn_.obstacle ? scn_.obstacle->q : Point2{-1.0, -1.0};
    return obs;
}

Observation ReachAvoidEnv::reset(const Scenario& scenario) {
    scn_ = scenario;
    pos_ = scenario.start;
    t_ = 0;
    done_ = false;
    return observation();
}

StepResult ReachAvoidEnv::step(const std::array<double, 2>& action) {
    if (done_) throw std::logic_error("step called on a finished episode");
    for (double a : action)
        if (!(a >= -1.0 && a <= 1.0))
            throw std::invalid_argument("action component outside [-1,1]");

    const double dist_prev = distance(pos_, scn_.goal);
    const Point2 candidate = clamp_to_arena({pos_.x + action[0], pos_.y + action[1]},
                                            kArenaLo, kArenaHi);
    StepResult r;
    // Swept check from the old position, so a 1-unit move cannot tunnel
    // through a thin obstacle. A zero-length move cannot collide.
    if (scn_.obstacle && !(candidate == pos_) &&
        segments_intersect(Segment2{pos_, candidate}, *scn_.obstacle)) {
        r.collided = true;  // position retained
    } else {
        pos_ = candidate;
    }

    const double dist_now = distance(pos_, scn_.goal);
    r.terminated = dist_now <= cfg_.epsilon;
    ++t_;
    r.truncated = (t_ >= cfg_.horizon) && !r.terminated;
    done_ = r.terminated || r.truncated;

    r.reward = cfg_.reward_mode == RewardMode::sparse
                   ? reward_sparse(r.terminated, cfg_)
                   : reward_dense(r.terminated, r.collided, dist_prev, dist_now, cfg_);
    r.observation = observation();
    return r;
}

}  // namespace shadowrl
