#pragma once

#include <array>

#include "shadowrl/ddpg.hpp"
#include "shadowrl/env.hpp"

namespace shadowrl {

class Rng;

enum class DecisionVariant { agent_decision, q_compare, agent_only, baseline_only };

// Which control-authority mechanism the combined policy uses. eta thresholds
// the mapped decision component; lambda scales the action-difference penalty
// (agent-decision mode only).
struct DecisionMode {
    DecisionVariant variant = DecisionVariant::q_compare;
    double eta = 0.5;
    double lambda = 0.0;
};

// 3 actor outputs (movement + decision component) in agent-decision mode.
int action_dim_for(DecisionVariant variant);

struct StepDecision {
    std::array<double, 2> executed_action{};
    // First two components always equal executed_action; in agent-decision
    // mode the third carries the raw (noised, clamped) decision component.
    std::array<double, kMaxActionDim> stored_action{};
    bool chose_agent = false;
    std::array<double, kMaxActionDim> agent_proposal{};
    std::array<double, 2> baseline_proposal{};
};

// Training episodes start the learner's authority at a random step; before
// t_train the baseline acts unconditionally and nothing is recorded.
// Evaluation uses t_train = 0.
struct EpisodeSchedule {
    int t_train = 0;
};

// Uniform in {0, ..., horizon-1}.
int sample_t_train(Rng& rng, int horizon);

// One combined-policy decision at step t. The baseline is queried every
// step; the agent (and the noise stream) only once the schedule allows it
// to act, so prefix steps consume no randomness. During warmup the agent's
// proposal is drawn uniformly from the action cube instead of the untrained
// actor, so the critic's first fit sees the whole action space rather than
// a near-constant policy output; the decision rule itself is unchanged.
StepDecision decide(const DecisionMode& mode, const Observation& obs, DdpgAgent& agent,
                    int t, const EpisodeSchedule& schedule, bool explore, Rng& noise_rng,
                    bool warmup = false);

// Eq.-style regularization: agent-decision mode with lambda > 0 subtracts
// lambda * ||a_agent - a_base||. Applied to stored rewards only, never to
// reported evaluation returns.
double shaped_reward(double r, const DecisionMode& mode,
                     const std::array<double, 2>& a_agent,
                     const std::array<double, 2>& a_base);

// Push the transition for step t unless it falls in the pre-t_train prefix.
// The stored action is the executed one (plus the raw decision component in
// agent-decision mode) and the reward is shaped per the mode.
void record_transition(const StepDecision& decision, const DecisionMode& mode,
                       const Observation& obs, double reward, const Observation& next_obs,
                       bool terminal, int t, const EpisodeSchedule& schedule,
                       ReplayBuffer& buffer);

}  // namespace shadowrl
