#include "shadowrl/shadow.hpp"

#include <cmath>
#include <stdexcept>

#include "shadowrl/baseline.hpp"
#include "shadowrl/rng.hpp"

namespace shadowrl {

int action_dim_for(DecisionVariant variant) {
    return variant == DecisionVariant::agent_decision ? 3 : 2;
}

int sample_t_train(Rng& rng, int horizon) {
    if (horizon < 1) throw std::invalid_argument("sample_t_train: horizon must be >= 1");
    return static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(horizon)));
}

StepDecision decide(const DecisionMode& mode, const Observation& obs, DdpgAgent& agent,
                    int t, const EpisodeSchedule& schedule, bool explore, Rng& noise_rng,
                    bool warmup) {
    if (agent.action_dim() != action_dim_for(mode.variant))
        throw std::invalid_argument("decide: agent action width does not match the mode");

    StepDecision d;
    d.baseline_proposal = baseline_action(obs);

    const auto take_baseline = [&] {
        d.chose_agent = false;
        d.executed_action = d.baseline_proposal;
        d.stored_action[0] = d.baseline_proposal[0];
        d.stored_action[1] = d.baseline_proposal[1];
    };

    if (t < schedule.t_train || mode.variant == DecisionVariant::baseline_only) {
        take_baseline();
        return d;
    }

    if (warmup && explore) {
        for (int i = 0; i < agent.action_dim(); ++i)
            d.agent_proposal[i] = noise_rng.uniform(-1.0, 1.0);
    } else {
        d.agent_proposal = agent.select_action(obs, explore, noise_rng);
    }

    switch (mode.variant) {
        case DecisionVariant::agent_only:
            d.chose_agent = true;
            d.executed_action = {d.agent_proposal[0], d.agent_proposal[1]};
            d.stored_action = d.agent_proposal;
            break;
        case DecisionVariant::q_compare: {
            const double qa = agent.q_value(obs, d.agent_proposal.data(), 2);
            const double qb = agent.q_value(obs, d.baseline_proposal.data(), 2);
            if (qa > qb) {  // strict: ties go to the baseline
                d.chose_agent = true;
                d.executed_action = {d.agent_proposal[0], d.agent_proposal[1]};
                d.stored_action = d.agent_proposal;
            } else {
                take_baseline();
            }
            break;
        }
        case DecisionVariant::agent_decision: {
            const double mapped = (d.agent_proposal[2] + 1.0) / 2.0;  // [-1,1] -> [0,1]
            if (mapped > mode.eta) {
                d.chose_agent = true;
                d.executed_action = {d.agent_proposal[0], d.agent_proposal[1]};
            } else {
                take_baseline();
            }
            d.stored_action[0] = d.executed_action[0];
            d.stored_action[1] = d.executed_action[1];
            d.stored_action[2] = d.agent_proposal[2];
            break;
        }
        case DecisionVariant::baseline_only:
            break;  // unreachable, handled above
    }
    return d;
}

double shaped_reward(double r, const DecisionMode& mode,
                     const std::array<double, 2>& a_agent,
                     const std::array<double, 2>& a_base) {
    if (mode.variant != DecisionVariant::agent_decision || mode.lambda <= 0.0) return r;
    const double dx = a_agent[0] - a_base[0];
    const double dy = a_agent[1] - a_base[1];
    return r - mode.lambda * std::sqrt(dx * dx + dy * dy);
}

void record_transition(const StepDecision& decision, const DecisionMode& mode,
                       const Observation& obs, double reward, const Observation& next_obs,
                       bool terminal, int t, const EpisodeSchedule& schedule,
                       ReplayBuffer& buffer) {
    if (t < schedule.t_train) return;
    Transition tr;
    tr.state = obs.flat();
    tr.action = decision.stored_action;
    tr.reward = shaped_reward(reward, mode,
                              {decision.agent_proposal[0], decision.agent_proposal[1]},
                              decision.baseline_proposal);
    tr.next_state = next_obs.flat();
    tr.terminal = terminal;
    buffer.push(tr);
}

}  // namespace shadowrl
