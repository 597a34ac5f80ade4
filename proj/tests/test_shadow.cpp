#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "shadowrl/baseline.hpp"
#include "shadowrl/rng.hpp"
#include "shadowrl/shadow.hpp"

using namespace shadowrl;

namespace {

DdpgConfig tiny_config(int action_dim) {
    DdpgConfig cfg;
    cfg.hidden_units = 16;
    cfg.batch_size = 4;
    cfg.action_dim = action_dim;
    return cfg;
}

void zero_params(MlpNet& net) {
    for (double& p : net.params()) p = 0.0;
}

// Forces actor output: tanh(atanh(v)) per component (approximately v).
void force_actor(MlpNet& actor, const std::vector<double>& v) {
    zero_params(actor);
    const int last = actor.n_layers() - 1;
    for (std::size_t i = 0; i < v.size(); ++i)
        actor.params()[actor.bias_offset(last) + i] = std::atanh(v[i]);
}

// Wires the critic to compute q = max(sign * action[0], 0).
void force_critic_on_action0(MlpNet& critic, double sign) {
    zero_params(critic);
    const int in = critic.layer_sizes()[0];
    critic.params()[critic.weight_offset(0) + kObsDim] = sign;  // unit 0 <- action[0]
    (void)in;
    critic.params()[critic.weight_offset(1) + 0] = 1.0;  // unit 0 <- unit 0
    critic.params()[critic.weight_offset(2) + 0] = 1.0;  // output <- unit 0
}

Observation obs_at(Point2 agent, Point2 goal) {
    return Observation{agent, goal, {-1, -1}, {-1, -1}};
}

}  // namespace

TEST_CASE("action width is tied to the variant") {
    CHECK(action_dim_for(DecisionVariant::agent_decision) == 3);
    CHECK(action_dim_for(DecisionVariant::q_compare) == 2);
    CHECK(action_dim_for(DecisionVariant::agent_only) == 2);
    CHECK(action_dim_for(DecisionVariant::baseline_only) == 2);

    Rng init(1);
    DdpgAgent narrow(tiny_config(2), init);
    DecisionMode mode{DecisionVariant::agent_decision, 0.5, 0.0};
    Rng noise(2);
    CHECK_THROWS_AS(decide(mode, obs_at({1, 1}, {8, 8}), narrow, 0, {}, false, noise),
                    std::invalid_argument);
}

TEST_CASE("sample_t_train is uniform over the horizon") {
    Rng rng(3);
    for (int i = 0; i < 50; ++i) CHECK(sample_t_train(rng, 1) == 0);

    std::vector<int> counts(100, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++counts[sample_t_train(rng, 100)];
    for (int k = 0; k < 100; ++k) {
        const double f = static_cast<double>(counts[k]) / n;
        CHECK(f > 0.008);
        CHECK(f < 0.012);
    }

    Rng a(9), b(9);
    for (int i = 0; i < 100; ++i) CHECK(sample_t_train(a, 100) == sample_t_train(b, 100));
    CHECK_THROWS_AS(sample_t_train(rng, 0), std::invalid_argument);
}

TEST_CASE("prefix steps follow the baseline and consume no randomness") {
    Rng init(4);
    DdpgAgent agent(tiny_config(2), init);
    const Observation obs = obs_at({1, 1}, {8, 8});
    const EpisodeSchedule schedule{7};

    for (DecisionVariant v : {DecisionVariant::q_compare, DecisionVariant::agent_only,
                              DecisionVariant::baseline_only}) {
        DecisionMode mode{v, 0.5, 0.0};
        Rng noise(42), untouched(42);
        const StepDecision d = decide(mode, obs, agent, 3, schedule, true, noise);
        CHECK_FALSE(d.chose_agent);
        CHECK(d.executed_action == baseline_action(obs));
        CHECK(d.stored_action[0] == d.executed_action[0]);
        CHECK(d.stored_action[1] == d.executed_action[1]);
        CHECK(noise.next_u64() == untouched.next_u64());  // agent never queried
    }

    // Recording skips prefix steps entirely.
    ReplayBuffer buffer(16);
    DecisionMode mode{DecisionVariant::q_compare, 0.5, 0.0};
    Rng noise(5);
    const StepDecision d = decide(mode, obs, agent, 3, schedule, true, noise);
    record_transition(d, mode, obs, -1.0, obs, false, 3, schedule, buffer);
    CHECK(buffer.size() == 0);
    const StepDecision d7 = decide(mode, obs, agent, 7, schedule, false, noise);
    record_transition(d7, mode, obs, -1.0, obs, false, 7, schedule, buffer);
    CHECK(buffer.size() == 1);
}

TEST_CASE("agent-decision thresholding follows the mapped component") {
    Rng init(6);
    DdpgAgent agent(tiny_config(3), init);
    const Observation obs = obs_at({1, 1}, {8, 8});
    Rng noise(7);

    // mapped d = (0.4 + 1) / 2 = 0.7 > eta = 0.5 -> agent acts.
    force_actor(agent.actor(), {0.25, -0.5, 0.4});
    DecisionMode mode{DecisionVariant::agent_decision, 0.5, 0.0};
    StepDecision d = decide(mode, obs, agent, 0, {}, false, noise);
    CHECK(d.chose_agent);
    CHECK(d.executed_action[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(d.executed_action[1] == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(d.stored_action[2] == doctest::Approx(0.4).epsilon(1e-12));

    // mapped d = 0.2 <= eta -> baseline acts, raw component still stored.
    force_actor(agent.actor(), {0.25, -0.5, -0.6});
    d = decide(mode, obs, agent, 0, {}, false, noise);
    CHECK_FALSE(d.chose_agent);
    CHECK(d.executed_action == baseline_action(obs));
    CHECK(d.stored_action[0] == 1.0);
    CHECK(d.stored_action[1] == 1.0);
    CHECK(d.stored_action[2] == doctest::Approx(-0.6).epsilon(1e-12));

    // eta = 1 can never be strictly exceeded, even under huge noise.
    DecisionMode eta1{DecisionVariant::agent_decision, 1.0, 0.0};
    DdpgConfig loud = tiny_config(3);
    loud.noise_std = 100.0;
    Rng init2(8);
    DdpgAgent noisy(loud, init2);
    Rng n2(9);
    for (int i = 0; i < 200; ++i) {
        const StepDecision nd = decide(eta1, obs, noisy, 0, {}, true, n2);
        CHECK_FALSE(nd.chose_agent);
    }

    // eta = 0: the agent acts whenever mapped d > 0 (d > -1).
    DecisionMode eta0{DecisionVariant::agent_decision, 0.0, 0.0};
    force_actor(agent.actor(), {0.0, 0.0, -0.99});
    d = decide(eta0, obs, agent, 0, {}, false, noise);
    CHECK(d.chose_agent);
}

TEST_CASE("q-compare picks the agent only on strictly higher Q") {
    const Observation obs = obs_at({1, 1}, {8, 8});  // baseline -> (1, 1)
    Rng noise(10);

    // q = max(-a0, 0): baseline scores 0, agent (forced a0 < 0) scores > 0.
    Rng init(11);
    DdpgAgent agent(tiny_config(2), init);
    force_actor(agent.actor(), {-0.5, 0.2});
    force_critic_on_action0(agent.critic(), -1.0);
    DecisionMode mode{DecisionVariant::q_compare, 0.5, 0.0};
    StepDecision d = decide(mode, obs, agent, 0, {}, false, noise);
    CHECK(d.chose_agent);
    CHECK(d.stored_action[0] == d.executed_action[0]);
    CHECK(d.executed_action[0] == doctest::Approx(-0.5).epsilon(1e-12));

    // q = max(a0, 0) with both actions <= 0: exact tie -> baseline.
    const Observation left = obs_at({8, 8}, {5.5, 8});  // baseline -> (-1, 0)
    force_actor(agent.actor(), {-0.6, 0.3});
    force_critic_on_action0(agent.critic(), 1.0);
    d = decide(mode, left, agent, 0, {}, false, noise);
    CHECK_FALSE(d.chose_agent);
    CHECK(d.executed_action == baseline_action(left));
    // Rewriting rule: the stored action is the baseline action.
    CHECK(d.stored_action[0] == -1.0);
    CHECK(d.stored_action[1] == 0.0);

    // Baseline strictly better -> baseline.
    force_critic_on_action0(agent.critic(), 1.0);
    force_actor(agent.actor(), {0.3, 0.0});
    d = decide(mode, obs, agent, 0, {}, false, noise);  // qb = 1 > qa = 0.3
    CHECK_FALSE(d.chose_agent);

    // A freshly built agent has a zero value head: every comparison is a
    // tie, and ties go to the baseline.
    Rng init_fresh(18);
    DdpgAgent fresh(tiny_config(2), init_fresh);
    for (int i = 0; i < 50; ++i) {
        const StepDecision df = decide(mode, obs, fresh, 0, {}, true, noise);
        CHECK_FALSE(df.chose_agent);
    }
}

TEST_CASE("chose_agent=true implies a strict Q advantage at decision time") {
    Rng init(12);
    DdpgAgent agent(tiny_config(2), init);
    // Fill the (zero-initialized) critic head so the comparison has both outcomes.
    MlpNet& c = agent.critic();
    for (int i = c.weight_offset(c.n_layers() - 1); i < c.param_count(); ++i)
        c.params()[i] = init.uniform(-0.5, 0.5);
    Rng noise(13);
    Rng scen(14);
    DecisionMode mode{DecisionVariant::q_compare, 0.5, 0.0};
    int agent_steps = 0;
    for (int i = 0; i < 500; ++i) {
        const Observation obs = obs_at({scen.uniform(0, 5), scen.uniform(0, 10)},
                                       {scen.uniform(5.1, 10), scen.uniform(0, 10)});
        const StepDecision d = decide(mode, obs, agent, 0, {}, true, noise);
        const double qa = agent.q_value(obs, d.agent_proposal.data(), 2);
        const double qb = agent.q_value(obs, d.baseline_proposal.data(), 2);
        if (d.chose_agent) {
            ++agent_steps;
            CHECK(qa > qb);
            CHECK(d.executed_action[0] == d.agent_proposal[0]);
        } else {
            CHECK(qa <= qb);
            CHECK(d.executed_action == d.baseline_proposal);
        }
        CHECK(d.stored_action[0] == d.executed_action[0]);
        CHECK(d.stored_action[1] == d.executed_action[1]);
    }
    CHECK(agent_steps > 0);  // a fresh critic should not collapse to one side
    CHECK(agent_steps < 500);
}

TEST_CASE("agent-only and baseline-only are fixed choosers") {
    Rng init(15);
    DdpgAgent agent(tiny_config(2), init);
    const Observation obs = obs_at({2, 3}, {9, 4});
    Rng noise(16);

    DecisionMode ao{DecisionVariant::agent_only, 0.5, 0.0};
    const StepDecision da = decide(ao, obs, agent, 0, {}, false, noise);
    CHECK(da.chose_agent);

    DecisionMode bo{DecisionVariant::baseline_only, 0.5, 0.0};
    Rng untouched_probe(17), untouched_ref(17);
    const StepDecision db = decide(bo, obs, agent, 0, {}, true, untouched_probe);
    CHECK_FALSE(db.chose_agent);
    CHECK(db.executed_action == baseline_action(obs));
    CHECK(untouched_probe.next_u64() == untouched_ref.next_u64());
}

TEST_CASE("warmup proposals come from the action cube, not the actor") {
    Rng init(30);
    DdpgAgent agent(tiny_config(3), init);
    force_actor(agent.actor(), {0.9, 0.9, 0.9});  // actor alone would always say "agent"
    const Observation obs = obs_at({2, 5}, {8, 5});
    DecisionMode ad{DecisionVariant::agent_decision, 0.5, 0.0};

    // The proposal is exactly the next uniform(-1,1) draws from the stream.
    Rng noise(31), mirror(31);
    const StepDecision d = decide(ad, obs, agent, 0, {}, true, noise, true);
    for (int i = 0; i < 3; ++i) CHECK(d.agent_proposal[i] == mirror.uniform(-1.0, 1.0));

    // Over many draws the decision component straddles the threshold and the
    // action components fill the cube; a noised constant actor can do neither.
    int chose = 0;
    double lo = 1.0, hi = -1.0;
    Rng stream(32);
    for (int k = 0; k < 2000; ++k) {
        const StepDecision dk = decide(ad, obs, agent, 0, {}, true, stream, true);
        chose += dk.chose_agent ? 1 : 0;
        lo = std::min(lo, dk.agent_proposal[0]);
        hi = std::max(hi, dk.agent_proposal[0]);
    }
    CHECK(chose > 800);
    CHECK(chose < 1200);
    CHECK(lo < -0.9);
    CHECK(hi > 0.9);

    // warmup=false keeps the actor path bit-for-bit.
    Rng na(33), nb(33);
    const StepDecision off = decide(ad, obs, agent, 0, {}, true, na, false);
    const auto ref = agent.select_action(obs, true, nb);
    for (int i = 0; i < 3; ++i) CHECK(off.agent_proposal[i] == ref[i]);

    // Prefix steps still consume no randomness even in warmup.
    Rng untouched_probe(34), untouched_ref(34);
    const StepDecision dp = decide(ad, obs, agent, 1, {5}, true, untouched_probe, true);
    CHECK_FALSE(dp.chose_agent);
    CHECK(untouched_probe.next_u64() == untouched_ref.next_u64());
}

TEST_CASE("shaped_reward applies only in agent-decision mode") {
    DecisionMode ad{DecisionVariant::agent_decision, 0.5, 0.1};
    CHECK(shaped_reward(-1.0, ad, {1, 0}, {0, 0}) == doctest::Approx(-1.1).epsilon(1e-12));

    DecisionMode ad0{DecisionVariant::agent_decision, 0.5, 0.0};
    CHECK(shaped_reward(-1.0, ad0, {1, 0}, {0, 0}) == -1.0);

    DecisionMode ad_big{DecisionVariant::agent_decision, 0.5, 1000.0};
    CHECK(shaped_reward(2.5, ad_big, {0.3, -0.4}, {0.3, -0.4}) == 2.5);

    DecisionMode qc{DecisionVariant::q_compare, 0.5, 5.0};
    CHECK(shaped_reward(-1.0, qc, {1, 0}, {0, 0}) == -1.0);
}

TEST_CASE("recorded transitions carry the executed action and shaped reward") {
    Rng init(18);
    DdpgAgent agent(tiny_config(3), init);
    const Observation obs = obs_at({1, 1}, {8, 8});
    const Observation next = obs_at({2, 2}, {8, 8});
    Rng noise(19);

    // Baseline fallback in agent-decision mode with regularization.
    force_actor(agent.actor(), {0.25, -0.5, -0.6});  // mapped 0.2: baseline acts
    DecisionMode mode{DecisionVariant::agent_decision, 0.5, 0.1};
    const StepDecision d = decide(mode, obs, agent, 0, {}, false, noise);
    ReplayBuffer buffer(8);
    record_transition(d, mode, obs, -1.0, next, false, 0, {}, buffer);
    REQUIRE(buffer.size() == 1);
    const Transition& tr = buffer.at(0);
    CHECK(tr.action[0] == 1.0);  // baseline executed and stored
    CHECK(tr.action[1] == 1.0);
    CHECK(tr.action[2] == doctest::Approx(-0.6).epsilon(1e-12));
    const double penalty = 0.1 * std::hypot(0.25 - 1.0, -0.5 - 1.0);
    CHECK(tr.reward == doctest::Approx(-1.0 - penalty).epsilon(1e-12));
    CHECK(tr.state == obs.flat());
    CHECK(tr.next_state == next.flat());
    CHECK_FALSE(tr.terminal);

    // Terminal flag passes through untouched.
    record_transition(d, mode, obs, 500.0, next, true, 0, {}, buffer);
    CHECK(buffer.at(1).terminal);
}
