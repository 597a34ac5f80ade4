#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <sstream>
#include <string>
#include <vector>

#include "shadowrl/harness.hpp"
#include "shadowrl/rng.hpp"

using namespace shadowrl;

namespace {

ExperimentConfig tiny_experiment() {
    ExperimentConfig cfg;
    cfg.agent.hidden_units = 16;
    cfg.agent.batch_size = 16;
    cfg.agent.buffer_capacity = 2000;
    cfg.agent.warmup_steps = 50;
    cfg.total_env_steps = 600;
    cfg.eval_every = 200;
    cfg.n_eval_scenarios = 5;
    validate_config(cfg);
    return cfg;
}

void zero_params(MlpNet& net) {
    for (double& p : net.params()) p = 0.0;
}

bool same_params(const MlpNet& a, const MlpNet& b) {
    return a.param_count() == b.param_count() &&
           std::memcmp(a.params().data(), b.params().data(),
                       a.param_count() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("test sets are frozen by seed and match the obstacle rate") {
    const auto set = build_test_set(7, 100);
    REQUIRE(set.size() == 100);
    CHECK(testset_to_text(set) == testset_to_text(build_test_set(7, 100)));
    CHECK(testset_to_text(set) != testset_to_text(build_test_set(8, 100)));

    int obstacles = 0;
    for (const Scenario& s : set) {
        CHECK(s.start.x < 5.0);
        CHECK(s.goal.x > 5.0);
        if (s.obstacle) ++obstacles;
    }
    // 99% binomial band around p=0.95, n=100.
    CHECK(obstacles >= 89);
    CHECK(obstacles <= 100);

    const auto parsed = parse_testset_text(testset_to_text(set));
    REQUIRE(parsed.size() == set.size());
    for (std::size_t i = 0; i < set.size(); ++i)
        CHECK(scenario_record(parsed[i]) == scenario_record(set[i]));

    CHECK_THROWS(build_test_set(7, 0));
    CHECK_THROWS(parse_testset_text(""));
}

TEST_CASE("baseline-only evaluation solves every obstacle-free scenario") {
    const auto set = build_test_set(7, 100);
    std::vector<Scenario> free_subset;
    for (const Scenario& s : set)
        if (!s.obstacle) free_subset.push_back(s);
    REQUIRE(!free_subset.empty());

    DdpgConfig acfg;
    acfg.hidden_units = 8;
    Rng init(0);
    DdpgAgent agent(acfg, init);
    const DecisionMode mode{DecisionVariant::baseline_only, 0.5, 0.0};
    const EnvConfig env_cfg;

    const EvalReport on_free = evaluate(agent, mode, env_cfg, free_subset);
    CHECK(on_free.success_rate == 1.0);
    CHECK(on_free.agent_action_fraction == 0.0);
    CHECK(on_free.mean_return > 0.0);  // goal bonus dominates step penalties

    const EvalReport on_full = evaluate(agent, mode, env_cfg, set);
    CHECK(on_full.success_rate < 1.0);  // some obstacles block the straight path
    CHECK(on_full.agent_action_fraction == 0.0);
}

TEST_CASE("evaluation reports raw returns and never mutates the learner") {
    const auto set = build_test_set(3, 10);
    DdpgConfig acfg;
    acfg.hidden_units = 16;
    acfg.action_dim = 3;
    Rng init(5);
    DdpgAgent agent(acfg, init);
    const EnvConfig env_cfg;

    std::vector<double> before = agent.actor().params();
    std::vector<double> critic_before = agent.critic().params();
    const DecisionMode lam0{DecisionVariant::agent_decision, 0.5, 0.0};
    const DecisionMode lam_big{DecisionVariant::agent_decision, 0.5, 1000.0};
    const EvalReport a = evaluate(agent, lam0, env_cfg, set);
    const EvalReport b = evaluate(agent, lam_big, env_cfg, set);
    CHECK(a.mean_return == b.mean_return);  // shaping never leaks into reports
    CHECK(a.success_rate == b.success_rate);
    CHECK(agent.actor().params() == before);
    CHECK(agent.critic().params() == critic_before);

    CHECK(a.success_rate >= 0.0);
    CHECK(a.success_rate <= 1.0);
    CHECK(a.agent_action_fraction >= 0.0);
    CHECK(a.agent_action_fraction <= 1.0);
    CHECK(a.mean_episode_length >= 1.0);
}

TEST_CASE("training runs are deterministic and evaluate on schedule") {
    ExperimentConfig cfg = tiny_experiment();
    const auto set = build_test_set(cfg.testset_seed, cfg.n_eval_scenarios);

    TrainOutcome first = train_one(cfg, 1, set);
    REQUIRE(first.rows.size() == 4);
    for (std::size_t i = 0; i < first.rows.size(); ++i) {
        CHECK(first.rows[i].env_steps == static_cast<long long>(i) * cfg.eval_every);
        CHECK(first.rows[i].seed == 1);
    }

    TrainOutcome second = train_one(cfg, 1, set);
    CHECK(metrics_csv(first.rows) == metrics_csv(second.rows));
    CHECK(same_params(first.agent->actor(), second.agent->actor()));
    CHECK(same_params(first.agent->critic(), second.agent->critic()));

    TrainOutcome other_seed = train_one(cfg, 2, set);
    CHECK(metrics_csv(first.rows) != metrics_csv(other_seed.rows));
}

TEST_CASE("ablation modes pin the agent action fraction") {
    ExperimentConfig cfg = tiny_experiment();
    cfg.total_env_steps = 400;
    cfg.eval_every = 200;
    const auto set = build_test_set(cfg.testset_seed, cfg.n_eval_scenarios);

    cfg.shadow.variant = DecisionVariant::baseline_only;
    validate_config(cfg);
    TrainOutcome base = train_one(cfg, 0, set);
    for (const EvalReport& r : base.rows) CHECK(r.agent_action_fraction == 0.0);

    cfg.shadow.variant = DecisionVariant::agent_only;
    validate_config(cfg);
    TrainOutcome agent = train_one(cfg, 0, set);
    for (const EvalReport& r : agent.rows) CHECK(r.agent_action_fraction == 1.0);
}

TEST_CASE("metric CSVs carry the pinned headers and values") {
    std::vector<EvalReport> rows(2);
    rows[0] = {0, 3, -12.5, 0.25, 0.5, 40.0};
    rows[1] = {200, 3, 100.0, 1.0, 0.0, 10.5};
    const std::string csv = metrics_csv(rows);
    CHECK(csv ==
          "env_steps,seed,mean_return,success_rate,agent_action_fraction,mean_episode_length\n"
          "0,3,-12.5,0.25,0.5,40\n"
          "200,3,100,1,0,10.5\n");

    std::vector<EvalReport> seed_b(2);
    seed_b[0] = {0, 4, -10.5, 0.25, 0.5, 40.0};
    seed_b[1] = {200, 4, 90.0, 1.0, 0.0, 10.5};
    const std::string agg = aggregate_csv({rows, seed_b});
    // means: -11.5 and 95 (std columns checked only via the header).
    std::istringstream in(agg);
    std::string line;
    std::getline(in, line);
    CHECK(line == "env_steps,mean_return_mean,mean_return_std");
    std::getline(in, line);
    CHECK(line.substr(0, 8) == "0,-11.5,");
    std::getline(in, line);
    CHECK(line.substr(0, 6) == "200,95");

    std::vector<EvalReport> misaligned(1);
    misaligned[0] = {100, 5, 0.0, 0.0, 0.0, 0.0};
    CHECK_THROWS(aggregate_csv({rows, misaligned}));
}

TEST_CASE("checkpoints round-trip config and all four networks") {
    ExperimentConfig cfg = tiny_experiment();
    cfg.total_env_steps = 200;
    cfg.eval_every = 200;
    cfg.shadow.variant = DecisionVariant::agent_decision;
    cfg.shadow.lambda = 0.1;
    validate_config(cfg);
    const auto set = build_test_set(cfg.testset_seed, cfg.n_eval_scenarios);
    TrainOutcome run = train_one(cfg, 9, set);

    std::stringstream buf;
    save_checkpoint(buf, cfg, *run.agent);
    Checkpoint back = load_checkpoint(buf);
    CHECK(config_echo(back.config) == config_echo(cfg));
    CHECK(same_params(back.agent->actor(), run.agent->actor()));
    CHECK(same_params(back.agent->critic(), run.agent->critic()));
    CHECK(same_params(back.agent->actor_target(), run.agent->actor_target()));
    CHECK(same_params(back.agent->critic_target(), run.agent->critic_target()));

    const EvalReport before = evaluate(*run.agent, cfg.shadow, cfg.env, set);
    const EvalReport after = evaluate(*back.agent, back.config.shadow, back.config.env, set);
    CHECK(before.mean_return == after.mean_return);
    CHECK(before.agent_action_fraction == after.agent_action_fraction);

    std::stringstream junk("SHADOWRL_CKPT 2\nxx");
    CHECK_THROWS(load_checkpoint(junk));
    std::stringstream truncated(buf.str().substr(0, 40));
    CHECK_THROWS(load_checkpoint(truncated));
}

TEST_CASE("heatmaps have the pinned shape, ratios, and sentinel") {
    DdpgConfig acfg;
    acfg.hidden_units = 8;
    Rng init(2);
    DdpgAgent agent(acfg, init);

    Scenario sc;
    sc.start = {2.5, 5.0};
    sc.goal = {9.5, 5.0};

    // Critic q = action[0] exactly; actor forced to a constant.
    zero_params(agent.critic());
    agent.critic().params()[agent.critic().weight_offset(0) + kObsDim] = 1.0;
    agent.critic().params()[agent.critic().weight_offset(1)] = 1.0;
    agent.critic().params()[agent.critic().weight_offset(2)] = 1.0;
    zero_params(agent.actor());
    const int last = agent.actor().n_layers() - 1;
    agent.actor().params()[agent.actor().bias_offset(last)] = std::atanh(0.5);

    const std::string text = heatmap_text(agent, sc, 2);
    std::istringstream in(text);
    std::string header;
    std::getline(in, header);
    CHECK(header == "2 " + scenario_record(sc));
    int values = 0;
    double v;
    while (in >> v) {
        CHECK(v == doctest::Approx(0.5).epsilon(1e-12));  // qa=0.5, baseline qb=1
        ++values;
    }
    CHECK(values == 4);

    // Zeroed critic: every denominator vanishes -> sentinel everywhere.
    zero_params(agent.critic());
    const std::string flat = heatmap_text(agent, sc, 3);
    std::istringstream in2(flat);
    std::getline(in2, header);
    std::string tok;
    int sentinels = 0;
    while (in2 >> tok) {
        CHECK(tok == "nan");
        ++sentinels;
    }
    CHECK(sentinels == 9);

    DdpgConfig wide = acfg;
    wide.action_dim = 3;
    Rng init3(3);
    DdpgAgent three(wide, init3);
    CHECK_THROWS(heatmap_text(three, sc, 2));
    CHECK_THROWS(heatmap_text(agent, sc, 0));
}
