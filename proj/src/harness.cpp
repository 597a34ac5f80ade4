#include "shadowrl/harness.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "shadowrl/baseline.hpp"
#include "shadowrl/rng.hpp"

namespace shadowrl {
namespace {

constexpr char kCkptMagic[] = "SHADOWRL_CKPT 1\n";

void append_num(std::string& out, double x) {
    char buf[32];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    (void)ec;
    out.append(buf, p);
}

}  // namespace

std::vector<Scenario> build_test_set(std::uint64_t seed, int n, double obstacle_probability) {
    if (n < 1) throw std::invalid_argument("test set size must be >= 1");
    Rng rng(mix_seed(seed, stream::testset));
    std::vector<Scenario> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back(sample_scenario(rng, obstacle_probability));
    return out;
}

std::string testset_to_text(const std::vector<Scenario>& set) {
    std::string out;
    for (const Scenario& s : set) {
        out += scenario_record(s);
        out += '\n';
    }
    return out;
}

std::vector<Scenario> parse_testset_text(const std::string& text) {
    std::vector<Scenario> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(parse_scenario_record(line));
    }
    if (out.empty()) throw std::runtime_error("test set is empty");
    return out;
}

EvalReport evaluate(DdpgAgent& agent, const DecisionMode& mode, const EnvConfig& env_cfg,
                    const std::vector<Scenario>& test_set) {
    if (test_set.empty()) throw std::invalid_argument("evaluate needs a non-empty test set");
    ReachAvoidEnv env(env_cfg);
    Rng unused_noise(0);  // greedy rollouts never draw from it
    const EpisodeSchedule schedule{0};

    double sum_return = 0.0;
    long long successes = 0, agent_steps = 0, total_steps = 0, total_length = 0;
    for (const Scenario& sc : test_set) {
        Observation obs = env.reset(sc);
        bool success = false;
        while (!env.done()) {
            const StepDecision d =
                decide(mode, obs, agent, env.t(), schedule, false, unused_noise);
            const StepResult res = env.step(d.executed_action);
            sum_return += res.reward;
            if (d.chose_agent) ++agent_steps;
            ++total_steps;
            obs = res.observation;
            success = res.terminated;
        }
        successes += success ? 1 : 0;
        total_length += env.t();
    }

    EvalReport rep;
    const double n = static_cast<double>(test_set.size());
    rep.mean_return = sum_return / n;
    rep.success_rate = static_cast<double>(successes) / n;
    rep.agent_action_fraction =
        total_steps ? static_cast<double>(agent_steps) / static_cast<double>(total_steps) : 0.0;
    rep.mean_episode_length = static_cast<double>(total_length) / n;
    return rep;
}

TrainOutcome train_one(const ExperimentConfig& cfg_in, std::uint64_t seed,
                       const std::vector<Scenario>& test_set, const EvalCallback& on_eval) {
    ExperimentConfig cfg = cfg_in;
    validate_config(cfg);

    Rng init_rng(mix_seed(seed, stream::net_init));
    Rng scenario_rng(mix_seed(seed, stream::scenarios));
    Rng noise_rng(mix_seed(seed, stream::noise));
    Rng ttrain_rng(mix_seed(seed, stream::t_train));
    Rng replay_rng(mix_seed(seed, stream::replay));

    TrainOutcome out;
    out.agent = std::make_unique<DdpgAgent>(cfg.agent, init_rng);
    DdpgAgent& agent = *out.agent;
    ReplayBuffer buffer(cfg.agent.buffer_capacity);
    ReachAvoidEnv env(cfg.env);

    const auto eval_row = [&](long long steps) {
        EvalReport r = evaluate(agent, cfg.shadow, cfg.env, test_set);
        r.env_steps = steps;
        r.seed = seed;
        out.rows.push_back(r);
        if (on_eval) on_eval(r);
    };
    eval_row(0);

    const bool learns = cfg.shadow.variant != DecisionVariant::baseline_only;
    long long steps = 0;
    while (steps < cfg.total_env_steps) {
        const Scenario sc = sample_scenario(scenario_rng, cfg.env.obstacle_probability);
        Observation obs = env.reset(sc);
        const EpisodeSchedule schedule{sample_t_train(ttrain_rng, cfg.env.horizon)};
        while (!env.done() && steps < cfg.total_env_steps) {
            const int t = env.t();
            const StepDecision d = decide(cfg.shadow, obs, agent, t, schedule, true, noise_rng,
                                          steps < cfg.agent.warmup_steps);
            const StepResult res = env.step(d.executed_action);
            record_transition(d, cfg.shadow, obs, res.reward, res.observation, res.terminated,
                              t, schedule, buffer);
            obs = res.observation;
            ++steps;
            if (learns && steps > cfg.agent.warmup_steps &&
                buffer.size() >= static_cast<std::size_t>(cfg.agent.batch_size))
                agent.update_from(buffer, replay_rng);
            if (steps % cfg.eval_every == 0) eval_row(steps);
        }
    }
    return out;
}

std::string metrics_csv(const std::vector<EvalReport>& rows) {
    std::string out =
        "env_steps,seed,mean_return,success_rate,agent_action_fraction,mean_episode_length\n";
    for (const EvalReport& r : rows) {
        out += std::to_string(r.env_steps);
        out += ',';
        out += std::to_string(r.seed);
        out += ',';
        append_num(out, r.mean_return);
        out += ',';
        append_num(out, r.success_rate);
        out += ',';
        append_num(out, r.agent_action_fraction);
        out += ',';
        append_num(out, r.mean_episode_length);
        out += '\n';
    }
    return out;
}

std::string aggregate_csv(const std::vector<std::vector<EvalReport>>& per_seed) {
    if (per_seed.empty()) throw std::invalid_argument("no metric series to aggregate");
    const std::size_t n_rows = per_seed.front().size();
    for (const auto& series : per_seed)
        if (series.size() != n_rows)
            throw std::logic_error("metric series disagree on eval points");

    std::string out = "env_steps,mean_return_mean,mean_return_std\n";
    const double n = static_cast<double>(per_seed.size());
    for (std::size_t i = 0; i < n_rows; ++i) {
        const long long steps = per_seed.front()[i].env_steps;
        double mean = 0.0;
        for (const auto& series : per_seed) {
            if (series[i].env_steps != steps)
                throw std::logic_error("metric series disagree on eval points");
            mean += series[i].mean_return;
        }
        mean /= n;
        double var = 0.0;
        for (const auto& series : per_seed) {
            const double d = series[i].mean_return - mean;
            var += d * d;
        }
        const double stddev = per_seed.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
        out += std::to_string(steps);
        out += ',';
        append_num(out, mean);
        out += ',';
        append_num(out, stddev);
        out += '\n';
    }
    return out;
}

void save_checkpoint(std::ostream& out, const ExperimentConfig& cfg, const DdpgAgent& agent) {
    out.write(kCkptMagic, static_cast<std::streamsize>(std::strlen(kCkptMagic)));
    const std::string echo = config_echo(cfg);
    const std::uint64_t len = echo.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(echo.data(), static_cast<std::streamsize>(echo.size()));
    agent.save(out);
    if (!out) throw std::runtime_error("failed to write checkpoint");
}

Checkpoint load_checkpoint(std::istream& in) {
    char magic[sizeof kCkptMagic - 1];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kCkptMagic, sizeof magic) != 0)
        throw std::runtime_error("not a checkpoint file");
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    if (!in || len > (1u << 20)) throw std::runtime_error("corrupt checkpoint header");
    std::string echo(len, '\0');
    in.read(echo.data(), static_cast<std::streamsize>(len));
    if (!in) throw std::runtime_error("truncated checkpoint config");

    Checkpoint ckpt;
    ckpt.config = parse_config_text(echo);
    Rng scratch_init(0);  // weights are overwritten by the stored blocks
    ckpt.agent = std::make_unique<DdpgAgent>(ckpt.config.agent, scratch_init);
    ckpt.agent->load_networks(in);
    return ckpt;
}

std::string heatmap_text(DdpgAgent& agent, const Scenario& scenario, int resolution) {
    if (resolution < 1) throw std::invalid_argument("heatmap resolution must be >= 1");
    if (agent.action_dim() != 2)
        throw std::invalid_argument("heatmap needs a 2-component action policy");

    std::string out = std::to_string(resolution);
    out += ' ';
    out += scenario_record(scenario);
    out += '\n';

    Observation obs;
    obs.goal = scenario.goal;
    obs.obs_p = scenario.obstacle ? scenario.obstacle->p : Point2{-1.0, -1.0};
    obs.obs_q = scenario.obstacle ? scenario.obstacle->q : Point2{-1.0, -1.0};

    Rng unused_noise(0);
    const double cell = (kArenaHi - kArenaLo) / resolution;
    for (int j = 0; j < resolution; ++j) {
        obs.agent.y = kArenaLo + (j + 0.5) * cell;
        for (int i = 0; i < resolution; ++i) {
            obs.agent.x = kArenaLo + (i + 0.5) * cell;
            const auto proposal = agent.select_action(obs, false, unused_noise);
            const double qa = agent.q_value(obs, proposal.data(), 2);
            const auto base = baseline_action(obs);
            const double qb = agent.q_value(obs, base.data(), 2);
            if (i) out += ' ';
            if (std::abs(qb) < 1e-9) out += "nan";
            else append_num(out, qa / qb);
        }
        out += '\n';
    }
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace shadowrl
