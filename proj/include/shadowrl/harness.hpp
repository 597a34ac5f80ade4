#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "shadowrl/config.hpp"
#include "shadowrl/ddpg.hpp"
#include "shadowrl/env.hpp"
#include "shadowrl/shadow.hpp"

namespace shadowrl {

// Stream ids feeding mix_seed so every consumer of randomness inside a run
// has its own independent, reproducible sequence.
namespace stream {
inline constexpr std::uint64_t net_init = 0;
inline constexpr std::uint64_t scenarios = 1;
inline constexpr std::uint64_t noise = 2;
inline constexpr std::uint64_t t_train = 3;
inline constexpr std::uint64_t replay = 4;
inline constexpr std::uint64_t testset = 100;
}  // namespace stream

struct EvalReport {
    long long env_steps = 0;
    std::uint64_t seed = 0;
    double mean_return = 0.0;           // raw environment return, never shaped
    double success_rate = 0.0;
    double agent_action_fraction = 0.0;
    double mean_episode_length = 0.0;
};

// Frozen evaluation scenarios; one scenario_record per line in the file form.
std::vector<Scenario> build_test_set(std::uint64_t seed, int n,
                                     double obstacle_probability = 0.95);
std::string testset_to_text(const std::vector<Scenario>& set);
std::vector<Scenario> parse_testset_text(const std::string& text);

// Greedy rollout of the combined policy on every scenario: exploration off,
// t_train = 0. Touches only the agent's forward scratch, never its params.
EvalReport evaluate(DdpgAgent& agent, const DecisionMode& mode, const EnvConfig& env_cfg,
                    const std::vector<Scenario>& test_set);

struct TrainOutcome {
    std::vector<EvalReport> rows;  // env_steps = 0, eval_every, ..., total
    std::unique_ptr<DdpgAgent> agent;
};

// One fully deterministic training run (all randomness derived from seed).
// on_eval, when set, sees each EvalReport as it is produced.
using EvalCallback = std::function<void(const EvalReport&)>;
TrainOutcome train_one(const ExperimentConfig& cfg, std::uint64_t seed,
                       const std::vector<Scenario>& test_set,
                       const EvalCallback& on_eval = {});

// header: env_steps,seed,mean_return,success_rate,agent_action_fraction,
//         mean_episode_length
std::string metrics_csv(const std::vector<EvalReport>& rows);
// header: env_steps,mean_return_mean,mean_return_std (std over seeds, n-1)
std::string aggregate_csv(const std::vector<std::vector<EvalReport>>& per_seed);

// Checkpoint = magic line, config echo, then the four network blocks.
void save_checkpoint(std::ostream& out, const ExperimentConfig& cfg, const DdpgAgent& agent);
struct Checkpoint {
    ExperimentConfig config;
    std::unique_ptr<DdpgAgent> agent;
};
Checkpoint load_checkpoint(std::istream& in);

// Decision-criterion grid Q(s, a^a) / Q(s, a^b) with the agent placed at each
// cell center of a resolution x resolution grid over the arena; row j holds
// y = (j + 0.5) * 10 / resolution. First line: `resolution scenario_record`.
// Cells with |Q(s, a^b)| < 1e-9 print the sentinel `nan`.
std::string heatmap_text(DdpgAgent& agent, const Scenario& scenario, int resolution);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace shadowrl
