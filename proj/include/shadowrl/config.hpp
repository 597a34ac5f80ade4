#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "shadowrl/ddpg.hpp"
#include "shadowrl/env.hpp"
#include "shadowrl/shadow.hpp"

namespace shadowrl {

// Raised for malformed config text, unknown keys, and invariant violations.
// The CLI maps this to a usage error (exit status 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ExperimentConfig {
    EnvConfig env;
    DdpgConfig agent;   // action_dim is derived from shadow.variant, not a key
    DecisionMode shadow;

    long long total_env_steps = 200000;
    long long eval_every = 10000;
    int n_eval_scenarios = 100;
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
    std::uint64_t testset_seed = 7;
    int heatmap_resolution = 100;
};

// Sectioned `key = value` text: [env], [agent], [shadow], [harness].
// Blank lines and lines starting with '#' are ignored. Unknown sections or
// keys raise ConfigError; the result is validated before it is returned.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// Applies one `section.key=value` override in place (validate afterwards).
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

// Throws ConfigError when any invariant fails; also refreshes the derived
// agent.action_dim so callers can mutate fields directly.
void validate_config(ExperimentConfig& cfg);

// Canonical serialization: fixed section/key order, shortest round-trip
// number formatting. parse_config_text(config_echo(c)) reproduces c exactly.
std::string config_echo(const ExperimentConfig& cfg);

}  // namespace shadowrl
