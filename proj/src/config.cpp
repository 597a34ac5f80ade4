#include "shadowrl/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string_view>

namespace shadowrl {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

double to_double(std::string_view v, const std::string& key) {
    const std::string tmp(v);
    char* end = nullptr;
    const double x = std::strtod(tmp.c_str(), &end);
    if (end != tmp.c_str() + tmp.size() || tmp.empty())
        fail("invalid number '" + tmp + "' for " + key);
    return x;
}

long long to_int(std::string_view v, const std::string& key) {
    long long x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size())
        fail("invalid integer '" + std::string(v) + "' for " + key);
    return x;
}

std::uint64_t to_u64(std::string_view v, const std::string& key) {
    std::uint64_t x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size())
        fail("invalid seed '" + std::string(v) + "' for " + key);
    return x;
}

std::string fmt(double x) {
    char buf[32];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    (void)ec;
    return std::string(buf, p);
}

const char* reward_mode_name(RewardMode m) {
    return m == RewardMode::sparse ? "sparse" : "dense";
}

RewardMode parse_reward_mode(std::string_view v) {
    if (v == "sparse") return RewardMode::sparse;
    if (v == "dense") return RewardMode::dense;
    fail("reward_mode must be 'sparse' or 'dense', got '" + std::string(v) + "'");
}

const char* variant_name(DecisionVariant v) {
    switch (v) {
        case DecisionVariant::agent_decision: return "agent_decision";
        case DecisionVariant::q_compare: return "q_compare";
        case DecisionVariant::agent_only: return "agent_only";
        case DecisionVariant::baseline_only: return "baseline_only";
    }
    fail("unreachable decision variant");
}

DecisionVariant parse_variant(std::string_view v) {
    if (v == "agent_decision") return DecisionVariant::agent_decision;
    if (v == "q_compare") return DecisionVariant::q_compare;
    if (v == "agent_only") return DecisionVariant::agent_only;
    if (v == "baseline_only") return DecisionVariant::baseline_only;
    fail("mode must be one of agent_decision|q_compare|agent_only|baseline_only, got '" +
         std::string(v) + "'");
}

std::vector<std::uint64_t> parse_seeds(std::string_view v) {
    std::vector<std::uint64_t> out;
    std::size_t pos = 0;
    while (pos <= v.size()) {
        const std::size_t comma = v.find(',', pos);
        const std::string_view item =
            trim(v.substr(pos, comma == std::string_view::npos ? comma : comma - pos));
        if (item.empty()) fail("empty entry in seeds list");
        out.push_back(to_u64(item, "seeds"));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) fail("seeds list is empty");
    return out;
}

void set_key(ExperimentConfig& c, const std::string& section, const std::string& key,
             std::string_view value) {
    const std::string where = "[" + section + "] " + key;
    if (section == "env") {
        auto& e = c.env;
        if (key == "epsilon") e.epsilon = to_double(value, where);
        else if (key == "horizon") e.horizon = static_cast<int>(to_int(value, where));
        else if (key == "reward_mode") e.reward_mode = parse_reward_mode(value);
        else if (key == "obstacle_probability") e.obstacle_probability = to_double(value, where);
        else if (key == "goal_bonus") e.goal_bonus = to_double(value, where);
        else if (key == "step_penalty") e.step_penalty = to_double(value, where);
        else if (key == "collision_penalty") e.collision_penalty = to_double(value, where);
        else if (key == "distance_coeff") e.distance_coeff = to_double(value, where);
        else fail("unknown key '" + key + "' in section [env]");
    } else if (section == "agent") {
        auto& a = c.agent;
        if (key == "gamma") a.gamma = to_double(value, where);
        else if (key == "tau") a.tau = to_double(value, where);
        else if (key == "actor_lr") a.actor_lr = to_double(value, where);
        else if (key == "critic_lr") a.critic_lr = to_double(value, where);
        else if (key == "batch_size") a.batch_size = static_cast<int>(to_int(value, where));
        else if (key == "buffer_capacity")
            a.buffer_capacity = static_cast<std::size_t>(to_int(value, where));
        else if (key == "noise_std") a.noise_std = to_double(value, where);
        else if (key == "warmup_steps") a.warmup_steps = static_cast<int>(to_int(value, where));
        else if (key == "hidden_units") a.hidden_units = static_cast<int>(to_int(value, where));
        else fail("unknown key '" + key + "' in section [agent]");
    } else if (section == "shadow") {
        auto& s = c.shadow;
        if (key == "mode") s.variant = parse_variant(value);
        else if (key == "eta") s.eta = to_double(value, where);
        else if (key == "lambda") s.lambda = to_double(value, where);
        else fail("unknown key '" + key + "' in section [shadow]");
    } else if (section == "harness") {
        if (key == "total_env_steps") c.total_env_steps = to_int(value, where);
        else if (key == "eval_every") c.eval_every = to_int(value, where);
        else if (key == "n_eval_scenarios")
            c.n_eval_scenarios = static_cast<int>(to_int(value, where));
        else if (key == "seeds") c.seeds = parse_seeds(value);
        else if (key == "testset_seed") c.testset_seed = to_u64(value, where);
        else if (key == "heatmap_resolution")
            c.heatmap_resolution = static_cast<int>(to_int(value, where));
        else fail("unknown key '" + key + "' in section [harness]");
    } else {
        fail("unknown section [" + section + "]");
    }
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                fail("line " + std::to_string(lineno) + ": malformed section header '" +
                     std::string(line) + "'");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            fail("line " + std::to_string(lineno) + ": expected 'key = value', got '" +
                 std::string(line) + "'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty()) fail("line " + std::to_string(lineno) + ": missing key");
        if (section.empty())
            fail("line " + std::to_string(lineno) + ": key '" + key + "' before any section");
        set_key(cfg, section, key, value);
    }
    validate_config(cfg);
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos)
        fail("override '" + assignment + "' is not of the form section.key=value");
    const std::string path(trim(std::string_view(assignment).substr(0, eq)));
    const std::string_view value = trim(std::string_view(assignment).substr(eq + 1));
    const std::size_t dot = path.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == path.size())
        fail("override key '" + path + "' must be section.key");
    set_key(cfg, path.substr(0, dot), path.substr(dot + 1), value);
}

void validate_config(ExperimentConfig& cfg) {
    const auto& e = cfg.env;
    if (!(e.epsilon > 0)) fail("env.epsilon must be > 0");
    if (e.horizon < 1) fail("env.horizon must be >= 1");
    if (!(e.obstacle_probability >= 0 && e.obstacle_probability <= 1))
        fail("env.obstacle_probability must lie in [0,1]");

    auto& a = cfg.agent;
    if (!(a.gamma >= 0 && a.gamma < 1)) fail("agent.gamma must lie in [0,1)");
    if (!(a.tau >= 0 && a.tau <= 1)) fail("agent.tau must lie in [0,1]");
    if (!(a.actor_lr > 0) || !(a.critic_lr > 0)) fail("learning rates must be > 0");
    if (a.batch_size < 1) fail("agent.batch_size must be >= 1");
    if (a.buffer_capacity < static_cast<std::size_t>(a.batch_size))
        fail("agent.buffer_capacity must be >= batch_size");
    if (!(a.noise_std >= 0)) fail("agent.noise_std must be >= 0");
    if (a.warmup_steps < 0) fail("agent.warmup_steps must be >= 0");
    if (a.hidden_units < 1) fail("agent.hidden_units must be >= 1");

    const auto& s = cfg.shadow;
    if (!(s.eta >= 0 && s.eta <= 1)) fail("shadow.eta must lie in [0,1]");
    if (!(s.lambda >= 0)) fail("shadow.lambda must be >= 0");

    if (cfg.total_env_steps < 1) fail("harness.total_env_steps must be >= 1");
    if (cfg.eval_every < 1) fail("harness.eval_every must be >= 1");
    if (cfg.total_env_steps % cfg.eval_every != 0)
        fail("harness.eval_every must divide total_env_steps");
    if (cfg.n_eval_scenarios < 1) fail("harness.n_eval_scenarios must be >= 1");
    if (cfg.seeds.empty()) fail("harness.seeds must be non-empty");
    if (cfg.heatmap_resolution < 1) fail("harness.heatmap_resolution must be >= 1");

    a.action_dim = action_dim_for(s.variant);
}

std::string config_echo(const ExperimentConfig& cfg) {
    std::ostringstream out;
    const auto& e = cfg.env;
    out << "[env]\n";
    out << "epsilon = " << fmt(e.epsilon) << "\n";
    out << "horizon = " << e.horizon << "\n";
    out << "reward_mode = " << reward_mode_name(e.reward_mode) << "\n";
    out << "obstacle_probability = " << fmt(e.obstacle_probability) << "\n";
    out << "goal_bonus = " << fmt(e.goal_bonus) << "\n";
    out << "step_penalty = " << fmt(e.step_penalty) << "\n";
    out << "collision_penalty = " << fmt(e.collision_penalty) << "\n";
    out << "distance_coeff = " << fmt(e.distance_coeff) << "\n";

    const auto& a = cfg.agent;
    out << "\n[agent]\n";
    out << "gamma = " << fmt(a.gamma) << "\n";
    out << "tau = " << fmt(a.tau) << "\n";
    out << "actor_lr = " << fmt(a.actor_lr) << "\n";
    out << "critic_lr = " << fmt(a.critic_lr) << "\n";
    out << "batch_size = " << a.batch_size << "\n";
    out << "buffer_capacity = " << a.buffer_capacity << "\n";
    out << "noise_std = " << fmt(a.noise_std) << "\n";
    out << "warmup_steps = " << a.warmup_steps << "\n";
    out << "hidden_units = " << a.hidden_units << "\n";

    out << "\n[shadow]\n";
    out << "mode = " << variant_name(cfg.shadow.variant) << "\n";
    out << "eta = " << fmt(cfg.shadow.eta) << "\n";
    out << "lambda = " << fmt(cfg.shadow.lambda) << "\n";

    out << "\n[harness]\n";
    out << "total_env_steps = " << cfg.total_env_steps << "\n";
    out << "eval_every = " << cfg.eval_every << "\n";
    out << "n_eval_scenarios = " << cfg.n_eval_scenarios << "\n";
    out << "seeds = ";
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
        if (i) out << ",";
        out << cfg.seeds[i];
    }
    out << "\n";
    out << "testset_seed = " << cfg.testset_seed << "\n";
    out << "heatmap_resolution = " << cfg.heatmap_resolution << "\n";
    return out.str();
}

}  // namespace shadowrl
