#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shadowrl/baseline.hpp"
#include "shadowrl/config.hpp"
#include "shadowrl/harness.hpp"
#include "shadowrl/rng.hpp"

namespace fs = std::filesystem;
using namespace shadowrl;

namespace {

std::string fmt(double x) {
    char buf[32];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    (void)ec;
    return std::string(buf, p);
}

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> sets;
    std::string testset_path;
};

ExperimentConfig resolve_config(const CommonArgs& args) {
    ExperimentConfig cfg =
        args.config_path.empty() ? ExperimentConfig{} : load_config_file(args.config_path);
    for (const std::string& s : args.sets) apply_override(cfg, s);
    validate_config(cfg);
    return cfg;
}

std::vector<Scenario> resolve_test_set(const ExperimentConfig& cfg, const std::string& path) {
    if (!path.empty()) return parse_testset_text(read_text_file(path));
    return build_test_set(cfg.testset_seed, cfg.n_eval_scenarios, cfg.env.obstacle_probability);
}

Checkpoint load_checkpoint_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
    return load_checkpoint(in);
}

void print_report(const EvalReport& r, std::ostream& out) {
    out << "env_steps=" << r.env_steps << " mean_return=" << fmt(r.mean_return)
        << " success_rate=" << fmt(r.success_rate)
        << " agent_action_fraction=" << fmt(r.agent_action_fraction)
        << " mean_episode_length=" << fmt(r.mean_episode_length) << "\n";
}

int run_train(const CommonArgs& args, int seeds_n, const std::string& out_dir) {
    ExperimentConfig cfg = resolve_config(args);
    if (seeds_n > 0) {
        cfg.seeds.clear();
        for (int i = 0; i < seeds_n; ++i) cfg.seeds.push_back(static_cast<std::uint64_t>(i));
    }
    validate_config(cfg);

    fs::create_directories(out_dir);
    const auto test_set = resolve_test_set(cfg, args.testset_path);
    write_text_file(out_dir + "/config.cfg", config_echo(cfg));
    write_text_file(out_dir + "/testset.txt", testset_to_text(test_set));

    std::vector<std::vector<EvalReport>> per_seed;
    for (std::uint64_t seed : cfg.seeds) {
        const auto progress = [&](const EvalReport& r) {
            std::cout << "seed " << seed << " @ " << r.env_steps << "/" << cfg.total_env_steps
                      << ": ";
            print_report(r, std::cout);
            std::cout.flush();
        };
        TrainOutcome run = train_one(cfg, seed, test_set, progress);

        const std::string tag = std::to_string(seed);
        write_text_file(out_dir + "/metrics_seed" + tag + ".csv", metrics_csv(run.rows));
        std::ofstream ck(out_dir + "/seed" + tag + ".ckpt", std::ios::binary);
        if (!ck) throw std::runtime_error("cannot write checkpoint for seed " + tag);
        save_checkpoint(ck, cfg, *run.agent);
        per_seed.push_back(std::move(run.rows));
    }
    write_text_file(out_dir + "/aggregate.csv", aggregate_csv(per_seed));
    std::cout << "wrote " << per_seed.size() << " runs to " << out_dir << "\n";
    return 0;
}

int run_eval(const CommonArgs& args, const std::string& ckpt_path, const std::string& out_dir) {
    Checkpoint ckpt = load_checkpoint_file(ckpt_path);
    for (const std::string& s : args.sets) apply_override(ckpt.config, s);
    validate_config(ckpt.config);
    const auto test_set = resolve_test_set(ckpt.config, args.testset_path);

    EvalReport r = evaluate(*ckpt.agent, ckpt.config.shadow, ckpt.config.env, test_set);
    r.env_steps = ckpt.config.total_env_steps;
    print_report(r, std::cout);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_text_file(out_dir + "/eval.csv", metrics_csv({r}));
    }
    return 0;
}

int run_heatmap(const CommonArgs& args, const std::string& ckpt_path,
                const std::string& scenario_text, int index, int resolution,
                const std::string& out_dir) {
    Checkpoint ckpt = load_checkpoint_file(ckpt_path);
    for (const std::string& s : args.sets) apply_override(ckpt.config, s);
    validate_config(ckpt.config);
    if (ckpt.config.shadow.variant != DecisionVariant::q_compare)
        throw std::runtime_error("heatmap requires a q_compare checkpoint");

    Scenario scenario;
    if (!scenario_text.empty()) {
        scenario = parse_scenario_record(scenario_text);
    } else {
        const auto set = resolve_test_set(ckpt.config, args.testset_path);
        if (index < 0 || static_cast<std::size_t>(index) >= set.size())
            throw std::runtime_error("scenario index " + std::to_string(index) +
                                     " outside the test set (size " +
                                     std::to_string(set.size()) + ")");
        scenario = set[static_cast<std::size_t>(index)];
    }
    const int res = resolution > 0 ? resolution : ckpt.config.heatmap_resolution;

    fs::create_directories(out_dir);
    const std::string path = out_dir + "/heatmap.txt";
    write_text_file(path, heatmap_text(*ckpt.agent, scenario, res));
    std::cout << "wrote " << res << "x" << res << " grid to " << path << "\n";
    return 0;
}

int run_make_testset(const CommonArgs& args, const std::string& out_path) {
    ExperimentConfig cfg = resolve_config(args);
    const auto set =
        build_test_set(cfg.testset_seed, cfg.n_eval_scenarios, cfg.env.obstacle_probability);
    write_text_file(out_path, testset_to_text(set));
    std::cout << "wrote " << set.size() << " scenarios to " << out_path << "\n";
    return 0;
}

// A policy argument is either a decision-mode name (baseline only; the other
// modes need trained networks) or a checkpoint path.
struct ResolvedPolicy {
    DecisionMode mode;
    std::unique_ptr<DdpgAgent> agent;
    ExperimentConfig config;
    bool from_checkpoint = false;
};

ResolvedPolicy resolve_policy(const std::string& spec) {
    ResolvedPolicy out;
    if (spec == "baseline_only") {
        out.mode = DecisionMode{DecisionVariant::baseline_only, 0.5, 0.0};
        DdpgConfig acfg;
        acfg.hidden_units = 8;  // placeholder nets; never queried
        Rng init(0);
        out.agent = std::make_unique<DdpgAgent>(acfg, init);
        return out;
    }
    if (spec == "q_compare" || spec == "agent_decision" || spec == "agent_only")
        throw ConfigError("policy '" + spec + "' needs a checkpoint; pass a .ckpt path");
    Checkpoint ckpt = load_checkpoint_file(spec);
    out.mode = ckpt.config.shadow;
    out.agent = std::move(ckpt.agent);
    out.config = ckpt.config;
    out.from_checkpoint = true;
    return out;
}

std::vector<double> per_scenario_returns(DdpgAgent& agent, const DecisionMode& mode,
                                         const EnvConfig& env_cfg,
                                         const std::vector<Scenario>& set) {
    ReachAvoidEnv env(env_cfg);
    Rng unused_noise(0);
    const EpisodeSchedule schedule{0};
    std::vector<double> rets;
    rets.reserve(set.size());
    for (const Scenario& sc : set) {
        Observation obs = env.reset(sc);
        double total = 0.0;
        while (!env.done()) {
            const StepDecision d =
                decide(mode, obs, agent, env.t(), schedule, false, unused_noise);
            const StepResult res = env.step(d.executed_action);
            total += res.reward;
            obs = res.observation;
        }
        rets.push_back(total);
    }
    return rets;
}

int run_compare(const CommonArgs& args, const std::string& spec_a, const std::string& spec_b,
                const std::string& out_dir) {
    ResolvedPolicy a = resolve_policy(spec_a);
    ResolvedPolicy b = resolve_policy(spec_b);

    // One shared environment/test set; an explicit --config wins, otherwise
    // a checkpoint's frozen config defines the benchmark.
    ExperimentConfig cfg;
    if (!args.config_path.empty()) cfg = load_config_file(args.config_path);
    else if (b.from_checkpoint) cfg = b.config;
    else if (a.from_checkpoint) cfg = a.config;
    for (const std::string& s : args.sets) apply_override(cfg, s);
    validate_config(cfg);
    const auto set = resolve_test_set(cfg, args.testset_path);

    const auto ra = per_scenario_returns(*a.agent, a.mode, cfg.env, set);
    const auto rb = per_scenario_returns(*b.agent, b.mode, cfg.env, set);

    std::string table = "scenario,return_a,return_b,delta\n";
    double mean_delta = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        const double delta = rb[i] - ra[i];
        mean_delta += delta;
        table += std::to_string(i) + ',' + fmt(ra[i]) + ',' + fmt(rb[i]) + ',' + fmt(delta);
        table += '\n';
    }
    mean_delta /= static_cast<double>(set.size());
    std::cout << table;
    std::cout << "mean_delta = " << fmt(mean_delta) << "\n";
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_text_file(out_dir + "/compare.csv", table);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shadow-mode reach-avoid benchmark"};
    app.require_subcommand(1);

    CommonArgs common;
    int seeds_n = 0;
    int index = 0, resolution = 0;
    std::string out_dir = "out", eval_out = ".", heatmap_out = ".", compare_out;
    std::string ckpt_path, scenario_text, testset_out = "testset.txt";
    std::string policy_a, policy_b;

    CLI::App* train = app.add_subcommand("train", "train all seeds, write metrics + checkpoints");
    train->add_option("--config", common.config_path, "experiment config file")->required();
    train->add_option("--set", common.sets, "override, section.key=value");
    train->add_option("--seeds", seeds_n, "train seeds 0..N-1 instead of the config list");
    train->add_option("--out", out_dir, "output directory");
    train->add_option("--testset", common.testset_path, "frozen test-set file");

    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test set");
    eval->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
    eval->add_option("--set", common.sets, "override, section.key=value");
    eval->add_option("--out", eval_out, "directory for eval.csv");
    eval->add_option("--testset", common.testset_path, "frozen test-set file");

    CLI::App* heatmap = app.add_subcommand("heatmap", "export the decision-criterion grid");
    heatmap->add_option("--ckpt", ckpt_path, "q_compare checkpoint")->required();
    heatmap->add_option("--scenario", scenario_text, "scenario record string");
    heatmap->add_option("--index", index, "scenario index into the test set");
    heatmap->add_option("--resolution", resolution, "grid resolution override");
    heatmap->add_option("--set", common.sets, "override, section.key=value");
    heatmap->add_option("--out", heatmap_out, "output directory");
    heatmap->add_option("--testset", common.testset_path, "frozen test-set file");

    CLI::App* mkset = app.add_subcommand("make-testset", "freeze an evaluation test set");
    mkset->add_option("--config", common.config_path, "experiment config file");
    mkset->add_option("--set", common.sets, "override, section.key=value");
    mkset->add_option("--out", testset_out, "output file");

    CLI::App* compare = app.add_subcommand("compare",
                                           "paired per-scenario returns of two policies");
    compare->add_option("policy_a", policy_a, "'baseline_only' or a checkpoint path")
        ->required();
    compare->add_option("policy_b", policy_b, "'baseline_only' or a checkpoint path")
        ->required();
    compare->add_option("--config", common.config_path, "benchmark config file");
    compare->add_option("--set", common.sets, "override, section.key=value");
    compare->add_option("--testset", common.testset_path, "frozen test-set file");
    compare->add_option("--out", compare_out, "directory for compare.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (train->parsed()) return run_train(common, seeds_n, out_dir);
        if (eval->parsed()) return run_eval(common, ckpt_path, eval_out);
        if (heatmap->parsed())
            return run_heatmap(common, ckpt_path, scenario_text, index, resolution, heatmap_out);
        if (mkset->parsed()) return run_make_testset(common, testset_out);
        if (compare->parsed()) return run_compare(common, policy_a, policy_b, compare_out);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
