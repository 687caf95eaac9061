// veritas: batch toolkit for scoring agentic-search rollouts.
//
//   validate   check corpus lines against the block grammar
//   score      full pipeline: metrics, judge, rewards, summaries
//   judge      render prompts and collect judge verdicts only
//   reward     emit per-rollout reward records only
//   agree      agreement statistics between two (or more) label files
//   export     labeled-pair training data with a train/eval split
//   report     rebuild summaries from previous score outputs

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

#include "veritas/cli.hpp"
#include "veritas/version.hpp"

using veritas::cli::RunConfig;

namespace {

int load_config_file(const std::string& path, RunConfig& config) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot open config file " << path << "\n";
        return veritas::cli::kExitConfig;
    }
    nlohmann::json file;
    try {
        in >> file;
        veritas::cli::apply_config_json(file, config);
    } catch (const std::exception& e) {
        std::cerr << "error: bad config file: " << e.what() << "\n";
        return veritas::cli::kExitConfig;
    }
    return veritas::cli::kExitOk;
}

// Shared flags for the corpus-consuming subcommands. Flags override config
// file values, which override defaults.
struct CommonFlags {
    std::string config_file;
    std::vector<std::string> inputs;
    std::string output_dir;
    std::string weights_preset;
    std::string endpoint;
    std::string model;
    double temperature = -1;
    int max_attempts = 0;
    int judge_parallelism = 0;
    long timeout_ms = 0;
    bool mock = false;
    std::string aggregation;
    std::string match_scope;
    std::string em_normalization;
    double train_fraction = -1;
    long long seed = -1;
    int parallelism = 0;
    std::string teacher;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool with_split) {
    cmd->add_option("input", flags.inputs, "input corpus JSONL file(s)")
        ->required();
    cmd->add_option("--config", flags.config_file,
                    "JSON config file (flags override it)");
    cmd->add_option("-o,--out", flags.output_dir, "output directory");
    cmd->add_option("--weights", flags.weights_preset,
                    "preset: veritas|em-only|em-info-think|em-think-answer, "
                    "or em,info_think,think_answer[,format_bonus]");
    cmd->add_flag("--mock", flags.mock,
                  "use the deterministic mock judge (hermetic)");
    cmd->add_option("--endpoint", flags.endpoint,
                    "judge HTTP endpoint (implies a live judge)");
    cmd->add_option("--model", flags.model, "judge model name");
    cmd->add_option("--temperature", flags.temperature, "judge temperature");
    cmd->add_option("--max-attempts", flags.max_attempts,
                    "judge retry budget per pair");
    cmd->add_option("--judge-parallelism", flags.judge_parallelism,
                    "in-flight judge requests");
    cmd->add_option("--timeout-ms", flags.timeout_ms, "judge request timeout");
    cmd->add_option("--aggregation", flags.aggregation, "mean|min|all");
    cmd->add_option("--match-scope", flags.match_scope,
                    "last_think|full_trajectory");
    cmd->add_option("--em-normalization", flags.em_normalization,
                    "standard|identity");
    cmd->add_option("-j,--parallelism", flags.parallelism,
                    "worker threads for batch scoring");
    if (with_split) {
        cmd->add_option("--train-fraction", flags.train_fraction,
                        "train split fraction in (0,1)");
        cmd->add_option("--seed", flags.seed, "split seed");
        cmd->add_option("--teacher", flags.teacher,
                        "teacher tag recorded in labeled examples");
    }
}

bool given(const CLI::App* cmd, const std::string& name) {
    const CLI::Option* option = cmd->get_option_no_throw(name);
    return option != nullptr && option->count() > 0;
}

int resolve_config(const CLI::App* cmd, const CommonFlags& flags,
                   RunConfig& config) {
    if (!flags.config_file.empty()) {
        if (int rc = load_config_file(flags.config_file, config); rc != 0) {
            return rc;
        }
    }
    if (!flags.inputs.empty()) config.inputs = flags.inputs;
    if (given(cmd, "--out")) config.output_dir = flags.output_dir;
    if (given(cmd, "--weights")) {
        auto preset = veritas::reward::weights_preset(flags.weights_preset);
        if (preset) {
            config.weights = *preset;
        } else {
            double em, it, ta, bonus = 0;
            const int n = std::sscanf(flags.weights_preset.c_str(),
                                      "%lf,%lf,%lf,%lf", &em, &it, &ta, &bonus);
            if (n < 3) {
                std::cerr << "error: unknown weights: " << flags.weights_preset
                          << "\n";
                return veritas::cli::kExitConfig;
            }
            config.weights = veritas::reward::RewardWeights{em, it, ta, bonus};
        }
    }
    if (given(cmd, "--mock")) config.mock = true;
    if (given(cmd, "--endpoint")) {
        config.judge.endpoint = flags.endpoint;
        config.mock = false;
    }
    if (given(cmd, "--model")) config.judge.model = flags.model;
    if (given(cmd, "--temperature")) config.judge.temperature = flags.temperature;
    if (given(cmd, "--max-attempts")) config.judge.max_attempts = flags.max_attempts;
    if (given(cmd, "--judge-parallelism")) {
        config.judge.parallelism = flags.judge_parallelism;
    }
    if (given(cmd, "--timeout-ms")) {
        config.judge.timeout = std::chrono::milliseconds(flags.timeout_ms);
    }
    if (given(cmd, "--aggregation")) {
        auto policy =
            veritas::metrics::aggregate_policy_from_name(flags.aggregation);
        if (!policy) {
            std::cerr << "error: unknown aggregation: " << flags.aggregation
                      << "\n";
            return veritas::cli::kExitConfig;
        }
        config.aggregation = *policy;
    }
    if (given(cmd, "--match-scope")) {
        if (flags.match_scope == "last_think") {
            config.match_scope = veritas::metrics::MatchScope::LastThink;
        } else if (flags.match_scope == "full_trajectory") {
            config.match_scope = veritas::metrics::MatchScope::FullTrajectory;
        } else {
            std::cerr << "error: unknown match scope: " << flags.match_scope
                      << "\n";
            return veritas::cli::kExitConfig;
        }
    }
    if (given(cmd, "--em-normalization")) {
        if (flags.em_normalization == "standard") {
            config.em_normalization = veritas::reward::EmNormalization::Standard;
        } else if (flags.em_normalization == "identity") {
            config.em_normalization = veritas::reward::EmNormalization::Identity;
        } else {
            std::cerr << "error: unknown normalization: "
                      << flags.em_normalization << "\n";
            return veritas::cli::kExitConfig;
        }
    }
    if (given(cmd, "--parallelism")) config.parallelism = flags.parallelism;
    if (given(cmd, "--train-fraction")) {
        config.split.train_fraction = flags.train_fraction;
    }
    if (given(cmd, "--seed")) config.split.seed = static_cast<std::uint64_t>(flags.seed);
    if (given(cmd, "--teacher")) config.teacher = flags.teacher;

    if (!config.mock && config.judge.endpoint.empty()) {
        std::cerr << "error: choose --mock or a judge --endpoint\n";
        return veritas::cli::kExitConfig;
    }
    return veritas::cli::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"faithfulness metrics, process rewards, and judge pipelines "
                 "for agentic-search rollouts"};
    app.set_version_flag("--version", std::string(veritas::kToolVersion));
    app.require_subcommand(1);

    CommonFlags validate_flags, score_flags, judge_flags, reward_flags,
        export_flags;

    auto* validate = app.add_subcommand(
        "validate", "parse and grammar-check every corpus line");
    validate->add_option("input", validate_flags.inputs, "corpus JSONL file(s)")
        ->required();

    auto* score = app.add_subcommand(
        "score", "metrics + judge + rewards + per-dataset summaries");
    add_common_flags(score, score_flags, false);

    auto* judge_cmd =
        app.add_subcommand("judge", "collect judge verdicts for every pair");
    add_common_flags(judge_cmd, judge_flags, false);

    auto* reward_cmd =
        app.add_subcommand("reward", "emit per-rollout reward records");
    add_common_flags(reward_cmd, reward_flags, false);

    auto* export_cmd = app.add_subcommand(
        "export", "labeled training pairs with a deterministic split");
    add_common_flags(export_cmd, export_flags, true);

    veritas::cli::AgreeArgs agree_args;
    std::string agree_dimension;
    auto* agree =
        app.add_subcommand("agree", "agreement statistics between label files");
    agree->add_option("files", agree_args.inputs, "two or more label JSONL files")
        ->required();
    agree->add_option("--dimension", agree_dimension,
                      "restrict to think-search|info-think|think-answer");
    agree->add_flag("--matrix-csv", agree_args.matrix_csv,
                    "emit a pairwise kappa matrix as CSV");

    veritas::cli::ReportArgs report_args;
    std::string report_aggregation;
    auto* report_cmd = app.add_subcommand(
        "report", "rebuild summaries from score outputs");
    report_cmd->add_option("--rewards", report_args.rewards_file,
                           "rewards.jsonl from a score run")
        ->required();
    report_cmd->add_option("--scores", report_args.scores_file,
                           "scores.jsonl from a score run")
        ->required();
    report_cmd->add_option("--verdicts", report_args.verdicts_file,
                           "verdicts.jsonl (counts unparseable as 0)");
    report_cmd->add_option("-o,--out", report_args.output_dir,
                           "output directory")
        ->required();
    report_cmd->add_option("--aggregation", report_aggregation, "mean|min|all");

    CLI11_PARSE(app, argc, argv);

    if (validate->parsed()) {
        RunConfig config;
        config.inputs = validate_flags.inputs;
        return veritas::cli::cmd_validate(config, std::cout, std::cerr);
    }

    auto run = [&](const CLI::App* cmd, CommonFlags& flags, auto&& fn) {
        RunConfig config;
        if (int rc = resolve_config(cmd, flags, config); rc != 0) return rc;
        if (config.output_dir.empty()) {
            std::cerr << "error: an output directory is required (--out)\n";
            return veritas::cli::kExitConfig;
        }
        return fn(config);
    };

    if (score->parsed()) {
        return run(score, score_flags, [](const RunConfig& c) {
            return veritas::cli::cmd_score(c, std::cerr);
        });
    }
    if (judge_cmd->parsed()) {
        return run(judge_cmd, judge_flags, [](const RunConfig& c) {
            return veritas::cli::cmd_judge(c, std::cerr);
        });
    }
    if (reward_cmd->parsed()) {
        return run(reward_cmd, reward_flags, [](const RunConfig& c) {
            return veritas::cli::cmd_reward(c, std::cerr);
        });
    }
    if (export_cmd->parsed()) {
        return run(export_cmd, export_flags, [](const RunConfig& c) {
            return veritas::cli::cmd_export(c, std::cerr);
        });
    }
    if (agree->parsed()) {
        if (!agree_dimension.empty()) {
            auto dim = veritas::metrics::dimension_from_name(agree_dimension);
            if (!dim) {
                std::cerr << "error: unknown dimension: " << agree_dimension
                          << "\n";
                return veritas::cli::kExitConfig;
            }
            agree_args.dimension = dim;
        }
        return veritas::cli::cmd_agree(agree_args, std::cout, std::cerr);
    }
    if (report_cmd->parsed()) {
        if (!report_aggregation.empty()) {
            auto policy =
                veritas::metrics::aggregate_policy_from_name(report_aggregation);
            if (!policy) {
                std::cerr << "error: unknown aggregation\n";
                return veritas::cli::kExitConfig;
            }
            report_args.aggregation = *policy;
        }
        return veritas::cli::cmd_report(report_args, std::cerr);
    }
    return veritas::cli::kExitConfig;
}
