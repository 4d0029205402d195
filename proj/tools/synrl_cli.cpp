// synrl: command-line front end for synaptic RL and gradient-descent experiments.
//
//   synrl train-policy --manifest m.json [--seed N] [--out DIR] [--repeats N] [--threads N] [--force]
//   synrl apply-policy --manifest m.json [--policy policy.json] ...
//   synrl gd           --manifest m.json ...
//   synrl gen-boundary --manifest m.json ...
//   synrl eval         --manifest m.json --net net.json
//   synrl compare      summary_a.json summary_b.json
//
// Exit codes: 0 success, 2 validation error, 3 divergence, 1 anything else.

#include "synrl/errors.hpp"
#include "synrl/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

namespace {

struct CommonArgs {
    std::string manifest;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> repeats;
    std::optional<std::size_t> threads;
    std::optional<std::string> data;
    bool force = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--manifest", args.manifest, "Experiment manifest (JSON)")->required();
    cmd->add_option("--seed", args.seed, "Override the base seed");
    cmd->add_option("--out", args.out, "Override the output root directory");
    cmd->add_option("--repeats", args.repeats, "Override the repeat count")->check(CLI::PositiveNumber);
    cmd->add_option("--threads", args.threads, "1 = reproducibility mode; >1 = performance mode")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--data", args.data, "Override the image dataset source path");
    cmd->add_flag("--force", args.force, "Replace existing output directories");
}

synrl::RunOverrides overrides_from(const CommonArgs& a) {
    synrl::RunOverrides o;
    o.seed = a.seed;
    if (a.out) o.out = *a.out;
    o.repeats = a.repeats;
    o.threads = a.threads;
    if (a.data) o.data = *a.data;
    o.force = a.force;
    return o;
}

void print_summary(const synrl::RunOutcome& run) {
    const auto st = run.summary.primary_stats();
    std::cout << run.summary.experiment_id << ": " << run.summary.primary_metric() << " mean " << st.mean
              << " stdev " << st.stdev << " min " << st.min << " max " << st.max << " (n=" << st.n << ")\n"
              << "artifacts: " << run.experiment_dir.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synaptic reinforcement-learning trainer for multilayer perceptrons"};
    app.require_subcommand(1);

    CommonArgs train_args, apply_args, gd_args, gen_args, eval_args;
    std::string policy_path, net_path;
    std::string summary_a, summary_b;

    auto* train_cmd = app.add_subcommand("train-policy", "Train network and shared policy together");
    add_common(train_cmd, train_args);
    auto* apply_cmd = app.add_subcommand("apply-policy", "Train a network with a frozen policy");
    add_common(apply_cmd, apply_args);
    apply_cmd->add_option("--policy", policy_path, "Policy JSON (overrides the manifest)");
    auto* gd_cmd = app.add_subcommand("gd", "Full-batch gradient-descent baseline");
    add_common(gd_cmd, gd_args);
    auto* gen_cmd = app.add_subcommand("gen-boundary", "Write random decision-boundary tasks");
    add_common(gen_cmd, gen_args);
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a saved network on a manifest's data");
    add_common(eval_cmd, eval_args);
    eval_cmd->add_option("--net", net_path, "Network JSON")->required();
    auto* cmp_cmd = app.add_subcommand("compare", "Difference of mean accuracy between two run summaries");
    cmp_cmd->add_option("summary_a", summary_a, "First summary.json")->required();
    cmp_cmd->add_option("summary_b", summary_b, "Second summary.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : synrl::kExitValidation;
    }

    try {
        if (*train_cmd) {
            print_summary(synrl::cmd_train_policy(synrl::load_manifest(train_args.manifest), overrides_from(train_args),
                                                  &std::cerr));
        } else if (*apply_cmd) {
            auto o = overrides_from(apply_args);
            if (!policy_path.empty()) o.policy = policy_path;
            print_summary(synrl::cmd_apply_policy(synrl::load_manifest(apply_args.manifest), o, &std::cerr));
        } else if (*gd_cmd) {
            print_summary(synrl::cmd_gd(synrl::load_manifest(gd_args.manifest), overrides_from(gd_args), &std::cerr));
        } else if (*gen_cmd) {
            const auto dir = synrl::cmd_gen_boundary(synrl::load_manifest(gen_args.manifest), overrides_from(gen_args),
                                                     &std::cerr);
            std::cout << "artifacts: " << dir.string() << "\n";
        } else if (*eval_cmd) {
            const auto net = synrl::mlp_from_json(synrl::read_text_file(net_path));
            const auto report = synrl::cmd_eval(synrl::load_manifest(eval_args.manifest), net, overrides_from(eval_args));
            std::cout << synrl::eval_to_json(report) << "\n";
        } else if (*cmp_cmd) {
            const auto a = synrl::load_summary(summary_a);
            const auto b = synrl::load_summary(summary_b);
            const auto c = synrl::compare_summaries(a, b);
            std::cout << a.experiment_id << " - " << b.experiment_id << " (" << a.primary_metric() << "): " << c.text
                      << "\n";
        }
    } catch (const synrl::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return synrl::kExitValidation;
    } catch (const synrl::DivergenceError& e) {
        std::cerr << "diverged: " << e.what() << " [iteration " << e.iteration() << ", layer " << e.layer() << "]\n";
        return synrl::kExitDivergence;
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << "\n";
        return 1;
    }
    return synrl::kExitOk;
}
