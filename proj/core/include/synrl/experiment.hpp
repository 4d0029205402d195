#pragma once

#include "synrl/datasets.hpp"
#include "synrl/gd.hpp"
#include "synrl/mlp.hpp"
#include "synrl/trainer.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace synrl {

inline constexpr int kManifestSchemaVersion = 1;

enum class TaskKind { Boundary, Ocr };

struct NetSpec {
    std::vector<std::size_t> hidden;  // empty = no hidden layer
    ActivationKind hidden_activation = ActivationKind::Tanh;
    ActivationKind output_activation = ActivationKind::Identity;
    LossKind loss = LossKind::MeanSquaredEuclidean;
    InitScheme init = InitScheme::uniform(-0.1, 0.1);
};

struct PolicySource {
    bool from_file = false;
    std::filesystem::path path;
};

/// Declarative description of one experiment arm. Relative data and policy
/// paths are resolved against the manifest's directory when loaded from disk.
struct ExperimentManifest {
    std::string experiment_id;
    std::uint64_t seed = 0;
    std::size_t repeats = 1;
    TaskKind task = TaskKind::Boundary;
    BoundaryTaskSpec boundary;
    bool task_seed_fixed = false;  // task.seed given: same data for every repeat
    ImageDatasetSpec image;
    NetSpec net;
    std::optional<TrainerConfig> trainer;
    std::optional<GdConfig> gd;
    PolicySource policy;
    std::filesystem::path output_dir = "runs";
};

ExperimentManifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir = {});
ExperimentManifest load_manifest(const std::filesystem::path& path);
std::string manifest_to_json(const ExperimentManifest& m);

// FNV-1a 64 over the canonical JSON form, as 16 hex digits. The output directory is
// left out and a policy file enters by content, not path.
std::string manifest_hash(const ExperimentManifest& m);

// Throws ValidationError listing every problem found (not just the first).
void validate_manifest(const ExperimentManifest& m);

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out;
    std::optional<std::size_t> repeats;
    std::optional<std::size_t> threads;
    std::optional<std::filesystem::path> policy;
    std::optional<std::filesystem::path> data;
    bool force = false;
};

ExperimentManifest apply_overrides(ExperimentManifest m, const RunOverrides& o);

struct Stats {
    std::size_t n = 0;
    double min = 0.0, max = 0.0, mean = 0.0, stdev = 0.0;  // sample stdev; 0 when n == 1
};
Stats compute_stats(const std::vector<double>& values);

struct RepeatResult {
    std::size_t repeat = 0;
    std::uint64_t seed = 0;
    double final_train_loss = 0.0;
    double final_train_acc = 0.0;
    std::optional<double> final_val_loss;
    std::optional<double> final_val_acc;
    std::optional<std::size_t> iterations_to_90;
};

struct RunSummary {
    std::string experiment_id;
    std::string manifest_hash;
    std::string method;  // "synaptic_rl" or "gd"
    std::vector<RepeatResult> repeats;

    // Val accuracy when every repeat has one, else train accuracy.
    std::string primary_metric() const;
    std::vector<double> primary_values() const;
    Stats primary_stats() const { return compute_stats(primary_values()); }
};

std::string summary_to_json(const RunSummary& s);
RunSummary summary_from_json(const std::string& text);
RunSummary load_summary(const std::filesystem::path& path);

// The materialized data for one repeat.
struct TaskData {
    Dataset train;
    std::optional<Dataset> validation;
    std::optional<Mlp> target;  // boundary tasks only
    std::size_t skipped = 0;
    std::size_t attempts = 1;
};
TaskData build_task(const ExperimentManifest& m, std::size_t repeat);
Mlp build_initial_net(const ExperimentManifest& m, std::size_t input_dim, std::size_t output_dim,
                      std::size_t repeat);

std::uint64_t repeat_seed(const ExperimentManifest& m, std::size_t repeat);

struct RunOutcome {
    RunSummary summary;
    std::filesystem::path experiment_dir;
};

// Each command validates everything before writing, then writes per-repeat
// artifacts under <out>/<experiment_id>/<repeat>/ and summary.json beside them.
// `log` receives human-readable progress; may be null.
RunOutcome cmd_train_policy(const ExperimentManifest& manifest, const RunOverrides& o, std::ostream* log = nullptr);
RunOutcome cmd_apply_policy(const ExperimentManifest& manifest, const RunOverrides& o, std::ostream* log = nullptr);
RunOutcome cmd_gd(const ExperimentManifest& manifest, const RunOverrides& o, std::ostream* log = nullptr);

// Writes target.json, data.csv and task.json per repeat.
std::filesystem::path cmd_gen_boundary(const ExperimentManifest& manifest, const RunOverrides& o,
                                       std::ostream* log = nullptr);

struct EvalReport {
    double train_loss = 0.0, train_acc = 0.0;
    std::optional<double> val_loss, val_acc;
};
EvalReport cmd_eval(const ExperimentManifest& manifest, const Mlp& net, const RunOverrides& o);
std::string eval_to_json(const EvalReport& r);

struct Comparison {
    double delta = 0.0;  // mean(a) - mean(b)
    double sigma = 0.0;  // sqrt(stdev_a^2 + stdev_b^2)
    std::string text;    // "+0.1000 ± 0.0141"
};
Comparison compare_summaries(const RunSummary& a, const RunSummary& b);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace synrl
