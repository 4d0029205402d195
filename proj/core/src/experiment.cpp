#include "synrl/experiment.hpp"

#include "synrl/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string_view>

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace synrl {

namespace {

constexpr std::uint64_t kInitStream = 0x1217;

std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

fs::path resolve(const fs::path& p, const fs::path& base) {
    if (p.empty() || p.is_absolute() || base.empty()) return p;
    return base / p;
}

ojson trainer_to_json(const TrainerConfig& c) {
    ojson j;
    j["iterations"] = c.iterations;
    j["epsilon"] = c.epsilon;
    j["alpha_s"] = c.alpha_s;
    j["alpha_q"] = c.alpha_q;
    j["gamma"] = c.gamma;
    j["train_policy"] = c.train_policy;
    if (c.minibatch) j["minibatch"] = {{"size", c.minibatch->size}, {"reselect_every", c.minibatch->reselect_every}};
    auto& sched = j["alpha_s_schedule"] = ojson::array();
    for (const auto& s : c.alpha_s_schedule) sched.push_back({{"at_iteration", s.at_iteration}, {"new_alpha_s", s.new_alpha_s}});
    j["metrics_every"] = c.metrics_every;
    j["eval_every"] = c.eval_every;
    j["td_form"] = c.td_form == TdForm::Standard ? "standard" : "printed_variant";
    j["threads"] = c.threads;
    return j;
}

TrainerConfig trainer_from_json(const nlohmann::json& j) {
    TrainerConfig c;
    c.iterations = j.value("iterations", c.iterations);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.alpha_s = j.value("alpha_s", c.alpha_s);
    c.alpha_q = j.value("alpha_q", c.alpha_q);
    c.gamma = j.value("gamma", c.gamma);
    c.train_policy = j.value("train_policy", c.train_policy);
    if (j.contains("minibatch") && !j["minibatch"].is_null())
        c.minibatch = MinibatchConfig{j["minibatch"].at("size").get<std::size_t>(),
                                      j["minibatch"].at("reselect_every").get<std::size_t>()};
    if (j.contains("alpha_s_schedule"))
        for (const auto& s : j["alpha_s_schedule"])
            c.alpha_s_schedule.push_back({s.at("at_iteration").get<std::size_t>(), s.at("new_alpha_s").get<double>()});
    c.metrics_every = j.value("metrics_every", c.metrics_every);
    c.eval_every = j.value("eval_every", c.eval_every);
    const std::string form = j.value("td_form", std::string("standard"));
    if (form == "standard")
        c.td_form = TdForm::Standard;
    else if (form == "printed_variant")
        c.td_form = TdForm::PrintedVariant;
    else
        throw ValidationError("unknown td_form '" + form + "'");
    c.threads = j.value("threads", c.threads);
    return c;
}

ojson gd_to_json(const GdConfig& c) {
    return {{"learning_rate", c.learning_rate},
            {"epochs", c.epochs},
            {"metrics_every", c.metrics_every},
            {"plateau_patience", c.plateau_patience},
            {"plateau_min_delta", c.plateau_min_delta}};
}

GdConfig gd_from_json(const nlohmann::json& j) {
    GdConfig c;
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.epochs = j.value("epochs", c.epochs);
    c.metrics_every = j.value("metrics_every", c.metrics_every);
    c.plateau_patience = j.value("plateau_patience", c.plateau_patience);
    c.plateau_min_delta = j.value("plateau_min_delta", c.plateau_min_delta);
    return c;
}

ojson opt_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

std::optional<double> opt_from(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<double>();
}

std::string with_hash(const std::string& json_text, const std::string& hash) {
    auto j = ojson::parse(json_text);
    j["manifest_hash"] = hash;
    return j.dump(1);
}

bool safe_id(const std::string& id) {
    if (id.empty() || id == "." || id == "..") return false;
    for (char c : id)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
    return true;
}

Dataset load_source_once(const ExperimentManifest& m, std::size_t* skipped) {
    return load_image_source(m.image, skipped);
}

TaskData build_task_with(const ExperimentManifest& m, std::size_t repeat, const Dataset* source, std::size_t skipped) {
    const std::uint64_t seed = m.task_seed_fixed ? (m.task == TaskKind::Boundary ? m.boundary.seed : m.image.seed)
                                                 : repeat_seed(m, repeat);
    TaskData out;
    if (m.task == TaskKind::Boundary) {
        auto spec = m.boundary;
        spec.seed = seed;
        auto task = generate_boundary_task(spec);
        out.train = std::move(task.data);
        out.target = std::move(task.target);
        out.attempts = task.attempts;
        return out;
    }
    auto [train, val] = split_dataset(*source, m.image.split_fraction, seed);
    out.train = std::move(train);
    out.validation = std::move(val);
    out.skipped = skipped;
    return out;
}

enum class Method { TrainPolicy, ApplyPolicy, Gd };

void check_no_clobber(const fs::path& exp_dir, std::size_t repeats, bool force) {
    std::vector<std::string> existing;
    for (std::size_t r = 0; r < repeats; ++r)
        if (fs::exists(exp_dir / std::to_string(r))) existing.push_back((exp_dir / std::to_string(r)).string());
    if (fs::exists(exp_dir / "summary.json")) existing.push_back((exp_dir / "summary.json").string());
    if (existing.empty()) return;
    if (!force) {
        std::string msg = "refusing to overwrite existing outputs (pass --force):";
        for (const auto& e : existing) msg += "\n  " + e;
        throw ValidationError(msg);
    }
    for (std::size_t r = 0; r < repeats; ++r) fs::remove_all(exp_dir / std::to_string(r));
    fs::remove(exp_dir / "summary.json");
    fs::remove(exp_dir / "timing.json");
}

RunOutcome run_arm(const ExperimentManifest& manifest, const RunOverrides& o, Method method, std::ostream* log) {
    ExperimentManifest m = apply_overrides(manifest, o);
    std::vector<std::string> problems;
    try {
        validate_manifest(m);
    } catch (const ValidationError& e) {
        problems.push_back(e.what());
    }
    if (method == Method::Gd && !m.gd) problems.push_back("manifest has no 'gd' section");
    if (method != Method::Gd && !m.trainer) problems.push_back("manifest has no 'trainer' section");
    if (method == Method::TrainPolicy && m.trainer && !m.trainer->train_policy)
        problems.push_back("train-policy requires trainer.train_policy = true");
    if (method == Method::ApplyPolicy && !m.policy.from_file)
        problems.push_back("apply-policy requires a policy file (manifest policy.path or --policy)");
    if (!problems.empty()) {
        std::string msg = "manifest validation failed:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw ValidationError(msg);
    }

    std::optional<QTable> loaded;
    std::string policy_bytes;
    if (m.policy.from_file) {
        policy_bytes = read_text_file(m.policy.path);
        loaded = qtable_from_json(policy_bytes);
    }
    if (method == Method::ApplyPolicy) m.trainer->train_policy = false;

    std::size_t skipped = 0;
    std::optional<Dataset> source;
    if (m.task == TaskKind::Ocr) {
        source = load_source_once(m, &skipped);
        if (log) *log << "loaded " << source->size() << " images (" << skipped << " skipped)\n";
    }
    if (m.trainer && m.trainer->minibatch) {
        // Minibatch size is checked against the smallest training split any repeat can see.
        const std::size_t n = m.task == TaskKind::Boundary
                                  ? m.boundary.n_points
                                  : std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(
                                                                static_cast<double>(source->size()) *
                                                                m.image.split_fraction)),
                                                            1, source->size() - 1);
        validate_config(*m.trainer, n);
    }

    const std::string hash = manifest_hash(m);
    const fs::path exp_dir = m.output_dir / m.experiment_id;
    check_no_clobber(exp_dir, m.repeats, o.force);

    RunSummary summary;
    summary.experiment_id = m.experiment_id;
    summary.manifest_hash = hash;
    summary.method = method == Method::Gd ? "gd" : "synaptic_rl";
    ojson timing = ojson::array();

    for (std::size_t r = 0; r < m.repeats; ++r) {
        const auto started = std::chrono::steady_clock::now();
        const std::uint64_t seed = repeat_seed(m, r);
        TaskData task = build_task_with(m, r, source ? &*source : nullptr, skipped);
        Mlp net0 = build_initial_net(m, task.train.input_dim(), task.train.output_dim(), r);
        const Dataset* val = task.validation ? &*task.validation : nullptr;

        const fs::path dir = exp_dir / std::to_string(r);
        fs::create_directories(dir);
        std::ofstream csv(dir / "metrics.csv", std::ios::binary | std::ios::trunc);

        Mlp final_net;
        MetricsLog mlog;
        if (method == Method::Gd) {
            GdConfig cfg = *m.gd;
            cfg.seed = seed;
            auto res = train_gd(std::move(net0), task.train, val, cfg, &csv);
            final_net = std::move(res.net);
            mlog = std::move(res.log);
        } else {
            TrainerConfig cfg = *m.trainer;
            cfg.seed = seed;
            const QTable start = loaded ? *loaded : QTable(cfg.gamma, cfg.alpha_q);
            auto res = train(std::move(net0), start, task.train, val, cfg, &csv);
            final_net = std::move(res.net);
            mlog = std::move(res.log);
            if (method == Method::TrainPolicy)
                write_text_file(dir / "policy.json", with_hash(qtable_to_json(res.policy), hash));
            else if (!(res.policy == *loaded))
                throw std::logic_error("static policy run modified the policy table");
        }
        csv.close();

        write_text_file(dir / "net.json", with_hash(mlp_to_json(final_net), hash));
        auto mj = ojson::parse(manifest_to_json(m));
        mj["manifest_hash"] = hash;
        mj["repeat"] = r;
        mj["repeat_seed"] = seed;
        write_text_file(dir / "manifest.json", mj.dump(1));

        RepeatResult rr;
        rr.repeat = r;
        rr.seed = seed;
        rr.final_train_loss = loss(final_net, task.train);
        rr.final_train_acc = accuracy(final_net, task.train);
        if (val) {
            rr.final_val_loss = loss(final_net, *val);
            rr.final_val_acc = accuracy(final_net, *val);
        }
        rr.iterations_to_90 = mlog.first_iteration_reaching(0.9);
        summary.repeats.push_back(rr);

        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        timing.push_back({{"repeat", r}, {"wall_clock_seconds", secs}});
        if (log) {
            *log << m.experiment_id << " repeat " << r << ": train_acc " << rr.final_train_acc;
            if (rr.final_val_acc) *log << " val_acc " << *rr.final_val_acc;
            *log << " (" << secs << " s)\n";
        }
    }

    if (m.policy.from_file && read_text_file(m.policy.path) != policy_bytes)
        throw std::logic_error("policy file changed on disk during a run");

    write_text_file(exp_dir / "summary.json", summary_to_json(summary));
    write_text_file(exp_dir / "timing.json", ojson{{"manifest_hash", hash}, {"repeats", timing}}.dump(1));
    return {std::move(summary), exp_dir};
}

}  // namespace

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

ExperimentManifest parse_manifest(const std::string& json_text, const fs::path& base_dir) {
    try {
        const auto j = nlohmann::json::parse(json_text);
        if (j.value("schema_version", 0) != kManifestSchemaVersion)
            throw ValidationError("manifest schema_version must be " + std::to_string(kManifestSchemaVersion));
        ExperimentManifest m;
        m.experiment_id = j.at("experiment_id").get<std::string>();
        m.seed = j.value("seed", std::uint64_t{0});
        m.repeats = j.value("repeats", std::size_t{1});

        const auto& t = j.at("task");
        const std::string kind = t.at("kind").get<std::string>();
        m.task_seed_fixed = t.contains("seed");
        if (kind == "boundary") {
            m.task = TaskKind::Boundary;
            auto& b = m.boundary;
            b.hidden_units = t.value("hidden_units", b.hidden_units);
            b.input_dim = t.value("input_dim", b.input_dim);
            b.n_points = t.value("n_points", b.n_points);
            if (t.contains("weight_range")) {
                b.weight_lo = t["weight_range"].at(0).get<double>();
                b.weight_hi = t["weight_range"].at(1).get<double>();
            }
            if (t.contains("data_range")) {
                b.data_lo = t["data_range"].at(0).get<double>();
                b.data_hi = t["data_range"].at(1).get<double>();
            }
            b.hidden_activation = parse_activation(t.value("hidden_activation", std::string("tanh")));
            b.min_class_fraction = t.value("min_class_fraction", b.min_class_fraction);
            b.max_attempts = t.value("max_attempts", b.max_attempts);
            b.seed = t.value("seed", std::uint64_t{0});
        } else if (kind == "ocr") {
            m.task = TaskKind::Ocr;
            auto& im = m.image;
            im.source_path = resolve(t.at("source_path").get<std::string>(), base_dir);
            im.image_side = t.value("image_side", im.image_side);
            im.classes = t.value("classes", im.classes);
            im.split_fraction = t.value("split_fraction", im.split_fraction);
            im.seed = t.value("seed", std::uint64_t{0});
        } else {
            throw ValidationError("unknown task kind '" + kind + "'");
        }

        const auto& n = j.at("net");
        m.net.hidden = n.value("hidden", std::vector<std::size_t>{});
        m.net.hidden_activation = parse_activation(n.value("hidden_activation", std::string("tanh")));
        m.net.output_activation = parse_activation(n.value("output_activation", std::string("identity")));
        m.net.loss = parse_loss(n.value("loss", std::string("mse")));
        if (n.contains("init")) {
            const auto& i = n["init"];
            const std::string scheme = i.at("scheme").get<std::string>();
            if (scheme == "zero")
                m.net.init = InitScheme::zero();
            else if (scheme == "uniform")
                m.net.init = InitScheme::uniform(i.at("lo").get<double>(), i.at("hi").get<double>());
            else
                throw ValidationError("unknown init scheme '" + scheme + "'");
        }

        if (j.contains("trainer")) m.trainer = trainer_from_json(j["trainer"]);
        if (j.contains("gd")) m.gd = gd_from_json(j["gd"]);
        if (j.contains("policy")) {
            const auto& p = j["policy"];
            const std::string src = p.value("source", std::string("fresh"));
            if (src == "file") {
                m.policy.from_file = true;
                m.policy.path = resolve(p.at("path").get<std::string>(), base_dir);
            } else if (src != "fresh") {
                throw ValidationError("policy.source must be 'fresh' or 'file'");
            }
        }
        if (j.contains("output")) m.output_dir = j["output"].value("dir", std::string("runs"));
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed manifest: ") + e.what());
    }
}

ExperimentManifest load_manifest(const fs::path& path) {
    return parse_manifest(read_text_file(path), path.parent_path());
}

std::string manifest_to_json(const ExperimentManifest& m) {
    ojson j;
    j["schema_version"] = kManifestSchemaVersion;
    j["experiment_id"] = m.experiment_id;
    j["seed"] = m.seed;
    j["repeats"] = m.repeats;
    ojson t;
    if (m.task == TaskKind::Boundary) {
        const auto& b = m.boundary;
        t = {{"kind", "boundary"},
             {"hidden_units", b.hidden_units},
             {"input_dim", b.input_dim},
             {"n_points", b.n_points},
             {"weight_range", {b.weight_lo, b.weight_hi}},
             {"data_range", {b.data_lo, b.data_hi}},
             {"hidden_activation", to_string(b.hidden_activation)},
             {"min_class_fraction", b.min_class_fraction},
             {"max_attempts", b.max_attempts}};
        if (m.task_seed_fixed) t["seed"] = b.seed;
    } else {
        const auto& im = m.image;
        t = {{"kind", "ocr"},
             {"source_path", im.source_path.string()},
             {"image_side", im.image_side},
             {"classes", im.classes},
             {"split_fraction", im.split_fraction}};
        if (m.task_seed_fixed) t["seed"] = im.seed;
    }
    j["task"] = t;
    ojson n = {{"hidden", m.net.hidden},
               {"hidden_activation", to_string(m.net.hidden_activation)},
               {"output_activation", to_string(m.net.output_activation)},
               {"loss", to_string(m.net.loss)}};
    if (m.net.init.kind == InitScheme::Kind::Zero)
        n["init"] = {{"scheme", "zero"}};
    else
        n["init"] = {{"scheme", "uniform"}, {"lo", m.net.init.lo}, {"hi", m.net.init.hi}};
    j["net"] = n;
    if (m.trainer) j["trainer"] = trainer_to_json(*m.trainer);
    if (m.gd) j["gd"] = gd_to_json(*m.gd);
    if (m.policy.from_file)
        j["policy"] = {{"source", "file"}, {"path", m.policy.path.string()}};
    else
        j["policy"] = {{"source", "fresh"}};
    j["output"] = {{"dir", m.output_dir.string()}};
    return j.dump(1);
}

static std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Where outputs go and where the policy file sits are not part of the experiment;
// the policy's contents are.
std::string manifest_hash(const ExperimentManifest& m) {
    auto j = ojson::parse(manifest_to_json(m));
    j.erase("output");
    if (m.policy.from_file && fs::is_regular_file(m.policy.path))
        j["policy"] = {{"source", "file"}, {"content_fnv1a", hex64(fnv1a(read_text_file(m.policy.path)))}};
    return hex64(fnv1a(j.dump()));
}

void validate_manifest(const ExperimentManifest& m) {
    std::vector<std::string> errors;
    if (!safe_id(m.experiment_id)) errors.push_back("experiment_id must be non-empty and use [A-Za-z0-9_.-]");
    if (m.repeats == 0) errors.push_back("repeats must be >= 1");
    if (m.task == TaskKind::Ocr) {
        if (!fs::exists(m.image.source_path))
            errors.push_back("task.source_path '" + m.image.source_path.string() + "' does not exist");
        if (!(m.image.split_fraction > 0.0 && m.image.split_fraction < 1.0))
            errors.push_back("task.split_fraction must lie in (0, 1)");
    } else if (m.boundary.n_points == 0 || m.boundary.hidden_units == 0 || m.boundary.input_dim == 0) {
        errors.push_back("boundary task dimensions must be positive");
    }
    for (std::size_t w : m.net.hidden)
        if (w == 0) errors.push_back("net.hidden widths must be positive");
    if (m.net.init.kind == InitScheme::Kind::Uniform && !(m.net.init.lo < m.net.init.hi))
        errors.push_back("net.init requires lo < hi");
    if (m.trainer) {
        try {
            validate_config(*m.trainer, std::numeric_limits<std::size_t>::max());
        } catch (const ValidationError& e) {
            errors.push_back(e.what());
        }
    }
    if (m.gd) {
        if (!(m.gd->learning_rate >= 0.0)) errors.push_back("gd.learning_rate must be >= 0");
        if (m.gd->epochs == 0) errors.push_back("gd.epochs must be positive");
        if (m.gd->metrics_every == 0) errors.push_back("gd.metrics_every must be positive");
    }
    if (m.policy.from_file && !fs::is_regular_file(m.policy.path))
        errors.push_back("policy file '" + m.policy.path.string() + "' does not exist");
    if (errors.empty()) return;
    std::string msg = errors.front();
    for (std::size_t i = 1; i < errors.size(); ++i) msg += "\n  " + errors[i];
    throw ValidationError(msg);
}

ExperimentManifest apply_overrides(ExperimentManifest m, const RunOverrides& o) {
    if (o.seed) m.seed = *o.seed;
    if (o.out) m.output_dir = *o.out;
    if (o.repeats) m.repeats = *o.repeats;
    if (o.threads && m.trainer) m.trainer->threads = *o.threads;
    if (o.policy) {
        m.policy.from_file = true;
        m.policy.path = *o.policy;
    }
    if (o.data) m.image.source_path = *o.data;
    return m;
}

std::uint64_t repeat_seed(const ExperimentManifest& m, std::size_t repeat) { return m.seed + repeat; }

Stats compute_stats(const std::vector<double>& values) {
    Stats s;
    s.n = values.size();
    if (values.empty()) return s;
    s.min = s.max = values.front();
    double sum = 0.0;
    for (double v : values) {
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
        sum += v;
    }
    s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.stdev = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    return s;
}

std::string RunSummary::primary_metric() const {
    for (const auto& r : repeats)
        if (!r.final_val_acc) return "final_train_acc";
    return repeats.empty() ? "final_train_acc" : "final_val_acc";
}

std::vector<double> RunSummary::primary_values() const {
    const bool val = primary_metric() == "final_val_acc";
    std::vector<double> out;
    for (const auto& r : repeats) out.push_back(val ? *r.final_val_acc : r.final_train_acc);
    return out;
}

std::string summary_to_json(const RunSummary& s) {
    ojson j;
    j["experiment_id"] = s.experiment_id;
    j["manifest_hash"] = s.manifest_hash;
    j["method"] = s.method;
    auto& reps = j["repeats"] = ojson::array();
    for (const auto& r : s.repeats) {
        reps.push_back({{"repeat", r.repeat},
                        {"seed", r.seed},
                        {"final_train_loss", r.final_train_loss},
                        {"final_train_acc", r.final_train_acc},
                        {"final_val_loss", opt_json(r.final_val_loss)},
                        {"final_val_acc", opt_json(r.final_val_acc)},
                        {"iterations_to_90", r.iterations_to_90 ? ojson(*r.iterations_to_90) : ojson(nullptr)}});
    }
    const Stats st = s.primary_stats();
    j["aggregate"] = {{"metric", s.primary_metric()}, {"n", st.n},     {"min", st.min},
                      {"max", st.max},                {"mean", st.mean}, {"stdev", st.stdev}};
    return j.dump(1);
}

RunSummary summary_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        RunSummary s;
        s.experiment_id = j.at("experiment_id").get<std::string>();
        s.manifest_hash = j.value("manifest_hash", std::string());
        s.method = j.value("method", std::string());
        for (const auto& r : j.at("repeats")) {
            RepeatResult rr;
            rr.repeat = r.at("repeat").get<std::size_t>();
            rr.seed = r.at("seed").get<std::uint64_t>();
            rr.final_train_loss = r.at("final_train_loss").get<double>();
            rr.final_train_acc = r.at("final_train_acc").get<double>();
            rr.final_val_loss = opt_from(r, "final_val_loss");
            rr.final_val_acc = opt_from(r, "final_val_acc");
            if (r.contains("iterations_to_90") && !r["iterations_to_90"].is_null())
                rr.iterations_to_90 = r["iterations_to_90"].get<std::size_t>();
            s.repeats.push_back(rr);
        }
        if (s.repeats.empty()) throw ValidationError("summary has no repeats");
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed summary: ") + e.what());
    }
}

RunSummary load_summary(const fs::path& path) { return summary_from_json(read_text_file(path)); }

TaskData build_task(const ExperimentManifest& m, std::size_t repeat) {
    if (m.task == TaskKind::Boundary) return build_task_with(m, repeat, nullptr, 0);
    std::size_t skipped = 0;
    const Dataset source = load_source_once(m, &skipped);
    return build_task_with(m, repeat, &source, skipped);
}

Mlp build_initial_net(const ExperimentManifest& m, std::size_t input_dim, std::size_t output_dim, std::size_t repeat) {
    std::vector<std::size_t> widths{input_dim};
    widths.insert(widths.end(), m.net.hidden.begin(), m.net.hidden.end());
    widths.push_back(output_dim);
    return init_weights(chain_layers(widths, m.net.hidden_activation, m.net.output_activation), m.net.loss, m.net.init,
                        mix_seed(repeat_seed(m, repeat), kInitStream));
}

RunOutcome cmd_train_policy(const ExperimentManifest& manifest, const RunOverrides& o, std::ostream* log) {
    return run_arm(manifest, o, Method::TrainPolicy, log);
}

RunOutcome cmd_apply_policy(const ExperimentManifest& manifest, const RunOverrides& o, std::ostream* log) {
    return run_arm(manifest, o, Method::ApplyPolicy, log);
}

RunOutcome cmd_gd(const ExperimentManifest& manifest, const RunOverrides& o, std::ostream* log) {
    return run_arm(manifest, o, Method::Gd, log);
}

fs::path cmd_gen_boundary(const ExperimentManifest& manifest, const RunOverrides& o, std::ostream* log) {
    const ExperimentManifest m = apply_overrides(manifest, o);
    validate_manifest(m);
    if (m.task != TaskKind::Boundary) throw ValidationError("gen-boundary requires a boundary task manifest");
    const fs::path exp_dir = m.output_dir / m.experiment_id;
    check_no_clobber(exp_dir, m.repeats, o.force);
    const std::string hash = manifest_hash(m);
    for (std::size_t r = 0; r < m.repeats; ++r) {
        auto spec = m.boundary;
        spec.seed = m.task_seed_fixed ? m.boundary.seed : repeat_seed(m, r);
        const auto task = generate_boundary_task(spec);
        const fs::path dir = exp_dir / std::to_string(r);
        fs::create_directories(dir);
        write_text_file(dir / "target.json", with_hash(mlp_to_json(task.target), hash));

        std::string csv;
        for (std::size_t c = 0; c < spec.input_dim; ++c) csv += "x" + std::to_string(c + 1) + ",";
        csv += "label\n";
        for (Eigen::Index i = 0; i < task.data.X.rows(); ++i) {
            for (Eigen::Index c = 0; c < task.data.X.cols(); ++c) {
                csv += fmt_double(task.data.X(i, c));
                csv += ',';
            }
            csv += task.data.Y(i, 0) > 0 ? "1\n" : "-1\n";
        }
        write_text_file(dir / "data.csv", csv);
        write_text_file(dir / "task.json", ojson{{"manifest_hash", hash},
                                                 {"seed", spec.seed},
                                                 {"attempts", task.attempts},
                                                 {"hidden_units", spec.hidden_units},
                                                 {"input_dim", spec.input_dim},
                                                 {"n_points", spec.n_points},
                                                 {"weight_range", {spec.weight_lo, spec.weight_hi}},
                                                 {"data_range", {spec.data_lo, spec.data_hi}}}
                                               .dump(1));
        if (log) *log << "boundary task " << r << " written to " << dir.string() << " (" << task.attempts << " attempt(s))\n";
    }
    return exp_dir;
}

EvalReport cmd_eval(const ExperimentManifest& manifest, const Mlp& net, const RunOverrides& o) {
    const ExperimentManifest m = apply_overrides(manifest, o);
    validate_manifest(m);
    const TaskData task = build_task(m, 0);
    EvalReport r;
    r.train_loss = loss(net, task.train);
    r.train_acc = accuracy(net, task.train);
    if (task.validation) {
        r.val_loss = loss(net, *task.validation);
        r.val_acc = accuracy(net, *task.validation);
    }
    return r;
}

std::string eval_to_json(const EvalReport& r) {
    return ojson{{"train_loss", r.train_loss},
                 {"train_acc", r.train_acc},
                 {"val_loss", opt_json(r.val_loss)},
                 {"val_acc", opt_json(r.val_acc)}}
        .dump(1);
}

Comparison compare_summaries(const RunSummary& a, const RunSummary& b) {
    const Stats sa = a.primary_stats(), sb = b.primary_stats();
    Comparison c;
    c.delta = sa.mean - sb.mean;
    c.sigma = std::sqrt(sa.stdev * sa.stdev + sb.stdev * sb.stdev);
    char buf[96];
    std::snprintf(buf, sizeof buf, "%+.4f ± %.4f", c.delta, c.sigma);
    c.text = buf;
    return c;
}

}  // namespace synrl
