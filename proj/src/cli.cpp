#include "kmc/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kmc/cascade.hpp"
#include "kmc/cross_validation.hpp"
#include "kmc/error.hpp"
#include "kmc/report.hpp"
#include "kmc/synth.hpp"

namespace kmc {
namespace {

namespace fs = std::filesystem;

struct UsageError : Error {
    using Error::Error;
};

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

// Flags without a value.
const std::set<std::string> kSwitches = {"flat", "mismatch"};

std::string flag_name(const std::string& arg) {
    if (arg.rfind("--", 0) != 0) return {};
    const auto eq = arg.find('=');
    return arg.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
}

// --- pipeline options shared by train / evaluate ---------------------------

struct PipelineFlags {
    std::string data;
    std::string schema = "auto";
    std::size_t k = 2;
    std::string mode = "per-cluster";
    bool flat = false;
    std::string classifier;
    std::vector<std::string> hp;
    std::uint64_t seed = 1;
    std::string out;
};

void add_pipeline_flags(CLI::App& cmd, PipelineFlags& f, const std::string& default_classifier) {
    f.classifier = default_classifier;
    cmd.add_option("--data", f.data, "Input CSV")->required();
    cmd.add_option("--schema", f.schema, "Built-in schema name, JSON schema file, 'infer' or 'auto'")
        ->capture_default_str();
    cmd.add_option("--k", f.k, "Number of clusters")->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--mode", f.mode, "per-cluster or relabel")->capture_default_str();
    cmd.add_flag("--flat", f.flat, "Skip clustering");
    cmd.add_option("--classifier", f.classifier, "Classifier name")->capture_default_str();
    cmd.add_option("--hp", f.hp, "Hyperparameter key=value (repeatable)");
    cmd.add_option("--seed", f.seed, "Random seed")->capture_default_str();
}

Schema schema_from_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open schema file '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("schema file '" + path.string() + "': " + e.what());
    }
    Schema s;
    try {
        for (const auto& a : j.at("attributes")) {
            AttributeSpec spec;
            spec.name = a.at("name").get<std::string>();
            const std::string kind = a.at("kind").get<std::string>();
            if (kind == "numeric") spec.kind = AttributeKind::Numeric;
            else if (kind == "categorical") spec.kind = AttributeKind::Categorical;
            else throw Error("schema file '" + path.string() + "': unknown kind '" + kind + "'");
            if (a.contains("categories")) spec.categories = a.at("categories").get<std::vector<std::string>>();
            s.attributes.push_back(std::move(spec));
        }
        const std::string cls = j.at("class").get<std::string>();
        const auto idx = s.find_attribute(cls);
        if (!idx) throw Error("schema file '" + path.string() + "': class attribute '" + cls + "' not declared");
        s.class_index = *idx;
    } catch (const nlohmann::json::exception& e) {
        throw Error("schema file '" + path.string() + "': " + e.what());
    }
    s.validate();
    return s;
}

std::vector<std::string> csv_header(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open data file '" + path.string() + "'");
    std::string line;
    std::getline(in, line);
    std::vector<std::string> names;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        field = trim(field);
        if (field.size() >= 2 && field.front() == '"' && field.back() == '"') field = field.substr(1, field.size() - 2);
        names.push_back(field);
    }
    return names;
}

std::optional<Schema> resolve_schema(const std::string& name, const std::string& data) {
    if (name == "infer") return std::nullopt;
    if (name == "auto") {
        const Schema tb = tb_table1_schema();
        std::vector<std::string> expected;
        for (const auto& a : tb.attributes) expected.push_back(a.name);
        auto header = csv_header(data);
        std::sort(expected.begin(), expected.end());
        std::sort(header.begin(), header.end());
        if (header == expected) return tb;
        return std::nullopt;
    }
    if (fs::exists(name) && !fs::is_directory(name)) return schema_from_json_file(name);
    return builtin_schema(name);
}

std::string schema_label(const std::string& name, const std::optional<Schema>& s) {
    if (name == "auto") return s ? "tb-table1" : "inferred";
    if (name == "infer") return "inferred";
    return name;
}

std::vector<std::pair<std::string, std::string>> parse_hp(const std::vector<std::string>& items) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--hp expects key=value, got '" + item + "'");
        out.emplace_back(trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
    }
    return out;
}

CascadeSpec make_spec(const PipelineFlags& f, Algorithm algorithm,
                      const std::vector<std::pair<std::string, std::string>>& hp, bool strict) {
    CascadeSpec spec;
    spec.k = f.k;
    spec.mode = f.flat ? CascadeMode::Flat : parse_cascade_mode(f.mode);
    if (spec.mode == CascadeMode::Flat && !f.flat) throw UsageError("--mode must be per-cluster or relabel");
    spec.seed = f.seed;
    spec.classifier.algorithm = algorithm;
    spec.classifier.seed = f.seed;
    const Hyperparameters defaults = default_hyperparameters(algorithm);
    for (const auto& [key, value] : hp) {
        if (defaults.count(key)) spec.classifier.hyperparameters[key] = value;
        else if (strict) throw UsageError("unknown hyperparameter '" + key + "' for " + std::string(algorithm_id(algorithm)));
    }
    resolved_hyperparameters(spec.classifier);
    return spec;
}

std::vector<Algorithm> selected_algorithms(const std::string& name) {
    if (name == "all") return all_algorithms();
    return {parse_algorithm(name)};
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

template <typename Fn>
std::string render(Fn&& fn) {
    std::ostringstream ss;
    fn(ss);
    return ss.str();
}

// --- subcommands --------------------------------------------------------------

struct GenerateFlags {
    SynthSpec spec;
    std::string out;
};

void cmd_generate(const GenerateFlags& f, std::ostream& out) {
    try {
        validate(f.spec);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    const Dataset ds = generate(f.spec);
    save_csv(f.out, ds);
    const auto counts = ds.class_counts();
    out << "wrote " << ds.n() << " rows to " << f.out << "\n";
    for (std::size_t c = 0; c < counts.size(); ++c) {
        out << "  " << ds.schema().class_attribute().categories[c] << ": " << counts[c] << "\n";
    }
}

void cmd_train(const PipelineFlags& f, std::ostream& out) {
    const auto schema = resolve_schema(f.schema, f.data);
    const Dataset ds = load_csv(f.data, schema);
    const auto algorithms = selected_algorithms(f.classifier);
    if (algorithms.size() != 1) throw UsageError("train needs a single --classifier");
    const CascadeSpec spec = make_spec(f, algorithms.front(), parse_hp(f.hp), true);
    const CascadeModel model = cascade_fit(spec, ds);
    model.save(fs::path(f.out));
    out << "trained " << algorithm_label(spec.classifier.algorithm) << " (" << cascade_mode_id(spec.mode);
    if (model.router()) out << ", k=" << spec.k;
    out << ") on " << ds.n() << " rows; model written to " << f.out << "\n";
    if (model.router()) {
        const auto& km = *model.router();
        for (std::size_t j = 0; j < km.k; ++j) {
            out << "  cluster " << j << ": " << km.members(j).size() << " members, majority "
                << ds.schema().class_attribute().categories[km.cluster_class[j]] << "\n";
        }
    }
}

struct PredictFlags {
    std::string model;
    std::string data;
    std::string out;
};

void cmd_predict(const PredictFlags& f, std::ostream& out) {
    const CascadeModel model = CascadeModel::load(fs::path(f.model));
    const Dataset ds = load_csv(f.data, model.schema(), LoadOptions{false});
    const auto& classes = model.schema().class_attribute().categories;
    std::ostringstream rows;
    rows << "row,predicted,probability\n";
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const auto p = model.predict_proba(ds[i]);
        const std::size_t c = argmax(p);
        rows << i << ',' << classes.at(c) << ',' << format_real(p[c]) << '\n';
    }
    if (f.out.empty()) {
        out << rows.str();
    } else {
        write_file(f.out, rows.str());
        out << "wrote " << ds.n() << " predictions to " << f.out << "\n";
    }
}

struct EvaluateFlags {
    PipelineFlags pipeline;
    std::size_t folds = 10;
    std::string report_format = "json";
};

void cmd_evaluate(const EvaluateFlags& f, std::ostream& out) {
    const PipelineFlags& p = f.pipeline;
    if (f.report_format != "json" && f.report_format != "text") {
        throw UsageError("--report-format must be json or text");
    }
    const auto schema = resolve_schema(p.schema, p.data);
    const Dataset ds = load_csv(p.data, schema);
    const auto algorithms = selected_algorithms(p.classifier);
    const auto hp = parse_hp(p.hp);
    for (const auto& [key, value] : hp) {
        const bool known = std::any_of(algorithms.begin(), algorithms.end(),
                                       [&](Algorithm a) { return default_hyperparameters(a).count(key) > 0; });
        if (!known) throw UsageError("unknown hyperparameter '" + key + "' for the selected classifiers");
    }

    EvaluationConfig config;
    config.data_source = fs::path(p.data).filename().string();
    config.schema_name = schema_label(p.schema, schema);
    config.folds = f.folds;
    config.seed = p.seed;
    config.class_names = ds.schema().class_attribute().categories;

    std::vector<EvaluationRun> runs;
    for (Algorithm a : algorithms) {
        const CascadeSpec spec = make_spec(p, a, hp, algorithms.size() == 1);
        CrossValidationOptions options;
        options.folds = f.folds;
        options.seed = p.seed;
        runs.push_back({spec, cross_validate(cascade_trainer(spec), ds, options)});
    }

    const std::string report =
        f.report_format == "json" ? report_json(config, runs) : report_text(config, runs);
    const std::string comparison = render([&](std::ostream& s) { write_comparison_tsv(s, runs); });
    if (p.out.empty()) {
        out << report;
        return;
    }
    const fs::path dir(p.out);
    fs::create_directories(dir);
    write_file(dir / (f.report_format == "json" ? "report.json" : "report.txt"), report);
    write_file(dir / "comparison.tsv", comparison);
    write_file(dir / "detail_per_class.tsv",
               render([&](std::ostream& s) { write_detail_per_class_tsv(s, config, runs); }));
    write_file(dir / "detail_per_cluster.tsv",
               render([&](std::ostream& s) { write_detail_per_cluster_tsv(s, config, runs); }));
    write_file(dir / "plot_accuracy.tsv", render([&](std::ostream& s) { write_plot_accuracy_tsv(s, runs); }));
    write_file(dir / "plot_tpr_fmeasure.tsv", render([&](std::ostream& s) { write_plot_tpr_fmeasure_tsv(s, runs); }));
    out << comparison;
    for (const auto& run : runs) {
        for (const auto& flag : run.cv.flags) out << "note: " << algorithm_id(run.spec.classifier.algorithm) << ": " << flag << "\n";
    }
    out << "reports written to " << dir.string() << "\n";
}

}  // namespace

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> out;
    std::string config_path;
    std::set<std::string> given;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config needs a file");
            config_path = args[++i];
            continue;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
            continue;
        }
        const std::string name = flag_name(args[i]);
        if (!name.empty()) given.insert(name);
        out.push_back(args[i]);
    }
    if (config_path.empty()) return out;

    std::ifstream in(config_path);
    if (!in) throw UsageError("cannot open config file '" + config_path + "'");
    std::vector<std::string> extra;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError(config_path + ":" + std::to_string(line_no) + ": expected key=value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.rfind("--", 0) == 0) key = key.substr(2);
        if (key.empty()) throw UsageError(config_path + ":" + std::to_string(line_no) + ": empty key");
        if (given.count(key)) continue;
        if (kSwitches.count(key)) {
            if (value == "true" || value == "1" || value == "yes") extra.push_back("--" + key);
            else if (value != "false" && value != "0" && value != "no") {
                throw UsageError(config_path + ":" + std::to_string(line_no) + ": " + key + " expects true or false");
            }
            continue;
        }
        extra.push_back("--" + key);
        extra.push_back(value);
    }
    // Config values go after the subcommand name.
    const auto insert_at = out.empty() ? out.end() : out.begin() + 1;
    out.insert(insert_at, extra.begin(), extra.end());
    return out;
}

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"K-means cascaded classifiers for two-class tabular data", "kmc"};
    app.require_subcommand(1);

    GenerateFlags gen;
    auto* generate_cmd = app.add_subcommand("generate", "Write a synthetic tb-table1 dataset");
    generate_cmd->add_option("--n", gen.spec.n, "Rows")->capture_default_str();
    generate_cmd->add_option("--balance", gen.spec.class_balance, "Fraction of PTB rows")->capture_default_str();
    generate_cmd->add_option("--separation", gen.spec.separation, "Numeric mean separation (sd units)")
        ->capture_default_str();
    generate_cmd->add_option("--skew", gen.spec.categorical_skew, "Categorical class-typical probability")
        ->capture_default_str();
    generate_cmd->add_option("--missing", gen.spec.missing_rate, "Missing cell rate")->capture_default_str();
    generate_cmd->add_flag("--mismatch", gen.spec.cluster_class_mismatch, "Decouple numeric groups from classes");
    generate_cmd->add_option("--seed", gen.spec.seed, "Random seed")->capture_default_str();
    generate_cmd->add_option("--out", gen.out, "Output CSV")->required();

    PipelineFlags train;
    auto* train_cmd = app.add_subcommand("train", "Fit a pipeline and save it");
    add_pipeline_flags(*train_cmd, train, "svm");
    train_cmd->add_option("--out", train.out, "Model file")->required();

    PredictFlags pred;
    auto* predict_cmd = app.add_subcommand("predict", "Predict with a saved pipeline");
    predict_cmd->add_option("--model", pred.model, "Model file")->required();
    predict_cmd->add_option("--data", pred.data, "CSV of rows to classify")->required();
    predict_cmd->add_option("--out", pred.out, "Predictions CSV (default: standard output)");

    EvaluateFlags eval;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Cross-validate classifiers and write reports");
    add_pipeline_flags(*evaluate_cmd, eval.pipeline, "all");
    evaluate_cmd->add_option("--folds", eval.folds, "Cross-validation folds")->capture_default_str();
    evaluate_cmd->add_option("--out", eval.pipeline.out, "Report directory (default: report to standard output)");
    evaluate_cmd->add_option("--report-format", eval.report_format, "json or text")->capture_default_str();

    for (auto* cmd : {generate_cmd, train_cmd, predict_cmd, evaluate_cmd}) {
        cmd->add_option("--config", "key=value file supplying any flag");
    }

    try {
        std::vector<std::string> args = expand_config(raw_args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    } catch (const Error& e) {
        err << "kmc: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*generate_cmd) cmd_generate(gen, out);
        else if (*train_cmd) cmd_train(train, out);
        else if (*predict_cmd) cmd_predict(pred, out);
        else if (*evaluate_cmd) cmd_evaluate(eval, out);
    } catch (const UsageError& e) {
        err << "kmc: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "kmc: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace kmc
