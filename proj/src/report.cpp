#include "kmc/report.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace kmc {
namespace {

using json = nlohmann::ordered_json;

std::string label_of(const EvaluationRun& run) { return std::string(algorithm_label(run.spec.classifier.algorithm)); }

void merge(json& into, const json& from) {
    for (const auto& [k, v] : from.items()) into[k] = v;
}

json number_or_null(double v, bool undefined) { return undefined ? json(nullptr) : json(v); }

json metrics_json(const MetricsReport& m) {
    json j;
    j["n"] = m.n;
    j["confusion"] = {{"tp", m.confusion.tp}, {"fn", m.confusion.fn}, {"fp", m.confusion.fp}, {"tn", m.confusion.tn}};
    j["accuracy"] = m.accuracy;
    j["incorrect_pct"] = m.incorrect_pct;
    j["precision_per_class"] = m.precision_per_class;
    j["recall_per_class"] = m.recall_per_class;
    j["f_measure_per_class"] = m.f_measure_per_class;
    j["f_measure"] = m.f_measure;
    j["tpr_weighted"] = m.tpr_weighted;
    j["kappa"] = m.kappa;
    j["p_a"] = m.p_a;
    j["p_e"] = m.p_e;
    j["mae"] = m.mae;
    j["rae_pct"] = number_or_null(m.rae_pct, m.rae_undefined);
    j["flags"] = m.flags;
    return j;
}

json spec_json(const CascadeSpec& spec) {
    json j;
    j["pipeline"] = std::string(cascade_mode_id(spec.mode));
    if (spec.mode != CascadeMode::Flat) {
        j["k"] = spec.k;
        j["kmeans_max_iter"] = spec.max_iter;
        j["kmeans_init"] = "random distinct training vectors (seeded)";
    }
    j["classifier"] = std::string(algorithm_id(spec.classifier.algorithm));
    json hp = json::object();
    for (const auto& [k, v] : resolved_hyperparameters(spec.classifier)) hp[k] = v;
    j["hyperparameters"] = hp;
    return j;
}

json config_json(const EvaluationConfig& c, const CrossValidationReport* cv) {
    json j;
    j["data"] = c.data_source;
    j["schema"] = c.schema_name;
    j["folds_requested"] = c.folds;
    if (cv) {
        j["folds"] = cv->folds_used;
        j["leave_one_out"] = cv->leave_one_out;
    }
    j["seed"] = c.seed;
    j["fold_assignment"] = "stratified: per-class seeded shuffle, round-robin";
    j["positive_class"] = c.class_names.empty() ? std::string() : c.class_names.front();
    j["class_names"] = c.class_names;
    j["aggregation"] = "pooled (micro); fold-mean under macro";
    j["leakage_safe"] = true;
    j["preprocess"] = kPreprocessTag;
    return j;
}

std::string pct(double fraction) { return format_table_number(100.0 * fraction); }

const std::string& class_name(const EvaluationConfig& c, std::size_t k) {
    static const std::string empty;
    return k < c.class_names.size() ? c.class_names[k] : empty;
}

}  // namespace

std::string format_table_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

const LiteratureRow& literature_ann_row() {
    static const LiteratureRow row{"ANN(Existing Result in Ref.[1])", 93.0, "ref[1]"};
    return row;
}

const std::vector<std::string>& report_deviations() {
    static const std::vector<std::string> d = {
        "preprocessing and clustering are refit inside every training fold",
        "cross-validation folds are stratified by class",
        "headline metrics pool all folds; fold means are reported under macro",
        "decision trees are not pruned (min_leaf and gain stopping only)",
        "svm probabilities are the logistic of the margin",
        "mae is computed over class-probability vectors; rae is relative to training-fold priors",
        "the ANN row of the comparison table is a literature constant, not computed",
    };
    return d;
}

std::string report_json(const EvaluationConfig& config, const std::vector<EvaluationRun>& runs) {
    json root;
    root["schema_version"] = kReportSchemaVersion;
    root["config"] = config_json(config, runs.empty() ? nullptr : &runs.front().cv);
    root["deviations"] = report_deviations();
    json out_runs = json::array();
    for (const auto& run : runs) {
        const auto& cv = run.cv;
        json r;
        r["classifier"] = label_of(run);
        // Headline (pooled) fields at the top level of each run.
        merge(r, metrics_json(cv.pooled));
        json cfg = config_json(config, &cv);
        cfg.update(spec_json(run.spec));
        r["config"] = cfg;
        r["macro"] = metrics_json(cv.macro);
        json folds = json::array();
        for (const auto& f : cv.folds) {
            json fj;
            fj["fold"] = f.fold;
            fj["train_n"] = f.train_n;
            fj["test_n"] = f.test_n;
            merge(fj, metrics_json(f.metrics));
            folds.push_back(fj);
        }
        r["folds"] = folds;
        json clusters = json::array();
        for (const auto& c : cv.per_cluster) {
            json cj;
            cj["cluster"] = c.cluster;
            merge(cj, metrics_json(c.metrics));
            clusters.push_back(cj);
        }
        r["per_cluster"] = clusters;
        r["cv_flags"] = cv.flags;
        out_runs.push_back(r);
    }
    root["runs"] = out_runs;
    const auto& ann = literature_ann_row();
    root["literature"] = json::array({{{"classifier", ann.label}, {"accuracy_pct", ann.accuracy_pct}, {"source", ann.source}}});
    return root.dump(2) + "\n";
}

std::string report_text(const EvaluationConfig& config, const std::vector<EvaluationRun>& runs) {
    std::ostringstream out;
    out << "report schema " << kReportSchemaVersion << "\n";
    out << "data: " << config.data_source << "\nschema: " << config.schema_name << "\nseed: " << config.seed << "\n";
    if (!runs.empty()) {
        const auto& cv = runs.front().cv;
        out << "folds: " << cv.folds_used << (cv.leave_one_out ? " (leave-one-out)" : "") << "\n";
        out << "pipeline: " << cascade_mode_id(runs.front().spec.mode);
        if (runs.front().spec.mode != CascadeMode::Flat) out << " k=" << runs.front().spec.k;
        out << "\n";
    }
    out << "deviations:\n";
    for (const auto& d : report_deviations()) out << "  - " << d << "\n";
    for (const auto& run : runs) {
        const MetricsReport& m = run.cv.pooled;
        out << "\n" << label_of(run) << " (";
        bool first = true;
        for (const auto& [k, v] : resolved_hyperparameters(run.spec.classifier)) {
            out << (first ? "" : ", ") << k << "=" << v;
            first = false;
        }
        out << ")\n";
        out << "  accuracy " << format_table_number(m.accuracy) << "  incorrect_pct " << format_table_number(m.incorrect_pct)
            << "  f_measure " << format_table_number(m.f_measure) << "\n";
        out << "  kappa " << format_table_number(m.kappa) << "  p_a " << format_table_number(m.p_a) << "  p_e "
            << format_table_number(m.p_e) << "\n";
        out << "  mae " << format_table_number(m.mae) << "  rae_pct "
            << (m.rae_undefined ? std::string("undefined") : format_table_number(m.rae_pct)) << "\n";
        for (std::size_t c = 0; c < m.precision_per_class.size(); ++c) {
            out << "  " << class_name(config, c) << ": precision " << format_table_number(m.precision_per_class[c])
                << " recall " << format_table_number(m.recall_per_class[c]) << " f " << format_table_number(m.f_measure_per_class[c])
                << "\n";
        }
        out << "  confusion tp=" << m.confusion.tp << " fn=" << m.confusion.fn << " fp=" << m.confusion.fp
            << " tn=" << m.confusion.tn << "\n";
        for (const auto& f : m.flags) out << "  flag: " << f << "\n";
        for (const auto& f : run.cv.flags) out << "  flag: " << f << "\n";
    }
    const auto& ann = literature_ann_row();
    out << "\nliterature: " << ann.label << " accuracy " << format_table_number(ann.accuracy_pct) << "% (source "
        << ann.source << ")\n";
    return out.str();
}

void write_comparison_tsv(std::ostream& out, const std::vector<EvaluationRun>& runs) {
    out << "Classifiers\tAccuracy\tF-measure\tIncorrect classification\tsource\n";
    const auto& ann = literature_ann_row();
    out << ann.label << '\t' << format_table_number(ann.accuracy_pct) << "\t-\t-\t" << ann.source << '\n';
    for (const auto& run : runs) {
        const MetricsReport& m = run.cv.pooled;
        out << label_of(run) << '\t' << pct(m.accuracy) << '\t' << format_table_number(m.f_measure) << '\t'
            << format_table_number(m.incorrect_pct) << "\tcomputed\n";
    }
}

void write_detail_per_class_tsv(std::ostream& out, const EvaluationConfig& config,
                                const std::vector<EvaluationRun>& runs) {
    out << "Clusters\tClassifiers\tClass category\tPrecision\tRecall\tMean absolute Error\tRelative absolute Error\t"
           "Kappa Statistics\n";
    for (const auto& run : runs) {
        const MetricsReport& m = run.cv.pooled;
        const bool clustered = run.spec.mode != CascadeMode::Flat;
        for (std::size_t c = 0; c < m.precision_per_class.size(); ++c) {
            out << (clustered ? "Cluster " + std::to_string(c) : std::string("-")) << '\t';
            out << (c == 0 ? label_of(run) : std::string()) << '\t' << class_name(config, c) << '\t';
            out << pct(m.precision_per_class[c]) << '\t' << pct(m.recall_per_class[c]) << '\t';
            if (c == 0) {
                out << format_table_number(m.mae) << '\t'
                    << (m.rae_undefined ? std::string("undefined") : format_table_number(m.rae_pct)) << '\t'
                    << format_table_number(m.kappa);
            } else {
                out << "\t\t";
            }
            out << '\n';
        }
    }
}

void write_detail_per_cluster_tsv(std::ostream& out, const EvaluationConfig& config,
                                  const std::vector<EvaluationRun>& runs) {
    out << "Clusters\tClassifiers\tClass category\tInstances\tPrecision\tRecall\tMean absolute Error\t"
           "Relative absolute Error\tKappa Statistics\n";
    for (const auto& run : runs) {
        bool first_row = true;
        for (const auto& cr : run.cv.per_cluster) {
            const MetricsReport& m = cr.metrics;
            for (std::size_t c = 0; c < m.precision_per_class.size(); ++c) {
                out << "Cluster " << cr.cluster << '\t' << (first_row ? label_of(run) : std::string()) << '\t'
                    << class_name(config, c) << '\t';
                out << (c == 0 ? std::to_string(m.n) : std::string()) << '\t';
                out << pct(m.precision_per_class[c]) << '\t' << pct(m.recall_per_class[c]) << '\t';
                if (c == 0) {
                    out << format_table_number(m.mae) << '\t'
                        << (m.rae_undefined ? std::string("undefined") : format_table_number(m.rae_pct)) << '\t'
                        << format_table_number(m.kappa);
                } else {
                    out << "\t\t";
                }
                out << '\n';
                first_row = false;
            }
        }
    }
}

void write_plot_accuracy_tsv(std::ostream& out, const std::vector<EvaluationRun>& runs) {
    out << "classifier\taccuracy_pct\n";
    for (const auto& run : runs) out << label_of(run) << '\t' << pct(run.cv.pooled.accuracy) << '\n';
}

void write_plot_tpr_fmeasure_tsv(std::ostream& out, const std::vector<EvaluationRun>& runs) {
    out << "classifier\ttpr\tf_measure\n";
    for (const auto& run : runs) {
        out << label_of(run) << '\t' << format_table_number(run.cv.pooled.tpr_weighted) << '\t'
            << format_table_number(run.cv.pooled.f_measure) << '\n';
    }
}

}  // namespace kmc
