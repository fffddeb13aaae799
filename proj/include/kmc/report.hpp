#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kmc/cascade.hpp"
#include "kmc/cross_validation.hpp"

namespace kmc {

inline constexpr int kReportSchemaVersion = 1;

/// Run-level settings echoed into every report.
struct EvaluationConfig {
    std::string data_source;
    std::string schema_name;
    std::size_t folds = 10;
    std::uint64_t seed = 0;
    std::vector<std::string> class_names;
};

/// One cross-validated classifier under a pipeline.
struct EvaluationRun {
    CascadeSpec spec;
    CrossValidationReport cv;
};

/// Fixed literature row shown beside computed results in the comparison table.
struct LiteratureRow {
    std::string label;
    double accuracy_pct;
    std::string source;
};
const LiteratureRow& literature_ann_row();

/// Modelling choices that every report lists.
const std::vector<std::string>& report_deviations();

std::string report_json(const EvaluationConfig& config, const std::vector<EvaluationRun>& runs);
std::string report_text(const EvaluationConfig& config, const std::vector<EvaluationRun>& runs);

/// Classifiers / Accuracy / F-measure / Incorrect classification, literature row first.
/// Accuracy and incorrect are percentages; F-measure is a fraction.
void write_comparison_tsv(std::ostream& out, const std::vector<EvaluationRun>& runs);
/// Two rows per classifier (one per class) with precision, recall, MAE, RAE, kappa.
void write_detail_per_class_tsv(std::ostream& out, const EvaluationConfig& config,
                                const std::vector<EvaluationRun>& runs);
/// Rows per (cluster, class), computed on the test instances routed to each cluster.
void write_detail_per_cluster_tsv(std::ostream& out, const EvaluationConfig& config,
                                  const std::vector<EvaluationRun>& runs);
void write_plot_accuracy_tsv(std::ostream& out, const std::vector<EvaluationRun>& runs);
void write_plot_tpr_fmeasure_tsv(std::ostream& out, const std::vector<EvaluationRun>& runs);

/// %.12g formatting used throughout the tables.
std::string format_table_number(double v);

}  // namespace kmc
