#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "helpers.hpp"
#include "kmc/cross_validation.hpp"
#include "kmc/error.hpp"
#include "kmc/metrics.hpp"
#include "kmc/random.hpp"
#include "kmc/report.hpp"
#include "oracles.hpp"

using namespace kmc;

namespace {

// Always predicts the majority class of its training fold.
class MajorityPredictor final : public Predictor {
public:
    explicit MajorityPredictor(std::size_t target) : target_(target) {}
    std::vector<double> predict_proba(const Instance&) const override {
        std::vector<double> p(2, 0.0);
        p[target_] = 1.0;
        return p;
    }

private:
    std::size_t target_;
};

std::unique_ptr<Predictor> majority_trainer(const Dataset& train, std::uint64_t) {
    const auto counts = train.class_counts();
    return std::make_unique<MajorityPredictor>(counts[1] > counts[0] ? 1 : 0);
}

Dataset labeled(std::size_t n0, std::size_t n1) {
    std::vector<std::vector<double>> X;
    std::vector<std::size_t> y;
    for (std::size_t i = 0; i < n0 + n1; ++i) {
        X.push_back({static_cast<double>(i)});
        y.push_back(i < n0 ? 0 : 1);
    }
    return th::numeric_dataset(X, y);
}

CascadeSpec spec_for(Algorithm a, std::size_t k = 2, CascadeMode mode = CascadeMode::PerCluster) {
    CascadeSpec s;
    s.k = k;
    s.mode = mode;
    s.classifier.algorithm = a;
    return s;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::vector<std::string> cells_of(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream in(line);
    for (std::string cell; std::getline(in, cell, '\t');) out.push_back(cell);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// confusion and metrics

TEST_CASE("confusion: perfect, flipped and the hand-counted case") {
    std::vector<std::size_t> truth(100), flipped(100);
    for (std::size_t i = 0; i < 100; ++i) {
        truth[i] = i < 50 ? 0 : 1;
        flipped[i] = 1 - truth[i];
    }
    const auto perfect = confusion(truth, truth);
    CHECK(perfect == ConfusionMatrix{50, 0, 0, 50});
    const auto wrong = confusion(truth, flipped);
    CHECK(wrong == ConfusionMatrix{0, 50, 50, 0});
    CHECK(confusion(std::vector<std::size_t>{0, 0, 1, 1}, std::vector<std::size_t>{0, 1, 0, 1}) ==
          ConfusionMatrix{1, 1, 1, 1});
    CHECK_THROWS_AS(confusion(std::vector<std::size_t>{0, 1}, std::vector<std::size_t>{0}), Error);
    CHECK_THROWS_AS(confusion(std::vector<std::size_t>{}, std::vector<std::size_t>{}), Error);
}

TEST_CASE("metrics: perfect, (40,10,5,45) and the degenerate rule") {
    const auto p = metrics({50, 0, 0, 50});
    CHECK(p.accuracy == 1.0);
    CHECK(p.precision == 1.0);
    CHECK(p.recall == 1.0);
    CHECK(p.f_measure == 1.0);

    const auto m = metrics({40, 10, 5, 45});
    CHECK(m.accuracy == 0.85);
    CHECK(m.precision == 40.0 / 45.0);
    CHECK(m.recall == 0.8);
    CHECK(m.f_measure == doctest::Approx(0.8421).epsilon(1e-4));
    CHECK(m.f_measure == doctest::Approx(2.0 * (8.0 / 9.0) * 0.8 / (8.0 / 9.0 + 0.8)).epsilon(1e-15));

    const auto d = metrics({0, 10, 0, 90});
    CHECK(d.recall == 0.0);
    CHECK(d.precision == 0.0);
    CHECK(d.precision_undefined);
    CHECK_FALSE(d.recall_undefined);
}

TEST_CASE("kappa: perfect, (40,10,5,45), chance level and P(E)=1") {
    CHECK(kappa({50, 0, 0, 50}).kappa == 1.0);
    const auto k = kappa({40, 10, 5, 45});
    CHECK(k.p_a == 0.85);
    CHECK(k.p_e == 0.5);
    CHECK(k.kappa == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(kappa({25, 25, 25, 25}).kappa == 0.0);
    const auto u = kappa({100, 0, 0, 0});
    CHECK(u.undefined);
    CHECK(u.kappa == 0.0);
}

TEST_CASE("mae/rae: zero error, prior baseline, and the 0.3 example") {
    const std::vector<std::size_t> y = {0, 1};
    const std::vector<double> priors = {0.5, 0.5};
    const std::vector<std::vector<double>> onehot = {{1.0, 0.0}, {0.0, 1.0}};
    const auto z = mae_rae(y, onehot, priors);
    CHECK(z.mae == 0.0);
    CHECK(z.rae_pct == 0.0);

    const std::vector<std::vector<double>> same = {{0.5, 0.5}, {0.5, 0.5}};
    CHECK(mae_rae(y, same, priors).rae_pct == doctest::Approx(100.0).epsilon(1e-15));

    const std::vector<std::vector<double>> probas = {{0.8, 0.2}, {0.4, 0.6}};
    CHECK(mae_rae(y, probas, priors).mae == doctest::Approx(0.3).epsilon(1e-15));

    const std::vector<double> bad = {0.5, 0.6};
    CHECK_THROWS_AS(mae_rae(y, probas, bad), Error);
    // a degenerate prior that is exactly right leaves nothing to normalise by
    const std::vector<std::size_t> y0 = {0, 0};
    const std::vector<double> certain = {1.0, 0.0};
    CHECK(mae_rae(y0, probas, certain).rae_undefined);
}

TEST_CASE("summarize: accuracy + incorrect/100 = 1, rates in range, swap invariance of kappa") {
    Rng rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng.uniform_index(60);
        std::vector<std::size_t> truth(n), pred(n);
        std::vector<std::vector<double>> probas(n), priors(n, std::vector<double>{0.5, 0.5});
        for (std::size_t i = 0; i < n; ++i) {
            truth[i] = rng.uniform_index(2);
            const double p = rng.uniform01();
            probas[i] = {p, 1.0 - p};
            pred[i] = argmax(probas[i]);
        }
        const auto r0 = summarize(truth, pred, probas, priors, 0);
        const auto r1 = summarize(truth, pred, probas, priors, 1);
        CHECK(std::abs(r0.accuracy + r0.incorrect_pct / 100.0 - 1.0) <= 1e-12);
        CHECK(r0.confusion.total() == n);
        CHECK(r0.kappa >= -1.0);
        CHECK(r0.kappa <= 1.0);
        for (double v : {r0.accuracy, r0.f_measure, r0.tpr_weighted, r0.mae}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        CHECK(r0.kappa == doctest::Approx(r1.kappa).epsilon(1e-12));
        CHECK(r0.confusion.swapped() == r1.confusion);
        CHECK(r0.tpr_weighted == doctest::Approx(r0.accuracy).epsilon(1e-12));
    }
}

TEST_CASE("metrics and kappa agree with recomputation from raw streams") {
    Rng rng(8);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(200);
        std::vector<std::size_t> truth(n), pred(n);
        for (std::size_t i = 0; i < n; ++i) {
            truth[i] = rng.uniform_index(2);
            pred[i] = rng.uniform_index(2);
        }
        for (std::size_t positive : {0u, 1u}) {
            const auto cm = confusion(truth, pred, positive);
            const auto m = metrics(cm);
            const auto k = kappa(cm);
            const auto o = oracle::metrics_from_streams(truth, pred, positive);
            CHECK(std::abs(m.accuracy - o.accuracy) <= 1e-12);
            CHECK(std::abs(m.precision - o.precision) <= 1e-12);
            CHECK(std::abs(m.recall - o.recall) <= 1e-12);
            CHECK(std::abs(m.f_measure - o.f) <= 1e-12);
            CHECK(std::abs(k.kappa - o.kappa) <= 1e-12);
            CHECK(std::abs(k.p_e - o.p_e) <= 1e-12);
        }
    }
}

TEST_CASE("mae agrees with a direct sum") {
    Rng rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.uniform_index(50);
        std::vector<std::size_t> y(n);
        std::vector<std::vector<double>> p(n);
        double direct = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = rng.uniform_index(2);
            const double q = rng.uniform01();
            p[i] = {q, 1.0 - q};
            for (std::size_t c = 0; c < 2; ++c) direct += std::abs((y[i] == c ? 1.0 : 0.0) - p[i][c]);
        }
        direct /= static_cast<double>(2 * n);
        CHECK(std::abs(mae_rae(y, p, std::vector<double>{0.3, 0.7}).mae - direct) <= 1e-12);
    }
}

TEST_CASE("macro average is the fold mean") {
    MetricsReport a, b;
    a.accuracy = 0.8;
    b.accuracy = 0.6;
    a.kappa = 0.5;
    b.kappa = 0.1;
    a.precision_per_class = b.precision_per_class = {0.5, 0.5};
    a.recall_per_class = b.recall_per_class = {0.5, 0.5};
    a.f_measure_per_class = b.f_measure_per_class = {0.5, 0.5};
    a.rae_pct = 40.0;
    b.rae_undefined = true;
    const std::vector<MetricsReport> folds = {a, b};
    const auto m = macro_average(folds);
    CHECK(m.accuracy == doctest::Approx(0.7));
    CHECK(m.kappa == doctest::Approx(0.3));
    CHECK(m.rae_pct == doctest::Approx(40.0));
}

// ---------------------------------------------------------------------------
// cross-validation

TEST_CASE("700 instances, 10 folds: 70 each, stratified, disjoint and covering") {
    std::vector<std::size_t> labels(700);
    for (std::size_t i = 0; i < 700; ++i) labels[i] = i % 7 < 3 ? 1 : 0;  // 400 / 300
    const auto folds = stratified_folds(labels, 2, 10, 5);
    REQUIRE(folds.size() == 10);
    std::set<std::size_t> all;
    for (const auto& f : folds) {
        CHECK(f.size() == 70);
        CHECK(std::is_sorted(f.begin(), f.end()));
        std::size_t ones = 0;
        for (std::size_t i : f) ones += labels[i];
        CHECK(std::abs(static_cast<double>(ones) - 30.0) <= 1.0);
        all.insert(f.begin(), f.end());
    }
    CHECK(all.size() == 700);
    CHECK(stratified_folds(labels, 2, 10, 5) == folds);
}

TEST_CASE("folds = n runs leave-one-out") {
    const Dataset ds = th::tb(40, 4, 2.0, 0.8);
    CrossValidationOptions opt;
    opt.folds = 40;
    opt.seed = 2;
    const auto r = cross_validate(cascade_trainer(spec_for(Algorithm::KNN, 2)), ds, opt);
    CHECK(r.leave_one_out);
    CHECK(r.folds_used == 40);
    std::size_t right = 0;
    for (const auto& p : r.predictions) right += p.truth == p.predicted;
    CHECK(r.pooled.accuracy == doctest::Approx(right / 40.0).epsilon(1e-15));
    for (const auto& f : r.folds) CHECK(f.test_n == 1);
}

TEST_CASE("constant majority trainer scores the majority prevalence") {
    const auto r = cross_validate(majority_trainer, labeled(70, 30), {10, 1, 0});
    CHECK(r.pooled.accuracy == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(r.pooled.confusion.total() == 100);
    CHECK(r.pooled.kappa == 0.0);
}

TEST_CASE("folds over the smallest class are reduced and flagged") {
    const auto r = cross_validate(majority_trainer, labeled(20, 4), {10, 1, 0});
    CHECK(r.folds_requested == 10);
    CHECK(r.folds_used == 4);
    CHECK(std::find(r.flags.begin(), r.flags.end(), "folds_reduced_from_10_to_4") != r.flags.end());
    CHECK_THROWS_AS(cross_validate(majority_trainer, labeled(20, 4), {1, 1, 0}), Error);
    CHECK_THROWS_AS(cross_validate(majority_trainer, labeled(20, 4), {25, 1, 0}), Error);
}

TEST_CASE("fold seeds differ per fold; training priors come from the training fold") {
    CHECK(fold_seed(1, 0) != fold_seed(1, 1));
    CHECK(fold_seed(1, 0) != fold_seed(2, 0));
    const auto r = cross_validate(majority_trainer, labeled(70, 30), {10, 1, 0});
    for (const auto& p : r.predictions) {
        CHECK(p.prior[0] == doctest::Approx(63.0 / 90.0));
        CHECK(p.prior[1] == doctest::Approx(27.0 / 90.0));
    }
}

TEST_CASE("cascade cross-validation: pooled counts, clusters and determinism") {
    const Dataset ds = th::tb(200, 6, 2.0, 0.8, 0.05);
    CrossValidationOptions opt;
    opt.seed = 9;
    const auto trainer = cascade_trainer(spec_for(Algorithm::NaiveBayes, 2));
    const auto r = cross_validate(trainer, ds, opt);
    CHECK(r.pooled.confusion.total() == 200);
    CHECK(r.predictions.size() == 200);
    std::size_t routed = 0;
    for (const auto& c : r.per_cluster) routed += c.metrics.n;
    CHECK(routed == 200);
    for (const auto& p : r.predictions) CHECK(p.cluster.has_value());
    std::size_t fold_total = 0;
    for (const auto& f : r.folds) fold_total += f.test_n;
    CHECK(fold_total == 200);
    const auto again = cross_validate(trainer, ds, opt);
    CHECK(again.pooled.accuracy == r.pooled.accuracy);
    CHECK(again.pooled.mae == r.pooled.mae);
    for (std::size_t i = 0; i < 200; ++i) CHECK(again.predictions[i].proba == r.predictions[i].proba);

    const auto flat = cross_validate(cascade_trainer(spec_for(Algorithm::NaiveBayes, 2, CascadeMode::Flat)), ds, opt);
    CHECK(flat.per_cluster.empty());
}

// ---------------------------------------------------------------------------
// reports

TEST_CASE("report files: comparison, per-class detail, plot data and json fields") {
    const Dataset ds = th::tb(120, 7, 2.0, 0.8, 0.05);
    std::vector<EvaluationRun> runs;
    for (Algorithm a : all_algorithms()) {
        CascadeSpec spec = spec_for(a, 2);
        CrossValidationOptions opt;
        opt.seed = 1;
        runs.push_back({spec, cross_validate(cascade_trainer(spec), ds, opt)});
    }
    EvaluationConfig config{"synthetic", "tb-table1", 10, 1, {"PTB", "RPTB"}};

    std::ostringstream cmp;
    write_comparison_tsv(cmp, runs);
    const auto rows = lines_of(cmp.str());
    REQUIRE(rows.size() == 1 + 1 + 7);
    CHECK(rows[0] == "Classifiers\tAccuracy\tF-measure\tIncorrect classification\tsource");
    CHECK(cells_of(rows[1])[0] == literature_ann_row().label);
    CHECK(cells_of(rows[1])[4] == "ref[1]");
    for (std::size_t i = 2; i < rows.size(); ++i) {
        const auto c = cells_of(rows[i]);
        REQUIRE(c.size() == 5);
        CHECK(c[4] == "computed");
        CHECK(std::abs(std::stod(c[3]) - (100.0 - std::stod(c[1]))) <= 1e-9);
    }

    std::ostringstream detail;
    write_detail_per_class_tsv(detail, config, runs);
    CHECK(lines_of(detail.str()).size() == 1 + 2 * 7);

    std::ostringstream plot1, plot2;
    write_plot_accuracy_tsv(plot1, runs);
    write_plot_tpr_fmeasure_tsv(plot2, runs);
    CHECK(lines_of(plot1.str()).size() == 8);
    CHECK(lines_of(plot2.str()).size() == 8);

    const auto j = nlohmann::json::parse(report_json(config, runs));
    CHECK(j.at("schema_version") == kReportSchemaVersion);
    REQUIRE(j.at("runs").size() == 7);
    for (const char* key : {"accuracy", "precision_per_class", "recall_per_class", "f_measure", "kappa", "p_a", "p_e",
                            "mae", "rae_pct", "incorrect_pct", "folds", "config"}) {
        CHECK(j["runs"][0].contains(key));
    }
    CHECK(j["runs"][0]["folds"].size() == 10);
    CHECK(j["deviations"].size() == report_deviations().size());
    CHECK(report_json(config, runs) == report_json(config, runs));
    CHECK_FALSE(report_text(config, runs).empty());
}

TEST_CASE("format_table_number uses 12 significant digits") {
    CHECK(format_table_number(0.5) == "0.5");
    CHECK(format_table_number(1.0 / 3.0) == "0.333333333333");
    CHECK(format_table_number(100.0) == "100");
}
