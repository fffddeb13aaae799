#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "kmc/cascade.hpp"
#include "kmc/error.hpp"
#include "kmc/learners.hpp"
#include "kmc/random.hpp"

using namespace kmc;

namespace {

CascadeSpec cascade_of(Algorithm a, std::size_t k, CascadeMode mode, std::uint64_t seed = 0, Hyperparameters hp = {}) {
    CascadeSpec s;
    s.k = k;
    s.mode = mode;
    s.classifier = ClassifierSpec{a, std::move(hp), seed};
    s.seed = seed;
    return s;
}

Instance numeric_row(std::vector<double> v) {
    Instance inst;
    for (double x : v) inst.values.emplace_back(x);
    return inst;
}

// two blobs, class A near (0,0) and class B near (10,10)
Dataset blobs(std::size_t per_class, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> X;
    std::vector<std::size_t> y;
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const std::size_t c = i % 2;
        const double centre = c == 0 ? 0.0 : 10.0;
        X.push_back({rng.normal(centre, 1.0), rng.normal(centre, 1.0)});
        y.push_back(c);
    }
    return th::numeric_dataset(X, y);
}

std::string saved(const CascadeModel& m) {
    std::ostringstream out;
    m.save(out);
    return out.str();
}

}  // namespace

TEST_CASE("mode names parse") {
    CHECK(parse_cascade_mode("per-cluster") == CascadeMode::PerCluster);
    CHECK(parse_cascade_mode("relabel") == CascadeMode::Relabel);
    CHECK(parse_cascade_mode("flat") == CascadeMode::Flat);
    for (CascadeMode m : {CascadeMode::PerCluster, CascadeMode::Relabel, CascadeMode::Flat})
        CHECK(parse_cascade_mode(cascade_mode_id(m)) == m);
    CHECK_THROWS_AS(parse_cascade_mode("soft"), Error);
}

TEST_CASE("k=1 per-cluster equals the plain classifier for every algorithm") {
    const Dataset train = th::tb(150, 3, 1.0, 0.7, 0.05);
    const Dataset probe = th::tb(60, 4, 1.0, 0.7, 0.05);
    const PreprocessModel pm = fit_preprocess(train);
    const auto X = pm.transform(train);
    const auto y = train.labels();
    for (Algorithm a : all_algorithms()) {
        CAPTURE(algorithm_id(a));
        const CascadeModel cascade = cascade_fit(cascade_of(a, 1, CascadeMode::PerCluster, 7), train);
        const auto plain = fit(ClassifierSpec{a, {}, 7}, TrainingSet{X, y, 2, pm.layout()});
        for (const auto& inst : probe.instances()) {
            const auto x = pm.transform(inst);
            CHECK(cascade.predict(inst) == plain->predict(x));
            CHECK(cascade.predict_proba(inst) == plain->predict_proba(x));
        }
    }
}

TEST_CASE("well-separated blobs: holdout accuracy 1 in every mode") {
    const Dataset train = blobs(30, 1);
    const Dataset test = blobs(20, 2);
    for (CascadeMode mode : {CascadeMode::PerCluster, CascadeMode::Relabel, CascadeMode::Flat}) {
        for (Algorithm a : all_algorithms()) {
            CAPTURE(algorithm_id(a));
            const CascadeModel m = cascade_fit(cascade_of(a, 2, mode, 5), train);
            std::size_t right = 0;
            for (const auto& inst : test.instances()) right += m.predict(inst) == *inst.label;
            CHECK(right == test.n());
        }
    }
}

TEST_CASE("model shape per mode") {
    const Dataset ds = blobs(20, 3);
    const auto per = cascade_fit(cascade_of(Algorithm::NaiveBayes, 2, CascadeMode::PerCluster), ds);
    CHECK(per.classifiers().size() == 2);
    CHECK(per.router().has_value());
    const auto rel = cascade_fit(cascade_of(Algorithm::NaiveBayes, 2, CascadeMode::Relabel), ds);
    CHECK(rel.classifiers().size() == 1);
    const auto flat = cascade_fit(cascade_of(Algorithm::NaiveBayes, 2, CascadeMode::Flat), ds);
    CHECK(flat.classifiers().size() == 1);
    CHECK_FALSE(flat.router().has_value());
    CHECK_FALSE(flat.route(ds[0]).has_value());
}

TEST_CASE("canonical order puts the class-0 cluster first") {
    const Dataset ds = blobs(20, 4);
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const auto m = cascade_fit(cascade_of(Algorithm::KNN, 2, CascadeMode::PerCluster, seed), ds);
        CHECK(m.router()->cluster_class == std::vector<std::size_t>{0, 1});
    }
}

TEST_CASE("relabel with class-pure clusters leaves the labels unchanged") {
    const Dataset ds = blobs(25, 5);
    const auto m = cascade_fit(cascade_of(Algorithm::C45Tree, 2, CascadeMode::Relabel), ds);
    CHECK(m.training_targets() == ds.labels());
}

TEST_CASE("relabel trains on cluster-majority labels") {
    // one cluster near 0 holds 3 A and 1 B; the relabeled B must become A
    const Dataset ds = th::numeric_dataset({{0.0}, {0.1}, {0.2}, {0.15}, {10.0}, {10.1}}, {0, 0, 0, 1, 1, 1});
    const auto m = cascade_fit(cascade_of(Algorithm::KNN, 2, CascadeMode::Relabel), ds);
    CHECK(m.training_targets() == std::vector<std::size_t>{0, 0, 0, 0, 1, 1});
}

TEST_CASE("routing: pure clusters, centroids, ties and the partition") {
    const Dataset ds = th::numeric_dataset({{0.0}, {0.25}, {0.75}, {1.0}}, {0, 0, 1, 1});
    const auto m = cascade_fit(cascade_of(Algorithm::KNN, 2, CascadeMode::PerCluster), ds);
    // a training instance of a pure cluster gets that cluster's class
    CHECK(m.predict(ds[0]) == 0);
    CHECK(m.predict(ds[3]) == 1);
    // the constant predictor of a pure cluster
    const auto p = m.predict_proba(ds[0]);
    CHECK(p[0] == doctest::Approx(kConstantConfidence));
    // centroid probes
    for (std::size_t j = 0; j < 2; ++j) {
        const Vector& c = m.router()->centroids[j];
        CHECK(&m.classifier_for(c) == m.classifiers()[j].get());
    }
    // exact midpoint of 0.125 and 0.875 goes to cluster 0
    CHECK(m.route(numeric_row({0.5})) == 0u);
    // every probe is handled by exactly one classifier
    std::vector<std::size_t> handled(2, 0);
    for (int i = 0; i <= 100; ++i) {
        const Instance inst = numeric_row({i / 100.0});
        const auto r = m.route(inst);
        REQUIRE(r.has_value());
        CHECK(*r < 2);
        CHECK(&m.classifier_for(m.preprocess().transform(inst)) == m.classifiers()[*r].get());
        ++handled[*r];
    }
    CHECK(handled[0] + handled[1] == 101);
}

TEST_CASE("routed knn with neighbours A, A, B gives (2/3, 1/3)") {
    const Dataset ds = th::numeric_dataset({{0.0}, {0.1}, {0.3}, {5.0}}, {0, 0, 1, 1});
    const auto m = cascade_fit(cascade_of(Algorithm::KNN, 1, CascadeMode::PerCluster), ds);
    const auto p = m.predict_proba(numeric_row({0.05}));
    CHECK(p[0] == doctest::Approx(2.0 / 3.0));
    CHECK(p[1] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("fitting is deterministic") {
    const Dataset ds = th::tb(120, 8, 1.0, 0.7, 0.05);
    for (Algorithm a : all_algorithms()) {
        const auto spec = cascade_of(a, 2, CascadeMode::PerCluster, 11);
        CHECK(saved(cascade_fit(spec, ds)) == saved(cascade_fit(spec, ds)));
    }
}

TEST_CASE("pipeline file round-trips exactly") {
    const Dataset ds = th::tb(120, 9, 1.0, 0.7, 0.05);
    const Dataset probe = th::tb(50, 10, 1.0, 0.7, 0.1);
    for (CascadeMode mode : {CascadeMode::PerCluster, CascadeMode::Relabel, CascadeMode::Flat}) {
        for (Algorithm a : all_algorithms()) {
            CAPTURE(algorithm_id(a));
            const auto m = cascade_fit(cascade_of(a, 2, mode, 2), ds);
            std::istringstream in(saved(m));
            const auto back = CascadeModel::load(in);
            CHECK(back.spec() == m.spec());
            CHECK(saved(back) == saved(m));
            for (const auto& inst : probe.instances()) CHECK(back.predict_proba(inst) == m.predict_proba(inst));
        }
    }
}

TEST_CASE("pipeline file: version mismatch and corruption") {
    const auto m = cascade_fit(cascade_of(Algorithm::NaiveBayes, 2, CascadeMode::PerCluster), blobs(10, 6));
    std::string text = saved(m);
    REQUIRE(text.rfind("kmc-pipeline 1\n", 0) == 0);
    std::string future = text;
    future.replace(0, 14, "kmc-pipeline 2");
    std::istringstream a(future);
    CHECK_THROWS_AS(CascadeModel::load(a), VersionError);
    std::istringstream b(text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(CascadeModel::load(b), Error);
    std::istringstream c("not a model\n");
    CHECK_THROWS_AS(CascadeModel::load(c), Error);
    CHECK_THROWS_AS(CascadeModel::load(std::filesystem::path("/nonexistent/model.kmc")), Error);
}

TEST_CASE("preconditions") {
    const Dataset tiny = th::numeric_dataset({{0.0}, {1.0}}, {0, 1});
    CHECK_THROWS_AS(cascade_fit(cascade_of(Algorithm::KNN, 3, CascadeMode::PerCluster), tiny), Error);
    CHECK_THROWS_AS(cascade_fit(cascade_of(Algorithm::KNN, 0, CascadeMode::PerCluster), tiny), Error);
    const auto m = cascade_fit(cascade_of(Algorithm::KNN, 1, CascadeMode::PerCluster), tiny);
    CHECK_THROWS_AS(m.predict(numeric_row({0.0, 1.0})), Error);
}
