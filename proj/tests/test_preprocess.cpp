#include <doctest.h>

#include "helpers.hpp"
#include "kmc/error.hpp"
#include "kmc/kmeans.hpp"
#include "kmc/preprocess.hpp"

using namespace kmc;

namespace {

Schema mixed_schema() {
    Schema s;
    s.attributes = {{"num", AttributeKind::Numeric, {}},
                    {"cat", AttributeKind::Categorical, {"yes", "no", "maybe"}},
                    {"class", AttributeKind::Categorical, {"A", "B"}}};
    s.class_index = 2;
    return s;
}

Instance row(Cell num, Cell cat, std::size_t label) {
    Instance inst;
    inst.values = {num, cat};
    inst.label = label;
    return inst;
}

}  // namespace

TEST_CASE("numeric statistics ignore missing cells") {
    const Dataset ds(mixed_schema(), {row(1.0, Category{0}, 0), row(2.0, Category{0}, 1), row(Missing{}, Category{1}, 0),
                                      row(3.0, Category{1}, 1)});
    const PreprocessModel pm = fit_preprocess(ds);
    const auto& num = pm.features()[0].numeric;
    CHECK(num.mean == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(num.min == 1.0);
    CHECK(num.max == 3.0);
    // the missing row is imputed with the mean -> 0.5 after scaling
    CHECK(pm.transform(ds[2])[0] == doctest::Approx(0.5));
}

TEST_CASE("categorical mode and one-hot slots") {
    const Dataset ds(mixed_schema(), {row(1.0, Category{0}, 0), row(2.0, Category{0}, 1), row(3.0, Category{1}, 0)});
    const PreprocessModel pm = fit_preprocess(ds);
    CHECK(pm.features()[1].categorical.mode == 0);  // "yes"
    // "maybe" never seen: only two slots
    CHECK(pm.dimension() == 3);
    const Vector v = pm.transform(ds[0]);
    CHECK(v == Vector{0.0, 1.0, 0.0});
    CHECK(pm.transform(ds[2]) == Vector{1.0, 0.0, 1.0});
}

TEST_CASE("unseen category maps to the all-zero block") {
    const Dataset ds(mixed_schema(), {row(1.0, Category{0}, 0), row(2.0, Category{1}, 1)});
    const PreprocessModel pm = fit_preprocess(ds);
    const Vector v = pm.transform(row(1.5, Category{2}, 0));
    CHECK(v[1] == 0.0);
    CHECK(v[2] == 0.0);
}

TEST_CASE("mode ties go to the lowest category index") {
    const Dataset ds(mixed_schema(), {row(1.0, Category{1}, 0), row(2.0, Category{0}, 1), row(3.0, Missing{}, 1)});
    const PreprocessModel pm = fit_preprocess(ds);
    CHECK(pm.features()[1].categorical.mode == 0);
    const Vector v = pm.transform(ds[2]);
    CHECK(v[1 + static_cast<std::size_t>(pm.features()[1].categorical.slot[0])] == 1.0);
}

TEST_CASE("min maps to 0, max to 1, constant column to 0, out-of-range clamps") {
    const Dataset ds(mixed_schema(), {row(4.0, Category{0}, 0), row(8.0, Category{1}, 1)});
    const PreprocessModel pm = fit_preprocess(ds);
    CHECK(pm.transform(ds[0])[0] == 0.0);
    CHECK(pm.transform(ds[1])[0] == 1.0);
    CHECK(pm.transform(row(100.0, Category{0}, 0))[0] == 1.0);
    CHECK(pm.transform(row(-100.0, Category{0}, 0))[0] == 0.0);

    const Dataset flat(mixed_schema(), {row(7.0, Category{0}, 0), row(7.0, Category{1}, 1)});
    const PreprocessModel pf = fit_preprocess(flat);
    CHECK(pf.transform(flat[0])[0] == 0.0);
    CHECK(pf.transform(row(9.0, Category{0}, 0))[0] == 0.0);
}

TEST_CASE("column without missing values: imputation path changes nothing") {
    const Dataset full(mixed_schema(), {row(1.0, Category{0}, 0), row(3.0, Category{1}, 1)});
    const Dataset with_gap(mixed_schema(), {row(1.0, Category{0}, 0), row(3.0, Category{1}, 1), row(Missing{}, Category{0}, 0)});
    CHECK(fit_preprocess(full).features()[0].numeric == fit_preprocess(with_gap).features()[0].numeric);
}

TEST_CASE("entirely missing column is an error") {
    const Dataset ds(mixed_schema(), {row(Missing{}, Category{0}, 0), row(Missing{}, Category{1}, 1)});
    CHECK_THROWS_AS(fit_preprocess(ds), Error);
}

TEST_CASE("encoded training data lies in [0,1] and the layout tiles [0, D)") {
    const Dataset ds = th::tb(200, 11, 2.0, 0.8, 0.1);
    const PreprocessModel pm = fit_preprocess(ds);
    CHECK(pm.dimension() == 19);
    std::size_t next = 0;
    for (const auto& b : pm.layout().blocks) {
        CHECK(b.offset == next);
        next += b.width;
    }
    CHECK(next == pm.dimension());
    for (const auto& v : pm.transform(ds)) {
        CHECK(v.size() == 19);
        for (double x : v) {
            CHECK(x >= 0.0);
            CHECK(x <= 1.0);
        }
    }
}

TEST_CASE("distance on encoded vectors is a proper squared metric") {
    const Dataset ds = th::tb(40, 2, 1.0, 0.7, 0.05);
    const auto X = fit_preprocess(ds).transform(ds);
    for (std::size_t i = 0; i < X.size(); ++i) {
        for (std::size_t j = 0; j < X.size(); ++j) {
            const double d = squared_distance(X[i], X[j]);
            CHECK(d >= 0.0);
            CHECK(d == squared_distance(X[j], X[i]));
            CHECK((d == 0.0) == (X[i] == X[j]));
        }
    }
}

TEST_CASE("preprocess model save/load is exact") {
    const Dataset ds = th::tb(50, 4, 2.0, 0.8, 0.1);
    const PreprocessModel pm = fit_preprocess(ds);
    io::Writer w;
    pm.save(w);
    io::Reader r(w.take());
    const PreprocessModel back = PreprocessModel::load(r);
    CHECK(back == pm);
}

TEST_CASE("schema mismatch is an error") {
    const Dataset ds(mixed_schema(), {row(1.0, Category{0}, 0), row(3.0, Category{1}, 1)});
    const PreprocessModel pm = fit_preprocess(ds);
    Instance shortrow;
    shortrow.values = {1.0};
    CHECK_THROWS_AS(pm.transform(shortrow), Error);
    Instance kind;
    kind.values = {Category{0}, Category{0}};
    CHECK_THROWS_AS(pm.transform(kind), Error);
}
