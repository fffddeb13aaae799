#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "helpers.hpp"
#include "kmc/cascade.hpp"
#include "kmc/cli.hpp"
#include "kmc/dataset.hpp"

using namespace kmc;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

// Generates a dataset once per directory and returns its path.
std::string generated(const fs::path& dir, std::size_t n = 120, const std::string& seed = "3") {
    const std::string path = (dir / "data.csv").string();
    const auto r = run({"generate", "--n", std::to_string(n), "--seed", seed, "--separation", "2", "--skew", "0.8",
                        "--missing", "0.05", "--out", path});
    REQUIRE(r.code == 0);
    return path;
}

}  // namespace

TEST_CASE("generate writes the requested rows and reports class counts") {
    const auto dir = th::scratch("cli_generate");
    const std::string path = (dir / "tb.csv").string();
    const auto r = run({"generate", "--n", "700", "--balance", "0.5", "--seed", "1", "--out", path});
    CHECK(r.code == 0);
    CHECK(lines_of(slurp(path)).size() == 701);
    CHECK(r.out.find("700 rows") != std::string::npos);
    CHECK(r.out.find("PTB: 350") != std::string::npos);
    CHECK(r.out.find("RPTB: 350") != std::string::npos);
}

TEST_CASE("usage errors exit with 2") {
    CHECK(run({"generate", "--n", "700"}).code == 2);
    const auto bad = run({"generate", "--balance", "1.5", "--out", (th::scratch("cli_bad") / "x.csv").string()});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("class_balance") != std::string::npos);
    CHECK(run({}).code == 2);
    CHECK(run({"fly"}).code == 2);
    CHECK(run({"generate", "--n", "many", "--out", "x.csv"}).code == 2);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("train then predict matches the in-memory pipeline exactly") {
    const auto dir = th::scratch("cli_train");
    const std::string data = generated(dir);
    const std::string model = (dir / "m.kmc").string();
    const std::string preds = (dir / "p.csv").string();
    const auto t = run({"train", "--data", data, "--classifier", "c45", "--seed", "4", "--out", model});
    REQUIRE(t.code == 0);
    CHECK(t.out.find("cluster 0") != std::string::npos);
    REQUIRE(run({"predict", "--model", model, "--data", data, "--out", preds}).code == 0);

    CascadeSpec spec;
    spec.k = 2;
    spec.classifier = {Algorithm::C45Tree, {}, 4};
    spec.seed = 4;
    const Dataset ds = load_csv(data, tb_table1_schema());
    const CascadeModel mem = cascade_fit(spec, ds);
    std::ostringstream bytes;
    mem.save(bytes);
    CHECK(slurp(model) == bytes.str());

    const auto rows = lines_of(slurp(preds));
    REQUIRE(rows.size() == ds.n() + 1);
    CHECK(rows[0] == "row,predicted,probability");
    const auto& names = ds.schema().class_attribute().categories;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const auto p = mem.predict_proba(ds[i]);
        const std::size_t c = argmax(p);
        CHECK(rows[i + 1] == std::to_string(i) + "," + names[c] + "," + format_real(p[c]));
    }
    // without --out the rows go to standard output
    CHECK(run({"predict", "--model", model, "--data", data}).out == slurp(preds));
}

TEST_CASE("predict: missing model, version mismatch and unseen categories") {
    const auto dir = th::scratch("cli_predict");
    const std::string data = generated(dir);
    const auto missing = run({"predict", "--model", (dir / "absent.kmc").string(), "--data", data});
    CHECK(missing.code == 1);
    CHECK_FALSE(missing.err.empty());

    const std::string model = (dir / "m.kmc").string();
    REQUIRE(run({"train", "--data", data, "--classifier", "nb", "--out", model}).code == 0);
    std::string text = slurp(model);
    text.replace(0, 14, "kmc-pipeline 9");
    const std::string future = (dir / "future.kmc").string();
    write(future, text);
    const auto v = run({"predict", "--model", future, "--data", data});
    CHECK(v.code == 1);
    CHECK(v.err.find("version") != std::string::npos);

    // HIV = "unknown" was never seen in training; no class column either
    const std::string probe = (dir / "probe.csv").string();
    write(probe,
          "Age,chroniccough(weeks),weightloss,intermittentfever(days),nightsweats,Bloodcough,chestpain,HIV,"
          "Radiographicfindings,Sputum,wheezing\n"
          "40,6,yes,10,yes,no,yes,unknown,abnormal,positive,no\n");
    const auto p = run({"predict", "--model", model, "--data", probe});
    CHECK(p.code == 0);
    CHECK(lines_of(p.out).size() == 2);
}

TEST_CASE("evaluate writes the report set and prints the comparison") {
    const auto dir = th::scratch("cli_evaluate");
    const std::string data = generated(dir);
    const auto out_dir = dir / "rep";
    const auto r = run({"evaluate", "--data", data, "--k", "2", "--seed", "5", "--out", out_dir.string()});
    REQUIRE(r.code == 0);
    for (const char* f : {"report.json", "comparison.tsv", "detail_per_class.tsv", "detail_per_cluster.tsv",
                          "plot_accuracy.tsv", "plot_tpr_fmeasure.tsv"}) {
        CHECK(fs::exists(out_dir / f));
    }
    CHECK(lines_of(slurp(out_dir / "comparison.tsv")).size() == 9);
    CHECK(r.out.find(slurp(out_dir / "comparison.tsv")) == 0);
    const auto j = nlohmann::json::parse(slurp(out_dir / "report.json"));
    CHECK(j["runs"].size() == 7);
    CHECK(j["config"]["folds"] == 10);
    CHECK(j["config"]["seed"] == 5);

    // same flags, same bytes
    const auto again_dir = dir / "rep2";
    REQUIRE(run({"evaluate", "--data", data, "--k", "2", "--seed", "5", "--out", again_dir.string()}).code == 0);
    for (const auto& entry : fs::directory_iterator(out_dir)) {
        CHECK(slurp(entry.path()) == slurp(again_dir / entry.path().filename()));
    }
}

TEST_CASE("evaluate: formats, modes and bad flags") {
    const auto dir = th::scratch("cli_modes");
    const std::string data = generated(dir, 80);
    const auto text = run({"evaluate", "--data", data, "--classifier", "nb", "--report-format", "text"});
    CHECK(text.code == 0);
    CHECK_FALSE(text.out.empty());
    CHECK(run({"evaluate", "--data", data, "--classifier", "nb", "--flat"}).code == 0);
    CHECK(run({"evaluate", "--data", data, "--classifier", "nb", "--mode", "relabel"}).code == 0);
    CHECK(run({"evaluate", "--data", data, "--classifier", "knn", "--hp", "k=5"}).code == 0);
    CHECK(run({"evaluate", "--data", data, "--hp", "k=5"}).code == 0);
    CHECK(run({"evaluate", "--data", data, "--classifier", "nb", "--report-format", "xml"}).code == 2);
    CHECK(run({"evaluate", "--data", data, "--classifier", "nb", "--mode", "soft"}).code != 0);
    CHECK(run({"evaluate", "--data", data, "--classifier", "knn", "--hp", "depth=3"}).code == 2);
    CHECK(run({"evaluate", "--data", data, "--hp", "bogus=1"}).code == 2);
    CHECK(run({"evaluate", "--data", data, "--classifier", "ann"}).code != 0);
    CHECK(run({"evaluate", "--data", (dir / "none.csv").string()}).code == 1);
}

TEST_CASE("config file supplies flags; the command line wins") {
    const auto dir = th::scratch("cli_config");
    const std::string data = generated(dir, 80);
    const std::string cfg = (dir / "run.cfg").string();
    write(cfg, "# evaluation settings\nclassifier = knn\nk=1\nseed=3\nflat=false\ndata=" + data + "\n");
    const auto expanded = expand_config({"evaluate", "--config", cfg, "--seed", "9"});
    CHECK(expanded.front() == "evaluate");
    CHECK(std::count(expanded.begin(), expanded.end(), "--seed") == 1);
    CHECK(std::find(expanded.begin(), expanded.end(), "9") != expanded.end());
    CHECK(std::find(expanded.begin(), expanded.end(), "--flat") == expanded.end());
    CHECK(std::find(expanded.begin(), expanded.end(), "knn") != expanded.end());

    const auto r = run({"evaluate", "--config", cfg, "--seed", "9"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["config"]["seed"] == 9);
    CHECK(j["runs"].size() == 1);
    CHECK(j["runs"][0]["config"]["k"] == 1);
    CHECK(run({"evaluate", "--config", (dir / "missing.cfg").string()}).code != 0);
}

TEST_CASE("json schema files and inference are accepted") {
    const auto dir = th::scratch("cli_schema");
    const std::string data = (dir / "d.csv").string();
    write(data, "a,b,label\n1,x,yes\n2,y,no\n3,x,yes\n4,y,no\n5,x,yes\n6,y,no\n7,x,yes\n8,y,no\n9,x,yes\n10,y,no\n"
                "11,x,yes\n12,y,no\n13,x,yes\n14,y,no\n15,x,yes\n16,y,no\n17,x,yes\n18,y,no\n19,x,yes\n20,y,no\n");
    const std::string schema = (dir / "s.json").string();
    write(schema, R"({"attributes":[{"name":"a","kind":"numeric"},{"name":"b","kind":"categorical","categories":["x","y"]},
                      {"name":"label","kind":"categorical","categories":["yes","no"]}],"class":"label"})");
    CHECK(run({"evaluate", "--data", data, "--schema", schema, "--classifier", "nb"}).code == 0);
    CHECK(run({"evaluate", "--data", data, "--classifier", "nb"}).code == 0);
    CHECK(run({"evaluate", "--data", data, "--schema", "infer", "--classifier", "nb", "--folds", "5"}).code == 0);
    CHECK(run({"evaluate", "--data", data, "--schema", "no-such-schema", "--classifier", "nb"}).code != 0);
}

TEST_CASE("leave-one-out passes through --folds n") {
    const auto dir = th::scratch("cli_loo");
    const std::string data = generated(dir, 700, "8");
    const auto r = run({"evaluate", "--data", data, "--classifier", "svm", "--folds", "700"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["config"]["folds"] == 700);
    CHECK(j["runs"][0]["folds"].size() == 700);
}
