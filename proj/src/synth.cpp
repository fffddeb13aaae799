#include "kmc/synth.hpp"

#include <algorithm>
#include <cmath>

#include "kmc/error.hpp"
#include "kmc/random.hpp"

namespace kmc {
namespace {

constexpr std::uint64_t kMissingStream = 0x4D15;

struct NumericProfile {
    double mean;
    double stddev;
};

// Age, chroniccough(weeks), intermittentfever(days) in schema order.
constexpr NumericProfile kNumeric[] = {{40.0, 12.0}, {6.0, 2.0}, {10.0, 4.0}};

// Category index typical for PTB per categorical attribute, schema order:
// weightloss, nightsweats, Bloodcough, chestpain, HIV, Radiographicfindings,
// Sputum, wheezing. RPTB takes the other category.
constexpr std::size_t kPtbTypical[] = {0, 0, 0, 0, 1, 1, 0, 1};

double round2(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

void validate(const SynthSpec& spec) {
    if (spec.n < 2) throw Error("synth: n must be at least 2");
    if (!(spec.class_balance > 0.0 && spec.class_balance < 1.0)) {
        throw Error("synth: class_balance must lie in (0, 1)");
    }
    const double ptb = std::round(static_cast<double>(spec.n) * spec.class_balance);
    if (ptb < 1.0 || ptb > static_cast<double>(spec.n - 1)) {
        throw Error("synth: class_balance leaves a class empty for n = " + std::to_string(spec.n));
    }
    if (!(spec.separation >= 0.0) || !std::isfinite(spec.separation)) {
        throw Error("synth: separation must be a finite value >= 0");
    }
    if (!(spec.categorical_skew >= 0.5 && spec.categorical_skew <= 1.0)) {
        throw Error("synth: categorical_skew must lie in [0.5, 1]");
    }
    if (!(spec.missing_rate >= 0.0 && spec.missing_rate < 1.0)) {
        throw Error("synth: missing_rate must lie in [0, 1)");
    }
}

Dataset generate(const SynthSpec& spec) {
    validate(spec);
    const Schema schema = tb_table1_schema();
    const std::size_t ptb = static_cast<std::size_t>(std::round(static_cast<double>(spec.n) * spec.class_balance));

    Rng rng(spec.seed);
    std::vector<std::size_t> labels(spec.n, 1);
    std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(ptb), 0);
    rng.shuffle(labels);

    // Latent numeric group; equals the class unless decoupled.
    std::vector<std::size_t> group = labels;
    if (spec.cluster_class_mismatch) {
        std::fill(group.begin(), group.end(), 1);
        std::fill(group.begin(), group.begin() + static_cast<std::ptrdiff_t>(spec.n / 2), 0);
        rng.shuffle(group);
    }

    Rng missing(derive_seed(spec.seed, kMissingStream));
    std::vector<Instance> rows;
    rows.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        Instance inst;
        inst.label = labels[i];
        std::size_t num = 0, cat = 0;
        for (std::size_t f = 0; f < schema.feature_count(); ++f) {
            if (schema.feature(f).kind == AttributeKind::Numeric) {
                const NumericProfile& p = kNumeric[num++];
                const double side = group[i] == 0 ? -0.5 : 0.5;
                const double v = rng.normal(p.mean + side * spec.separation * p.stddev, p.stddev);
                inst.values.emplace_back(round2(std::max(v, 0.0)));
            } else {
                const std::size_t typical = labels[i] == 0 ? kPtbTypical[cat] : 1 - kPtbTypical[cat];
                ++cat;
                const bool keep = rng.uniform01() < spec.categorical_skew;
                inst.values.emplace_back(Category{keep ? typical : 1 - typical});
            }
        }
        for (auto& cell : inst.values) {
            if (missing.uniform01() < spec.missing_rate) cell = Missing{};
        }
        rows.push_back(std::move(inst));
    }
    return Dataset(schema, std::move(rows));
}

}  // namespace kmc
