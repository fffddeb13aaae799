#pragma once

#include <cstddef>
#include <cstdint>

#include "kmc/dataset.hpp"

namespace kmc {

/// Parameters of the synthetic "tb-table1" generator.
struct SynthSpec {
    std::size_t n = 700;
    /// Fraction of PTB instances, in (0, 1).
    double class_balance = 0.5;
    /// Distance between class-conditional numeric means, in within-class standard deviations.
    double separation = 3.0;
    /// Probability a categorical attribute takes its class-typical value, in [0.5, 1].
    double categorical_skew = 0.9;
    /// Per-cell probability of a missing feature value, in [0, 1).
    double missing_rate = 0.0;
    std::uint64_t seed = 0;
    /// Numeric attributes follow a latent group drawn independently of the class.
    bool cluster_class_mismatch = false;
};

/// Throws Error naming the first invalid field.
void validate(const SynthSpec& spec);

/// Class counts are exact: round(n * class_balance) PTB rows, the rest RPTB,
/// in seeded random order.
Dataset generate(const SynthSpec& spec);

}  // namespace kmc
