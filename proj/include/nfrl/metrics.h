#pragma once

#include "nfrl/rules.h"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace nfrl {

/// How macro-F1 treats a class that never occurs in the ground truth.
enum class ZeroSupport {
    Skip,         ///< left out of the average
    CountAsZero,  ///< contributes F1 = 0 when predicted, is skipped otherwise
};

/// Unweighted mean of per-class F1. Throws ArgumentError on empty or
/// mismatched inputs.
double macro_f1(std::span<const int> predicted, std::span<const int> truth, int classes,
                ZeroSupport zero_support = ZeroSupport::Skip);

/// Fraction of rows on which the rule is true.
double rule_coverage(const Rule& rule, const BitMatrix& rows);

/// Among covered rows, the fraction labeled with the rule's argmax-score
/// class. nullopt when the rule covers nothing.
std::optional<double> rule_accuracy(const Rule& rule, const BitMatrix& rows, std::span<const int> labels);

/// 1 - mean pairwise Jaccard overlap of cover sets, over rules with
/// non-zero coverage. nullopt with fewer than two such rules.
std::optional<double> ruleset_diversity(const RuleSet& rules, const BitMatrix& rows);

struct RuleStats {
    std::vector<double> coverage;
    std::vector<std::optional<double>> accuracy;
    std::vector<std::size_t> length;
    std::optional<double> diversity;
    std::size_t rule_count = 0;
    double avg_length = 0.0;
    double mean_coverage = 0.0;
    std::optional<double> mean_accuracy;  // over rules with defined accuracy
};

RuleStats rule_stats(const RuleSet& rules, const BitMatrix& rows, std::span<const int> labels);

/// Input gradients of the product-based relaxed AND / OR in the 0/1
/// convention: AND uses F_c(h,w) = 1 - w(1-h), OR uses F_d(h,w) = h*w.
std::vector<double> product_activation_grads(std::span<const int> inputs, std::span<const int> weights, Op mode);

struct LivenessReport {
    double minmax = 0.0;   ///< fraction of trials with a non-zero min/max input gradient
    double product = 0.0;  ///< same for the product activation
};

/// Random fully connected neuron of the given fan-in per trial, inputs
/// drawn uniformly; both backward rules see the same draw.
LivenessReport grad_liveness_report(std::size_t fan_in, std::size_t trials, std::uint64_t seed,
                                    Op mode = Op::And);

} // namespace nfrl
