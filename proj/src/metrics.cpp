#include "nfrl/metrics.h"

#include "nfrl/error.h"
#include "nfrl/random.h"
#include "nfrl/train.h"

#include <algorithm>
#include <numeric>

namespace nfrl {

double macro_f1(std::span<const int> predicted, std::span<const int> truth, int classes,
                ZeroSupport zero_support) {
    if (predicted.empty() || truth.empty()) throw ArgumentError("macro_f1: empty input");
    if (predicted.size() != truth.size()) throw ArgumentError("macro_f1: length mismatch");
    if (classes < 1) throw ArgumentError("macro_f1: class count must be positive");
    const auto Y = static_cast<std::size_t>(classes);
    std::vector<double> tp(Y, 0.0), fp(Y, 0.0), fn(Y, 0.0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto p = static_cast<std::size_t>(predicted[i]);
        const auto t = static_cast<std::size_t>(truth[i]);
        if (p >= Y || t >= Y) throw ArgumentError("macro_f1: label out of range");
        if (p == t) {
            tp[t] += 1.0;
        } else {
            fp[p] += 1.0;
            fn[t] += 1.0;
        }
    }
    double sum = 0.0;
    int scored = 0;
    for (std::size_t k = 0; k < Y; ++k) {
        const double support = tp[k] + fn[k];
        if (support == 0.0) {
            if (zero_support == ZeroSupport::Skip || fp[k] == 0.0) continue;
            ++scored;  // predicted but never true: F1 = 0
            continue;
        }
        const double denom = 2.0 * tp[k] + fp[k] + fn[k];
        sum += 2.0 * tp[k] / denom;
        ++scored;
    }
    return scored ? sum / scored : 0.0;
}

double rule_coverage(const Rule& rule, const BitMatrix& rows) {
    if (rows.rows == 0) throw ArgumentError("rule_coverage: empty dataset");
    std::size_t hits = 0;
    for (std::size_t r = 0; r < rows.rows; ++r) {
        if (evaluate_rule(rule, rows.row(r)) > 0) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(rows.rows);
}

std::optional<double> rule_accuracy(const Rule& rule, const BitMatrix& rows, std::span<const int> labels) {
    const int predicted = argmax(rule.scores);
    std::size_t covered = 0, correct = 0;
    for (std::size_t r = 0; r < rows.rows; ++r) {
        if (evaluate_rule(rule, rows.row(r)) < 0) continue;
        ++covered;
        if (labels[r] == predicted) ++correct;
    }
    if (covered == 0) return std::nullopt;
    return static_cast<double>(correct) / static_cast<double>(covered);
}

namespace {

std::vector<std::vector<bool>> cover_sets(const RuleSet& rs, const BitMatrix& rows) {
    std::vector<std::vector<bool>> covers;
    for (const auto& rule : rs.rules) {
        std::vector<bool> cover(rows.rows);
        bool any = false;
        for (std::size_t r = 0; r < rows.rows; ++r) {
            cover[r] = evaluate_rule(rule, rows.row(r)) > 0;
            any = any || cover[r];
        }
        if (any) covers.push_back(std::move(cover));
    }
    return covers;
}

} // namespace

std::optional<double> ruleset_diversity(const RuleSet& rs, const BitMatrix& rows) {
    const auto covers = cover_sets(rs, rows);
    if (covers.size() < 2) return std::nullopt;
    double overlap = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < covers.size(); ++a) {
        for (std::size_t b = a + 1; b < covers.size(); ++b) {
            std::size_t inter = 0, uni = 0;
            for (std::size_t r = 0; r < rows.rows; ++r) {
                inter += covers[a][r] && covers[b][r];
                uni += covers[a][r] || covers[b][r];
            }
            overlap += uni ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
            ++pairs;
        }
    }
    return 1.0 - overlap / static_cast<double>(pairs);
}

RuleStats rule_stats(const RuleSet& rs, const BitMatrix& rows, std::span<const int> labels) {
    RuleStats stats;
    stats.rule_count = rs.rules.size();
    double acc_sum = 0.0;
    std::size_t acc_n = 0;
    for (const auto& rule : rs.rules) {
        stats.coverage.push_back(rows.rows ? rule_coverage(rule, rows) : 0.0);
        stats.accuracy.push_back(rule_accuracy(rule, rows, labels));
        stats.length.push_back(rule.length());
        if (stats.accuracy.back()) {
            acc_sum += *stats.accuracy.back();
            ++acc_n;
        }
    }
    if (!rs.rules.empty()) {
        stats.avg_length = static_cast<double>(std::accumulate(stats.length.begin(), stats.length.end(),
                                                               std::size_t{0})) /
                           static_cast<double>(rs.rules.size());
        stats.mean_coverage = std::accumulate(stats.coverage.begin(), stats.coverage.end(), 0.0) /
                              static_cast<double>(rs.rules.size());
    }
    if (acc_n) stats.mean_accuracy = acc_sum / static_cast<double>(acc_n);
    stats.diversity = ruleset_diversity(rs, rows);
    return stats;
}

std::vector<double> product_activation_grads(std::span<const int> inputs, std::span<const int> weights, Op mode) {
    if (inputs.size() != weights.size()) throw ArgumentError("product_activation_grads: length mismatch");
    const std::size_t m = inputs.size();
    std::vector<double> factor(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double h = inputs[k], w = weights[k];
        factor[k] = mode == Op::And ? 1.0 - w * (1.0 - h)  // F_c
                                    : 1.0 - h * w;         // 1 - F_d
    }
    std::vector<double> grads(m);
    for (std::size_t j = 0; j < m; ++j) {
        double prod = 1.0;
        for (std::size_t k = 0; k < m; ++k) {
            if (k != j) prod *= factor[k];
        }
        grads[j] = weights[j] * prod;
    }
    return grads;
}

LivenessReport grad_liveness_report(std::size_t fan_in, std::size_t trials, std::uint64_t seed, Op mode) {
    if (fan_in < 2) throw ArgumentError("grad_liveness_report: fan-in must be >= 2");
    if (trials == 0) throw ArgumentError("grad_liveness_report: trials must be positive");
    Rng rng(seed);
    std::vector<int> bits(fan_in);
    const std::vector<int> weights(fan_in, 1);
    std::vector<double> signed_bits(fan_in);
    std::size_t live_minmax = 0, live_product = 0;
    auto any_nonzero = [](const std::vector<double>& g) {
        return std::any_of(g.begin(), g.end(), [](double x) { return x != 0.0; });
    };
    for (std::size_t t = 0; t < trials; ++t) {
        for (std::size_t j = 0; j < fan_in; ++j) {
            bits[j] = rng.bernoulli(0.5) ? 1 : 0;
            signed_bits[j] = bits[j] ? 1.0 : -1.0;
        }
        const auto mm = minmax_backward(signed_bits, mode == Op::And ? Extremum::Min : Extremum::Max, 1.0);
        if (any_nonzero(mm)) ++live_minmax;
        if (any_nonzero(product_activation_grads(bits, weights, mode))) ++live_product;
    }
    return {static_cast<double>(live_minmax) / static_cast<double>(trials),
            static_cast<double>(live_product) / static_cast<double>(trials)};
}

} // namespace nfrl
