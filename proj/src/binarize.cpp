#include "nfrl/binarize.h"

#include "nfrl/error.h"
#include "nfrl/random.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

namespace nfrl {

const char* to_string(BinningMethod method) {
    switch (method) {
    case BinningMethod::RanInt: return "ranint";
    case BinningMethod::KInt: return "kint";
    case BinningMethod::EntInt: return "entint";
    }
    return "?";
}

BinningMethod parse_binning_method(const std::string& name) {
    if (name == "ranint") return BinningMethod::RanInt;
    if (name == "kint") return BinningMethod::KInt;
    if (name == "entint") return BinningMethod::EntInt;
    throw ArgumentError("unknown binning method '" + name + "' (expected ranint|kint|entint)");
}

namespace binning {

std::vector<double> pad_thresholds(std::vector<double> thresholds, int k, double fallback) {
    std::sort(thresholds.begin(), thresholds.end());
    if (thresholds.empty()) thresholds.push_back(fallback);
    while (static_cast<int>(thresholds.size()) < k) thresholds.push_back(thresholds.back());
    thresholds.resize(static_cast<std::size_t>(k));
    return thresholds;
}

std::vector<double> kmeans_thresholds(std::span<const double> values, int k, std::uint64_t seed) {
    // Work on distinct values weighted by multiplicity.
    std::map<double, double> counts;
    for (double v : values) counts[v] += 1.0;
    std::vector<double> points, weights;
    for (const auto& [v, c] : counts) {
        points.push_back(v);
        weights.push_back(c);
    }

    std::vector<double> centers;
    if (static_cast<int>(points.size()) <= k) {
        centers = points;
    } else {
        std::vector<std::size_t> pick(points.size());
        std::iota(pick.begin(), pick.end(), std::size_t{0});
        Rng rng(seed);
        rng.shuffle(pick);
        for (int c = 0; c < k; ++c) centers.push_back(points[pick[c]]);
        std::sort(centers.begin(), centers.end());

        std::vector<double> sum(centers.size()), mass(centers.size());
        for (int iter = 0; iter < 100; ++iter) {
            std::fill(sum.begin(), sum.end(), 0.0);
            std::fill(mass.begin(), mass.end(), 0.0);
            for (std::size_t p = 0; p < points.size(); ++p) {
                std::size_t best = 0;
                for (std::size_t c = 1; c < centers.size(); ++c) {
                    if (std::abs(points[p] - centers[c]) < std::abs(points[p] - centers[best])) best = c;
                }
                sum[best] += weights[p] * points[p];
                mass[best] += weights[p];
            }
            bool moved = false;
            for (std::size_t c = 0; c < centers.size(); ++c) {
                if (mass[c] == 0.0) continue;
                const double next = sum[c] / mass[c];
                if (next != centers[c]) moved = true;
                centers[c] = next;
            }
            if (!moved) break;
        }
        std::sort(centers.begin(), centers.end());
        centers.erase(std::unique(centers.begin(), centers.end()), centers.end());
    }

    std::vector<double> cuts;
    for (std::size_t c = 1; c < centers.size(); ++c) cuts.push_back(0.5 * (centers[c - 1] + centers[c]));
    return cuts;
}

namespace {

double entropy(std::span<const double> counts, double total) {
    double h = 0.0;
    for (double c : counts) {
        if (c > 0.0) {
            const double p = c / total;
            h -= p * std::log2(p);
        }
    }
    return h;
}

struct Interval {
    std::size_t begin = 0;  // into the sorted sample order
    std::size_t end = 0;
    double gain = 0.0;      // total-entropy reduction of its best split
    std::size_t cut = 0;    // first index of the right child
};

} // namespace

std::vector<double> entropy_thresholds(std::span<const double> values, std::span<const int> labels,
                                       int class_count, int k) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    const auto Y = static_cast<std::size_t>(class_count);

    auto best_split = [&](Interval& iv) {
        std::vector<double> total(Y, 0.0), left(Y, 0.0), right(Y);
        for (auto i = iv.begin; i < iv.end; ++i) total[labels[order[i]]] += 1.0;
        const double count = static_cast<double>(iv.end - iv.begin);
        const double parent = entropy(total, count);
        iv.gain = 0.0;
        for (auto i = iv.begin + 1; i < iv.end; ++i) {
            left[labels[order[i - 1]]] += 1.0;
            if (values[order[i - 1]] == values[order[i]]) continue;
            for (std::size_t y = 0; y < Y; ++y) right[y] = total[y] - left[y];
            const double nl = static_cast<double>(i - iv.begin);
            const double nr = count - nl;
            const double child = (nl * entropy(left, nl) + nr * entropy(right, nr)) / count;
            const double gain = (parent - child) * count / static_cast<double>(n);
            if (gain > iv.gain + 1e-12) {
                iv.gain = gain;
                iv.cut = i;
            }
        }
    };

    std::vector<Interval> intervals{{0, n, 0.0, 0}};
    best_split(intervals[0]);
    std::vector<double> cuts;
    while (static_cast<int>(cuts.size()) < k) {
        auto best = std::max_element(intervals.begin(), intervals.end(),
                                     [](const auto& a, const auto& b) { return a.gain < b.gain; });
        if (best == intervals.end() || best->gain <= 1e-12) break;
        const Interval chosen = *best;
        cuts.push_back(0.5 * (values[order[chosen.cut - 1]] + values[order[chosen.cut]]));
        Interval left{chosen.begin, chosen.cut, 0.0, 0};
        Interval right{chosen.cut, chosen.end, 0.0, 0};
        best_split(left);
        best_split(right);
        *best = left;
        intervals.push_back(right);
    }
    std::sort(cuts.begin(), cuts.end());
    return cuts;
}

} // namespace binning

namespace {

std::string format_threshold(double t) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.3f", t);
    return buffer;
}

// Per-feature lookup from a dataset's columns onto the spec list.
struct TransformPlan {
    std::vector<std::size_t> column;  // dataset feature index for each spec
    std::vector<int> category;        // dataset vocabulary index for one-hot specs, -1 if absent
};

TransformPlan make_plan(const BinarizerModel& model, const Dataset& data) {
    TransformPlan plan;
    plan.column.resize(model.specs.size());
    plan.category.assign(model.specs.size(), -1);
    for (std::size_t s = 0; s < model.specs.size(); ++s) {
        const auto& spec = model.specs[s];
        const auto it = std::find_if(data.features.begin(), data.features.end(),
                                     [&](const Feature& f) { return f.name == spec.feature_name; });
        if (it == data.features.end()) {
            throw ArgumentError("dataset lacks feature '" + spec.feature_name + "' used by the binarizer");
        }
        if ((spec.kind == LiteralKind::OneHot) != it->categorical) {
            throw ArgumentError("feature '" + spec.feature_name + "' changed kind since fitting");
        }
        plan.column[s] = static_cast<std::size_t>(it - data.features.begin());
        if (spec.kind == LiteralKind::OneHot) {
            const auto& vocab = it->vocabulary;
            const auto v = std::find(vocab.begin(), vocab.end(), spec.category);
            if (v != vocab.end()) plan.category[s] = static_cast<int>(v - vocab.begin());
        }
    }
    return plan;
}

void apply_plan(const BinarizerModel& model, const TransformPlan& plan, std::span<const double> row,
                Bit* out) {
    for (std::size_t s = 0; s < model.specs.size(); ++s) {
        const auto& spec = model.specs[s];
        const double x = row[plan.column[s]];
        switch (spec.kind) {
        case LiteralKind::OneHot:
            out[s] = plan.category[s] >= 0 && static_cast<int>(x) == plan.category[s] ? 1 : -1;
            break;
        case LiteralKind::GreaterThan: out[s] = q(x - spec.threshold); break;
        case LiteralKind::LessThan: out[s] = q(spec.threshold - x); break;
        case LiteralKind::Passthrough: out[s] = q(x); break;
        }
    }
}

} // namespace

BinarizerModel BinarizerModel::fit(BinningMethod method, const Dataset& train, int k, std::uint64_t seed) {
    if (k < 1) throw ArgumentError("binarizer: bins per feature must be >= 1");
    if (train.size() == 0) throw ArgumentError("binarizer: empty training data");

    BinarizerModel model;
    model.method = method;
    model.bins = k;
    model.seed = seed;
    model.features = train.features;
    for (auto& f : model.features) {
        // Only names and kinds matter after fitting; vocabularies live in specs.
        f.vocabulary.clear();
    }

    for (std::size_t f = 0; f < train.features.size(); ++f) {
        const auto& feature = train.features[f];
        if (!feature.categorical) continue;
        std::vector<bool> seen(feature.vocabulary.size(), false);
        for (const auto& row : train.rows) seen[static_cast<std::size_t>(row[f])] = true;
        for (std::size_t c = 0; c < feature.vocabulary.size(); ++c) {
            if (seen[c]) model.specs.push_back({feature.name, LiteralKind::OneHot, 0.0, feature.vocabulary[c]});
        }
    }

    Rng rng(seed);
    std::vector<double> column(train.size());
    for (std::size_t f = 0; f < train.features.size(); ++f) {
        const auto& feature = train.features[f];
        if (feature.categorical) continue;
        for (std::size_t r = 0; r < train.size(); ++r) column[r] = train.rows[r][f];
        const auto [lo_it, hi_it] = std::minmax_element(column.begin(), column.end());
        const double lo = *lo_it, hi = *hi_it;

        std::vector<double> lower, upper;
        if (lo == hi) {
            model.warnings.push_back("feature '" + feature.name + "' is constant (" + format_threshold(lo) +
                                     "); using a single threshold at that value");
            lower.assign(static_cast<std::size_t>(k), lo);
            upper.assign(static_cast<std::size_t>(k), lo);
        } else if (method == BinningMethod::RanInt) {
            for (int b = 0; b < k; ++b) lower.push_back(rng.uniform(lo, hi));
            for (int b = 0; b < k; ++b) upper.push_back(rng.uniform(lo, hi));
        } else {
            std::vector<double> cuts =
                method == BinningMethod::KInt
                    ? binning::kmeans_thresholds(column, k, seed + f)
                    : binning::entropy_thresholds(column, train.labels, train.class_count(), k);
            lower = binning::pad_thresholds(std::move(cuts), k, 0.5 * (lo + hi));
            upper = lower;
        }
        for (double t : lower) model.specs.push_back({feature.name, LiteralKind::GreaterThan, t, {}});
        for (double t : upper) model.specs.push_back({feature.name, LiteralKind::LessThan, t, {}});
    }
    return model;
}

BinarizerModel BinarizerModel::passthrough(const Dataset& data) {
    BinarizerModel model;
    model.features = data.features;
    for (const auto& f : data.features) {
        if (f.categorical) throw ArgumentError("passthrough binarizer needs +1/-1 features, '" + f.name + "' is categorical");
        model.specs.push_back({f.name, LiteralKind::Passthrough, 0.0, {}});
    }
    return model;
}

BitVector BinarizerModel::transform(const Dataset& data, std::size_t row) const {
    const auto plan = make_plan(*this, data);
    BitVector out(specs.size());
    apply_plan(*this, plan, data.rows.at(row), out.data());
    return out;
}

BitMatrix BinarizerModel::transform_all(const Dataset& data) const {
    const auto plan = make_plan(*this, data);
    BitMatrix out{data.size(), specs.size(), std::vector<Bit>(data.size() * specs.size())};
    for (std::size_t r = 0; r < data.size(); ++r) {
        apply_plan(*this, plan, data.rows[r], out.data.data() + r * specs.size());
    }
    return out;
}

std::string BinarizerModel::literal_description(std::size_t bit, bool negated) const {
    if (bit >= specs.size()) {
        throw ArgumentError("literal index " + std::to_string(bit) + " out of range (width " +
                            std::to_string(specs.size()) + ")");
    }
    const auto& spec = specs[bit];
    std::string text = negated ? "¬" : "";
    text += spec.feature_name;
    switch (spec.kind) {
    case LiteralKind::OneHot: text += " = " + spec.category; break;
    case LiteralKind::GreaterThan: text += " > " + format_threshold(spec.threshold); break;
    case LiteralKind::LessThan: text += " < " + format_threshold(spec.threshold); break;
    case LiteralKind::Passthrough: break;
    }
    return text;
}

} // namespace nfrl
