#pragma once

#include "nfrl/data.h"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nfrl {

using Bit = std::int8_t;
using BitVector = std::vector<Bit>;

/// +1 iff x > 0, else -1 (q(0) = -1).
inline Bit q(double x) { return x > 0.0 ? Bit{1} : Bit{-1}; }

/// Row-major matrix of +1/-1 bits, one row per instance.
struct BitMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Bit> data;

    std::span<const Bit> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

enum class BinningMethod { RanInt, KInt, EntInt };

const char* to_string(BinningMethod method);
BinningMethod parse_binning_method(const std::string& name);

enum class LiteralKind {
    OneHot,       ///< category == value
    GreaterThan,  ///< q(x - threshold)
    LessThan,     ///< q(threshold - x)
    Passthrough,  ///< feature already holds +1/-1; bit = q(x)
};

struct LiteralSpec {
    std::string feature_name;
    LiteralKind kind = LiteralKind::GreaterThan;
    double threshold = 0.0;
    std::string category;

    bool operator==(const LiteralSpec&) const = default;
};

/// Fitted mapping from raw features to a D-wide +1/-1 literal vector.
///
/// Bit layout follows the feature order of the training data, categorical
/// blocks first (one bit per observed category), then for every
/// continuous feature k greater-than bits followed by k less-than bits.
struct BinarizerModel {
    std::vector<LiteralSpec> specs;
    BinningMethod method = BinningMethod::RanInt;
    int bins = 1;
    std::uint64_t seed = 0;
    /// Feature names and kinds seen at fit time, in dataset order.
    std::vector<Feature> features;
    /// Non-fatal fit diagnostics (e.g. constant continuous feature).
    std::vector<std::string> warnings;

    std::size_t width() const { return specs.size(); }

    /// Throws ArgumentError for empty data or k < 1.
    static BinarizerModel fit(BinningMethod method, const Dataset& train, int k, std::uint64_t seed);
    /// One passthrough bit per feature, for data that is already +1/-1.
    static BinarizerModel passthrough(const Dataset& data);

    /// Unseen categories yield an all -1 one-hot block.
    BitVector transform(const Dataset& data, std::size_t row) const;
    BitMatrix transform_all(const Dataset& data) const;

    /// e.g. `duration > 146.719`, `¬month = jan`.
    std::string literal_description(std::size_t bit, bool negated) const;

    bool operator==(const BinarizerModel& other) const {
        return specs == other.specs && method == other.method && bins == other.bins &&
               seed == other.seed;
    }
};

namespace binning {

// Threshold finders, exposed for testing. Each returns ascending thresholds.

/// Lloyd's k-means on 1-D values (seeded init, at most 100 iterations);
/// midpoints between adjacent distinct centers.
std::vector<double> kmeans_thresholds(std::span<const double> values, int k, std::uint64_t seed);

/// Best-first recursive splits minimizing class entropy; stops at k cuts
/// or when no split lowers entropy.
std::vector<double> entropy_thresholds(std::span<const double> values, std::span<const int> labels,
                                       int class_count, int k);

/// Pads by repeating the largest threshold until `k` entries.
std::vector<double> pad_thresholds(std::vector<double> thresholds, int k, double fallback);

} // namespace binning

} // namespace nfrl
