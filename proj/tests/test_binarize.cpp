#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nfrl/binarize.h"
#include "nfrl/error.h"

using namespace nfrl;

namespace {

Dataset toy(const std::string& body) {
    static const Schema schema = Schema::parse("month categorical\nduration continuous\ny label\n");
    return parse_dataset("month,duration,y\n" + body, schema);
}

BinarizerModel manual(std::vector<LiteralSpec> specs, std::vector<Feature> features) {
    BinarizerModel b;
    b.specs = std::move(specs);
    b.features = std::move(features);
    return b;
}

} // namespace

TEST_CASE("q uses a strict threshold") {
    CHECK(q(0.5) == 1);
    CHECK(q(-0.3) == -1);
    CHECK(q(0.0) == -1);
}

TEST_CASE("binning method names") {
    CHECK(parse_binning_method("kint") == BinningMethod::KInt);
    CHECK(std::string(to_string(BinningMethod::EntInt)) == "entint");
    CHECK_THROWS_AS(parse_binning_method("quantile"), ArgumentError);
}

TEST_CASE("RanInt bounds lie in the training range") {
    const auto ds = toy("jan,0,0\nmar,10,1\njan,4,0\n");
    const auto b = BinarizerModel::fit(BinningMethod::RanInt, ds, 2, 9);
    REQUIRE(b.width() == 2 + 4);
    CHECK(b.specs[0].kind == LiteralKind::OneHot);
    CHECK(b.specs[1].kind == LiteralKind::OneHot);
    for (std::size_t i = 2; i < 4; ++i) CHECK(b.specs[i].kind == LiteralKind::GreaterThan);
    for (std::size_t i = 4; i < 6; ++i) CHECK(b.specs[i].kind == LiteralKind::LessThan);
    for (std::size_t i = 2; i < 6; ++i) {
        CHECK(b.specs[i].threshold >= 0.0);
        CHECK(b.specs[i].threshold <= 10.0);
    }
    CHECK(b == BinarizerModel::fit(BinningMethod::RanInt, ds, 2, 9));
    CHECK_FALSE(b == BinarizerModel::fit(BinningMethod::RanInt, ds, 2, 10));
}

TEST_CASE("fit errors and warnings") {
    const auto ds = toy("jan,3,0\nmar,3,1\n");
    CHECK_THROWS_AS(BinarizerModel::fit(BinningMethod::RanInt, ds, 0, 1), ArgumentError);
    CHECK_THROWS_AS(BinarizerModel::fit(BinningMethod::RanInt, ds.subset({}), 2, 1), ArgumentError);
    const auto b = BinarizerModel::fit(BinningMethod::KInt, ds, 2, 1);
    CHECK(b.warnings.size() == 1);
    for (std::size_t i = 2; i < b.width(); ++i) CHECK(b.specs[i].threshold == 3.0);
}

TEST_CASE("k-means thresholds") {
    const std::vector<double> v{1, 1, 1, 9, 9, 9};
    CHECK(binning::kmeans_thresholds(v, 2, 0) == std::vector<double>{5.0});
    const auto padded = binning::pad_thresholds(binning::kmeans_thresholds(v, 2, 0), 3, 0.0);
    CHECK(padded == std::vector<double>{5.0, 5.0, 5.0});
    CHECK(binning::pad_thresholds({}, 2, 7.0) == std::vector<double>{7.0, 7.0});
}

TEST_CASE("entropy threshold separates the classes") {
    const std::vector<double> v{1, 2, 9, 10};
    const std::vector<int> y{0, 0, 1, 1};
    const auto cuts = binning::entropy_thresholds(v, y, 2, 1);
    REQUIRE(cuts.size() == 1);
    CHECK(cuts[0] > 2.0);
    CHECK(cuts[0] < 9.0);
    // Pure data has nothing to split.
    const std::vector<int> pure{0, 0, 0, 0};
    CHECK(binning::entropy_thresholds(v, pure, 2, 3).empty());
}

TEST_CASE("transform evaluates each literal") {
    const auto b = manual({{"duration", LiteralKind::GreaterThan, 3.0, {}}, {"duration", LiteralKind::LessThan, 4.0, {}}},
                          {{"month", true, {}}, {"duration", false, {}}});
    const auto ds = toy("jan,5,0\njan,3,0\n");
    CHECK(b.transform(ds, 0) == BitVector{1, -1});
    // Exactly at the threshold both directions are false.
    const auto at = manual({{"duration", LiteralKind::GreaterThan, 3.0, {}}, {"duration", LiteralKind::LessThan, 3.0, {}}},
                           {{"month", true, {}}, {"duration", false, {}}});
    CHECK(at.transform(ds, 1) == BitVector{-1, -1});
}

TEST_CASE("one-hot blocks and unseen categories") {
    const auto train = toy("jan,1,0\nmar,2,1\n");
    const auto b = BinarizerModel::fit(BinningMethod::RanInt, train, 1, 0);
    const auto test = toy("mar,1,0\ndec,1,0\n");
    const auto bits = b.transform_all(test);
    CHECK(bits.rows == 2);
    CHECK(bits.cols == b.width());
    CHECK(bits.row(0)[0] == -1);
    CHECK(bits.row(0)[1] == 1);
    CHECK(bits.row(1)[0] == -1);
    CHECK(bits.row(1)[1] == -1);
}

TEST_CASE("literal descriptions") {
    const auto b = manual({{"duration", LiteralKind::GreaterThan, 146.719, {}},
                           {"month", LiteralKind::OneHot, 0.0, "jan"},
                           {"age", LiteralKind::LessThan, 66.978, {}},
                           {"x_1", LiteralKind::Passthrough, 0.0, {}}},
                          {});
    CHECK(b.literal_description(0, false) == "duration > 146.719");
    CHECK(b.literal_description(1, true) == "¬month = jan");
    CHECK(b.literal_description(2, false) == "age < 66.978");
    CHECK(b.literal_description(3, true) == "¬x_1");
    CHECK_THROWS_AS(b.literal_description(4, false), ArgumentError);
}

TEST_CASE("KInt and EntInt produce k thresholds per direction") {
    std::string body;
    for (int i = 0; i < 40; ++i) body += std::string(i % 2 ? "jan" : "mar") + "," + std::to_string(i) + "," + (i < 20 ? "0" : "1") + "\n";
    const auto ds = toy(body);
    for (auto method : {BinningMethod::KInt, BinningMethod::EntInt}) {
        const auto b = BinarizerModel::fit(method, ds, 4, 2);
        CHECK(b.width() == 2 + 8);
        for (std::size_t i = 2; i < b.width(); ++i) {
            CHECK(b.specs[i].threshold >= 0.0);
            CHECK(b.specs[i].threshold <= 39.0);
        }
    }
    const auto ent = BinarizerModel::fit(BinningMethod::EntInt, ds, 1, 0);
    CHECK(ent.specs[2].threshold > 19.0);
    CHECK(ent.specs[2].threshold < 20.0);
}

TEST_CASE("passthrough binarizer") {
    const auto ds = parse_dataset("a,b,y\n1,-1,0\n-1,1,1\n", Schema::parse("a continuous\nb continuous\ny label\n"));
    const auto b = BinarizerModel::passthrough(ds);
    CHECK(b.width() == 2);
    CHECK(b.transform(ds, 0) == BitVector{1, -1});
}
