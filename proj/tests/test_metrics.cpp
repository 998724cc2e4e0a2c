#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nfrl/error.h"
#include "nfrl/metrics.h"

#include <cmath>

using namespace nfrl;

namespace {

Rule unit(std::uint32_t bit, std::vector<double> scores) {
    return {NormalForm::Dnf, {{Op::And, {{bit, false}}}}, std::move(scores), 0};
}

} // namespace

TEST_CASE("macro F1") {
    const std::vector<int> truth{0, 1, 0, 1};
    CHECK(macro_f1(truth, truth, 2) == 1.0);
    const std::vector<int> wrong{1, 0, 1, 0};
    CHECK(macro_f1(wrong, truth, 2) == 0.0);
    const std::vector<int> half{0, 0, 1, 1};
    const std::vector<int> t2{0, 1, 0, 1};
    CHECK(macro_f1(half, t2, 2) == doctest::Approx(0.5));
    CHECK_THROWS_AS(macro_f1({}, {}, 2), ArgumentError);
    const std::vector<int> shorter{0};
    CHECK_THROWS_AS(macro_f1(shorter, truth, 2), ArgumentError);
}

TEST_CASE("classes absent from the truth") {
    const std::vector<int> truth{0, 0, 1};
    const std::vector<int> pred{0, 2, 1};
    // Class 2 never occurs in the truth.
    const double skip = macro_f1(pred, truth, 3);
    const double zero = macro_f1(pred, truth, 3, ZeroSupport::CountAsZero);
    CHECK(skip == doctest::Approx((2.0 / 3.0 + 1.0) / 2.0));
    CHECK(zero == doctest::Approx((2.0 / 3.0 + 1.0) / 3.0));
}

TEST_CASE("macro F1 is order invariant") {
    const std::vector<int> p{0, 1, 2, 2, 1, 0, 1};
    const std::vector<int> t{0, 2, 2, 1, 1, 0, 0};
    const std::vector<int> p2(p.rbegin(), p.rend());
    const std::vector<int> t2(t.rbegin(), t.rend());
    CHECK(macro_f1(p, t, 3) == doctest::Approx(macro_f1(p2, t2, 3)));
}

TEST_CASE("coverage, accuracy and diversity") {
    // Three rows; rule a covers rows {0,1}, rule b covers {1,2}.
    const BitMatrix rows{3, 2, {1, -1, 1, 1, -1, 1}};
    const std::vector<int> labels{1, 1, 0};
    const auto a = unit(0, {0.0, 1.0});
    const auto b = unit(1, {1.0, 0.0});
    CHECK(rule_coverage(a, rows) == doctest::Approx(2.0 / 3.0));
    CHECK(*rule_accuracy(a, rows, labels) == 1.0);
    CHECK(*rule_accuracy(b, rows, labels) == 0.5);

    RuleSet rs;
    rs.rules = {a, b};
    CHECK(*ruleset_diversity(rs, rows) == doctest::Approx(2.0 / 3.0));
    RuleSet reversed;
    reversed.rules = {b, a};
    CHECK(*ruleset_diversity(reversed, rows) == *ruleset_diversity(rs, rows));
    RuleSet same;
    same.rules = {a, a};
    CHECK(*ruleset_diversity(same, rows) == 0.0);
    RuleSet one;
    one.rules = {a};
    CHECK_FALSE(ruleset_diversity(one, rows).has_value());

    const BitMatrix none{2, 2, {-1, -1, -1, -1}};
    CHECK_FALSE(rule_accuracy(a, none, std::vector<int>{0, 1}).has_value());
}

TEST_CASE("disjoint rules are fully diverse") {
    const BitMatrix rows{2, 2, {1, -1, -1, 1}};
    RuleSet rs;
    rs.rules = {unit(0, {1.0}), unit(1, {1.0})};
    CHECK(*ruleset_diversity(rs, rows) == 1.0);
}

TEST_CASE("rule stats") {
    const BitMatrix rows{3, 2, {1, -1, 1, 1, -1, 1}};
    const std::vector<int> labels{1, 1, 0};
    RuleSet rs;
    rs.rules = {unit(0, {0.0, 1.0}), unit(1, {1.0, 0.0})};
    const auto s = rule_stats(rs, rows, labels);
    CHECK(s.rule_count == 2);
    CHECK(s.avg_length == 1.0);
    CHECK(s.mean_coverage == doctest::Approx(2.0 / 3.0));
    CHECK(*s.mean_accuracy == doctest::Approx(0.75));
    CHECK(*s.diversity == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("coverage of a single literal tracks its Bernoulli rate") {
    const std::vector<GroundTruthRule> truth{{RuleForm::SingleClause, {{{0, false}}}}};
    const auto syn = generate_synthetic(truth, 20000, 2, 5);
    const auto& ds = syn.datasets[0];
    const auto bits = BinarizerModel::passthrough(ds).transform_all(ds);
    const double p = syn.probabilities[0];
    const double sigma = std::sqrt(p * (1 - p) / 20000.0);
    CHECK(std::abs(rule_coverage(unit(0, {0.0, 1.0}), bits) - p) <= 3 * sigma);
    // The rule is the labeling function, so it is exact on its data.
    CHECK(*rule_accuracy(unit(0, {0.0, 1.0}), bits, ds.labels) == 1.0);
}

TEST_CASE("product activation gradients") {
    const std::vector<int> ones{1, 1, 1};
    CHECK(product_activation_grads(std::vector<int>{1, 1, 0}, ones, Op::And) == std::vector<double>{0, 0, 1});
    CHECK(product_activation_grads(ones, ones, Op::And) == std::vector<double>{1, 1, 1});
    CHECK(product_activation_grads(std::vector<int>{0, 1, 0}, ones, Op::And) == std::vector<double>{0, 0, 0});
    // A disconnected input contributes a neutral factor.
    CHECK(product_activation_grads(std::vector<int>{0, 1, 0}, std::vector<int>{1, 1, 0}, Op::And) ==
          std::vector<double>{1, 0, 0});
    // OR: d/du_j of 1 - prod(1 - u_k w_k).
    CHECK(product_activation_grads(std::vector<int>{0, 0, 1}, ones, Op::Or) == std::vector<double>{0, 0, 1});
    CHECK(product_activation_grads(std::vector<int>{0, 0, 0}, ones, Op::Or) == std::vector<double>{1, 1, 1});
}

TEST_CASE("gradient liveness") {
    const auto r100 = grad_liveness_report(100, 1000, 1);
    CHECK(r100.minmax == 1.0);
    // P(at most one of 100 fair bits is zero) = 101 / 2^100.
    CHECK(r100.product <= 0.001);
    const auto r2 = grad_liveness_report(2, 1000, 1);
    CHECK(r2.minmax == 1.0);
    CHECK(r2.product > r100.product);
    // With two fair bits, three of the four draws have at most one zero.
    CHECK(std::abs(r2.product - 0.75) < 0.05);
    CHECK(grad_liveness_report(100, 1000, 1, Op::Or).minmax == 1.0);
}
