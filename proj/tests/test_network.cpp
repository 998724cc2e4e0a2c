#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nfrl/error.h"
#include "nfrl/network.h"
#include "nfrl/random.h"

#include <cmath>

using namespace nfrl;

namespace {

BitVector random_input(Rng& rng, std::size_t d) {
    BitVector bits(d);
    for (auto& b : bits) b = rng.bernoulli(0.5) ? 1 : -1;
    return bits;
}

// A D-input, one-neuron-per-layer model whose weights are all set by hand.
NfrlModel single_path(std::size_t d, bool and1, bool and2) {
    auto m = init_model(d, 1, 1, 1, 0);
    for (auto& w : m.neg.w_neg.data) w = 0.5;
    for (auto& w : m.nfl1.w_conn.data) w = 0.5;
    for (auto& w : m.nfl2.w_conn.data) w = 0.5;
    m.nfl1.w_op[0] = and1 ? 0.5 : -0.5;
    m.nfl2.w_op[0] = and2 ? 0.5 : -0.5;
    m.head.scores(0, 0) = 1.0;
    return m;
}

} // namespace

TEST_CASE("sign binarization") {
    CHECK(sign_binarize(0.7) == 1);
    CHECK(sign_binarize(-0.7) == -1);
    CHECK(sign_binarize(0.0) == -1);
    CHECK(sign_binarize(0.3) == 1);
    CHECK(sign_binarize(-1e-4) == -1);
}

TEST_CASE("NFC mask forbids same-type connections") {
    const std::vector<double> and1{0.5}, or1{-0.5};
    CHECK(nfc_mask(and1, and1)[0] == -1);
    CHECK(nfc_mask(or1, or1)[0] == -1);
    CHECK(nfc_mask(or1, and1)[0] == 1);
    CHECK(nfc_mask(and1, or1)[0] == 1);
}

TEST_CASE("NFC eligible edge count") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t k = 1 + rng.below(40);
        std::vector<double> op1(k), op2(k);
        std::size_t c1 = 0, c2 = 0;
        for (auto& w : op1) c1 += (w = rng.uniform(-1, 1)) > 0;
        for (auto& w : op2) c2 += (w = rng.uniform(-1, 1)) > 0;
        std::size_t eligible = 0;
        for (auto m : nfc_mask(op1, op2)) eligible += m == 1;
        CHECK(eligible == c1 * (k - c2) + (k - c1) * c2);
        CHECK(eligible <= k * k);
    }
}

TEST_CASE("initialization") {
    const auto a = init_model(6, 4, 4, 2, 17);
    const auto b = init_model(6, 4, 4, 2, 17);
    CHECK(a == b);
    CHECK_FALSE(a == init_model(6, 4, 4, 2, 18));
    CHECK_NOTHROW(a.validate());
    for (const auto* m : {&a.neg.w_neg, &a.nfl1.w_conn, &a.nfl2.w_conn}) {
        for (double w : m->data) {
            CHECK(std::abs(w) >= 1e-4);
            CHECK(std::abs(w) <= 0.1);
        }
    }
    for (double w : a.nfl1.w_op) CHECK(std::abs(w) >= 1e-4);
    Rng rng(1);
    for (int i = 0; i < 10; ++i) {
        const auto trace = forward(a, random_input(rng, 6));
        for (double l : trace.logits) CHECK(l == 0.0);
    }
    CHECK(a.binarizer.width() == 6);
    CHECK(a.binarizer.literal_description(0, false) == "x_1");
}

TEST_CASE("validate rejects inconsistent shapes") {
    auto m = init_model(3, 2, 2, 2, 0);
    m.nfl2.w_conn = Matrix(2, 3);
    CHECK_THROWS_AS(m.validate(), ArgumentError);
}

TEST_CASE("AND is min and OR is max over connected inputs") {
    const BitVector x{1, 1, -1};
    CHECK(forward(single_path(3, true, false), x).v1[0] == -1);
    const BitVector y{-1, -1, 1};
    CHECK(forward(single_path(3, false, true), y).v1[0] == 1);
    // Disconnect the false input: the AND becomes true.
    auto m = single_path(3, true, false);
    m.nfl1.w_conn(0, 2) = -0.5;
    CHECK(forward(m, x).v1[0] == 1);
    // A negation gate flips its literal.
    m = single_path(3, true, false);
    m.neg.w_neg(0, 2) = -0.5;
    CHECK(forward(m, x).v1[0] == 1);
}

TEST_CASE("head sums rule values times scores") {
    // n0 = x1, n1 = not x1; each feeds its own OR rule.
    auto m = init_model(1, 2, 2, 2, 0);
    m.neg.w_neg(0, 0) = 0.5;
    m.neg.w_neg(1, 0) = -0.5;
    for (auto& w : m.nfl1.w_conn.data) w = 0.5;
    m.nfl1.w_op = {0.5, 0.5};
    m.nfl2.w_op = {-0.5, -0.5};
    m.nfl2.w_conn(0, 0) = 0.5;
    m.nfl2.w_conn(0, 1) = -0.5;
    m.nfl2.w_conn(1, 0) = -0.5;
    m.nfl2.w_conn(1, 1) = 0.5;
    m.head.scores(0, 0) = 0.4;
    m.head.scores(1, 0) = 0.3;
    const auto t = forward(m, BitVector{1});
    CHECK(t.v2 == std::vector<Bit>{1, -1});
    CHECK(t.logits[0] == doctest::Approx(0.1));
    CHECK(t.logits[1] == 0.0);
}

TEST_CASE("masked edges are inactive in forward") {
    // Same-type AND -> AND edge: connected by sign but forbidden by the mask.
    auto m = single_path(2, true, true);
    const auto view = binary_view(m);
    CHECK(view.mask[0] == -1);
    CHECK(view.active_inputs2(0).empty());
    CHECK_FALSE(view.live2[0]);
}

TEST_CASE("dead neurons output their identity") {
    auto m = single_path(2, true, false);
    for (auto& w : m.nfl1.w_conn.data) w = -0.5;
    const auto view = binary_view(m);
    CHECK_FALSE(view.live1[0]);
    const auto t = forward(m, BitVector{-1, -1});
    CHECK(t.v1[0] == 1);
    // The dead first-layer neuron is not an input of the second layer.
    CHECK_FALSE(view.live2[0]);
    CHECK(t.v2[0] == -1);
    m.nfl1.w_op[0] = -0.5;
    CHECK(forward(m, BitVector{1, 1}).v1[0] == -1);
}

TEST_CASE("binary view is idempotent") {
    const auto m = init_model(8, 6, 5, 3, 2);
    const auto a = binary_view(m);
    const auto b = binary_view(m);
    CHECK(a.conn1 == b.conn1);
    CHECK(a.in2 == b.in2);
    CHECK(a.logit_offset == b.logit_offset);
    CHECK(a.live2 == b.live2);
}

TEST_CASE("random networks produce only +1/-1 values and respect NFC") {
    Rng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t d = 1 + rng.below(12), k1 = 1 + rng.below(16), k2 = 1 + rng.below(16);
        const auto m = init_model(d, k1, k2, 2, rng.below(1000));
        const auto view = binary_view(m);
        for (std::size_t i = 0; i < k2; ++i) {
            for (auto j : view.active_inputs2(i)) CHECK(view.op2[i] != view.op1[j]);
        }
        for (int s = 0; s < 5; ++s) {
            const auto t = forward(m, random_input(rng, d));
            for (auto v : t.v1) CHECK((v == 1 || v == -1));
            for (auto v : t.v2) CHECK((v == 1 || v == -1));
        }
    }
}

TEST_CASE("De Morgan duality on random wirings") {
    Rng rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t d = 1 + rng.below(10);
        const auto m = init_model(d, 8, 8, 2, trial);
        auto dual = m;
        for (auto& w : dual.nfl1.w_op) w = -w;
        for (auto& w : dual.nfl2.w_op) w = -w;
        const auto x = random_input(rng, d);
        BitVector not_x(x);
        for (auto& b : not_x) b = static_cast<Bit>(-b);
        const auto a = forward(m, x);
        const auto b = forward(dual, not_x);
        for (std::size_t i = 0; i < a.v1.size(); ++i) CHECK(a.v1[i] == -b.v1[i]);
        for (std::size_t i = 0; i < a.v2.size(); ++i) CHECK(a.v2[i] == -b.v2[i]);
    }
}

TEST_CASE("tie sets hold the arg-extremes") {
    const auto m = single_path(3, true, false);
    const auto t = forward(m, BitVector{-1, 1, -1});
    const auto ties = t.tie_set1(0);
    CHECK(std::vector<std::uint32_t>(ties.begin(), ties.end()) == std::vector<std::uint32_t>{0, 2});
}

TEST_CASE("argmax resolves ties to the lowest class") {
    const std::vector<double> a{0.1, 0.3, 0.3};
    CHECK(argmax(a) == 1);
    const std::vector<double> b{0.0, 0.0};
    CHECK(argmax(b) == 0);
}
