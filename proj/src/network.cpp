#include "nfrl/network.h"

#include "nfrl/error.h"
#include "nfrl/random.h"

#include <algorithm>
#include <string>

namespace nfrl {

namespace {

constexpr double kInitMin = 1e-4;
constexpr double kInitMax = 0.1;

double draw_weight(Rng& rng) {
    const double magnitude = rng.uniform(kInitMin, kInitMax);
    return rng.bernoulli(0.5) ? magnitude : -magnitude;
}

void fill(Rng& rng, std::vector<double>& values) {
    for (auto& v : values) v = draw_weight(rng);
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ArgumentError("malformed model: " + what);
}

} // namespace

void NfrlModel::validate() const {
    const auto D = nfl1.fan_in();
    const auto K1 = nfl1.width();
    const auto K2 = nfl2.width();
    const auto Y = head.bias.size();
    require(D >= 1 && K1 >= 1 && K2 >= 1 && Y >= 1, "every dimension must be positive");
    require(nfl1.w_conn.rows == K1 && nfl1.w_conn.data.size() == K1 * D, "nfl1 connection shape");
    require(neg.w_neg.rows == K1 && neg.w_neg.cols == D && neg.w_neg.data.size() == K1 * D,
            "negation shape");
    require(nfl2.w_conn.rows == K2 && nfl2.w_conn.cols == K1 && nfl2.w_conn.data.size() == K2 * K1,
            "nfl2 connection shape");
    require(head.scores.rows == K2 && head.scores.cols == Y && head.scores.data.size() == K2 * Y,
            "head shape");
    require(binarizer.width() == 0 || binarizer.width() == D, "binarizer width differs from input width");
}

NfrlModel init_model(BinarizerModel binarizer, std::size_t k1, std::size_t k2, std::size_t classes,
                     std::uint64_t seed) {
    const std::size_t d = binarizer.width();
    if (d == 0 || k1 == 0 || k2 == 0 || classes == 0) {
        throw ArgumentError("init_model: all dimensions must be >= 1");
    }
    Rng rng(seed);
    NfrlModel m;
    m.binarizer = std::move(binarizer);
    m.seed = seed;
    m.neg.w_neg = Matrix(k1, d);
    m.nfl1.w_conn = Matrix(k1, d);
    m.nfl1.w_op.resize(k1);
    m.nfl2.w_conn = Matrix(k2, k1);
    m.nfl2.w_op.resize(k2);
    fill(rng, m.neg.w_neg.data);
    fill(rng, m.nfl1.w_conn.data);
    fill(rng, m.nfl1.w_op);
    fill(rng, m.nfl2.w_conn.data);
    fill(rng, m.nfl2.w_op);
    m.head.scores = Matrix(k2, classes, 0.0);
    m.head.bias.assign(classes, 0.0);
    return m;
}

NfrlModel init_model(std::size_t input_width, std::size_t k1, std::size_t k2, std::size_t classes,
                     std::uint64_t seed) {
    if (input_width == 0) throw ArgumentError("init_model: all dimensions must be >= 1");
    BinarizerModel binarizer;
    for (std::size_t j = 0; j < input_width; ++j) {
        const auto name = "x_" + std::to_string(j + 1);
        binarizer.features.push_back({name, false, {}});
        binarizer.specs.push_back({name, LiteralKind::Passthrough, 0.0, {}});
    }
    return init_model(std::move(binarizer), k1, k2, classes, seed);
}

std::vector<Bit> nfc_mask(std::span<const double> w_op_1, std::span<const double> w_op_2) {
    std::vector<Bit> mask(w_op_2.size() * w_op_1.size());
    for (std::size_t i = 0; i < w_op_2.size(); ++i) {
        for (std::size_t j = 0; j < w_op_1.size(); ++j) {
            mask[i * w_op_1.size() + j] = static_cast<Bit>(-sign_binarize(w_op_2[i]) * sign_binarize(w_op_1[j]));
        }
    }
    return mask;
}

std::size_t BinaryView::live_rule_count() const {
    return static_cast<std::size_t>(std::count(live2.begin(), live2.end(), true));
}

BinaryView binary_view(const NfrlModel& model) {
    model.validate();
    BinaryView v;
    v.inputs = model.nfl1.fan_in();
    v.k1 = model.nfl1.width();
    v.k2 = model.nfl2.width();
    v.classes = model.class_count();
    v.scores = &model.head.scores;

    auto signs = [](const std::vector<double>& w) {
        std::vector<Bit> out(w.size());
        std::transform(w.begin(), w.end(), out.begin(), sign_binarize);
        return out;
    };
    v.op1 = signs(model.nfl1.w_op);
    v.op2 = signs(model.nfl2.w_op);
    v.conn1 = signs(model.nfl1.w_conn.data);
    v.neg = signs(model.neg.w_neg.data);
    v.conn2 = signs(model.nfl2.w_conn.data);
    v.mask = nfc_mask(model.nfl1.w_op, model.nfl2.w_op);

    v.in1_offsets.assign(1, 0);
    v.live1.assign(v.k1, false);
    for (std::size_t i = 0; i < v.k1; ++i) {
        for (std::size_t j = 0; j < v.inputs; ++j) {
            if (v.conn1[i * v.inputs + j] > 0) v.in1.push_back(static_cast<std::uint32_t>(j));
        }
        v.in1_offsets.push_back(static_cast<std::uint32_t>(v.in1.size()));
        v.live1[i] = v.in1_offsets[i + 1] > v.in1_offsets[i];
    }

    v.in2_offsets.assign(1, 0);
    v.live2.assign(v.k2, false);
    for (std::size_t i = 0; i < v.k2; ++i) {
        for (std::size_t j = 0; j < v.k1; ++j) {
            const auto e = i * v.k1 + j;
            if (v.conn2[e] > 0 && v.mask[e] > 0 && v.live1[j]) v.in2.push_back(static_cast<std::uint32_t>(j));
        }
        v.in2_offsets.push_back(static_cast<std::uint32_t>(v.in2.size()));
        v.live2[i] = v.in2_offsets[i + 1] > v.in2_offsets[i];
    }

    v.logit_offset = model.head.bias;
    for (std::size_t i = 0; i < v.k2; ++i) {
        if (v.live2[i]) continue;
        const double value = identity_of(v.layer2_op(i));
        for (std::size_t k = 0; k < v.classes; ++k) v.logit_offset[k] += value * model.head.scores(i, k);
    }
    return v;
}

namespace {

// Evaluates one min/max neuron and appends its tie set.
template <typename ValueAt>
Bit evaluate_neuron(Op op, std::span<const std::uint32_t> active, ValueAt value_at,
                    std::vector<std::uint32_t>& ties) {
    if (active.empty()) return identity_of(op);
    Bit out = op == Op::And ? Bit{1} : Bit{-1};
    for (auto j : active) {
        const Bit x = value_at(j);
        out = op == Op::And ? std::min(out, x) : std::max(out, x);
    }
    for (auto j : active) {
        if (value_at(j) == out) ties.push_back(j);
    }
    return out;
}

} // namespace

void forward(const BinaryView& view, std::span<const Bit> bits, ForwardTrace& t) {
    t.input.assign(bits.begin(), bits.end());
    t.v1.resize(view.k1);
    t.v2.resize(view.k2);
    t.tie1.clear();
    t.tie2.clear();
    t.tie1_offsets.assign(1, 0);
    t.tie2_offsets.assign(1, 0);

    for (std::size_t i = 0; i < view.k1; ++i) {
        const Bit* negs = view.neg.data() + i * view.inputs;
        t.v1[i] = evaluate_neuron(
            view.layer1_op(i), view.active_inputs1(i),
            [&](std::uint32_t j) { return static_cast<Bit>(bits[j] * negs[j]); }, t.tie1);
        t.tie1_offsets.push_back(static_cast<std::uint32_t>(t.tie1.size()));
    }
    for (std::size_t i = 0; i < view.k2; ++i) {
        t.v2[i] = evaluate_neuron(view.layer2_op(i), view.active_inputs2(i),
                                  [&](std::uint32_t j) { return t.v1[j]; }, t.tie2);
        t.tie2_offsets.push_back(static_cast<std::uint32_t>(t.tie2.size()));
    }

    t.logits.assign(view.logit_offset.begin(), view.logit_offset.end());
    for (std::size_t i = 0; i < view.k2; ++i) {
        if (!view.live2[i]) continue;
        const double z = t.v2[i];
        for (std::size_t k = 0; k < view.classes; ++k) t.logits[k] += z * (*view.scores)(i, k);
    }
}

ForwardTrace forward(const NfrlModel& model, std::span<const Bit> bits) {
    if (bits.size() != model.input_width()) {
        throw ArgumentError("forward: expected " + std::to_string(model.input_width()) + " bits, got " +
                            std::to_string(bits.size()));
    }
    const auto view = binary_view(model);
    ForwardTrace trace;
    forward(view, bits, trace);
    return trace;
}

int argmax(std::span<const double> logits) {
    return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

} // namespace nfrl
