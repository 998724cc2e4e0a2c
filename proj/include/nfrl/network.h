#pragma once

#include "nfrl/binarize.h"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nfrl {

/// Dense row-major matrix of latent weights.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    bool operator==(const Matrix&) const = default;
};

/// sign with sign(0) := -1, matching q.
inline Bit sign_binarize(double w) { return w > 0.0 ? Bit{1} : Bit{-1}; }

enum class Op : std::int8_t { And, Or };

/// +1 selects AND, -1 selects OR.
inline Op op_from_sign(Bit s) { return s > 0 ? Op::And : Op::Or; }
/// Neutral element of the operator: AND of nothing is true, OR of nothing false.
inline Bit identity_of(Op op) { return op == Op::And ? Bit{1} : Bit{-1}; }

/// K logical neurons over `fan_in` upstream values.
struct NormalFormLayer {
    std::vector<double> w_op;  // K operator logits
    Matrix w_conn;             // K x fan_in connection logits, row = this layer's neuron

    std::size_t width() const { return w_op.size(); }
    std::size_t fan_in() const { return w_conn.cols; }
    bool operator==(const NormalFormLayer&) const = default;
};

/// One negation gate per (first-NFL neuron, input bit) edge.
struct NegationLayer {
    Matrix w_neg;  // K1 x D
    bool operator==(const NegationLayer&) const = default;
};

struct LinearHead {
    Matrix scores;             // K2 x Y contribution scores
    std::vector<double> bias;  // Y
    bool operator==(const LinearHead&) const = default;
};

struct NfrlModel {
    BinarizerModel binarizer;
    NegationLayer neg;
    NormalFormLayer nfl1;
    NormalFormLayer nfl2;
    LinearHead head;
    std::uint64_t seed = 0;
    /// Display names of the classes; may be empty.
    std::vector<std::string> class_names;

    std::size_t input_width() const { return nfl1.fan_in(); }
    std::size_t class_count() const { return head.bias.size(); }

    /// Throws ArgumentError if layer shapes are inconsistent.
    void validate() const;
    bool operator==(const NfrlModel&) const = default;
};

/// Latent weights uniform on [-0.1, -1e-4] U [1e-4, 0.1]; head zeroed.
NfrlModel init_model(BinarizerModel binarizer, std::size_t k1, std::size_t k2, std::size_t classes,
                     std::uint64_t seed);
/// Same, with a passthrough binarizer over D features named x_1..x_D.
NfrlModel init_model(std::size_t input_width, std::size_t k1, std::size_t k2, std::size_t classes,
                     std::uint64_t seed);

/// M[i][j] = -sign(w_op_2[i]) * sign(w_op_1[j]), row-major K2 x K1.
/// An edge j -> i between the two NFLs is eligible iff M[i][j] = +1.
std::vector<Bit> nfc_mask(std::span<const double> w_op_1, std::span<const double> w_op_2);

/// Sign-binarized network structure. Forward, backward and rule
/// extraction all read the model through this view.
struct BinaryView {
    std::size_t inputs = 0, k1 = 0, k2 = 0, classes = 0;

    std::vector<Bit> op1, op2;  // +1 AND, -1 OR
    std::vector<Bit> conn1;     // K1 x D raw sign
    std::vector<Bit> neg;       // K1 x D raw sign
    std::vector<Bit> conn2;     // K2 x K1 raw sign
    std::vector<Bit> mask;      // K2 x K1 NFC mask

    // Active incoming edges in CSR form. A first-NFL edge is active when
    // connected; a second-NFL edge when connected, NFC-eligible and its
    // source neuron is live.
    std::vector<std::uint32_t> in1_offsets, in1;
    std::vector<std::uint32_t> in2_offsets, in2;

    std::vector<bool> live1, live2;

    /// bias plus the constant contributions of dead second-NFL neurons,
    /// accumulated in neuron order.
    std::vector<double> logit_offset;
    const Matrix* scores = nullptr;

    std::span<const std::uint32_t> active_inputs1(std::size_t i) const {
        return {in1.data() + in1_offsets[i], in1_offsets[i + 1] - in1_offsets[i]};
    }
    std::span<const std::uint32_t> active_inputs2(std::size_t i) const {
        return {in2.data() + in2_offsets[i], in2_offsets[i + 1] - in2_offsets[i]};
    }
    Op layer1_op(std::size_t i) const { return op_from_sign(op1[i]); }
    Op layer2_op(std::size_t i) const { return op_from_sign(op2[i]); }
    /// Literal value fed to first-NFL neuron i from input j.
    Bit negated_input(std::span<const Bit> bits, std::size_t i, std::size_t j) const {
        return static_cast<Bit>(bits[j] * neg[i * inputs + j]);
    }
    std::size_t live_rule_count() const;
};

/// The returned view refers to `model`'s head scores; keep the model alive.
BinaryView binary_view(const NfrlModel& model);

struct ForwardTrace {
    BitVector input;
    std::vector<Bit> v1;  // dead neurons hold their operator's identity
    std::vector<Bit> v2;
    std::vector<double> logits;

    // Tie sets (argmin for AND, argmax for OR) over active inputs, CSR.
    // tie1 holds input-bit indices, tie2 first-NFL neuron indices.
    std::vector<std::uint32_t> tie1_offsets, tie1;
    std::vector<std::uint32_t> tie2_offsets, tie2;

    std::span<const std::uint32_t> tie_set1(std::size_t i) const {
        return {tie1.data() + tie1_offsets[i], tie1_offsets[i + 1] - tie1_offsets[i]};
    }
    std::span<const std::uint32_t> tie_set2(std::size_t i) const {
        return {tie2.data() + tie2_offsets[i], tie2_offsets[i + 1] - tie2_offsets[i]};
    }
};

/// Buffers in `trace` are reused across calls.
void forward(const BinaryView& view, std::span<const Bit> bits, ForwardTrace& trace);
ForwardTrace forward(const NfrlModel& model, std::span<const Bit> bits);

/// Index of the largest logit; ties resolve to the lowest class.
int argmax(std::span<const double> logits);

} // namespace nfrl
