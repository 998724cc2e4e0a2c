#pragma once

#include "nfrl/binarize.h"
#include "nfrl/data.h"
#include "nfrl/network.h"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace nfrl {

struct TrainConfig {
    std::size_t k1 = 64;
    std::size_t k2 = 64;
    int bins = 15;
    BinningMethod binning = BinningMethod::RanInt;
    double l2 = 1e-7;
    double lr = 1e-2;
    std::size_t batch = 32;
    int epochs = 400;
    int decay_every = 100;
    /// lr <- lr * (1 - decay_factor) every decay_every epochs.
    double decay_factor = 0.1;
    std::uint64_t seed = 0;
    /// Also route connection gradient to disconnected inputs whose
    /// neutral-element stand-in ties the neuron output. Off by default:
    /// only active inputs take part in the forward value.
    bool relax_disconnected = false;

    /// Throws ArgumentError when a field is out of range.
    void validate() const;
};

/// Gradients mirroring every latent weight of an NfrlModel.
struct GradSet {
    Matrix w_neg;
    Matrix w_conn1;
    std::vector<double> w_op1;
    Matrix w_conn2;
    std::vector<double> w_op2;
    Matrix scores;
    std::vector<double> bias;

    static GradSet zeros_like(const NfrlModel& model);
    void set_zero();
    void scale(double factor);
    bool same_shape(const NfrlModel& model) const;
};

struct AdamState {
    GradSet m;
    GradSet v;
    long long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState for_model(const NfrlModel& model);
};

/// Straight-through estimator: d sign(x)/dx := 1.
inline double ste_sign_grad(double upstream) { return upstream; }

enum class Extremum { Min, Max };

/// Shares `upstream` evenly over the tie set of min/max; zero elsewhere.
/// Empty input yields an empty result.
std::vector<double> minmax_backward(std::span<const double> values, Extremum mode, double upstream);

/// Accumulates the gradient of one sample into `grads`. `view` and `trace`
/// must come from the current state of `model`.
void backward(const BinaryView& view, const ForwardTrace& trace, std::span<const double> dlogits,
              bool relax_disconnected, GradSet& grads);
GradSet backward(const NfrlModel& model, const ForwardTrace& trace, std::span<const double> dlogits,
                 bool relax_disconnected = false);

struct LossGrad {
    double loss = 0.0;
    std::vector<double> dlogits;
};

/// Softmax cross-entropy with max subtraction.
LossGrad cross_entropy(std::span<const double> logits, int label);

/// lambda * sum of squared latent weights; bias excluded.
double l2_penalty(const NfrlModel& model, double lambda);
/// Adds 2*lambda*w to every latent-weight gradient except the bias.
/// Second-NFL connection entries where `conn2_mask` is -1 are left alone.
void add_l2_grad(const NfrlModel& model, double lambda, std::span<const Bit> conn2_mask, GradSet& grads);

/// Bias-corrected Adam. Second-NFL connection weights where `conn2_mask`
/// is -1 are frozen: neither the weight nor its moments change.
/// Throws NumericError naming the parameter on a non-finite gradient.
void adam_step(NfrlModel& model, const GradSet& grads, AdamState& state, double lr,
               std::span<const Bit> conn2_mask);

struct EpochRecord {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double train_f1 = 0.0;
    double val_f1 = 0.0;  // NaN without a validation set
    std::size_t live_rules = 0;
    double elapsed_ms = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    bool diverged = false;
    std::string message;

    /// Columns: epoch,lr,train_loss,train_f1,val_f1,live_rules,elapsed_ms.
    void write_csv(std::ostream& out, bool with_header = true, const std::string& prefix = {}) const;
};

/// Record of which second-NFL connections were ever NFC-eligible.
struct NfcAudit {
    Matrix initial_conn2;
    std::vector<bool> ever_eligible;  // K2 x K1
};

/// Owns a model and its optimizer state; one call to step() is one update.
class Trainer {
public:
    Trainer(NfrlModel model, const TrainConfig& config);

    /// Forward/backward over `batch` rows of `bits`, mean gradient, L2,
    /// one Adam update. Returns the mean cross-entropy of the batch.
    double step(const BitMatrix& bits, std::span<const int> labels, std::span<const std::size_t> batch,
                double lr);

    const NfrlModel& model() const { return model_; }
    NfrlModel& model() { return model_; }
    const NfcAudit& audit() const { return audit_; }

private:
    NfrlModel model_;
    TrainConfig config_;
    AdamState adam_;
    GradSet grads_;
    ForwardTrace trace_;
    NfcAudit audit_;
};

struct TrainResult {
    NfrlModel model;
    TrainHistory history;
    NfcAudit audit;
};

/// Learning rate in effect during `epoch` (0-based).
double scheduled_lr(const TrainConfig& config, int epoch);

/// Fits the binarizer on `train`, then runs the full mini-batch loop.
/// On a non-finite loss training stops and the history is marked diverged.
TrainResult train(const Dataset& train, const TrainConfig& config, const Dataset* validation = nullptr);
/// Same, with a pre-fitted binarizer (e.g. passthrough for +1/-1 data).
TrainResult train(const Dataset& train, BinarizerModel binarizer, const TrainConfig& config,
                  const Dataset* validation = nullptr);

/// Predicted class of every row.
std::vector<int> predict(const NfrlModel& model, const BitMatrix& bits);

} // namespace nfrl
