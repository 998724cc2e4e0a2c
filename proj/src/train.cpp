#include "nfrl/train.h"

#include "nfrl/error.h"
#include "nfrl/metrics.h"
#include "nfrl/random.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

namespace nfrl {

void TrainConfig::validate() const {
    if (k1 < 1 || k2 < 1) throw ArgumentError("layer widths must be >= 1");
    if (bins < 1) throw ArgumentError("bins must be >= 1");
    if (!(l2 >= 0.0)) throw ArgumentError("l2 coefficient must be >= 0");
    if (!(lr > 0.0)) throw ArgumentError("learning rate must be > 0");
    if (batch < 1) throw ArgumentError("batch size must be >= 1");
    if (epochs < 0) throw ArgumentError("epochs must be >= 0");
    if (decay_every < 1) throw ArgumentError("decay interval must be >= 1");
    if (!(decay_factor > 0.0 && decay_factor <= 1.0)) throw ArgumentError("decay factor must lie in (0, 1]");
}

// --- GradSet / Adam state -------------------------------------------------------

GradSet GradSet::zeros_like(const NfrlModel& model) {
    GradSet g;
    g.w_neg = Matrix(model.neg.w_neg.rows, model.neg.w_neg.cols);
    g.w_conn1 = Matrix(model.nfl1.w_conn.rows, model.nfl1.w_conn.cols);
    g.w_op1.assign(model.nfl1.w_op.size(), 0.0);
    g.w_conn2 = Matrix(model.nfl2.w_conn.rows, model.nfl2.w_conn.cols);
    g.w_op2.assign(model.nfl2.w_op.size(), 0.0);
    g.scores = Matrix(model.head.scores.rows, model.head.scores.cols);
    g.bias.assign(model.head.bias.size(), 0.0);
    return g;
}

namespace {

template <typename Fn>
void for_each_tensor(GradSet& g, Fn fn) {
    fn(g.w_neg.data);
    fn(g.w_conn1.data);
    fn(g.w_op1);
    fn(g.w_conn2.data);
    fn(g.w_op2);
    fn(g.scores.data);
    fn(g.bias);
}

} // namespace

void GradSet::set_zero() {
    for_each_tensor(*this, [](std::vector<double>& t) { std::fill(t.begin(), t.end(), 0.0); });
}

void GradSet::scale(double factor) {
    for_each_tensor(*this, [factor](std::vector<double>& t) {
        for (auto& x : t) x *= factor;
    });
}

bool GradSet::same_shape(const NfrlModel& model) const {
    return w_neg.data.size() == model.neg.w_neg.data.size() &&
           w_conn1.data.size() == model.nfl1.w_conn.data.size() && w_op1.size() == model.nfl1.w_op.size() &&
           w_conn2.data.size() == model.nfl2.w_conn.data.size() && w_op2.size() == model.nfl2.w_op.size() &&
           scores.data.size() == model.head.scores.data.size() && bias.size() == model.head.bias.size();
}

AdamState AdamState::for_model(const NfrlModel& model) {
    AdamState s;
    s.m = GradSet::zeros_like(model);
    s.v = GradSet::zeros_like(model);
    return s;
}

// --- min/max backward ----------------------------------------------------------

std::vector<double> minmax_backward(std::span<const double> values, Extremum mode, double upstream) {
    std::vector<double> grads(values.size(), 0.0);
    if (values.empty()) return grads;
    const double target = mode == Extremum::Min ? *std::min_element(values.begin(), values.end())
                                                : *std::max_element(values.begin(), values.end());
    const auto ties = std::count(values.begin(), values.end(), target);
    const double share = upstream / static_cast<double>(ties);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] == target) grads[i] = share;
    }
    return grads;
}

// --- backward ----------------------------------------------------------------------

void backward(const BinaryView& view, const ForwardTrace& t, std::span<const double> dlogits,
              bool relax_disconnected, GradSet& g) {
    const std::size_t D = view.inputs, K1 = view.k1, K2 = view.k2, Y = view.classes;
    if (dlogits.size() != Y || t.v1.size() != K1 || t.v2.size() != K2 || t.input.size() != D ||
        g.w_conn1.data.size() != K1 * D || g.w_conn2.data.size() != K2 * K1 || g.scores.data.size() != K2 * Y) {
        throw ArgumentError("backward: trace, gradient and model shapes disagree");
    }
    const Matrix& S = *view.scores;

    // Linear head.
    for (std::size_t k = 0; k < Y; ++k) g.bias[k] += dlogits[k];
    for (std::size_t i = 0; i < K2; ++i) {
        for (std::size_t k = 0; k < Y; ++k) g.scores(i, k) += t.v2[i] * dlogits[k];
    }

    std::vector<double> up1(K1, 0.0);

    // Second NFL.
    for (std::size_t i = 0; i < K2; ++i) {
        if (!view.live2[i]) continue;
        double up = 0.0;
        for (std::size_t k = 0; k < Y; ++k) up += S(i, k) * dlogits[k];
        if (up == 0.0) continue;

        const Op op = view.layer2_op(i);
        const double eta = identity_of(op);
        const auto active = view.active_inputs2(i);
        Bit lo = 1, hi = -1;
        for (auto j : active) {
            lo = std::min(lo, t.v1[j]);
            hi = std::max(hi, t.v1[j]);
        }
        // Operator blend v = c*min + (1-c)*max, STE through the sign.
        g.w_op2[i] += ste_sign_grad(up * (lo - hi) / 2.0);

        const auto ties = t.tie_set2(i);
        const double share = up / static_cast<double>(ties.size());
        for (auto j : ties) {
            up1[j] += share;
            // Neutral-element relaxation e = c*v + (1-c)*eta.
            g.w_conn2(i, j) += ste_sign_grad(share * (t.v1[j] - eta) / 2.0);
        }
        if (relax_disconnected && t.v2[i] == eta) {
            for (std::size_t j = 0; j < K1; ++j) {
                const auto e = i * K1 + j;
                if (view.conn2[e] > 0 || view.mask[e] < 0 || !view.live1[j]) continue;
                if (t.v1[j] != eta) g.w_conn2(i, j) += ste_sign_grad(share * (t.v1[j] - eta) / 2.0);
            }
        }
    }

    // First NFL and negation gates.
    for (std::size_t i = 0; i < K1; ++i) {
        const double up = up1[i];
        if (up == 0.0 || !view.live1[i]) continue;
        const Op op = view.layer1_op(i);
        const double eta = identity_of(op);
        const Bit* negs = view.neg.data() + i * D;

        Bit lo = 1, hi = -1;
        for (auto j : view.active_inputs1(i)) {
            const Bit n = static_cast<Bit>(t.input[j] * negs[j]);
            lo = std::min(lo, n);
            hi = std::max(hi, n);
        }
        g.w_op1[i] += ste_sign_grad(up * (lo - hi) / 2.0);

        const auto ties = t.tie_set1(i);
        const double share = up / static_cast<double>(ties.size());
        double* conn_row = g.w_conn1.data.data() + i * D;
        double* neg_row = g.w_neg.data.data() + i * D;
        for (auto j : ties) {
            const double n = t.input[j] * negs[j];
            conn_row[j] += ste_sign_grad(share * (n - eta) / 2.0);
            neg_row[j] += ste_sign_grad(share * t.input[j]);
        }
        if (relax_disconnected && t.v1[i] == eta) {
            const Bit* conns = view.conn1.data() + i * D;
            for (std::size_t j = 0; j < D; ++j) {
                if (conns[j] > 0) continue;
                const double n = t.input[j] * negs[j];
                if (n != eta) conn_row[j] += ste_sign_grad(share * (n - eta) / 2.0);
            }
        }
    }
}

GradSet backward(const NfrlModel& model, const ForwardTrace& trace, std::span<const double> dlogits,
                 bool relax_disconnected) {
    const auto view = binary_view(model);
    GradSet g = GradSet::zeros_like(model);
    backward(view, trace, dlogits, relax_disconnected, g);
    return g;
}

// --- loss, regularization, optimizer ------------------------------------------------

LossGrad cross_entropy(std::span<const double> logits, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
        throw ArgumentError("cross_entropy: label out of range");
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - top);
    const double log_sum = std::log(sum);
    LossGrad out;
    out.loss = -(logits[label] - top - log_sum);
    out.dlogits.resize(logits.size());
    for (std::size_t k = 0; k < logits.size(); ++k) out.dlogits[k] = std::exp(logits[k] - top - log_sum);
    out.dlogits[label] -= 1.0;
    return out;
}

double l2_penalty(const NfrlModel& model, double lambda) {
    double sum = 0.0;
    auto acc = [&](const std::vector<double>& w) {
        for (double x : w) sum += x * x;
    };
    acc(model.neg.w_neg.data);
    acc(model.nfl1.w_conn.data);
    acc(model.nfl1.w_op);
    acc(model.nfl2.w_conn.data);
    acc(model.nfl2.w_op);
    acc(model.head.scores.data);
    return lambda * sum;
}

void add_l2_grad(const NfrlModel& model, double lambda, std::span<const Bit> conn2_mask, GradSet& g) {
    if (lambda == 0.0) return;
    auto add = [lambda](const std::vector<double>& w, std::vector<double>& grad) {
        for (std::size_t i = 0; i < w.size(); ++i) grad[i] += 2.0 * lambda * w[i];
    };
    add(model.neg.w_neg.data, g.w_neg.data);
    add(model.nfl1.w_conn.data, g.w_conn1.data);
    add(model.nfl1.w_op, g.w_op1);
    add(model.nfl2.w_op, g.w_op2);
    add(model.head.scores.data, g.scores.data);
    const auto& w = model.nfl2.w_conn.data;
    for (std::size_t e = 0; e < w.size(); ++e) {
        if (conn2_mask.empty() || conn2_mask[e] > 0) g.w_conn2.data[e] += 2.0 * lambda * w[e];
    }
}

namespace {

void adam_tensor(const char* name, std::vector<double>& param, const std::vector<double>& grad,
                 std::vector<double>& m, std::vector<double>& v, const AdamState& s, double lr,
                 std::span<const Bit> frozen) {
    const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
    const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
    for (std::size_t i = 0; i < param.size(); ++i) {
        if (!frozen.empty() && frozen[i] < 0) continue;
        const double gi = grad[i];
        if (!std::isfinite(gi)) {
            throw NumericError(std::string("non-finite gradient in ") + name + "[" + std::to_string(i) + "]");
        }
        m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * gi;
        v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * gi * gi;
        param[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + s.eps);
    }
}

} // namespace

void adam_step(NfrlModel& model, const GradSet& g, AdamState& s, double lr, std::span<const Bit> conn2_mask) {
    if (!g.same_shape(model) || !s.m.same_shape(model) || !s.v.same_shape(model)) {
        throw ArgumentError("adam_step: gradient or moment shapes differ from the model");
    }
    ++s.step;
    adam_tensor("w_neg", model.neg.w_neg.data, g.w_neg.data, s.m.w_neg.data, s.v.w_neg.data, s, lr, {});
    adam_tensor("w_conn1", model.nfl1.w_conn.data, g.w_conn1.data, s.m.w_conn1.data, s.v.w_conn1.data, s, lr, {});
    adam_tensor("w_op1", model.nfl1.w_op, g.w_op1, s.m.w_op1, s.v.w_op1, s, lr, {});
    adam_tensor("w_conn2", model.nfl2.w_conn.data, g.w_conn2.data, s.m.w_conn2.data, s.v.w_conn2.data, s, lr,
                conn2_mask);
    adam_tensor("w_op2", model.nfl2.w_op, g.w_op2, s.m.w_op2, s.v.w_op2, s, lr, {});
    adam_tensor("scores", model.head.scores.data, g.scores.data, s.m.scores.data, s.v.scores.data, s, lr, {});
    adam_tensor("bias", model.head.bias, g.bias, s.m.bias, s.v.bias, s, lr, {});
}

// --- history -----------------------------------------------------------------------

void TrainHistory::write_csv(std::ostream& out, bool with_header, const std::string& prefix) const {
    if (with_header) out << "epoch,lr,train_loss,train_f1,val_f1,live_rules,elapsed_ms\n";
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::setprecision(10);
    for (const auto& e : epochs) {
        out << prefix << e.epoch << ',' << e.lr << ',' << e.train_loss << ',' << e.train_f1 << ',';
        if (std::isnan(e.val_f1)) out << "nan";
        else out << e.val_f1;
        out << ',' << e.live_rules << ',' << std::fixed << std::setprecision(1) << e.elapsed_ms << '\n';
        out.flags(flags);
        out << std::setprecision(10);
    }
    out.precision(precision);
}

// --- trainer -----------------------------------------------------------------------

Trainer::Trainer(NfrlModel model, const TrainConfig& config)
    : model_(std::move(model)), config_(config), adam_(AdamState::for_model(model_)),
      grads_(GradSet::zeros_like(model_)) {
    config_.validate();
    audit_.initial_conn2 = model_.nfl2.w_conn;
    audit_.ever_eligible.assign(model_.nfl2.w_conn.data.size(), false);
}

double Trainer::step(const BitMatrix& bits, std::span<const int> labels, std::span<const std::size_t> batch,
                     double lr) {
    if (batch.empty()) return 0.0;
    const auto view = binary_view(model_);
    for (std::size_t e = 0; e < view.mask.size(); ++e) {
        if (view.mask[e] > 0) audit_.ever_eligible[e] = true;
    }
    grads_.set_zero();
    double loss = 0.0;
    for (auto r : batch) {
        forward(view, bits.row(r), trace_);
        const auto lg = cross_entropy(trace_.logits, labels[r]);
        loss += lg.loss;
        backward(view, trace_, lg.dlogits, config_.relax_disconnected, grads_);
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    loss *= inv;
    if (!std::isfinite(loss)) return loss;
    grads_.scale(inv);
    add_l2_grad(model_, config_.l2, view.mask, grads_);
    adam_step(model_, grads_, adam_, lr, view.mask);
    return loss;
}

double scheduled_lr(const TrainConfig& config, int epoch) {
    return config.lr * std::pow(1.0 - config.decay_factor, epoch / config.decay_every);
}

std::vector<int> predict(const NfrlModel& model, const BitMatrix& bits) {
    const auto view = binary_view(model);
    ForwardTrace trace;
    std::vector<int> out(bits.rows);
    for (std::size_t r = 0; r < bits.rows; ++r) {
        forward(view, bits.row(r), trace);
        out[r] = argmax(trace.logits);
    }
    return out;
}

TrainResult train(const Dataset& data, const TrainConfig& config, const Dataset* validation) {
    config.validate();
    if (data.size() == 0) throw ArgumentError("train: empty dataset");
    return train(data, BinarizerModel::fit(config.binning, data, config.bins, config.seed), config, validation);
}

TrainResult train(const Dataset& data, BinarizerModel binarizer, const TrainConfig& config,
                  const Dataset* validation) {
    config.validate();
    if (data.size() == 0) throw ArgumentError("train: empty dataset");
    using Clock = std::chrono::steady_clock;
    const auto started = Clock::now();

    const BitMatrix bits = binarizer.transform_all(data);
    BitMatrix val_bits;
    if (validation) val_bits = binarizer.transform_all(*validation);
    const auto classes = static_cast<std::size_t>(data.class_count());

    NfrlModel initial = init_model(std::move(binarizer), config.k1, config.k2, classes, config.seed + 1);
    initial.class_names = data.class_names;
    Trainer trainer(std::move(initial), config);
    Rng order_rng(config.seed + 2);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainHistory history;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr = scheduled_lr(config, epoch);
        order_rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch) {
            const auto len = std::min(config.batch, order.size() - start);
            const std::span<const std::size_t> batch(order.data() + start, len);
            const double loss = trainer.step(bits, data.labels, batch, lr);
            if (!std::isfinite(loss)) {
                history.diverged = true;
                history.message = "non-finite loss at epoch " + std::to_string(epoch + 1);
                return {trainer.model(), std::move(history), trainer.audit()};
            }
            loss_sum += loss * static_cast<double>(len);
        }

        EpochRecord rec;
        rec.epoch = epoch + 1;
        rec.lr = lr;
        rec.train_loss = loss_sum / static_cast<double>(data.size());
        rec.train_f1 = macro_f1(predict(trainer.model(), bits), data.labels, data.class_count());
        rec.val_f1 = validation ? macro_f1(predict(trainer.model(), val_bits), validation->labels,
                                           data.class_count())
                                : std::numeric_limits<double>::quiet_NaN();
        rec.live_rules = binary_view(trainer.model()).live_rule_count();
        rec.elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - started).count();
        history.epochs.push_back(rec);
    }
    return {trainer.model(), std::move(history), trainer.audit()};
}

} // namespace nfrl
