#include "nfrl/cli.h"

#include "nfrl/error.h"
#include "nfrl/io.h"
#include "nfrl/metrics.h"
#include "nfrl/random.h"
#include "nfrl/rule_spec.h"
#include "nfrl/rules.h"
#include "nfrl/train.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace nfrl::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double value, int digits = 6) {
    if (std::isnan(value)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    return buf;
}

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

// Sample standard deviation; 0 for a single value.
MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd r;
    if (xs.empty()) return r;
    for (double x : xs) r.mean += x;
    r.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - r.mean) * (x - r.mean);
        r.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return r;
}

std::string optional_text(const std::optional<double>& v) { return v ? fmt(*v) : "n/a"; }

// Flags shared by train and simulate.
struct TrainFlags {
    TrainConfig config;
    std::string binning = "ranint";
};

void add_train_flags(CLI::App& cmd, TrainFlags& flags) {
    auto& c = flags.config;
    cmd.add_option("--k1", c.k1, "Width of the first normal form layer")->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--k2", c.k2, "Width of the second normal form layer")->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--bins", c.bins, "Bins per continuous feature")->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--binning", flags.binning, "Binning method")
        ->capture_default_str()
        ->check(CLI::IsMember({"ranint", "kint", "entint"}));
    cmd.add_option("--l2", c.l2, "L2 coefficient")->capture_default_str()->check(CLI::NonNegativeNumber);
    cmd.add_option("--lr", c.lr, "Initial learning rate")->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--batch", c.batch, "Mini-batch size")->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--epochs", c.epochs, "Training epochs")->capture_default_str()->check(CLI::NonNegativeNumber);
    cmd.add_option("--decay-every", c.decay_every, "Epochs between learning-rate decays")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd.add_option("--decay-factor", c.decay_factor, "Fraction removed from the rate at each decay")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    cmd.add_option("--seed", c.seed, "Random seed")->capture_default_str();
    cmd.add_flag("--relax-disconnected", c.relax_disconnected,
                 "Route connection gradient to disconnected inputs as well");
}

void finish_train_flags(TrainFlags& flags) {
    flags.config.binning = parse_binning_method(flags.binning);
    flags.config.validate();
}

// Bits of a random +-1 input.
std::vector<Bit> random_bits(Rng& rng, std::size_t width) {
    std::vector<Bit> bits(width);
    for (auto& b : bits) b = rng.bernoulli(0.5) ? Bit{1} : Bit{-1};
    return bits;
}

// Compares network logits with rule-set logits on random inputs.
bool fidelity_holds(const NfrlModel& model, const RuleSet& rules, std::size_t samples, std::uint64_t seed) {
    Rng rng(seed);
    for (std::size_t s = 0; s < samples; ++s) {
        const auto bits = random_bits(rng, model.input_width());
        if (forward(model, bits).logits != predict_with_rules(rules, bits)) return false;
    }
    return true;
}

std::vector<std::string> class_names_of(const NfrlModel& model) {
    if (!model.class_names.empty()) return model.class_names;
    std::vector<std::string> names;
    for (std::size_t k = 0; k < model.class_count(); ++k) names.push_back(std::to_string(k));
    return names;
}

void write_stats(std::ostream& out, const std::string& prefix, const RuleStats& stats) {
    out << prefix << "rules " << stats.rule_count << '\n';
    out << prefix << "avg_rule_length " << fmt(stats.avg_length) << '\n';
    out << prefix << "mean_coverage " << fmt(stats.mean_coverage) << '\n';
    out << prefix << "mean_rule_accuracy " << optional_text(stats.mean_accuracy) << '\n';
    out << prefix << "diversity " << optional_text(stats.diversity) << '\n';
}

// --- train ---------------------------------------------------------------------------

struct TrainArgs {
    std::string data;
    std::string schema;
    std::string out = "nfrl_run";
    int folds = 5;
    double prune_tau = 1e-3;
    TrainFlags flags;
};

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
    const auto schema = Schema::load(args.schema);
    const auto data = load_dataset(args.data, schema);
    const auto& config = args.flags.config;

    std::vector<Fold> folds;
    if (args.folds == 1) {
        folds.push_back({data, data.subset({}), {}});
    } else {
        folds = kfold_split(data, args.folds, config.seed);
    }

    const fs::path root(args.out);
    fs::create_directories(root);
    std::ostringstream history;
    history << "fold,epoch,lr,train_loss,train_f1,val_f1,live_rules,elapsed_ms\n";
    std::ostringstream summary;
    summary << "command train\n"
            << "data " << fs::path(args.data).filename().string() << '\n'
            << "rows " << data.rows.size() << '\n'
            << "classes " << data.class_count() << '\n'
            << "folds " << args.folds << '\n'
            << "k1 " << config.k1 << "\nk2 " << config.k2 << '\n'
            << "bins " << config.bins << "\nbinning " << to_string(config.binning) << '\n'
            << "l2 " << config.l2 << "\nlr " << config.lr << "\nbatch " << config.batch << '\n'
            << "epochs " << config.epochs << "\ndecay_every " << config.decay_every << '\n'
            << "decay_factor " << config.decay_factor << "\nseed " << config.seed << '\n'
            << "relax_disconnected " << (config.relax_disconnected ? "true" : "false") << '\n';

    std::vector<double> test_f1s;
    std::vector<double> train_f1s;
    bool diverged = false;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const auto& fold = folds[f];
        const bool has_test = !fold.test.rows.empty();
        TrainConfig fold_config = config;
        fold_config.seed = config.seed + f;
        auto result = train(fold.train, fold_config, has_test ? &fold.test : nullptr);
        result.history.write_csv(history, false, std::to_string(f) + ",");

        const fs::path dir = root / ("fold" + std::to_string(f));
        save_model(dir / "model", result.model);
        const auto rules = simplify(extract_rules(result.model));
        const auto train_bits = result.model.binarizer.transform_all(fold.train);
        RenderOptions render_options;
        render_options.prune_tau = args.prune_tau;
        render_options.class_names = class_names_of(result.model);
        render_options.coverage_rows = &train_bits;
        write_text_file(dir / "rules.txt", render(rules, rules.binarizer, render_options));
        write_text_file(dir / "rules.json", ruleset_to_text(rules));

        const std::string p = "fold" + std::to_string(f) + ".";
        const double train_f1 =
            macro_f1(predict(result.model, train_bits), fold.train.labels, static_cast<int>(data.class_count()));
        train_f1s.push_back(train_f1);
        summary << p << "train_f1 " << fmt(train_f1) << '\n';
        if (has_test) {
            const auto test_bits = result.model.binarizer.transform_all(fold.test);
            const double test_f1 =
                macro_f1(predict(result.model, test_bits), fold.test.labels, static_cast<int>(data.class_count()));
            test_f1s.push_back(test_f1);
            summary << p << "test_f1 " << fmt(test_f1) << '\n';
            write_stats(summary, p + "test.", rule_stats(rules, test_bits, fold.test.labels));
        }
        write_stats(summary, p + "train.", rule_stats(rules, train_bits, fold.train.labels));
        if (result.history.diverged) {
            summary << p << "diverged " << result.history.message << '\n';
            err << "fold " << f << ": training diverged: " << result.history.message << '\n';
            diverged = true;
            break;
        }
        out << "fold " << f << ": " << (has_test ? "test" : "train") << " macro-F1 "
            << fmt(has_test ? test_f1s.back() : train_f1, 4) << '\n';
    }

    const auto& f1s = test_f1s.empty() ? train_f1s : test_f1s;
    const auto stats = mean_std(f1s);
    const std::string which = test_f1s.empty() ? "train" : "test";
    summary << "mean_" << which << "_f1 " << fmt(stats.mean) << '\n' << "std_" << which << "_f1 " << fmt(stats.std) << '\n';
    write_text_file(root / "history.csv", history.str());
    write_text_file(root / "summary.txt", summary.str());
    out << "macro-F1 (" << which << ") " << fmt(stats.mean, 4) << " +- " << fmt(stats.std, 4) << '\n';
    return diverged ? kRuntimeFailure : kOk;
}

// --- simulate ------------------------------------------------------------------------

struct SimulateArgs {
    std::string rule;
    std::size_t n = 50000;
    int vars = 0;
    std::string out;
    double prune_tau = 1e-3;
    TrainFlags flags;
};

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
    const GroundTruthRule truth = parse_rule_spec(args.rule);
    const int var_count = std::max(args.vars, truth.max_var() + 1);
    if (var_count > 20) throw ArgumentError("rule uses more than 20 variables");
    const auto& config = args.flags.config;
    const std::vector<GroundTruthRule> rules{truth};
    const auto synthetic = generate_synthetic(rules, args.n, var_count, config.seed);
    const auto split = train_test_split(synthetic.datasets[0], 0.5, config.seed);
    if (split.train.rows.empty() || split.test.rows.empty()) throw ArgumentError("--n is too small for a 50/50 split");

    auto result = train(split.train, BinarizerModel::passthrough(split.train), config, &split.test);
    if (result.history.diverged) {
        err << "training diverged: " << result.history.message << '\n';
        return kRuntimeFailure;
    }
    const auto test_bits = result.model.binarizer.transform_all(split.test);
    const auto predicted = predict(result.model, test_bits);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == split.test.labels[i];
    const double accuracy = static_cast<double>(correct) / static_cast<double>(predicted.size());
    const auto extracted = simplify(extract_rules(result.model));
    const bool equivalent = truth_table_equivalent(extracted, truth, var_count);

    std::ostringstream report;
    report << "rule " << truth.to_string() << '\n' << "probabilities";
    for (double p : synthetic.probabilities) report << ' ' << fmt(p, 4);
    report << '\n'
           << "test_accuracy " << fmt(accuracy) << '\n'
           << "equivalent " << (equivalent ? "true" : "false") << '\n';
    const auto train_bits = result.model.binarizer.transform_all(split.train);
    RenderOptions render_options;
    render_options.prune_tau = args.prune_tau;
    render_options.class_names = synthetic.datasets[0].class_names;
    render_options.coverage_rows = &train_bits;
    const std::string table = render(extracted, extracted.binarizer, render_options);
    out << report.str() << table;

    if (!args.out.empty()) {
        const fs::path root(args.out);
        save_model(root / "model", result.model);
        write_text_file(root / "rules.txt", table);
        write_text_file(root / "rules.json", ruleset_to_text(extracted));
        std::ostringstream history;
        result.history.write_csv(history);
        write_text_file(root / "history.csv", history.str());
        write_text_file(root / "summary.txt", "command simulate\n" + report.str());
    }
    return kOk;
}

// --- extract / eval --------------------------------------------------------------------

struct ExtractArgs {
    std::string model;
    std::string out;
    std::string json;
    std::string data;
    std::string schema;
    double prune_tau = 1e-3;
    std::uint64_t seed = 0;
};

std::optional<Dataset> optional_dataset(const std::string& data, const std::string& schema) {
    if (data.empty()) return std::nullopt;
    return load_dataset(data, Schema::load(schema));
}

int cmd_extract(const ExtractArgs& args, std::ostream& out, std::ostream& err) {
    const auto model = load_model(args.model);
    const auto raw = extract_rules(model);
    if (!fidelity_holds(model, raw, 1000, args.seed)) {
        err << "fidelity check failed: rule logits differ from network logits\n";
        return kRuntimeFailure;
    }
    const auto rules = simplify(raw);
    RenderOptions options;
    options.prune_tau = args.prune_tau;
    options.class_names = class_names_of(model);
    BitMatrix rows;
    if (const auto data = optional_dataset(args.data, args.schema)) {
        rows = model.binarizer.transform_all(*data);
        options.coverage_rows = &rows;
    }
    const std::string report = render(rules, model.binarizer, options);
    if (args.out.empty()) out << report;
    else write_text_file(args.out, report);
    if (!args.json.empty()) write_text_file(args.json, ruleset_to_text(rules));
    err << "fidelity check passed (" << raw.rules.size() << " live rules, 1000 random inputs)\n";
    return kOk;
}

struct EvalArgs {
    std::string model;
    std::string data;
    std::string schema;
};

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream&) {
    const auto model = load_model(args.model);
    const auto data = load_dataset(args.data, Schema::load(args.schema));
    // Labels are interned per file; map them onto the model's class order.
    std::vector<int> labels = data.labels;
    if (!model.class_names.empty()) {
        for (auto& l : labels) {
            const auto& name = data.class_names[static_cast<std::size_t>(l)];
            const auto it = std::find(model.class_names.begin(), model.class_names.end(), name);
            if (it == model.class_names.end()) throw LoadError("label '" + name + "' is not a class of the model");
            l = static_cast<int>(it - model.class_names.begin());
        }
    }
    const auto bits = model.binarizer.transform_all(data);
    const double f1 = macro_f1(predict(model, bits), labels, static_cast<int>(model.class_count()));
    const auto rules = simplify(extract_rules(model));
    out << "rows " << data.rows.size() << '\n' << "macro_f1 " << fmt(f1, 10) << '\n';
    write_stats(out, "", rule_stats(rules, bits, labels));
    return kOk;
}

// --- gradcheck -----------------------------------------------------------------------

struct GradcheckArgs {
    std::size_t fan_in = 100;
    std::size_t trials = 1000;
    std::size_t cases = 10000;
    std::uint64_t seed = 0;
    bool inject_fault = false;
};

using MinMaxBackward = std::function<std::vector<double>(std::span<const double>, Extremum, double)>;

// Deliberately wrong: every tie-set member receives the full upstream.
std::vector<double> broken_minmax_backward(std::span<const double> values, Extremum mode, double upstream) {
    auto grads = minmax_backward(values, mode, upstream);
    for (auto& g : grads) {
        if (g != 0.0) g = upstream;
    }
    return grads;
}

std::string serialize_case(std::span<const double> values, Extremum mode, double upstream,
                           std::span<const double> grads) {
    std::ostringstream s;
    s.precision(17);
    s << "mode=" << (mode == Extremum::Min ? "min" : "max") << " upstream=" << upstream << " values=[";
    for (std::size_t i = 0; i < values.size(); ++i) s << (i ? "," : "") << values[i];
    s << "] grads=[";
    for (std::size_t i = 0; i < grads.size(); ++i) s << (i ? "," : "") << grads[i];
    s << ']';
    return s.str();
}

int cmd_gradcheck(const GradcheckArgs& args, std::ostream& out, std::ostream& err) {
    const MinMaxBackward backward_fn = args.inject_fault ? MinMaxBackward(broken_minmax_backward)
                                                         : MinMaxBackward([](auto v, auto m, auto u) {
                                                               return minmax_backward(v, m, u);
                                                           });
    Rng rng(args.seed);
    bool ok = true;
    for (std::size_t c = 0; c < args.cases && ok; ++c) {
        const std::size_t m = 1 + rng.below(8);
        std::vector<double> values(m);
        for (auto& v : values) v = rng.bernoulli(0.5) ? 1.0 : -1.0;
        const Extremum mode = rng.bernoulli(0.5) ? Extremum::Min : Extremum::Max;
        const double upstream = rng.uniform(-2.0, 2.0);
        const auto grads = backward_fn(values, mode, upstream);
        const double extreme = mode == Extremum::Min ? *std::min_element(values.begin(), values.end())
                                                     : *std::max_element(values.begin(), values.end());
        double sum = 0.0;
        bool off_tie_zero = true;
        for (std::size_t i = 0; i < m; ++i) {
            sum += grads[i];
            if (values[i] != extreme && grads[i] != 0.0) off_tie_zero = false;
        }
        if (std::abs(sum - upstream) > 1e-12 || !off_tie_zero) {
            err << "conservation violated: " << serialize_case(values, mode, upstream, grads) << '\n';
            ok = false;
        }
    }
    if (ok) out << "conservation ok (" << args.cases << " cases)\n";

    for (const Op op : {Op::And, Op::Or}) {
        const auto report = grad_liveness_report(args.fan_in, args.trials, args.seed, op);
        const char* name = op == Op::And ? "and" : "or";
        out << "liveness " << name << " fan_in " << args.fan_in << " trials " << args.trials << " minmax "
            << fmt(report.minmax) << " product " << fmt(report.product) << '\n';
        if (report.minmax != 1.0) {
            err << "min/max liveness below 1 for " << name << '\n';
            ok = false;
        }
    }
    return ok ? kOk : kRuntimeFailure;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Normal Form Rule Learner: trains a two-layer CNF/DNF rule network", "nfrl"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read flags from an INI/TOML file");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Cross-validated training on a CSV dataset");
    train_cmd->add_option("--data", train_args.data, "CSV file with a header row")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--schema", train_args.schema, "Schema file")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--out", train_args.out, "Output directory")->capture_default_str();
    train_cmd->add_option("--folds", train_args.folds, "Number of folds; 1 trains on all rows")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--prune-tau", train_args.prune_tau, "Report threshold on max |score|")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    add_train_flags(*train_cmd, train_args.flags);

    SimulateArgs sim_args;
    sim_args.flags.config.epochs = 10;
    sim_args.flags.config.decay_every = 100;
    auto* sim_cmd = app.add_subcommand("simulate", "Recover a known rule from synthetic data");
    sim_cmd->add_option("--rule", sim_args.rule, "Rule such as \"(x1|x2)&!x3\"")->required();
    sim_cmd->add_option("--n", sim_args.n, "Number of generated rows")->capture_default_str()->check(CLI::PositiveNumber);
    sim_cmd->add_option("--vars", sim_args.vars, "Number of variables (default: highest used)")
        ->check(CLI::Range(1, 20));
    sim_cmd->add_option("--out", sim_args.out, "Optional output directory");
    sim_cmd->add_option("--prune-tau", sim_args.prune_tau, "Report threshold on max |score|")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    add_train_flags(*sim_cmd, sim_args.flags);

    ExtractArgs extract_args;
    auto* extract_cmd = app.add_subcommand("extract", "Write the rule report of a trained model");
    extract_cmd->add_option("--model", extract_args.model, "Model file")->required()->check(CLI::ExistingFile);
    extract_cmd->add_option("--out", extract_args.out, "Report path (default: stdout)");
    extract_cmd->add_option("--json", extract_args.json, "Also write the structured rule export here");
    extract_cmd->add_option("--data", extract_args.data, "Rows for the Coverage column")->check(CLI::ExistingFile);
    extract_cmd->add_option("--schema", extract_args.schema, "Schema of --data")->check(CLI::ExistingFile);
    extract_cmd->add_option("--prune-tau", extract_args.prune_tau, "Report threshold on max |score|")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    extract_cmd->add_option("--seed", extract_args.seed, "Seed of the fidelity check inputs")->capture_default_str();

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "Score a trained model on a dataset");
    eval_cmd->add_option("--model", eval_args.model, "Model file")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--data", eval_args.data, "CSV file")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--schema", eval_args.schema, "Schema file")->required()->check(CLI::ExistingFile);

    GradcheckArgs grad_args;
    auto* grad_cmd = app.add_subcommand("gradcheck", "Check min/max gradient conservation and liveness");
    grad_cmd->add_option("--fan-in", grad_args.fan_in, "Fan-in of the liveness trials")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
    grad_cmd->add_option("--trials", grad_args.trials, "Liveness trials")->capture_default_str()->check(CLI::PositiveNumber);
    grad_cmd->add_option("--cases", grad_args.cases, "Conservation cases")->capture_default_str()->check(CLI::PositiveNumber);
    grad_cmd->add_option("--seed", grad_args.seed, "Random seed")->capture_default_str();
    grad_cmd->add_flag("--inject-fault", grad_args.inject_fault, "Self-test: use a broken backward pass")
        ->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsageError;
    }

    try {
        if (*extract_cmd && extract_args.data.empty() != extract_args.schema.empty()) {
            throw ArgumentError("--data and --schema must be given together");
        }
        if (*train_cmd) {
            finish_train_flags(train_args.flags);
            return cmd_train(train_args, out, err);
        }
        if (*sim_cmd) {
            finish_train_flags(sim_args.flags);
            return cmd_simulate(sim_args, out, err);
        }
        if (*extract_cmd) return cmd_extract(extract_args, out, err);
        if (*eval_cmd) return cmd_eval(eval_args, out, err);
        if (*grad_cmd) return cmd_gradcheck(grad_args, out, err);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const ArgumentError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeFailure;
    }
    return kUsageError;
}

} // namespace nfrl::cli
