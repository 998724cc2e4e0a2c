#pragma once

#include "nfrl/binarize.h"
#include "nfrl/data.h"
#include "nfrl/network.h"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nfrl {

struct Literal {
    std::uint32_t bit = 0;  // index into the binarizer's specs
    bool negated = false;

    auto operator<=>(const Literal&) const = default;
};

struct Clause {
    Op op = Op::And;
    std::vector<Literal> literals;

    bool operator==(const Clause&) const = default;
};

/// CNF: AND of OR-clauses. DNF: OR of AND-clauses.
enum class NormalForm { Cnf, Dnf };

struct Rule {
    NormalForm form = NormalForm::Cnf;
    std::vector<Clause> clauses;
    std::vector<double> scores;  // contribution to each class logit
    std::size_t id = 0;          // second-NFL neuron index

    Op outer_op() const { return form == NormalForm::Cnf ? Op::And : Op::Or; }
    /// Total literal count across clauses.
    std::size_t length() const;
    /// Clauses non-empty and all of the op the form requires.
    bool well_formed() const;
};

struct RuleSet {
    std::vector<Rule> rules;
    /// Head bias plus the constant output of dead rule neurons.
    std::vector<double> bias;
    BinarizerModel binarizer;
};

/// One rule per live second-NFL neuron, in neuron order.
RuleSet extract_rules(const NfrlModel& model);

Bit evaluate_rule(const Rule& rule, std::span<const Bit> bits);

/// bias[k] + sum_i rule_i(bits) * scores_i[k], accumulated in rule order.
std::vector<double> predict_with_rules(const RuleSet& rules, std::span<const Bit> bits);

/// Dedupes literals, drops absorbed clauses (supersets of a sibling) and
/// merges identical rules by summing their scores. Order is preserved.
RuleSet simplify(const RuleSet& rules);

/// True iff the argmax class matches the ground-truth label (1 = rule
/// holds) on all 2^var_count assignments. var_count must be <= 20 and
/// equal to the rule set's input width.
bool truth_table_equivalent(const RuleSet& rules, const GroundTruthRule& truth, int var_count);

/// Human-readable expression, e.g. `(x_1 ∨ x_2) ∧ ¬x_3`.
std::string rule_expression(const Rule& rule, const BinarizerModel& binarizer);

struct RenderOptions {
    /// Rules with max |score| below this are omitted from the report.
    double prune_tau = 1e-3;
    std::vector<std::string> class_names;
    /// Coverage is computed on these rows; empty = "n/a".
    const BitMatrix* coverage_rows = nullptr;
};

/// Table report: rule, one Support_<class> column per class, Coverage;
/// rules sorted by max |score| descending.
std::string render(const RuleSet& rules, const BinarizerModel& binarizer, const RenderOptions& options = {});

} // namespace nfrl
