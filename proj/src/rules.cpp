#include "nfrl/rules.h"

#include "nfrl/error.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <tuple>

namespace nfrl {

std::size_t Rule::length() const {
    std::size_t n = 0;
    for (const auto& c : clauses) n += c.literals.size();
    return n;
}

bool Rule::well_formed() const {
    if (clauses.empty()) return false;
    const Op inner = form == NormalForm::Cnf ? Op::Or : Op::And;
    return std::all_of(clauses.begin(), clauses.end(),
                       [inner](const Clause& c) { return c.op == inner && !c.literals.empty(); });
}

RuleSet extract_rules(const NfrlModel& model) {
    const auto view = binary_view(model);
    RuleSet rs;
    rs.bias = view.logit_offset;
    rs.binarizer = model.binarizer;
    for (std::size_t i = 0; i < view.k2; ++i) {
        if (!view.live2[i]) continue;
        Rule rule;
        rule.id = i;
        rule.form = view.layer2_op(i) == Op::And ? NormalForm::Cnf : NormalForm::Dnf;
        for (auto j : view.active_inputs2(i)) {
            Clause clause;
            clause.op = view.layer1_op(j);
            for (auto d : view.active_inputs1(j)) {
                clause.literals.push_back({d, view.neg[j * view.inputs + d] < 0});
            }
            rule.clauses.push_back(std::move(clause));
        }
        const auto row = model.head.scores.row(i);
        rule.scores.assign(row.begin(), row.end());
        rs.rules.push_back(std::move(rule));
    }
    return rs;
}

namespace {

Bit evaluate_clause(const Clause& clause, std::span<const Bit> bits) {
    Bit out = identity_of(clause.op);
    for (const auto& lit : clause.literals) {
        const Bit v = lit.negated ? static_cast<Bit>(-bits[lit.bit]) : bits[lit.bit];
        out = clause.op == Op::And ? std::min(out, v) : std::max(out, v);
    }
    return out;
}

} // namespace

Bit evaluate_rule(const Rule& rule, std::span<const Bit> bits) {
    const Op outer = rule.outer_op();
    Bit out = identity_of(outer);
    for (const auto& clause : rule.clauses) {
        const Bit v = evaluate_clause(clause, bits);
        out = outer == Op::And ? std::min(out, v) : std::max(out, v);
    }
    return out;
}

std::vector<double> predict_with_rules(const RuleSet& rs, std::span<const Bit> bits) {
    std::vector<double> logits = rs.bias;
    for (const auto& rule : rs.rules) {
        const double z = evaluate_rule(rule, bits);
        for (std::size_t k = 0; k < logits.size(); ++k) logits[k] += z * rule.scores[k];
    }
    return logits;
}

RuleSet simplify(const RuleSet& input) {
    RuleSet out;
    out.bias = input.bias;
    out.binarizer = input.binarizer;

    auto subset_of = [](const Clause& a, const Clause& b) {
        return std::includes(b.literals.begin(), b.literals.end(), a.literals.begin(), a.literals.end());
    };

    for (const auto& original : input.rules) {
        Rule rule = original;
        for (auto& clause : rule.clauses) {
            std::sort(clause.literals.begin(), clause.literals.end());
            clause.literals.erase(std::unique(clause.literals.begin(), clause.literals.end()),
                                  clause.literals.end());
        }
        // Absorption: a clause containing a sibling clause is redundant under
        // the outer operator. Of two equal clauses the first is kept.
        std::vector<Clause> kept;
        for (std::size_t c = 0; c < rule.clauses.size(); ++c) {
            bool absorbed = false;
            for (std::size_t o = 0; o < rule.clauses.size() && !absorbed; ++o) {
                if (o == c || !subset_of(rule.clauses[o], rule.clauses[c])) continue;
                const bool equal = rule.clauses[o].literals.size() == rule.clauses[c].literals.size();
                absorbed = !equal || o < c;
            }
            if (!absorbed) kept.push_back(rule.clauses[c]);
        }
        rule.clauses = std::move(kept);

        auto canonical = [](const Rule& r) {
            auto clauses = r.clauses;
            std::sort(clauses.begin(), clauses.end(), [](const Clause& a, const Clause& b) {
                return std::tie(a.op, a.literals) < std::tie(b.op, b.literals);
            });
            return clauses;
        };
        const auto key = canonical(rule);
        auto same = std::find_if(out.rules.begin(), out.rules.end(), [&](const Rule& r) {
            return r.form == rule.form && canonical(r) == key;
        });
        if (same != out.rules.end()) {
            for (std::size_t k = 0; k < same->scores.size(); ++k) same->scores[k] += rule.scores[k];
        } else {
            out.rules.push_back(std::move(rule));
        }
    }
    return out;
}

bool truth_table_equivalent(const RuleSet& rs, const GroundTruthRule& truth, int var_count) {
    if (var_count < 1 || var_count > 20) {
        throw ArgumentError("truth_table_equivalent: var_count must lie in [1, 20]");
    }
    if (rs.binarizer.width() != static_cast<std::size_t>(var_count)) {
        throw ArgumentError("truth_table_equivalent: rule set input width " +
                            std::to_string(rs.binarizer.width()) + " differs from var_count " +
                            std::to_string(var_count));
    }
    truth.validate(var_count);
    BitVector bits(static_cast<std::size_t>(var_count));
    for (std::uint32_t assignment = 0; assignment < (1u << var_count); ++assignment) {
        for (int v = 0; v < var_count; ++v) bits[v] = (assignment >> v) & 1u ? 1 : -1;
        const int expected = truth.evaluate(bits) ? 1 : 0;
        if (argmax(predict_with_rules(rs, bits)) != expected) return false;
    }
    return true;
}

std::string rule_expression(const Rule& rule, const BinarizerModel& binarizer) {
    auto symbol = [](Op op) { return op == Op::And ? " ∧ " : " ∨ "; };
    std::string out;
    for (std::size_t c = 0; c < rule.clauses.size(); ++c) {
        const auto& clause = rule.clauses[c];
        if (c) out += symbol(rule.outer_op());
        const bool paren = rule.clauses.size() > 1 && clause.literals.size() > 1;
        if (paren) out += '(';
        for (std::size_t l = 0; l < clause.literals.size(); ++l) {
            if (l) out += symbol(clause.op);
            out += binarizer.literal_description(clause.literals[l].bit, clause.literals[l].negated);
        }
        if (paren) out += ')';
    }
    return out;
}

std::string render(const RuleSet& rs, const BinarizerModel& binarizer, const RenderOptions& options) {
    auto strength = [](const Rule& r) {
        double m = 0.0;
        for (double s : r.scores) m = std::max(m, std::abs(s));
        return m;
    };
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < rs.rules.size(); ++i) {
        if (strength(rs.rules[i]) >= options.prune_tau) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return strength(rs.rules[a]) > strength(rs.rules[b]); });

    auto num = [](double x) {
        char buffer[32];
        std::snprintf(buffer, sizeof buffer, "%.4f", x);
        return std::string(buffer);
    };

    std::ostringstream out;
    out << "Rule";
    for (std::size_t k = 0; k < rs.bias.size(); ++k) {
        out << "\tSupport_" << (k < options.class_names.size() ? options.class_names[k] : std::to_string(k));
    }
    out << "\tCoverage\n";
    for (auto i : order) {
        const auto& rule = rs.rules[i];
        out << rule_expression(rule, binarizer);
        for (double s : rule.scores) out << '\t' << num(s);
        if (options.coverage_rows && options.coverage_rows->rows > 0) {
            std::size_t hits = 0;
            for (std::size_t r = 0; r < options.coverage_rows->rows; ++r) {
                if (evaluate_rule(rule, options.coverage_rows->row(r)) > 0) ++hits;
            }
            out << '\t' << num(static_cast<double>(hits) / static_cast<double>(options.coverage_rows->rows));
        } else {
            out << "\tn/a";
        }
        out << '\n';
    }
    out << "# " << order.size() << " of " << rs.rules.size() << " rules shown (max |support| >= "
        << options.prune_tau << ")\n";
    out << "# bias";
    for (double b : rs.bias) out << ' ' << num(b);
    out << '\n';
    return out.str();
}

} // namespace nfrl
