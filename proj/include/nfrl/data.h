#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace nfrl {

enum class ColumnKind { Categorical, Continuous, Label };

struct Column {
    std::string name;
    ColumnKind kind;
};

/// Ordered column declarations. Exactly one label column, at least one
/// feature column, unique names.
class Schema {
public:
    explicit Schema(std::vector<Column> columns);

    /// Sidecar format: one `<name> <categorical|continuous|label>` per line.
    static Schema parse(const std::string& text);
    static Schema load(const std::filesystem::path& path);

    const std::vector<Column>& columns() const { return columns_; }
    /// Feature columns in declaration order (label excluded).
    std::vector<Column> features() const;
    const std::string& label_name() const { return columns_[label_index_].name; }

private:
    std::vector<Column> columns_;
    std::size_t label_index_ = 0;
};

struct Feature {
    std::string name;
    bool categorical = false;
    /// Interned category strings in first-seen order (categorical only).
    std::vector<std::string> vocabulary;
};

/// Typed tabular data. Categorical cells hold the vocabulary index of
/// their category, continuous cells hold the parsed value.
struct Dataset {
    std::vector<Feature> features;
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::vector<std::string> class_names;

    std::size_t size() const { return rows.size(); }
    int class_count() const { return static_cast<int>(class_names.size()); }

    /// Rows at `indices`, in that order. Features and classes are shared.
    Dataset subset(std::span<const std::size_t> indices) const;
};

struct LoadOptions {
    char delimiter = ',';
};

Dataset load_dataset(const std::filesystem::path& path, const Schema& schema,
                     const LoadOptions& options = {});
Dataset parse_dataset(const std::string& text, const Schema& schema,
                      const LoadOptions& options = {});

struct Fold {
    Dataset train;
    Dataset test;
    std::vector<std::size_t> test_indices;
};

/// k disjoint test folds covering every row once; shuffling is seeded.
std::vector<Fold> kfold_split(const Dataset& dataset, int k, std::uint64_t seed);

/// Unstratified seeded split; the first `train_fraction` of a shuffled
/// index order goes to training.
Fold train_test_split(const Dataset& dataset, double train_fraction, std::uint64_t seed);

// --- synthetic Bernoulli data -------------------------------------------------

struct VarLiteral {
    int var = 0;
    bool negated = false;

    bool operator==(const VarLiteral&) const = default;
};

enum class RuleForm { Cnf, Dnf, SingleClause };

/// Labeling rule for synthetic data. CNF is an AND of OR-clauses, DNF an OR
/// of AND-clauses; a single-clause rule holds one literal.
struct GroundTruthRule {
    RuleForm form = RuleForm::SingleClause;
    std::vector<std::vector<VarLiteral>> clauses;

    /// Throws ArgumentError on empty clauses or variables >= var_count.
    void validate(int var_count) const;
    /// `bits[v]` is +1 for true, -1 for false.
    bool evaluate(std::span<const std::int8_t> bits) const;
    int max_var() const;
    /// Rendered with 1-based names, e.g. `(x_1 ∨ x_2) ∧ ¬x_3`.
    std::string to_string() const;
};

struct SyntheticData {
    /// Bernoulli parameter of each variable.
    std::vector<double> probabilities;
    /// One dataset per rule, all sharing the same feature rows.
    std::vector<Dataset> datasets;
};

/// Draws p_i ~ U(0,1), samples n vectors with x_i ~ Bernoulli(p_i) emitted
/// as +1/-1, and labels each row 1 iff the rule holds.
SyntheticData generate_synthetic(std::span<const GroundTruthRule> rules, std::size_t n,
                                 int var_count, std::uint64_t seed);

} // namespace nfrl
