#include "nfrl/data.h"

#include "nfrl/error.h"
#include "nfrl/random.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace nfrl {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(std::string_view line, char delimiter) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto end = line.find(delimiter, start);
        auto field = trim(line.substr(start, end == std::string_view::npos ? end : end - start));
        if (field.size() >= 2 && field.front() == '"' && field.back() == '"') {
            field = field.substr(1, field.size() - 2);
        }
        fields.emplace_back(field);
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return fields;
}

ColumnKind parse_kind(std::string_view word, std::size_t line_no) {
    if (word == "categorical") return ColumnKind::Categorical;
    if (word == "continuous") return ColumnKind::Continuous;
    if (word == "label") return ColumnKind::Label;
    throw LoadError("schema line " + std::to_string(line_no) + ": unknown column kind '" +
                    std::string(word) + "'");
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

} // namespace

Schema::Schema(std::vector<Column> columns) : columns_(std::move(columns)) {
    std::unordered_set<std::string> seen;
    std::size_t labels = 0;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (columns_[i].name.empty()) throw LoadError("schema: empty column name");
        if (!seen.insert(columns_[i].name).second) {
            throw LoadError("schema: duplicate column '" + columns_[i].name + "'");
        }
        if (columns_[i].kind == ColumnKind::Label) {
            ++labels;
            label_index_ = i;
        }
    }
    if (labels != 1) throw LoadError("schema: expected exactly one label column");
    if (columns_.size() < 2) throw LoadError("schema: no feature columns");
}

Schema Schema::parse(const std::string& text) {
    std::vector<Column> columns;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        std::istringstream words{std::string(body)};
        std::string name, kind, extra;
        if (!(words >> name >> kind) || (words >> extra)) {
            throw LoadError("schema line " + std::to_string(line_no) +
                            ": expected '<name> <categorical|continuous|label>'");
        }
        columns.push_back({name, parse_kind(kind, line_no)});
    }
    return Schema(std::move(columns));
}

Schema Schema::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::vector<Column> Schema::features() const {
    std::vector<Column> out;
    for (const auto& c : columns_) {
        if (c.kind != ColumnKind::Label) out.push_back(c);
    }
    return out;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.features = features;
    out.class_names = class_names;
    out.rows.reserve(indices.size());
    out.labels.reserve(indices.size());
    for (auto i : indices) {
        out.rows.push_back(rows.at(i));
        out.labels.push_back(labels.at(i));
    }
    return out;
}

Dataset load_dataset(const std::filesystem::path& path, const Schema& schema,
                     const LoadOptions& options) {
    return parse_dataset(read_file(path), schema, options);
}

Dataset parse_dataset(const std::string& text, const Schema& schema, const LoadOptions& options) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;

    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header = split_fields(line, options.delimiter);
            break;
        }
    }
    if (header.empty()) throw LoadError("empty dataset: missing header row");

    // Schema column -> position in the file.
    std::vector<std::size_t> position(schema.columns().size());
    for (std::size_t c = 0; c < schema.columns().size(); ++c) {
        const auto& name = schema.columns()[c].name;
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw LoadError("missing column '" + name + "' in header");
        position[c] = static_cast<std::size_t>(it - header.begin());
    }

    Dataset ds;
    std::vector<std::unordered_map<std::string, int>> interned;
    std::vector<std::size_t> feature_columns;
    std::size_t label_column = 0;
    for (std::size_t c = 0; c < schema.columns().size(); ++c) {
        const auto& col = schema.columns()[c];
        if (col.kind == ColumnKind::Label) {
            label_column = c;
            continue;
        }
        ds.features.push_back({col.name, col.kind == ColumnKind::Categorical, {}});
        feature_columns.push_back(c);
    }
    interned.resize(ds.features.size());
    std::unordered_map<std::string, int> label_ids;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line, options.delimiter);
        if (fields.size() != header.size()) {
            throw LoadError("row " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        }
        auto cell = [&](std::size_t c) -> const std::string& {
            const auto& value = fields[position[c]];
            if (value.empty() || value == "?" || value == "NA") {
                throw LoadError("row " + std::to_string(line_no) + ", column '" +
                                schema.columns()[c].name + "': missing value");
            }
            return value;
        };

        std::vector<double> row(ds.features.size());
        for (std::size_t f = 0; f < ds.features.size(); ++f) {
            const auto& value = cell(feature_columns[f]);
            if (ds.features[f].categorical) {
                auto [it, fresh] = interned[f].try_emplace(value, static_cast<int>(interned[f].size()));
                if (fresh) ds.features[f].vocabulary.push_back(value);
                row[f] = it->second;
            } else {
                double parsed = 0.0;
                const auto* end = value.data() + value.size();
                const auto [ptr, ec] = std::from_chars(value.data(), end, parsed);
                if (ec != std::errc{} || ptr != end || !std::isfinite(parsed)) {
                    throw LoadError("row " + std::to_string(line_no) + ", column '" +
                                    ds.features[f].name + "': unparsable value '" + value + "'");
                }
                row[f] = parsed;
            }
        }
        const auto& label = cell(label_column);
        auto [it, fresh] = label_ids.try_emplace(label, static_cast<int>(label_ids.size()));
        if (fresh) ds.class_names.push_back(label);
        ds.labels.push_back(it->second);
        ds.rows.push_back(std::move(row));
    }
    if (ds.rows.empty()) throw LoadError("empty dataset");
    return ds;
}

std::vector<Fold> kfold_split(const Dataset& dataset, int k, std::uint64_t seed) {
    const std::size_t n = dataset.size();
    if (k < 2) throw ArgumentError("kfold_split: k must be >= 2");
    if (static_cast<std::size_t>(k) > n) {
        throw ArgumentError("kfold_split: k=" + std::to_string(k) + " exceeds row count " +
                            std::to_string(n));
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);

    const std::size_t base = n / static_cast<std::size_t>(k);
    const std::size_t extra = n % static_cast<std::size_t>(k);
    std::vector<Fold> folds;
    std::size_t start = 0;
    for (int f = 0; f < k; ++f) {
        const std::size_t len = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
        std::vector<std::size_t> test(order.begin() + start, order.begin() + start + len);
        std::vector<std::size_t> train(order.begin(), order.begin() + start);
        train.insert(train.end(), order.begin() + start + len, order.end());
        folds.push_back({dataset.subset(train), dataset.subset(test), std::move(test)});
        start += len;
    }
    return folds;
}

Fold train_test_split(const Dataset& dataset, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ArgumentError("train_test_split: fraction must lie in (0, 1)");
    }
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);
    const auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(order.size())));
    std::vector<std::size_t> train(order.begin(), order.begin() + cut);
    std::vector<std::size_t> test(order.begin() + cut, order.end());
    return {dataset.subset(train), dataset.subset(test), std::move(test)};
}

// --- synthetic ----------------------------------------------------------------

void GroundTruthRule::validate(int var_count) const {
    if (clauses.empty()) throw ArgumentError("ground-truth rule has no clauses");
    for (const auto& clause : clauses) {
        if (clause.empty()) throw ArgumentError("ground-truth rule has an empty clause");
        for (const auto& lit : clause) {
            if (lit.var < 0 || lit.var >= var_count) {
                throw ArgumentError("ground-truth rule references x_" + std::to_string(lit.var + 1) +
                                    " but only " + std::to_string(var_count) + " variables exist");
            }
        }
    }
    if (form == RuleForm::SingleClause && (clauses.size() != 1 || clauses[0].size() != 1)) {
        throw ArgumentError("single-clause rule must hold exactly one literal");
    }
}

bool GroundTruthRule::evaluate(std::span<const std::int8_t> bits) const {
    auto lit_value = [&](const VarLiteral& l) { return (bits[l.var] > 0) != l.negated; };
    switch (form) {
    case RuleForm::SingleClause:
        return lit_value(clauses[0][0]);
    case RuleForm::Cnf:
        return std::all_of(clauses.begin(), clauses.end(), [&](const auto& c) {
            return std::any_of(c.begin(), c.end(), lit_value);
        });
    case RuleForm::Dnf:
        return std::any_of(clauses.begin(), clauses.end(), [&](const auto& c) {
            return std::all_of(c.begin(), c.end(), lit_value);
        });
    }
    return false;
}

int GroundTruthRule::max_var() const {
    int m = -1;
    for (const auto& c : clauses)
        for (const auto& l : c) m = std::max(m, l.var);
    return m;
}

std::string GroundTruthRule::to_string() const {
    auto lit = [](const VarLiteral& l) {
        return std::string(l.negated ? "¬" : "") + "x_" + std::to_string(l.var + 1);
    };
    const char* inner = form == RuleForm::Cnf ? " ∨ " : " ∧ ";
    const char* outer = form == RuleForm::Cnf ? " ∧ " : " ∨ ";
    std::string out;
    for (std::size_t c = 0; c < clauses.size(); ++c) {
        if (c) out += outer;
        const bool paren = clauses.size() > 1 && clauses[c].size() > 1;
        if (paren) out += '(';
        for (std::size_t i = 0; i < clauses[c].size(); ++i) {
            if (i) out += inner;
            out += lit(clauses[c][i]);
        }
        if (paren) out += ')';
    }
    return out;
}

SyntheticData generate_synthetic(std::span<const GroundTruthRule> rules, std::size_t n,
                                 int var_count, std::uint64_t seed) {
    if (n == 0) throw ArgumentError("generate_synthetic: n must be positive");
    if (var_count <= 0) throw ArgumentError("generate_synthetic: var_count must be positive");
    for (const auto& r : rules) r.validate(var_count);

    Rng rng(seed);
    SyntheticData out;
    out.probabilities.resize(static_cast<std::size_t>(var_count));
    for (auto& p : out.probabilities) p = rng.uniform();

    Dataset base;
    for (int v = 0; v < var_count; ++v) base.features.push_back({"x_" + std::to_string(v + 1), false, {}});
    base.class_names = {"0", "1"};
    base.rows.resize(n);
    for (auto& row : base.rows) {
        row.resize(static_cast<std::size_t>(var_count));
        for (int v = 0; v < var_count; ++v) row[v] = rng.bernoulli(out.probabilities[v]) ? 1.0 : -1.0;
    }

    std::vector<std::int8_t> bits(static_cast<std::size_t>(var_count));
    for (const auto& rule : rules) {
        Dataset ds = base;
        ds.labels.resize(n);
        for (std::size_t r = 0; r < n; ++r) {
            for (int v = 0; v < var_count; ++v) bits[v] = ds.rows[r][v] > 0 ? 1 : -1;
            ds.labels[r] = rule.evaluate(bits) ? 1 : 0;
        }
        out.datasets.push_back(std::move(ds));
    }
    return out;
}

} // namespace nfrl
